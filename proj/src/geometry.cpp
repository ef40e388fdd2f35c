#include "rda/geometry.hpp"

#include <algorithm>
#include <cstdint>
#include <numbers>

#include <boost/math/tools/toms748_solve.hpp>

namespace rda {

LevelSet::LevelSet(Kind kind, std::array<double, 3> params, Scalar phi, Gradient grad)
    : kind_(kind), params_(params), phi_(std::move(phi)), grad_(std::move(grad))
{
}

LevelSet LevelSet::circle(Point2 center, double radius)
{
    if (!(radius > 0.0))
        fail(ErrorKind::InvalidArgument, "circle radius must be positive");
    auto phi = [center, radius](const Point2 &x) { return distance(x, center) - radius; };
    auto grad = [center](const Point2 &x) {
        const Point2 d = x - center;
        const double r = norm(d);
        if (r == 0.0)
            return Point2{1.0, 0.0};
        return (1.0 / r) * d;
    };
    return LevelSet(Kind::Circle, {center.x, center.y, radius}, phi, grad);
}

LevelSet LevelSet::flower(double base, double amplitude, int lobes)
{
    if (!(base > std::abs(amplitude)) || lobes < 1)
        fail(ErrorKind::InvalidArgument, "flower needs base > |amplitude| and lobes >= 1");
    const double k = lobes;
    auto phi = [=](const Point2 &x) {
        const double rho = norm(x);
        const double theta = std::atan2(x.y, x.x);
        return rho - base - amplitude * std::sin(k * theta);
    };
    auto grad = [=](const Point2 &x) {
        const double rho2 = x.x * x.x + x.y * x.y;
        if (rho2 < 1e-28)
            return Point2{1.0, 0.0};
        const double rho = std::sqrt(rho2);
        const double theta = std::atan2(x.y, x.x);
        const double c = amplitude * k * std::cos(k * theta);
        return Point2{x.x / rho + c * x.y / rho2, x.y / rho - c * x.x / rho2};
    };
    return LevelSet(Kind::Flower, {base, amplitude, k}, phi, grad);
}

LevelSet LevelSet::affine(Point2 normal, double offset)
{
    const double len = norm(normal);
    if (!(len > 0.0))
        fail(ErrorKind::InvalidArgument, "affine level set needs a nonzero normal");
    auto phi = [normal, offset](const Point2 &x) { return dot(normal, x) - offset; };
    auto grad = [normal](const Point2 &) { return normal; };
    return LevelSet(Kind::Affine, {normal.x, normal.y, offset}, phi, grad);
}

LevelSet LevelSet::custom(Scalar phi, Gradient grad)
{
    if (!phi || !grad)
        fail(ErrorKind::InvalidArgument, "custom level set needs phi and its gradient");
    return LevelSet(Kind::Custom, {0.0, 0.0, 0.0}, std::move(phi), std::move(grad));
}

GeometryOptions GeometryOptions::for_degree(int m)
{
    GeometryOptions opts;
    opts.volume_order = 2 * m + 2;
    opts.line_points = m + 2;
    opts.depth = m <= 2 ? 3 : 4;
    return opts;
}

namespace {

constexpr double kSignTol = 1e-12;

struct Tri {
    std::array<Point2, 3> p;
    std::array<double, 3> f;
};

int side_of(double f, double tol) { return f < -tol ? 0 : 1; }

double circumradius_bound(const Tri &t, const Point2 &c)
{
    return std::max({distance(c, t.p[0]), distance(c, t.p[1]), distance(c, t.p[2])});
}

double diameter_of(const Tri &t)
{
    return std::max({distance(t.p[0], t.p[1]), distance(t.p[1], t.p[2]), distance(t.p[2], t.p[0])});
}

/// true when phi cannot change sign inside t (Lipschitz-type bound around the centroid)
bool clearly_uniform(const LevelSet &phi, const Tri &t, double tol)
{
    const int s = side_of(t.f[0], tol);
    if (side_of(t.f[1], tol) != s || side_of(t.f[2], tol) != s)
        return false;
    const Point2 c = (1.0 / 3.0) * (t.p[0] + t.p[1] + t.p[2]);
    const double fc = phi(c);
    if (side_of(fc, tol) != s)
        return false;
    return std::abs(fc) >= 2.0 * circumradius_bound(t, c) * norm(phi.gradient(c));
}

template <class OnUniform, class OnCut>
void subdivide(const LevelSet &phi, const Tri &t, int depth_left, double tol, OnUniform &on_uniform, OnCut &on_cut)
{
    const int s0 = side_of(t.f[0], tol);
    const bool mixed = side_of(t.f[1], tol) != s0 || side_of(t.f[2], tol) != s0;
    if (!mixed && clearly_uniform(phi, t, tol)) {
        on_uniform(t, s0);
        return;
    }
    if (std::abs(t.f[0]) <= tol && std::abs(t.f[1]) <= tol && std::abs(t.f[2]) <= tol) {
        const Point2 c = (1.0 / 3.0) * (t.p[0] + t.p[1] + t.p[2]);
        if (std::abs(phi(c)) <= tol)
            fail(ErrorKind::DegenerateInterface, "level set vanishes on a sampled sub-triangle");
    }
    if (depth_left == 0) {
        if (mixed)
            on_cut(t);
        else
            on_uniform(t, s0);
        return;
    }
    const Point2 m01 = 0.5 * (t.p[0] + t.p[1]);
    const Point2 m12 = 0.5 * (t.p[1] + t.p[2]);
    const Point2 m20 = 0.5 * (t.p[2] + t.p[0]);
    const double f01 = phi(m01);
    const double f12 = phi(m12);
    const double f20 = phi(m20);
    const Tri children[4] = {
        {{t.p[0], m01, m20}, {t.f[0], f01, f20}},
        {{m01, t.p[1], m12}, {f01, t.f[1], f12}},
        {{m20, m12, t.p[2]}, {f20, f12, t.f[2]}},
        {{m01, m12, m20}, {f01, f12, f20}},
    };
    for (const Tri &child : children)
        subdivide(phi, child, depth_left - 1, tol, on_uniform, on_cut);
}

Tri element_tri(const LevelSet &phi, const TriMesh &mesh, Index k)
{
    const auto c = mesh.corners(k);
    return {c, {phi(c[0]), phi(c[1]), phi(c[2])}};
}

/// Root of phi on the segment p -> q, given endpoint values of opposite sides.
Point2 edge_root(const LevelSet &phi, const Point2 &p, const Point2 &q, double fp, double fq, double tol)
{
    if (std::abs(fp) <= tol)
        return p;
    if (std::abs(fq) <= tol)
        return q;
    if (fp * fq > 0.0)
        fail(ErrorKind::RootFindFailure, "no sign change on an edge expected to be cut");
    auto g = [&](double t) { return phi(lerp(p, q, t)); };
    std::uintmax_t max_iter = 200;
    const auto bracket = boost::math::tools::toms748_solve(g, 0.0, 1.0, fp, fq,
                                                           boost::math::tools::eps_tolerance<double>(50), max_iter);
    if (max_iter >= 200)
        fail(ErrorKind::RootFindFailure, "edge root finding did not converge");
    return lerp(p, q, 0.5 * (bracket.first + bracket.second));
}

struct CurveSample {
    Point2 x;
    Point2 dx;
    double weight;
};

/// Interface between the roots r1 and r2, written as a graph over the chord:
/// gamma(s) = r1 + s (r2 - r1) + tau(s) d with phi(gamma(s)) = 0.
class ChordGraph {
public:
    ChordGraph(const LevelSet &phi, const Point2 &r1, const Point2 &r2) : phi_(phi), r1_(r1), chord_(r2 - r1)
    {
        length_ = norm(chord_);
        d_ = (1.0 / length_) * Point2{-chord_.y, chord_.x};
    }

    double length() const { return length_; }

    CurveSample sample(double s, double weight) const
    {
        const Point2 c = r1_ + s * chord_;
        double tau = 0.0;
        Point2 x = c;
        bool converged = false;
        for (int it = 0; it < 10; ++it) {
            const double f = phi_(x);
            const Point2 g = phi_.gradient(x);
            const double denom = dot(g, d_);
            if (std::abs(denom) <= 1e-8 * norm(g))
                fail(ErrorKind::ProjectionDivergence, "interface is tangent to the projection direction");
            const double step = f / denom;
            tau -= step;
            x = c + tau * d_;
            if (std::abs(tau) > 2.0 * length_)
                fail(ErrorKind::ProjectionDivergence, "interface projection left the cut cell");
            if (std::abs(step) <= 1e-12 * length_ + 1e-15 || f == 0.0) {
                converged = true;
                break;
            }
        }
        if (!converged)
            fail(ErrorKind::ProjectionDivergence, "Newton projection onto the interface did not converge");
        const Point2 g = phi_.gradient(x);
        const double dtau = -dot(g, chord_) / dot(g, d_);
        return {x, chord_ + dtau * d_, weight};
    }

    std::vector<CurveSample> samples(int n) const
    {
        const auto &gl = gauss_legendre(n);
        std::vector<CurveSample> out;
        out.reserve(n);
        for (int q = 0; q < n; ++q)
            out.push_back(sample(0.5 * (gl.nodes[q] + 1.0), 0.5 * gl.weights[q]));
        return out;
    }

private:
    const LevelSet &phi_;
    Point2 r1_;
    Point2 chord_;
    Point2 d_;
    double length_ = 0.0;
};

/// Region swept by segments from `apex` to the curve; x = apex + t (gamma(s) - apex).
void append_curved_triangle(QuadRule &out, const Point2 &apex, const std::vector<CurveSample> &curve, int nt)
{
    const auto &gl = gauss_legendre(nt);
    for (const auto &cs : curve) {
        const Point2 radial = cs.x - apex;
        const double jac_s = std::abs(cross(cs.dx, radial));
        for (int q = 0; q < nt; ++q) {
            const double t = 0.5 * (gl.nodes[q] + 1.0);
            out.points.push_back(apex + t * radial);
            out.weights.push_back(cs.weight * 0.5 * gl.weights[q] * t * jac_s);
        }
    }
}

/// Degenerate sub-regions (a root on a vertex) produce zero weights.
void drop_null_weights(QuadRule &rule, std::size_t begin)
{
    std::size_t out = begin;
    for (std::size_t q = begin; q < rule.size(); ++q) {
        if (rule.weights[q] > 0.0) {
            rule.points[out] = rule.points[q];
            rule.weights[out] = rule.weights[q];
            ++out;
        }
    }
    rule.points.resize(out);
    rule.weights.resize(out);
}

/// Region between the segment a -> b and the curve (gamma(0) next to a):
/// x = (1 - t) (a + s (b - a)) + t gamma(s).
void append_ruled_region(QuadRule &out, const Point2 &a, const Point2 &b, const std::vector<CurveSample> &curve,
                         int nt)
{
    const auto &gls = gauss_legendre(static_cast<int>(curve.size()));
    const auto &gl = gauss_legendre(nt);
    for (std::size_t i = 0; i < curve.size(); ++i) {
        const CurveSample &cs = curve[i];
        const double s = 0.5 * (gls.nodes[i] + 1.0);
        const Point2 base = lerp(a, b, s);
        const Point2 rung = cs.x - base;
        for (int q = 0; q < nt; ++q) {
            const double t = 0.5 * (gl.nodes[q] + 1.0);
            const Point2 xs = (1.0 - t) * (b - a) + t * cs.dx;
            out.points.push_back(base + t * rung);
            out.weights.push_back(cs.weight * 0.5 * gl.weights[q] * std::abs(cross(xs, rung)));
        }
    }
}

void add_uniform_leaf(CutQuadrature &cq, const Tri &t, int side, int order)
{
    append_triangle_rule(cq.volume[side], t.p[0], t.p[1], t.p[2], order);
    cq.measure[side] += 0.5 * std::abs(cross(t.p[1] - t.p[0], t.p[2] - t.p[0]));
}

void add_cut_leaf(const LevelSet &phi, CutQuadrature &cq, const Tri &t, double tol, const GeometryOptions &opts)
{
    std::array<int, 3> s{side_of(t.f[0], tol), side_of(t.f[1], tol), side_of(t.f[2], tol)};
    int lone = 0;
    if (s[1] != s[0] && s[1] != s[2])
        lone = 1;
    else if (s[2] != s[0] && s[2] != s[1])
        lone = 2;
    const int o1 = (lone + 1) % 3;
    const int o2 = (lone + 2) % 3;
    const int lone_side = s[lone];
    const int other_side = 1 - lone_side;

    const Point2 r1 = edge_root(phi, t.p[lone], t.p[o1], t.f[lone], t.f[o1], tol);
    const Point2 r2 = edge_root(phi, t.p[lone], t.p[o2], t.f[lone], t.f[o2], tol);
    const double diam = diameter_of(t);
    if (distance(r1, r2) <= 1e-14 * diam) {
        add_uniform_leaf(cq, t, other_side, opts.volume_order);
        return;
    }

    const ChordGraph curve(phi, r1, r2);
    const std::size_t lone_begin = cq.volume[lone_side].size();
    const std::size_t other_begin = cq.volume[other_side].size();
    if (opts.curved) {
        const int nt = (opts.volume_order + 3) / 2;
        const auto vol_samples = curve.samples(nt + 1);
        append_curved_triangle(cq.volume[lone_side], t.p[lone], vol_samples, nt);
        append_ruled_region(cq.volume[other_side], t.p[o1], t.p[o2], vol_samples, nt);
    } else {
        append_triangle_rule(cq.volume[lone_side], t.p[lone], r1, r2, opts.volume_order);
        append_triangle_rule(cq.volume[other_side], t.p[o1], t.p[o2], r2, opts.volume_order);
        append_triangle_rule(cq.volume[other_side], t.p[o1], r2, r1, opts.volume_order);
    }

    drop_null_weights(cq.volume[lone_side], lone_begin);
    drop_null_weights(cq.volume[other_side], other_begin);
    double lone_area = 0.0;
    for (std::size_t q = lone_begin; q < cq.volume[lone_side].size(); ++q)
        lone_area += cq.volume[lone_side].weights[q];
    double other_area = 0.0;
    for (std::size_t q = other_begin; q < cq.volume[other_side].size(); ++q)
        other_area += cq.volume[other_side].weights[q];
    cq.measure[lone_side] += lone_area;
    cq.measure[other_side] += other_area;

    const auto &gl = gauss_legendre(opts.line_points);
    for (int q = 0; q < opts.line_points; ++q) {
        const CurveSample cs = curve.sample(0.5 * (gl.nodes[q] + 1.0), 0.5 * gl.weights[q]);
        const Point2 g = phi.gradient(cs.x);
        cq.interface.points.push_back(cs.x);
        cq.interface.weights.push_back(cs.weight * (opts.curved ? norm(cs.dx) : curve.length()));
        cq.normals.push_back((1.0 / norm(g)) * g);
        cq.interface_length += cq.interface.weights.back();
    }
}

} // namespace

ElementClass classify_element(const LevelSet &phi, const TriMesh &mesh, Index element, int depth)
{
    if (depth < 0)
        fail(ErrorKind::InvalidArgument, "negative subdivision depth");
    const double tol = kSignTol * mesh.diameter(element);
    bool seen[2] = {false, false};
    bool cut = false;
    auto on_uniform = [&](const Tri &, int side) { seen[side] = true; };
    auto on_cut = [&](const Tri &) { cut = true; };
    subdivide(phi, element_tri(phi, mesh, element), depth, tol, on_uniform, on_cut);
    if (cut || (seen[0] && seen[1]))
        return ElementClass::Cut;
    return seen[0] ? ElementClass::Interior0 : ElementClass::Interior1;
}

CutQuadrature cut_volume_quadrature(const LevelSet &phi, const TriMesh &mesh, Index element,
                                    const GeometryOptions &options)
{
    if (options.volume_order < 1 || options.depth < 0 || options.line_points < 1)
        fail(ErrorKind::InvalidArgument, "invalid geometry options");
    const double tol = kSignTol * mesh.diameter(element);
    CutQuadrature cq;
    auto on_uniform = [&](const Tri &t, int side) { add_uniform_leaf(cq, t, side, options.volume_order); };
    auto on_cut = [&](const Tri &t) { add_cut_leaf(phi, cq, t, tol, options); };
    subdivide(phi, element_tri(phi, mesh, element), options.depth, tol, on_uniform, on_cut);
    return cq;
}

FaceQuadrature face_cut_quadrature(const LevelSet &phi, const TriMesh &mesh, Index face,
                                   const GeometryOptions &options)
{
    const Face &e = mesh.face(face);
    const Point2 a = mesh.vertex(e.vertices[0]);
    const Point2 b = mesh.vertex(e.vertices[1]);
    const double tol = kSignTol * mesh.face_length(face);
    FaceQuadrature fq;
    append_segment_rule(fq.full, a, b, options.line_points);

    const int samples = (1 << options.depth) + 1;
    std::vector<double> t(samples);
    std::vector<double> f(samples);
    for (int q = 0; q < samples; ++q) {
        t[q] = static_cast<double>(q) / (samples - 1);
        f[q] = phi(lerp(a, b, t[q]));
    }
    std::vector<double> breaks{0.0};
    for (int q = 0; q + 1 < samples; ++q) {
        if (side_of(f[q], tol) == side_of(f[q + 1], tol))
            continue;
        const Point2 p0 = lerp(a, b, t[q]);
        const Point2 p1 = lerp(a, b, t[q + 1]);
        const Point2 r = edge_root(phi, p0, p1, f[q], f[q + 1], tol);
        const double tr = std::clamp(t[q] + (t[q + 1] - t[q]) * distance(p0, r) / distance(p0, p1), 0.0, 1.0);
        if (tr > breaks.back())
            breaks.push_back(tr);
        ++fq.roots;
    }
    if (breaks.back() < 1.0)
        breaks.push_back(1.0);

    const double len = mesh.face_length(face);
    for (std::size_t q = 0; q + 1 < breaks.size(); ++q) {
        const double t0 = breaks[q];
        const double t1 = breaks[q + 1];
        if ((t1 - t0) * len <= 1e-15 * len)
            continue;
        const int side = fq.roots == 0 ? side_of(f[0], tol) : side_of(phi(lerp(a, b, 0.5 * (t0 + t1))), tol);
        append_segment_rule(fq.part[side], lerp(a, b, t0), lerp(a, b, t1), options.line_points);
        fq.length[side] += (t1 - t0) * len;
    }
    return fq;
}

MeshGeometry MeshGeometry::compute(const LevelSet &phi, const TriMesh &mesh, const GeometryOptions &options)
{
    MeshGeometry g;
    g.options_ = options;
    g.has_quadrature_ = true;
    const Index ne = mesh.num_elements();
    g.classes_.resize(ne);
    g.measures_.resize(ne);
    g.interface_length_.assign(ne, 0.0);
    g.cut_slot_.assign(ne, -1);

    for (Index k = 0; k < ne; ++k) {
        const double area = mesh.area(k);
        const double tol = kSignTol * mesh.diameter(k);
        const Tri t = element_tri(phi, mesh, k);
        if (clearly_uniform(phi, t, tol)) {
            const int side = side_of(t.f[0], tol);
            g.classes_[k] = side == 0 ? ElementClass::Interior0 : ElementClass::Interior1;
            g.measures_[k] = side == 0 ? std::array<double, 2>{area, 0.0} : std::array<double, 2>{0.0, area};
            continue;
        }
        CutQuadrature cq = cut_volume_quadrature(phi, mesh, k, options);
        const bool has0 = cq.measure[0] > 1e-12 * area;
        const bool has1 = cq.measure[1] > 1e-12 * area;
        if (has0 && has1) {
            g.classes_[k] = ElementClass::Cut;
            g.measures_[k] = cq.measure;
            g.interface_length_[k] = cq.interface_length;
            g.cut_slot_[k] = static_cast<Index>(g.cuts_.size());
            g.cut_elements_.push_back(k);
            g.cuts_.push_back(std::move(cq));
        } else if (has0) {
            g.classes_[k] = ElementClass::Interior0;
            g.measures_[k] = {area, 0.0};
        } else {
            g.classes_[k] = ElementClass::Interior1;
            g.measures_[k] = {0.0, area};
        }
    }

    const Index nf = mesh.num_faces();
    g.face_side_.assign(nf, 1);
    g.face_slot_.assign(nf, -1);
    for (Index f = 0; f < nf; ++f) {
        FaceQuadrature fq = face_cut_quadrature(phi, mesh, f, options);
        if (fq.length[0] > 0.0 && fq.length[1] > 0.0) {
            g.face_side_[f] = -1;
            g.face_slot_[f] = static_cast<Index>(g.face_cuts_.size());
            g.face_cuts_.push_back(std::move(fq));
        } else {
            g.face_side_[f] = fq.length[0] > 0.0 ? 0 : 1;
        }
    }
    return g;
}

MeshGeometry MeshGeometry::coarsen(const MeshGeometry &fine, const TriMesh &coarse, const std::vector<Index> &parent)
{
    const Index nc = coarse.num_elements();
    if (static_cast<Index>(parent.size()) != fine.num_elements())
        fail(ErrorKind::InvalidArgument, "parent map does not match the fine geometry");
    MeshGeometry g;
    g.options_ = fine.options_;
    g.classes_.resize(nc);
    g.measures_.assign(nc, {0.0, 0.0});
    g.interface_length_.assign(nc, 0.0);
    g.cut_slot_.assign(nc, -1);
    for (Index k = 0; k < fine.num_elements(); ++k) {
        const Index p = parent[k];
        g.measures_[p][0] += fine.measures_[k][0];
        g.measures_[p][1] += fine.measures_[k][1];
        g.interface_length_[p] += fine.interface_length_[k];
    }
    for (Index k = 0; k < nc; ++k) {
        const bool a0 = g.measures_[k][0] > 0.0;
        const bool a1 = g.measures_[k][1] > 0.0;
        if (a0 && a1) {
            g.classes_[k] = ElementClass::Cut;
            g.cut_elements_.push_back(k);
        } else {
            g.classes_[k] = a0 ? ElementClass::Interior0 : ElementClass::Interior1;
        }
    }
    return g;
}

const CutQuadrature &MeshGeometry::cut(Index k) const
{
    if (!has_quadrature_ || cut_slot_[k] < 0)
        fail(ErrorKind::InvalidArgument, "element " + std::to_string(k) + " has no cut quadrature");
    return cuts_[cut_slot_[k]];
}

const FaceQuadrature &MeshGeometry::face_cut(Index f) const
{
    if (!has_quadrature_ || face_slot_[f] < 0)
        fail(ErrorKind::InvalidArgument, "face " + std::to_string(f) + " is not cut");
    return face_cuts_[face_slot_[f]];
}

double MeshGeometry::total_measure(int side) const
{
    double s = 0.0;
    for (const auto &m : measures_)
        s += m[side];
    return s;
}

double MeshGeometry::total_interface_length() const
{
    double s = 0.0;
    for (double l : interface_length_)
        s += l;
    return s;
}

} // namespace rda
