#include "rda/reconstruction.hpp"

#include <algorithm>
#include <limits>
#include <ostream>

#include <Eigen/Eigenvalues>
#include <Eigen/QR>
#include <Eigen/SVD>

#include "rda/quadrature.hpp"

namespace rda {

ActiveMeshes::ActiveMeshes(const TriMesh &mesh, const MeshGeometry &geometry)
{
    const Index ne = mesh.num_elements();
    if (geometry.num_elements() != ne)
        fail(ErrorKind::InvalidArgument, "geometry does not match the mesh");
    for (int i = 0; i < 2; ++i) {
        ActiveMesh &a = sides_[i];
        a.side = i;
        a.slot.assign(ne, -1);
        const ElementClass inside = i == 0 ? ElementClass::Interior0 : ElementClass::Interior1;
        for (Index k = 0; k < ne; ++k) {
            if (!geometry.active(k, i))
                continue;
            a.slot[k] = a.size();
            a.elements.push_back(k);
            a.interior.push_back(geometry.element_class(k) == inside ? 1 : 0);
        }
        if (a.elements.empty())
            fail(ErrorKind::EmptySide, "side " + std::to_string(i) + " has no active elements");
        for (Index f = 0; f < mesh.num_faces(); ++f) {
            const Face &face = mesh.face(f);
            if (face.boundary()) {
                if (a.contains(face.elements[0]))
                    a.boundary_faces.push_back(f);
            } else if (a.contains(face.elements[0]) && a.contains(face.elements[1])) {
                a.interior_faces.push_back(f);
            }
        }
    }
    for (Index k = 0; k < ne; ++k)
        if (sides_[0].contains(k) && sides_[1].contains(k))
            cut_.push_back(k);
}

namespace {

struct SigmaCandidate {
    Index element;
    int layer;
};

bool augment(std::size_t c, const std::vector<std::vector<SigmaCandidate>> &cand, std::vector<Index> &owner,
             std::vector<char> &seen)
{
    for (const auto &q : cand[c]) {
        if (seen[q.element])
            continue;
        seen[q.element] = 1;
        if (owner[q.element] < 0 || augment(static_cast<std::size_t>(owner[q.element]), cand, owner, seen)) {
            owner[q.element] = static_cast<Index>(c);
            return true;
        }
    }
    return false;
}

} // namespace

SigmaMap build_sigma_map(const TriMesh &mesh, const ActiveMeshes &active, int max_layers)
{
    if (max_layers < 1)
        fail(ErrorKind::InvalidArgument, "sigma search needs at least one layer");
    SigmaMap sigma;
    const auto &cut = active.cut_elements();
    for (int i = 0; i < 2; ++i) {
        const ActiveMesh &a = active.side(i);
        // candidates per cut element ordered by layer, then distance
        std::vector<std::vector<SigmaCandidate>> cand(cut.size());
        for (std::size_t c = 0; c < cut.size(); ++c) {
            const Index k = cut[c];
            const Point2 &xk = mesh.barycenter(k);
            std::vector<Index> prev;
            for (int s = 1; s <= max_layers; ++s) {
                const std::vector<Index> next = neighborhood(mesh, k, s);
                std::vector<Index> shell;
                std::set_difference(next.begin(), next.end(), prev.begin(), prev.end(), std::back_inserter(shell));
                std::erase_if(shell, [&](Index q) {
                    const Index sl = a.slot[q];
                    return sl < 0 || !a.interior[sl];
                });
                std::stable_sort(shell.begin(), shell.end(), [&](Index p, Index q) {
                    return distance(xk, mesh.barycenter(p)) < distance(xk, mesh.barycenter(q));
                });
                for (Index q : shell)
                    cand[c].push_back({q, s});
                prev = next;
            }
        }

        sigma.target[i].assign(cut.size(), -1);
        sigma.layer[i].assign(cut.size(), 0);
        sigma.inverse[i].assign(mesh.num_elements(), -1);
        std::vector<char> marked(mesh.num_elements(), 0);
        bool greedy = true;
        for (std::size_t c = 0; c < cut.size() && greedy; ++c) {
            greedy = false;
            for (const auto &q : cand[c])
                if (!marked[q.element]) {
                    marked[q.element] = 1;
                    sigma.target[i][c] = q.element;
                    sigma.layer[i][c] = q.layer;
                    greedy = true;
                    break;
                }
        }
        if (!greedy) {
            // greedy order exhausted a neighbourhood: maximum matching within the same layers
            std::vector<Index> owner(mesh.num_elements(), -1);
            for (std::size_t c = 0; c < cut.size(); ++c) {
                std::vector<char> seen(mesh.num_elements(), 0);
                if (!augment(c, cand, owner, seen))
                    fail(ErrorKind::SigmaExhausted, "no unmarked interior element near cut element " +
                                                        std::to_string(cut[c]) + " on side " + std::to_string(i));
            }
            for (Index q = 0; q < mesh.num_elements(); ++q)
                if (owner[q] >= 0) {
                    const auto c = static_cast<std::size_t>(owner[q]);
                    sigma.target[i][c] = q;
                    for (const auto &e : cand[c])
                        if (e.element == q)
                            sigma.layer[i][c] = e.layer;
                }
        }
        for (std::size_t c = 0; c < cut.size(); ++c) {
            sigma.inverse[i][sigma.target[i][c]] = cut[c];
            sigma.s0 = std::max(sigma.s0, sigma.layer[i][c]);
        }
    }
    return sigma;
}

int default_threshold(int degree)
{
    if (degree <= 0)
        return 1;
    return poly_dim(degree) + 3;
}

Patch build_patch(const TriMesh &mesh, const ActiveMesh &active, const SigmaMap &sigma, Index element, int threshold)
{
    if (!active.contains(element))
        fail(ErrorKind::InvalidArgument, "element is not active on this side");
    if (threshold < 1 || threshold > active.size())
        fail(ErrorKind::PatchInfeasible, "threshold " + std::to_string(threshold) + " exceeds the " +
                                             std::to_string(active.size()) + " active elements");
    Patch p;
    p.owner = element;
    p.side = active.side;
    const Point2 &xk = mesh.barycenter(element);
    auto closer = [&](Index a, Index b) {
        const double da = distance(xk, mesh.barycenter(a));
        const double db = distance(xk, mesh.barycenter(b));
        return da < db || (da == db && a < b);
    };

    std::vector<Index> inner{element};
    std::vector<Index> prev{element};
    int t = 0;
    while (true) {
        std::vector<Index> next = neighborhood(mesh, element, t + 1);
        std::vector<Index> shell;
        std::set_difference(next.begin(), next.end(), prev.begin(), prev.end(), std::back_inserter(shell));
        std::erase_if(shell, [&](Index q) { return !active.contains(q); });
        if (static_cast<int>(inner.size() + shell.size()) >= threshold) {
            std::sort(shell.begin(), shell.end(), closer);
            p.members = inner;
            p.members.insert(p.members.end(), shell.begin(), shell.begin() + (threshold - static_cast<int>(inner.size())));
            break;
        }
        if (next.size() == prev.size())
            fail(ErrorKind::PatchInfeasible, "neighbourhood exhausted before reaching the threshold");
        inner.insert(inner.end(), shell.begin(), shell.end());
        prev = std::move(next);
        ++t;
    }
    p.depth = t;
    std::sort(p.members.begin(), p.members.end(), closer);

    p.constraints = {element};
    const Index partner = sigma.inverse[active.side].empty() ? -1 : sigma.inverse[active.side][element];
    if (partner >= 0) {
        p.constraints.push_back(partner);
        if (std::find(p.members.begin(), p.members.end(), partner) == p.members.end()) {
            // evict the farthest member other than the owner
            if (p.members.size() < 2)
                fail(ErrorKind::PatchInfeasible, "patch too small to hold its constraint partner");
            p.members.back() = partner;
            std::sort(p.members.begin(), p.members.end(), closer);
        }
    }
    return p;
}

LocalBasis::LocalBasis(const TriMesh &mesh, Index element, int degree)
    : center_(mesh.barycenter(element)), scale_(mesh.diameter(element)), degree_(degree)
{
    if (degree < 0)
        fail(ErrorKind::InvalidArgument, "negative polynomial degree");
    const int n = poly_dim(degree);
    const auto c = mesh.corners(element);
    const QuadRule rule = triangle_rule(c[0], c[1], c[2], 2 * degree);
    Mat gram = Mat::Zero(n, n);
    for (std::size_t q = 0; q < rule.size(); ++q) {
        const Vec m = monomials(rule.points[q]);
        gram.noalias() += rule.weights[q] * m * m.transpose();
    }
    transform_ = Mat::Identity(n, n);
    // modified Gram-Schmidt in the Gram inner product, two passes
    for (int pass = 0; pass < 2; ++pass) {
        for (int j = 0; j < n; ++j) {
            Vec v = transform_.row(j).transpose();
            for (int l = 0; l < j; ++l) {
                const Vec u = transform_.row(l).transpose();
                v -= (u.dot(gram * v)) * u;
            }
            const double nv = std::sqrt(v.dot(gram * v));
            if (!(nv > 0.0))
                fail(ErrorKind::RankDeficient, "local basis is degenerate");
            transform_.row(j) = (v / nv).transpose();
        }
    }
}

Vec LocalBasis::monomials(const Point2 &x) const
{
    const double u = (x.x - center_.x) / scale_;
    const double v = (x.y - center_.y) / scale_;
    Vec m(poly_dim(degree_));
    int idx = 0;
    for (int d = 0; d <= degree_; ++d)
        for (int a = d; a >= 0; --a)
            m[idx++] = std::pow(u, a) * std::pow(v, d - a);
    return m;
}

Vec LocalBasis::values(const Point2 &x) const { return transform_ * monomials(x); }

Mat LocalBasis::gradients(const Point2 &x) const
{
    Vec v;
    Mat g;
    evaluate(x, v, g);
    return g;
}

void LocalBasis::evaluate(const Point2 &x, Vec &values, Mat &gradients) const
{
    const int n = poly_dim(degree_);
    const double u = (x.x - center_.x) / scale_;
    const double v = (x.y - center_.y) / scale_;
    double pu[16], pv[16];
    pu[0] = pv[0] = 1.0;
    for (int d = 1; d <= degree_; ++d) {
        pu[d] = pu[d - 1] * u;
        pv[d] = pv[d - 1] * v;
    }
    Vec m(n);
    Mat dm(n, 2);
    int idx = 0;
    for (int d = 0; d <= degree_; ++d)
        for (int a = d; a >= 0; --a) {
            const int b = d - a;
            m[idx] = pu[a] * pv[b];
            dm(idx, 0) = a > 0 ? a * pu[a - 1] * pv[b] / scale_ : 0.0;
            dm(idx, 1) = b > 0 ? b * pu[a] * pv[b - 1] / scale_ : 0.0;
            ++idx;
        }
    values.noalias() = transform_ * m;
    gradients.noalias() = transform_ * dm;
}

Mat constrained_least_squares(const Mat &samples, const Mat &constraints, const Mat &selection)
{
    const Index l = static_cast<Index>(samples.cols());
    const Index c = static_cast<Index>(constraints.rows());
    if (constraints.cols() != l || selection.rows() != c || selection.cols() != samples.rows() || c > l || c < 1)
        fail(ErrorKind::InvalidArgument, "inconsistent constrained least-squares dimensions");

    Eigen::HouseholderQR<Mat> qr(constraints.transpose());
    const Mat q = qr.householderQ() * Mat::Identity(l, l);
    const Mat r = qr.matrixQR().topRows(c).triangularView<Eigen::Upper>();
    for (Index j = 0; j < c; ++j)
        if (std::abs(r(j, j)) <= 1e-13 * r.cwiseAbs().maxCoeff())
            fail(ErrorKind::RankDeficient, "constraint rows are linearly dependent");
    const Mat q1 = q.leftCols(c);
    const Mat q2 = q.rightCols(l - c);
    // particular solution of the constraints
    const Mat rt_inv_s = r.transpose().triangularView<Eigen::Lower>().solve(selection);
    const Mat part = q1 * rt_inv_s;
    if (l == c)
        return part;

    const Mat reduced = samples * q2;
    Eigen::JacobiSVD<Mat> svd(reduced, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const Vec &s = svd.singularValues();
    if (s.size() == 0 || s[s.size() - 1] < 1e-10 * s[0])
        fail(ErrorKind::RankDeficient, "reduced least-squares matrix is rank deficient");
    const Mat residual = Mat::Identity(samples.rows(), samples.rows()) - samples * part;
    const Mat z = svd.matrixV() * s.cwiseInverse().asDiagonal() * svd.matrixU().transpose() * residual;
    return part + q2 * z;
}

void StabilityReport::write_csv(std::ostream &out) const
{
    out << "side,element,t_depth,lambda\n";
    out.precision(12);
    for (const auto &e : entries)
        out << e.side << ',' << e.element << ',' << e.depth << ',' << e.lambda << '\n';
}

namespace {

Mat sample_matrix(const TriMesh &mesh, const LocalBasis &basis, const std::vector<Index> &points)
{
    Mat m(points.size(), basis.size());
    for (std::size_t r = 0; r < points.size(); ++r)
        m.row(r) = basis.values(mesh.barycenter(points[r])).transpose();
    return m;
}

} // namespace

double patch_stability(const TriMesh &mesh, const LocalBasis &basis, const Patch &p)
{
    const Mat m = sample_matrix(mesh, basis, p.members);
    const Mat b = m.transpose() * m;
    Eigen::SelfAdjointEigenSolver<Mat> eig(b, Eigen::EigenvaluesOnly);
    const double h = mesh.diameter(p.owner);
    const double smin = eig.eigenvalues()[0] * h * h;
    if (!(smin > 1e-14))
        fail(ErrorKind::SingularB, "sampling Gram matrix of element " + std::to_string(p.owner) + " is singular");
    return 1.0 / std::sqrt(smin);
}

namespace {

std::vector<LocalBasis> make_bases(const TriMesh &mesh, int degree)
{
    std::vector<LocalBasis> bases;
    bases.reserve(mesh.num_elements());
    for (Index k = 0; k < mesh.num_elements(); ++k)
        bases.emplace_back(mesh, k, degree);
    return bases;
}

std::array<std::vector<Patch>, 2> make_patches(const TriMesh &mesh, const ActiveMeshes &active, const SigmaMap &sigma,
                                               int threshold)
{
    std::array<std::vector<Patch>, 2> patches;
    for (int i = 0; i < 2; ++i) {
        const ActiveMesh &a = active.side(i);
        patches[i].reserve(a.size());
        for (Index k : a.elements)
            patches[i].push_back(build_patch(mesh, a, sigma, k, threshold));
    }
    return patches;
}

StabilityReport summarize(const TriMesh &mesh, const std::vector<LocalBasis> &bases,
                          const std::array<std::vector<Patch>, 2> &patches)
{
    StabilityReport rep;
    for (int i = 0; i < 2; ++i) {
        rep.min[i] = std::numeric_limits<double>::infinity();
        rep.max[i] = 0.0;
        for (const Patch &p : patches[i]) {
            double lam = std::numeric_limits<double>::infinity();
            try {
                lam = patch_stability(mesh, bases[p.owner], p);
            } catch (const Error &e) {
                if (e.kind() != ErrorKind::SingularB)
                    throw;
            }
            rep.entries.push_back({i, p.owner, p.depth, lam});
            rep.min[i] = std::min(rep.min[i], lam);
            rep.max[i] = std::max(rep.max[i], lam);
            rep.max_depth = std::max(rep.max_depth, p.depth);
        }
    }
    rep.lambda_m = 0.0;
    for (const auto &e : rep.entries) {
        const double size = static_cast<double>(patches[e.side][0].members.size());
        rep.lambda_m = std::max(rep.lambda_m, 1.0 + rep.max_depth * e.lambda * std::sqrt(size));
    }
    rep.adequate = rep.max[0] <= 5.0 * rep.min[0] && rep.max[1] <= 5.0 * rep.min[1];
    return rep;
}

} // namespace

StabilityReport stability_report(const TriMesh &mesh, const ActiveMeshes &active, const SigmaMap &sigma, int degree,
                                 int threshold)
{
    const auto bases = make_bases(mesh, degree);
    return summarize(mesh, bases, make_patches(mesh, active, degree == 0 ? SigmaMap{} : sigma, threshold));
}

Reconstruction::Reconstruction(const TriMesh &mesh, const MeshGeometry &geometry, const ReconstructionOptions &options)
    : degree_(options.degree), active_(mesh, geometry)
{
    if (degree_ < 0)
        fail(ErrorKind::InvalidArgument, "negative polynomial degree");
    sigma_ = build_sigma_map(mesh, active_, options.sigma_layers);
    bases_ = make_bases(mesh, degree_);

    threshold_ = options.threshold > 0 ? options.threshold : default_threshold(degree_);
    if (degree_ > 0 && threshold_ < poly_dim(degree_) + 2)
        fail(ErrorKind::InvalidArgument, "threshold below dim(P_m) + 2");
    while (true) {
        patches_ = make_patches(mesh, active_, degree_ == 0 ? SigmaMap{} : sigma_, threshold_);
        stability_ = summarize(mesh, bases_, patches_);
        if (stability_.adequate || !options.auto_increase || degree_ == 0 ||
            threshold_ + 2 > std::min<Index>(options.max_threshold, std::min(active_.side(0).size(), active_.side(1).size())))
            break;
        threshold_ += 2;
    }

    for (int i = 0; i < 2; ++i) {
        blocks_[i].resize(patches_[i].size());
        for (std::size_t s = 0; s < patches_[i].size(); ++s) {
            const Patch &p = patches_[i][s];
            ElementReconstruction &blk = blocks_[i][s];
            blk.dofs.reserve(p.members.size());
            for (Index q : p.members)
                blk.dofs.push_back(active_.dof(i, q));
            const LocalBasis &basis = bases_[p.owner];
            if (degree_ == 0) {
                // piecewise constants: the coefficient of the constant basis is sqrt(|K|) v_K
                blk.dofs = {active_.dof(i, p.owner)};
                blk.coefficients = Mat::Constant(1, 1, 1.0 / basis.values(mesh.barycenter(p.owner))[0]);
                continue;
            }
            const Mat samples = sample_matrix(mesh, basis, p.members);
            const Mat cons = sample_matrix(mesh, basis, p.constraints);
            Mat sel = Mat::Zero(p.constraints.size(), p.members.size());
            for (std::size_t r = 0; r < p.constraints.size(); ++r) {
                const auto it = std::find(p.members.begin(), p.members.end(), p.constraints[r]);
                sel(r, it - p.members.begin()) = 1.0;
            }
            try {
                blk.coefficients = constrained_least_squares(samples, cons, sel);
            } catch (const Error &e) {
                fail(e.kind(), std::string(e.what()) + " (element " + std::to_string(p.owner) + ", side " +
                                   std::to_string(i) + ")");
            }
            // constants map to the constant basis function; remove the rounding drift on the owner column
            Vec drift = blk.coefficients.rowwise().sum();
            drift[0] -= 1.0 / basis.values(mesh.barycenter(p.owner))[0];
            blk.coefficients.col(0) -= drift;
        }
    }
}

Vec Reconstruction::coefficients(int side, Index k, const Vec &dofs) const
{
    const ElementReconstruction &blk = block(side, k);
    Vec v(blk.dofs.size());
    for (std::size_t r = 0; r < blk.dofs.size(); ++r)
        v[r] = dofs[blk.dofs[r]];
    return blk.coefficients * v;
}

double Reconstruction::evaluate(int side, Index k, const Vec &dofs, const Point2 &x) const
{
    return bases_[k].values(x).dot(coefficients(side, k, dofs));
}

Point2 Reconstruction::gradient(int side, Index k, const Vec &dofs, const Point2 &x) const
{
    const Vec g = bases_[k].gradients(x).transpose() * coefficients(side, k, dofs);
    return {g[0], g[1]};
}

} // namespace rda
