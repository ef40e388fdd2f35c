#include "rda/assembly.hpp"

#include <algorithm>
#include <ostream>
#include <string>

#include "rda/quadrature.hpp"

namespace rda {

std::array<double, 2> ProblemSpec::weights() const
{
    const double s = alpha0 + alpha1;
    return {alpha1 / s, alpha0 / s};
}

double ProblemSpec::harmonic_alpha() const { return 2.0 * alpha0 * alpha1 / (alpha0 + alpha1); }

void ProblemSpec::validate() const
{
    if (!(alpha0 > 0.0) || !(alpha1 > 0.0))
        fail(ErrorKind::InvalidArgument, "coefficients must be positive");
}

double default_penalty(int degree) { return static_cast<double>((degree + 1) * (degree + 1)); }

PatternAssembler::PatternAssembler(Index size) : size_(size), rows_(size) {}

void PatternAssembler::declare(const std::vector<Index> &dofs)
{
    for (Index r : dofs)
        rows_[r].insert(rows_[r].end(), dofs.begin(), dofs.end());
}

void PatternAssembler::finalize()
{
    offsets_.assign(size_ + 1, 0);
    for (Index r = 0; r < size_; ++r) {
        auto &row = rows_[r];
        std::sort(row.begin(), row.end());
        row.erase(std::unique(row.begin(), row.end()), row.end());
        offsets_[r + 1] = offsets_[r] + static_cast<Index>(row.size());
    }
    columns_.reserve(offsets_.back());
    for (auto &row : rows_) {
        columns_.insert(columns_.end(), row.begin(), row.end());
        std::vector<Index>().swap(row);
    }
    values_.assign(columns_.size(), 0.0);
    frozen_ = true;
}

void PatternAssembler::add(const std::vector<Index> &dofs, const Mat &block)
{
    if (!frozen_)
        fail(ErrorKind::InvalidArgument, "pattern not finalized");
    const std::size_t n = dofs.size();
    for (std::size_t a = 0; a < n; ++a) {
        const Index r = dofs[a];
        const auto first = columns_.begin() + offsets_[r];
        const auto last = columns_.begin() + offsets_[r + 1];
        for (std::size_t b = 0; b < n; ++b) {
            const auto it = std::lower_bound(first, last, dofs[b]);
            if (it == last || *it != dofs[b])
                fail(ErrorKind::InvalidArgument, "entry outside the declared pattern");
            values_[it - columns_.begin()] += block(a, b);
        }
    }
}

SparseMatrix PatternAssembler::matrix() const
{
    SparseMatrix a(size_, size_);
    std::vector<Eigen::Triplet<double, Index>> trip;
    trip.reserve(values_.size());
    for (Index r = 0; r < size_; ++r)
        for (Index p = offsets_[r]; p < offsets_[r + 1]; ++p)
            trip.emplace_back(r, columns_[p], values_[p]);
    a.setFromTriplets(trip.begin(), trip.end());
    return a;
}

namespace {

/// Sorted union of two DOF lists with positions of each input in the union.
std::vector<Index> merge_dofs(const std::vector<Index> &a, const std::vector<Index> &b, std::vector<Index> &ia,
                              std::vector<Index> &ib)
{
    std::vector<Index> u(a);
    u.insert(u.end(), b.begin(), b.end());
    std::sort(u.begin(), u.end());
    u.erase(std::unique(u.begin(), u.end()), u.end());
    auto pos = [&](const std::vector<Index> &src, std::vector<Index> &out) {
        out.resize(src.size());
        for (std::size_t r = 0; r < src.size(); ++r)
            out[r] = static_cast<Index>(std::lower_bound(u.begin(), u.end(), src[r]) - u.begin());
    };
    pos(a, ia);
    pos(b, ib);
    return u;
}

std::vector<Index> sorted_dofs(const std::vector<Index> &a, std::vector<Index> &ia)
{
    std::vector<Index> none, inone;
    return merge_dofs(a, none, ia, inone);
}

/// Values and gradients of the reconstructed basis functions of (side, K) at x.
struct RowEval {
    Vec basis;
    Mat basis_grad;
    Vec value;
    Mat grad;

    void at(const Reconstruction &r, int side, Index k, const Point2 &x)
    {
        r.basis(k).evaluate(x, basis, basis_grad);
        const Mat &c = r.block(side, k).coefficients;
        value.noalias() = c.transpose() * basis;
        grad.noalias() = c.transpose() * basis_grad;
    }
};

void scatter(Vec &out, const std::vector<Index> &pos, const Vec &src, double scale)
{
    for (std::size_t r = 0; r < pos.size(); ++r)
        out[pos[r]] += scale * src[r];
}

void scatter_flux(Vec &out, const std::vector<Index> &pos, const Mat &grad, const Point2 &n, double scale)
{
    for (std::size_t r = 0; r < pos.size(); ++r)
        out[pos[r]] += scale * (grad(r, 0) * n.x + grad(r, 1) * n.y);
}

Mat symmetrized(const Mat &m) { return 0.5 * (m + m.transpose()); }

QuadRule face_rule(const TriMesh &mesh, Index f, int points)
{
    QuadRule rule;
    const Face &face = mesh.face(f);
    append_segment_rule(rule, mesh.vertex(face.vertices[0]), mesh.vertex(face.vertices[1]), points);
    return rule;
}

/// Rule on e^i, or nullptr when e^i is empty.
const QuadRule *face_part(const MeshGeometry &g, Index f, int side, const QuadRule &full)
{
    const int s = g.face_side(f);
    if (s == side)
        return &full;
    if (s == -1)
        return &g.face_cut(f).part[side];
    return nullptr;
}

} // namespace

HighOrderSystem assemble_highorder(const TriMesh &mesh, const MeshGeometry &geometry, const Reconstruction &recon,
                                   const ProblemSpec &spec, double penalty)
{
    spec.validate();
    if (!(penalty > 0.0))
        fail(ErrorKind::NonPositivePenalty, "penalty must be positive");
    if (!geometry.has_quadrature())
        fail(ErrorKind::InvalidArgument, "geometry carries no quadrature");
    const ActiveMeshes &active = recon.active();
    if (active.side(0).slot.size() != static_cast<std::size_t>(mesh.num_elements()))
        fail(ErrorKind::MissingReconstruction, "reconstruction does not match the mesh");
    if (!spec.source || !spec.boundary || !spec.jump_a || !spec.jump_b)
        fail(ErrorKind::InvalidArgument, "problem data incomplete");

    const int m = recon.degree();
    const Index ndof = active.num_dofs();
    const int line = geometry.options().line_points;
    const int vorder = geometry.options().volume_order;
    const auto w = spec.weights();
    const double aw = spec.harmonic_alpha();

    HighOrderSystem sys;
    sys.penalty = penalty;
    sys.degree = m;
    sys.rhs = Vec::Zero(ndof);
    PatternAssembler pattern(ndof);

    // pattern pass
    for (int i = 0; i < 2; ++i) {
        for (Index k : active.side(i).elements)
            pattern.declare(recon.block(i, k).dofs);
        for (Index f : active.side(i).interior_faces) {
            std::vector<Index> ia, ib;
            const Face &face = mesh.face(f);
            pattern.declare(merge_dofs(recon.block(i, face.elements[0]).dofs, recon.block(i, face.elements[1]).dofs, ia, ib));
        }
    }
    for (Index k : active.cut_elements()) {
        std::vector<Index> ia, ib;
        pattern.declare(merge_dofs(recon.block(0, k).dofs, recon.block(1, k).dofs, ia, ib));
    }
    pattern.finalize();

    RowEval ev, ev2;
    // volume terms
    for (int i = 0; i < 2; ++i) {
        const double alpha = spec.alpha(i);
        for (Index k : active.side(i).elements) {
            const ElementReconstruction &blk = recon.block(i, k);
            const LocalBasis &basis = recon.basis(k);
            const int l = basis.size();
            QuadRule stiff_rule, load_rule;
            const QuadRule *stiff = nullptr;
            const QuadRule *load = nullptr;
            if (geometry.is_cut(k)) {
                stiff = load = &geometry.cut(k).volume[i];
            } else {
                const auto c = mesh.corners(k);
                stiff_rule = triangle_rule(c[0], c[1], c[2], std::max(2 * m - 2, 0));
                load_rule = triangle_rule(c[0], c[1], c[2], vorder);
                stiff = &stiff_rule;
                load = &load_rule;
            }
            std::vector<Index> pos;
            const std::vector<Index> dofs = sorted_dofs(blk.dofs, pos);
            if (m > 0) {
                Mat gram = Mat::Zero(l, l);
                Vec v;
                Mat g;
                for (std::size_t q = 0; q < stiff->size(); ++q) {
                    basis.evaluate(stiff->points[q], v, g);
                    gram.noalias() += stiff->weights[q] * g * g.transpose();
                }
                const Mat local = alpha * blk.coefficients.transpose() * gram * blk.coefficients;
                Mat block = Mat::Zero(dofs.size(), dofs.size());
                for (std::size_t a = 0; a < pos.size(); ++a)
                    for (std::size_t b = 0; b < pos.size(); ++b)
                        block(pos[a], pos[b]) += local(a, b);
                pattern.add(dofs, symmetrized(block));
            }
            for (std::size_t q = 0; q < load->size(); ++q) {
                ev.at(recon, i, k, load->points[q]);
                const double fw = load->weights[q] * spec.source(load->points[q], i);
                for (std::size_t r = 0; r < blk.dofs.size(); ++r)
                    sys.rhs[blk.dofs[r]] += fw * ev.value[r];
            }
        }
    }

    // faces
    for (int i = 0; i < 2; ++i) {
        const double alpha = spec.alpha(i);
        for (Index f : active.side(i).interior_faces) {
            const Face &face = mesh.face(f);
            const Index kp = face.elements[0], km = face.elements[1];
            std::vector<Index> ip, im;
            const std::vector<Index> dofs = merge_dofs(recon.block(i, kp).dofs, recon.block(i, km).dofs, ip, im);
            const Point2 n = mesh.face_normal(f);
            const double he = mesh.face_length(f);
            const QuadRule full = face_rule(mesh, f, line);
            const QuadRule *part = face_part(geometry, f, i, full);
            const Index u = static_cast<Index>(dofs.size());
            Mat block = Mat::Zero(u, u);
            Vec jump(u), flux(u);
            for (std::size_t q = 0; q < full.size(); ++q) {
                ev.at(recon, i, kp, full.points[q]);
                ev2.at(recon, i, km, full.points[q]);
                jump.setZero();
                scatter(jump, ip, ev.value, 1.0);
                scatter(jump, im, ev2.value, -1.0);
                block.noalias() += (penalty * alpha / he * full.weights[q]) * jump * jump.transpose();
            }
            if (part) {
                for (std::size_t q = 0; q < part->size(); ++q) {
                    ev.at(recon, i, kp, part->points[q]);
                    ev2.at(recon, i, km, part->points[q]);
                    jump.setZero();
                    flux.setZero();
                    scatter(jump, ip, ev.value, 1.0);
                    scatter(jump, im, ev2.value, -1.0);
                    scatter_flux(flux, ip, ev.grad, n, 0.5 * alpha);
                    scatter_flux(flux, im, ev2.grad, n, 0.5 * alpha);
                    block.noalias() -= part->weights[q] * (flux * jump.transpose() + jump * flux.transpose());
                }
            }
            pattern.add(dofs, symmetrized(block));
        }

        for (Index f : active.side(i).boundary_faces) {
            const Index k = mesh.face(f).elements[0];
            std::vector<Index> pos;
            const std::vector<Index> dofs = sorted_dofs(recon.block(i, k).dofs, pos);
            const Point2 n = mesh.face_normal(f);
            const double he = mesh.face_length(f);
            const QuadRule full = face_rule(mesh, f, line);
            const QuadRule *part = face_part(geometry, f, i, full);
            const Index u = static_cast<Index>(dofs.size());
            Mat block = Mat::Zero(u, u);
            Vec jump(u), flux(u);
            for (std::size_t q = 0; q < full.size(); ++q) {
                ev.at(recon, i, k, full.points[q]);
                jump.setZero();
                scatter(jump, pos, ev.value, 1.0);
                const double pw = penalty * alpha / he * full.weights[q];
                block.noalias() += pw * jump * jump.transpose();
                const double g = spec.boundary(full.points[q], i);
                for (Index r = 0; r < u; ++r)
                    sys.rhs[dofs[r]] += pw * g * jump[r];
            }
            if (part) {
                for (std::size_t q = 0; q < part->size(); ++q) {
                    ev.at(recon, i, k, part->points[q]);
                    jump.setZero();
                    flux.setZero();
                    scatter(jump, pos, ev.value, 1.0);
                    scatter_flux(flux, pos, ev.grad, n, alpha);
                    block.noalias() -= part->weights[q] * (flux * jump.transpose() + jump * flux.transpose());
                    const double g = spec.boundary(part->points[q], i);
                    for (Index r = 0; r < u; ++r)
                        sys.rhs[dofs[r]] -= part->weights[q] * g * flux[r];
                }
            }
            pattern.add(dofs, symmetrized(block));
        }
    }

    // interface
    for (Index k : active.cut_elements()) {
        const CutQuadrature &cq = geometry.cut(k);
        std::vector<Index> i0, i1;
        const std::vector<Index> dofs = merge_dofs(recon.block(0, k).dofs, recon.block(1, k).dofs, i0, i1);
        const Index u = static_cast<Index>(dofs.size());
        const double pk = penalty * aw / mesh.diameter(k);
        Mat block = Mat::Zero(u, u);
        Vec jump(u), flux(u), avg(u);
        for (std::size_t q = 0; q < cq.interface.size(); ++q) {
            const Point2 &x = cq.interface.points[q];
            const Point2 &n = cq.normals[q];
            const double wq = cq.interface.weights[q];
            ev.at(recon, 0, k, x);
            ev2.at(recon, 1, k, x);
            jump.setZero();
            flux.setZero();
            avg.setZero();
            scatter(jump, i0, ev.value, 1.0);
            scatter(jump, i1, ev2.value, -1.0);
            scatter_flux(flux, i0, ev.grad, n, w[0] * spec.alpha0);
            scatter_flux(flux, i1, ev2.grad, n, w[1] * spec.alpha1);
            scatter(avg, i0, ev.value, w[1]);
            scatter(avg, i1, ev2.value, w[0]);
            block.noalias() += wq * (pk * jump * jump.transpose() - flux * jump.transpose() - jump * flux.transpose());
            const double a = spec.jump_a(x);
            const double b = spec.jump_b(x, n);
            for (Index r = 0; r < u; ++r)
                sys.rhs[dofs[r]] += wq * (b * avg[r] - a * flux[r] + pk * a * jump[r]);
        }
        pattern.add(dofs, symmetrized(block));
    }

    sys.matrix = pattern.matrix();
    return sys;
}

SparseMatrix assemble_lowest_order(const TriMesh &mesh, const MeshGeometry &geometry, const ActiveMeshes &active,
                                   const ProblemSpec &spec)
{
    spec.validate();
    const Index ndof = active.num_dofs();
    std::vector<Eigen::Triplet<double, Index>> trip;
    auto pair = [&](Index a, Index b, double c) {
        trip.emplace_back(a, a, c);
        trip.emplace_back(b, b, c);
        trip.emplace_back(a, b, -c);
        trip.emplace_back(b, a, -c);
    };
    for (int i = 0; i < 2; ++i) {
        const double alpha = spec.alpha(i);
        for (Index f : active.side(i).interior_faces) {
            const Face &face = mesh.face(f);
            // |e| / h_e with h_e = |e|
            pair(active.dof(i, face.elements[0]), active.dof(i, face.elements[1]), alpha);
        }
        for (Index f : active.side(i).boundary_faces) {
            const Index d = active.dof(i, mesh.face(f).elements[0]);
            trip.emplace_back(d, d, alpha);
        }
    }
    const double aw = spec.harmonic_alpha();
    for (Index k : active.cut_elements())
        pair(active.dof(0, k), active.dof(1, k), aw * geometry.interface_length(k) / mesh.diameter(k));
    SparseMatrix a(ndof, ndof);
    a.setFromTriplets(trip.begin(), trip.end());
    return a;
}

Vec mass_diagonal(const TriMesh &mesh, const MeshGeometry &geometry, const ActiveMeshes &active,
                  const ProblemSpec &spec, MassKind kind)
{
    Vec d(active.num_dofs());
    for (Index r = 0; r < d.size(); ++r) {
        const int i = active.dof_side(r);
        const Index k = active.dof_element(r);
        switch (kind) {
        case MassKind::Physical:
            d[r] = spec.alpha(i) * geometry.measure(k, i);
            break;
        case MassKind::Active:
            d[r] = spec.alpha(i) * mesh.area(k);
            break;
        case MassKind::Euclidean:
            d[r] = 1.0;
            break;
        }
    }
    return d;
}

SparseMatrix build_injection(const ActiveMeshes &coarse, const ActiveMeshes &fine, const std::vector<Index> &parent)
{
    std::vector<Eigen::Triplet<double, Index>> trip;
    for (Index d = 0; d < fine.num_dofs(); ++d) {
        const int i = fine.dof_side(d);
        const Index k = fine.dof_element(d);
        const Index c = coarse.dof(i, parent[k]);
        if (c < 0)
            fail(ErrorKind::OrphanFineDof, "fine element " + std::to_string(k) + " has no active parent on side " +
                                               std::to_string(i));
        trip.emplace_back(d, c, 1.0);
    }
    SparseMatrix p(fine.num_dofs(), coarse.num_dofs());
    p.setFromTriplets(trip.begin(), trip.end());
    return p;
}

std::vector<LevelSystem> assemble_level_systems(const MeshHierarchy &hierarchy, const MeshGeometry &finest,
                                                const ProblemSpec &spec, MassKind kind)
{
    const int top = hierarchy.finest_level();
    std::vector<LevelSystem> levels(top + 1);
    std::vector<std::vector<Index>> parents(top + 1);
    levels[top].geometry = finest;
    for (int j = top; j >= 0; --j) {
        if (j < top) {
            const TriMesh &fine = hierarchy.level(j + 1);
            parents[j + 1].resize(fine.num_elements());
            for (Index k = 0; k < fine.num_elements(); ++k)
                parents[j + 1][k] = hierarchy.parent_of(j + 1, k);
            levels[j].geometry = MeshGeometry::coarsen(levels[j + 1].geometry, hierarchy.level(j), parents[j + 1]);
        }
        const TriMesh &mesh = hierarchy.level(j);
        levels[j].active = ActiveMeshes(mesh, levels[j].geometry);
        levels[j].matrix = assemble_lowest_order(mesh, levels[j].geometry, levels[j].active, spec);
        levels[j].mass = mass_diagonal(mesh, levels[j].geometry, levels[j].active, spec, kind);
    }
    for (int j = 1; j <= top; ++j)
        levels[j].prolongation = build_injection(levels[j - 1].active, levels[j].active, parents[j]);
    return levels;
}

void write_matrix(std::ostream &out, const SparseMatrix &a)
{
    out << a.rows() << ' ' << a.cols() << ' ' << a.nonZeros() << '\n';
    out.precision(17);
    for (Index c = 0; c < a.outerSize(); ++c)
        for (SparseMatrix::InnerIterator it(a, c); it; ++it)
            out << it.row() << ' ' << it.col() << ' ' << it.value() << '\n';
}

void write_vector(std::ostream &out, const Vec &v)
{
    out.precision(17);
    for (Index r = 0; r < v.size(); ++r)
        out << v[r] << '\n';
}

} // namespace rda
