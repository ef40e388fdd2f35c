#pragma once

#include <array>
#include <functional>
#include <iosfwd>
#include <vector>

#include "rda/geometry.hpp"
#include "rda/mesh.hpp"
#include "rda/reconstruction.hpp"

namespace rda {

/// Coefficients and data of -div(alpha grad u) = f with [u] = a n, [alpha grad u] = b on Gamma.
struct ProblemSpec {
    double alpha0 = 1.0;
    double alpha1 = 1.0;
    /// f_i(x).
    std::function<double(const Point2 &, int)> source;
    /// Dirichlet datum on side i (only side 1 is used when the interface is closed).
    std::function<double(const Point2 &, int)> boundary;
    /// a = u0 - u1 on Gamma.
    std::function<double(const Point2 &)> jump_a;
    /// b = (alpha0 grad u0 - alpha1 grad u1) . n for the normal n pointing into side 1.
    std::function<double(const Point2 &, const Point2 &)> jump_b;

    double alpha(int side) const { return side == 0 ? alpha0 : alpha1; }
    /// Harmonic weights (w0, w1) = (alpha1, alpha0) / (alpha0 + alpha1).
    std::array<double, 2> weights() const;
    /// 2 alpha0 alpha1 / (alpha0 + alpha1).
    double harmonic_alpha() const;
    void validate() const;
};

double default_penalty(int degree);

/// Symmetric sparse matrix accumulated block by block into a fixed pattern.
class PatternAssembler {
public:
    explicit PatternAssembler(Index size);

    /// First pass: declare the DOFs coupled by one block.
    void declare(const std::vector<Index> &dofs);
    /// Freeze the pattern; must be called before add().
    void finalize();
    /// Second pass: add a dense symmetric block.
    void add(const std::vector<Index> &dofs, const Mat &block);
    SparseMatrix matrix() const;

private:
    Index size_;
    std::vector<std::vector<Index>> rows_;
    std::vector<Index> offsets_;
    std::vector<Index> columns_;
    std::vector<double> values_;
    bool frozen_ = false;
};

struct HighOrderSystem {
    SparseMatrix matrix;
    Vec rhs;
    double penalty = 0.0;
    int degree = 0;
};

/// Nitsche interior-penalty system in the reconstructed space.
HighOrderSystem assemble_highorder(const TriMesh &mesh, const MeshGeometry &geometry, const Reconstruction &recon,
                                   const ProblemSpec &spec, double penalty);

/// Jump-penalty matrix on piecewise constants (penalty fixed to 1). Works on
/// coarsened geometries.
SparseMatrix assemble_lowest_order(const TriMesh &mesh, const MeshGeometry &geometry, const ActiveMeshes &active,
                                   const ProblemSpec &spec);

enum class MassKind { Physical, Active, Euclidean };

/// Diagonal of D: alpha_i |K cap Omega_i| (Physical), alpha_i |K| (Active) or 1.
Vec mass_diagonal(const TriMesh &mesh, const MeshGeometry &geometry, const ActiveMeshes &active,
                  const ProblemSpec &spec, MassKind kind);

struct LevelSystem {
    MeshGeometry geometry;
    ActiveMeshes active;
    SparseMatrix matrix;
    Vec mass;
    /// Injection from level j-1 into this level (empty on level 0).
    SparseMatrix prolongation;
};

/// Injection: the coarse value of (K_c, i) copied to every side-i child.
SparseMatrix build_injection(const ActiveMeshes &coarse, const ActiveMeshes &fine, const std::vector<Index> &parent);

/// Per-level A_{0,j}, D_j and transfers; index 0 is the coarsest level.
std::vector<LevelSystem> assemble_level_systems(const MeshHierarchy &hierarchy, const MeshGeometry &finest,
                                                const ProblemSpec &spec, MassKind kind);

/// Coordinate text: "rows cols nnz" header then one "row col value" line per entry (0-based).
void write_matrix(std::ostream &out, const SparseMatrix &a);
void write_vector(std::ostream &out, const Vec &v);

} // namespace rda
