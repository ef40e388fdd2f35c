#pragma once

#include <array>
#include <iosfwd>
#include <vector>

#include "rda/geometry.hpp"
#include "rda/mesh.hpp"

namespace rda {

/// Elements of T_{h,i} for one side, with their DOF slots.
struct ActiveMesh {
    int side = 0;
    /// Active elements in ascending order; slot s holds elements[s].
    std::vector<Index> elements;
    /// Mesh element -> slot, -1 when inactive.
    std::vector<Index> slot;
    /// Per slot: K lies inside Omega_i.
    std::vector<char> interior;
    /// Faces with both neighbours active on this side.
    std::vector<Index> interior_faces;
    /// Boundary faces whose element is active on this side.
    std::vector<Index> boundary_faces;

    Index size() const { return static_cast<Index>(elements.size()); }
    bool contains(Index k) const { return slot[k] >= 0; }
};

/// Both active meshes plus the global DOF numbering: side-0 slots first,
/// then side-1 slots.
class ActiveMeshes {
public:
    ActiveMeshes() = default;
    ActiveMeshes(const TriMesh &mesh, const MeshGeometry &geometry);

    const ActiveMesh &side(int i) const { return sides_[i]; }
    Index num_dofs() const { return sides_[0].size() + sides_[1].size(); }
    Index offset(int i) const { return i == 0 ? 0 : sides_[0].size(); }
    /// Global DOF of (side, element), -1 when inactive.
    Index dof(int i, Index k) const
    {
        const Index s = sides_[i].slot[k];
        return s < 0 ? -1 : s + offset(i);
    }
    int dof_side(Index d) const { return d < sides_[0].size() ? 0 : 1; }
    Index dof_element(Index d) const
    {
        const int i = dof_side(d);
        return sides_[i].elements[d - offset(i)];
    }
    /// Elements active on both sides, ascending.
    const std::vector<Index> &cut_elements() const { return cut_; }

private:
    std::array<ActiveMesh, 2> sides_;
    std::vector<Index> cut_;
};

/// Injective maps sigma_i from cut elements to nearby interior elements.
struct SigmaMap {
    /// target[i][c] is the image of cut_elements()[c] on side i.
    std::array<std::vector<Index>, 2> target;
    /// layer[i][c] is the neighbourhood layer in which the image was found.
    std::array<std::vector<int>, 2> layer;
    /// inverse[i][k] is the cut element mapped onto k, or -1.
    std::array<std::vector<Index>, 2> inverse;
    /// Largest layer used.
    int s0 = 0;
};

SigmaMap build_sigma_map(const TriMesh &mesh, const ActiveMeshes &active, int max_layers = 3);

struct Patch {
    Index owner = -1;
    int side = 0;
    /// Exactly N members, sorted by barycentre distance to the owner (owner first).
    std::vector<Index> members;
    /// Recursive depth t with #S_t < N <= #S_{t+1}.
    int depth = 0;
    /// Elements whose barycentres carry interpolation constraints (owner first).
    std::vector<Index> constraints;
};

Patch build_patch(const TriMesh &mesh, const ActiveMesh &active, const SigmaMap &sigma, Index element,
                  int threshold);

/// Default patch size per degree: 1, 6, 9, 13, 18, ... (dim P_m + 3).
int default_threshold(int degree);
inline int poly_dim(int degree) { return (degree + 1) * (degree + 2) / 2; }

/// Monomials in (x - x_K)/h_K orthonormalised in L2(K).
class LocalBasis {
public:
    LocalBasis() = default;
    LocalBasis(const TriMesh &mesh, Index element, int degree);

    int size() const { return static_cast<int>(transform_.rows()); }
    int degree() const { return degree_; }
    Vec values(const Point2 &x) const;
    /// size() x 2 matrix of gradients.
    Mat gradients(const Point2 &x) const;
    void evaluate(const Point2 &x, Vec &values, Mat &gradients) const;

private:
    Vec monomials(const Point2 &x) const;

    Point2 center_;
    double scale_ = 1.0;
    int degree_ = 0;
    /// Row j: coefficients of p_j in the scaled monomials.
    Mat transform_;
};

/// Minimiser of sum over rows of (M a - v)^2 subject to C a = S v, written as
/// the linear map v -> a. Throws RankDeficient when the reduced problem is
/// singular.
Mat constrained_least_squares(const Mat &samples, const Mat &constraints, const Mat &selection);

struct StabilityReport {
    struct Entry {
        int side;
        Index element;
        int depth;
        double lambda;
    };
    std::vector<Entry> entries;
    std::array<double, 2> min{0.0, 0.0};
    std::array<double, 2> max{0.0, 0.0};
    int max_depth = 0;
    /// max over (K, i) of 1 + t_m Lambda_{m,K,i} sqrt(#S).
    double lambda_m = 0.0;
    bool adequate = false;

    void write_csv(std::ostream &out) const;
};

/// Lambda_{m,K,i} = (h_K^2 sigma_min(B))^{-1/2} for the barycentre sampling Gram B.
double patch_stability(const TriMesh &mesh, const LocalBasis &basis, const Patch &patch);

struct ReconstructionOptions {
    int degree = 1;
    /// Patch size; 0 selects default_threshold(degree).
    int threshold = 0;
    /// Grow the threshold by 2 while the adequacy test fails.
    bool auto_increase = true;
    int max_threshold = 60;
    int sigma_layers = 3;
};

/// Per-element map from patch DOF values to coefficients in the local basis.
struct ElementReconstruction {
    std::vector<Index> dofs;
    Mat coefficients;
};

class Reconstruction {
public:
    Reconstruction() = default;
    Reconstruction(const TriMesh &mesh, const MeshGeometry &geometry, const ReconstructionOptions &options);

    int degree() const { return degree_; }
    int threshold() const { return threshold_; }
    const ActiveMeshes &active() const { return active_; }
    const SigmaMap &sigma() const { return sigma_; }
    const StabilityReport &stability() const { return stability_; }
    const LocalBasis &basis(Index k) const { return bases_[k]; }
    const Patch &patch(int side, Index k) const { return patches_[side][active_.side(side).slot[k]]; }
    /// Only valid for elements active on `side`.
    const ElementReconstruction &block(int side, Index k) const { return blocks_[side][active_.side(side).slot[k]]; }

    /// Local coefficients of R^{m,i} v on K.
    Vec coefficients(int side, Index k, const Vec &dofs) const;
    double evaluate(int side, Index k, const Vec &dofs, const Point2 &x) const;
    Point2 gradient(int side, Index k, const Vec &dofs, const Point2 &x) const;

private:
    int degree_ = 0;
    int threshold_ = 0;
    ActiveMeshes active_;
    SigmaMap sigma_;
    StabilityReport stability_;
    std::vector<LocalBasis> bases_;
    std::array<std::vector<Patch>, 2> patches_;
    std::array<std::vector<ElementReconstruction>, 2> blocks_;
};

/// Patches and stability constants for a fixed threshold, without the
/// least-squares solves.
StabilityReport stability_report(const TriMesh &mesh, const ActiveMeshes &active, const SigmaMap &sigma,
                                 int degree, int threshold);

} // namespace rda
