#pragma once

#include <array>
#include <functional>
#include <vector>

#include "rda/mesh.hpp"
#include "rda/quadrature.hpp"

namespace rda {

/// Interface as the zero set of phi; phi < 0 is side 0, phi >= 0 side 1.
class LevelSet {
public:
    enum class Kind { Circle, Flower, Affine, Custom };

    using Scalar = std::function<double(const Point2 &)>;
    using Gradient = std::function<Point2(const Point2 &)>;

    static LevelSet circle(Point2 center, double radius);
    /// rho = base + amplitude * sin(lobes * theta) around the origin.
    static LevelSet flower(double base, double amplitude, int lobes);
    /// phi(x) = normal . x - offset.
    static LevelSet affine(Point2 normal, double offset);
    static LevelSet custom(Scalar phi, Gradient grad);

    double operator()(const Point2 &x) const { return phi_(x); }
    Point2 gradient(const Point2 &x) const { return grad_(x); }
    Kind kind() const { return kind_; }
    /// Circle: (cx, cy, r). Flower: (base, amplitude, lobes). Affine: (nx, ny, offset).
    const std::array<double, 3> &parameters() const { return params_; }

private:
    LevelSet(Kind kind, std::array<double, 3> params, Scalar phi, Gradient grad);

    Kind kind_;
    std::array<double, 3> params_;
    Scalar phi_;
    Gradient grad_;
};

enum class ElementClass { Interior0, Interior1, Cut };

struct GeometryOptions {
    /// Total-degree exactness of volume rules.
    int volume_order = 4;
    /// Gauss points per interface chord and per face segment.
    int line_points = 3;
    /// Maximum subdivision depth of cut elements.
    int depth = 3;
    /// Cut leaves bounded by the interface curve; false uses the straight chord.
    bool curved = true;

    static GeometryOptions for_degree(int m);
};

struct CutQuadrature {
    std::array<QuadRule, 2> volume;
    QuadRule interface;
    /// Unit normals at interface points, pointing from side 0 into side 1.
    std::vector<Point2> normals;
    std::array<double, 2> measure{0.0, 0.0};
    double interface_length = 0.0;
};

struct FaceQuadrature {
    QuadRule full;
    std::array<QuadRule, 2> part;
    std::array<double, 2> length{0.0, 0.0};
    int roots = 0;
};

/// Sign-resolution classification by recursive subdivision.
ElementClass classify_element(const LevelSet &phi, const TriMesh &mesh, Index element, int depth);

CutQuadrature cut_volume_quadrature(const LevelSet &phi, const TriMesh &mesh, Index element,
                                    const GeometryOptions &options);

FaceQuadrature face_cut_quadrature(const LevelSet &phi, const TriMesh &mesh, Index face,
                                   const GeometryOptions &options);

/// Classification, measures and cut rules of every element and face of one mesh.
/// Coarse levels obtained by `coarsen` carry no quadrature.
class MeshGeometry {
public:
    MeshGeometry() = default;

    static MeshGeometry compute(const LevelSet &phi, const TriMesh &mesh, const GeometryOptions &options);
    /// Geometry of the parent mesh from the geometry of its red refinement.
    static MeshGeometry coarsen(const MeshGeometry &fine, const TriMesh &coarse, const std::vector<Index> &parent);

    Index num_elements() const { return static_cast<Index>(classes_.size()); }
    ElementClass element_class(Index k) const { return classes_[k]; }
    bool active(Index k, int side) const { return measures_[k][side] > 0.0; }
    bool is_cut(Index k) const { return classes_[k] == ElementClass::Cut; }
    double measure(Index k, int side) const { return measures_[k][side]; }
    double interface_length(Index k) const { return interface_length_[k]; }
    /// Cut elements in ascending order.
    const std::vector<Index> &cut_elements() const { return cut_elements_; }

    bool has_quadrature() const { return has_quadrature_; }
    const GeometryOptions &options() const { return options_; }
    /// Only valid for cut elements.
    const CutQuadrature &cut(Index k) const;
    /// Side of an uncut face, or -1 when phi changes sign along it.
    int face_side(Index f) const { return face_side_[f]; }
    /// Only valid when face_side(f) == -1.
    const FaceQuadrature &face_cut(Index f) const;

    /// Sum over side-i active elements of |K cap Omega_i|.
    double total_measure(int side) const;
    double total_interface_length() const;

private:
    std::vector<ElementClass> classes_;
    std::vector<std::array<double, 2>> measures_;
    std::vector<double> interface_length_;
    std::vector<Index> cut_elements_;
    std::vector<Index> cut_slot_;
    std::vector<CutQuadrature> cuts_;
    std::vector<int> face_side_;
    std::vector<Index> face_slot_;
    std::vector<FaceQuadrature> face_cuts_;
    GeometryOptions options_;
    bool has_quadrature_ = false;
};

} // namespace rda
