#pragma once

#include <array>
#include <iosfwd>
#include <span>
#include <vector>

#include "rda/common.hpp"

namespace rda {

struct Face {
    std::array<Index, 2> vertices{};
    /// elements[0] is always valid; elements[1] == -1 on the domain boundary.
    std::array<Index, 2> elements{-1, -1};

    bool boundary() const { return elements[1] < 0; }
};

/// Conforming triangulation of the square (-1,1)^2. Immutable once built.
class TriMesh {
public:
    TriMesh(std::vector<Point2> vertices, std::vector<std::array<Index, 3>> elements, int level = 0);

    Index num_vertices() const { return static_cast<Index>(vertices_.size()); }
    Index num_elements() const { return static_cast<Index>(elements_.size()); }
    Index num_faces() const { return static_cast<Index>(faces_.size()); }
    int level() const { return level_; }

    const Point2 &vertex(Index v) const { return vertices_[v]; }
    const std::vector<Point2> &vertices() const { return vertices_; }
    const std::array<Index, 3> &element(Index k) const { return elements_[k]; }
    const std::vector<std::array<Index, 3>> &elements() const { return elements_; }
    const Face &face(Index f) const { return faces_[f]; }
    const std::vector<Face> &faces() const { return faces_; }
    const std::array<Index, 3> &element_faces(Index k) const { return element_faces_[k]; }

    std::array<Point2, 3> corners(Index k) const;
    const Point2 &barycenter(Index k) const { return barycenters_[k]; }
    double area(Index k) const { return areas_[k]; }
    /// Element diameter h_K (longest edge).
    double diameter(Index k) const { return diameters_[k]; }
    /// Face diameter h_e (its length).
    double face_length(Index f) const { return face_lengths_[f]; }
    /// Unit normal of face f pointing out of face(f).elements[0].
    Point2 face_normal(Index f) const;
    double max_diameter() const;
    double min_diameter() const;

    /// Elements incident to vertex v, ascending.
    std::span<const Index> vertex_elements(Index v) const;

private:
    std::vector<Point2> vertices_;
    std::vector<std::array<Index, 3>> elements_;
    std::vector<Face> faces_;
    std::vector<std::array<Index, 3>> element_faces_;
    std::vector<Point2> barycenters_;
    std::vector<double> areas_;
    std::vector<double> diameters_;
    std::vector<double> face_lengths_;
    std::vector<Index> vertex_element_offsets_;
    std::vector<Index> vertex_element_list_;
    int level_ = 0;
};

/// n x n squares on (-1,1)^2, each split along the lower-left to upper-right
/// diagonal. Element 2*(j*n+i)+{0,1} lives in square column i, row j.
TriMesh build_uniform_mesh(int cells_per_side);

struct RefinedMesh {
    TriMesh mesh;
    /// fine element -> coarse parent. Children of parent p are 4p..4p+3.
    std::vector<Index> parent;
};

/// Red refinement: every triangle split into four through its edge midpoints.
RefinedMesh refine(const TriMesh &mesh);

class MeshHierarchy {
public:
    MeshHierarchy(int coarse_cells, int refinements);

    int finest_level() const { return static_cast<int>(levels_.size()) - 1; }
    int num_levels() const { return static_cast<int>(levels_.size()); }
    const TriMesh &level(int j) const { return levels_[j]; }
    const TriMesh &finest() const { return levels_.back(); }
    int coarse_cells() const { return coarse_cells_; }

    /// Parent on level j-1 of element k on level j (j >= 1).
    Index parent_of(int j, Index k) const { return parents_[j][k]; }
    /// Children on level j+1 of element k on level j.
    std::array<Index, 4> children_of(int j, Index k) const;

private:
    int coarse_cells_;
    std::vector<TriMesh> levels_;
    std::vector<std::vector<Index>> parents_;
};

/// Recursive vertex-neighbourhood of K with `layers` layers, K included.
/// Result is sorted ascending.
std::vector<Index> neighborhood(const TriMesh &mesh, Index element, int layers);

void write_mesh(std::ostream &out, const TriMesh &mesh);

} // namespace rda
