#include "rda/mesh.hpp"

#include <algorithm>
#include <ostream>
#include <unordered_map>

namespace rda {

namespace {

std::uint64_t edge_key(Index a, Index b)
{
    if (a > b)
        std::swap(a, b);
    return (static_cast<std::uint64_t>(a) << 32) | static_cast<std::uint32_t>(b);
}

} // namespace

TriMesh::TriMesh(std::vector<Point2> vertices, std::vector<std::array<Index, 3>> elements, int level)
    : vertices_(std::move(vertices)), elements_(std::move(elements)), level_(level)
{
    const auto ne = elements_.size();
    barycenters_.resize(ne);
    areas_.resize(ne);
    diameters_.resize(ne);
    element_faces_.resize(ne);

    std::unordered_map<std::uint64_t, Index> face_of_edge;
    face_of_edge.reserve(ne * 2);

    for (std::size_t k = 0; k < ne; ++k) {
        const auto &el = elements_[k];
        const Point2 &a = vertices_[el[0]];
        const Point2 &b = vertices_[el[1]];
        const Point2 &c = vertices_[el[2]];
        const double twice_area = cross(b - a, c - a);
        if (!(twice_area > 0.0))
            fail(ErrorKind::InvalidArgument, "element " + std::to_string(k) + " is not positively oriented");
        areas_[k] = 0.5 * twice_area;
        barycenters_[k] = (1.0 / 3.0) * (a + b + c);
        diameters_[k] = std::max({distance(a, b), distance(b, c), distance(c, a)});

        // local edge l is opposite to local vertex l
        for (int l = 0; l < 3; ++l) {
            const Index v0 = el[(l + 1) % 3];
            const Index v1 = el[(l + 2) % 3];
            auto [it, inserted] = face_of_edge.try_emplace(edge_key(v0, v1), static_cast<Index>(faces_.size()));
            if (inserted) {
                Face f;
                f.vertices = {v0, v1};
                f.elements = {static_cast<Index>(k), -1};
                faces_.push_back(f);
            } else {
                Face &f = faces_[it->second];
                if (f.elements[1] >= 0)
                    fail(ErrorKind::InvalidArgument, "non-manifold edge in mesh");
                f.elements[1] = static_cast<Index>(k);
            }
            element_faces_[k][l] = it->second;
        }
    }

    face_lengths_.resize(faces_.size());
    for (std::size_t f = 0; f < faces_.size(); ++f)
        face_lengths_[f] = distance(vertices_[faces_[f].vertices[0]], vertices_[faces_[f].vertices[1]]);

    vertex_element_offsets_.assign(vertices_.size() + 1, 0);
    for (const auto &el : elements_)
        for (Index v : el)
            ++vertex_element_offsets_[v + 1];
    for (std::size_t v = 0; v < vertices_.size(); ++v)
        vertex_element_offsets_[v + 1] += vertex_element_offsets_[v];
    vertex_element_list_.resize(vertex_element_offsets_.back());
    std::vector<Index> cursor(vertex_element_offsets_.begin(), vertex_element_offsets_.end() - 1);
    for (std::size_t k = 0; k < ne; ++k)
        for (Index v : elements_[k])
            vertex_element_list_[cursor[v]++] = static_cast<Index>(k);
}

std::array<Point2, 3> TriMesh::corners(Index k) const
{
    const auto &el = elements_[k];
    return {vertices_[el[0]], vertices_[el[1]], vertices_[el[2]]};
}

Point2 TriMesh::face_normal(Index f) const
{
    const Face &face = faces_[f];
    const Point2 &a = vertices_[face.vertices[0]];
    const Point2 &b = vertices_[face.vertices[1]];
    const Point2 t = b - a;
    Point2 n{t.y, -t.x};
    n *= 1.0 / norm(n);
    const Point2 mid = 0.5 * (a + b);
    if (dot(n, mid - barycenters_[face.elements[0]]) < 0.0)
        n *= -1.0;
    return n;
}

double TriMesh::max_diameter() const { return *std::max_element(diameters_.begin(), diameters_.end()); }
double TriMesh::min_diameter() const { return *std::min_element(diameters_.begin(), diameters_.end()); }

std::span<const Index> TriMesh::vertex_elements(Index v) const
{
    const auto begin = static_cast<std::size_t>(vertex_element_offsets_[v]);
    const auto end = static_cast<std::size_t>(vertex_element_offsets_[v + 1]);
    return {vertex_element_list_.data() + begin, end - begin};
}

TriMesh build_uniform_mesh(int n)
{
    if (n < 1)
        fail(ErrorKind::InvalidArgument, "cells per side must be >= 1, got " + std::to_string(n));
    const double h = 2.0 / n;
    std::vector<Point2> vertices;
    vertices.reserve(static_cast<std::size_t>(n + 1) * (n + 1));
    for (int j = 0; j <= n; ++j)
        for (int i = 0; i <= n; ++i)
            vertices.push_back({-1.0 + i * h, -1.0 + j * h});

    std::vector<std::array<Index, 3>> elements;
    elements.reserve(2 * static_cast<std::size_t>(n) * n);
    for (int j = 0; j < n; ++j) {
        for (int i = 0; i < n; ++i) {
            const Index v00 = j * (n + 1) + i;
            const Index v10 = v00 + 1;
            const Index v01 = v00 + (n + 1);
            const Index v11 = v01 + 1;
            elements.push_back({v00, v10, v11});
            elements.push_back({v00, v11, v01});
        }
    }
    return TriMesh(std::move(vertices), std::move(elements), 0);
}

RefinedMesh refine(const TriMesh &mesh)
{
    std::vector<Point2> vertices = mesh.vertices();
    vertices.reserve(vertices.size() + mesh.num_faces());
    std::vector<Index> midpoint(mesh.num_faces());
    for (Index f = 0; f < mesh.num_faces(); ++f) {
        const Face &face = mesh.face(f);
        midpoint[f] = static_cast<Index>(vertices.size());
        vertices.push_back(0.5 * (mesh.vertex(face.vertices[0]) + mesh.vertex(face.vertices[1])));
    }

    std::vector<std::array<Index, 3>> elements;
    elements.reserve(4 * static_cast<std::size_t>(mesh.num_elements()));
    std::vector<Index> parent;
    parent.reserve(4 * static_cast<std::size_t>(mesh.num_elements()));
    for (Index k = 0; k < mesh.num_elements(); ++k) {
        const auto &el = mesh.element(k);
        const auto &ef = mesh.element_faces(k);
        // edge opposite to local vertex l is ef[l]
        const Index m_bc = midpoint[ef[0]];
        const Index m_ca = midpoint[ef[1]];
        const Index m_ab = midpoint[ef[2]];
        elements.push_back({el[0], m_ab, m_ca});
        elements.push_back({m_ab, el[1], m_bc});
        elements.push_back({m_ca, m_bc, el[2]});
        elements.push_back({m_ab, m_bc, m_ca});
        parent.insert(parent.end(), 4, k);
    }
    return {TriMesh(std::move(vertices), std::move(elements), mesh.level() + 1), std::move(parent)};
}

MeshHierarchy::MeshHierarchy(int coarse_cells, int refinements) : coarse_cells_(coarse_cells)
{
    if (coarse_cells < 1 || refinements < 0)
        fail(ErrorKind::InvalidArgument, "invalid hierarchy parameters");
    levels_.push_back(build_uniform_mesh(coarse_cells));
    parents_.emplace_back();
    for (int j = 0; j < refinements; ++j) {
        auto refined = refine(levels_.back());
        levels_.push_back(std::move(refined.mesh));
        parents_.push_back(std::move(refined.parent));
    }
}

std::array<Index, 4> MeshHierarchy::children_of(int /*j*/, Index k) const
{
    return {4 * k, 4 * k + 1, 4 * k + 2, 4 * k + 3};
}

std::vector<Index> neighborhood(const TriMesh &mesh, Index element, int layers)
{
    if (layers < 1)
        fail(ErrorKind::InvalidArgument, "neighbourhood layer count must be >= 1");
    std::vector<char> in_set(mesh.num_elements(), 0);
    std::vector<Index> result{element};
    in_set[element] = 1;
    std::size_t frontier_begin = 0;
    for (int s = 0; s < layers; ++s) {
        const std::size_t frontier_end = result.size();
        for (std::size_t q = frontier_begin; q < frontier_end; ++q) {
            for (Index v : mesh.element(result[q])) {
                for (Index k : mesh.vertex_elements(v)) {
                    if (!in_set[k]) {
                        in_set[k] = 1;
                        result.push_back(k);
                    }
                }
            }
        }
        frontier_begin = frontier_end;
    }
    std::sort(result.begin(), result.end());
    return result;
}

void write_mesh(std::ostream &out, const TriMesh &mesh)
{
    out.precision(17);
    out << mesh.num_vertices() << '\n';
    for (const auto &p : mesh.vertices())
        out << p.x << ' ' << p.y << '\n';
    out << mesh.num_elements() << '\n';
    for (const auto &el : mesh.elements())
        out << el[0] << ' ' << el[1] << ' ' << el[2] << '\n';
}

} // namespace rda
