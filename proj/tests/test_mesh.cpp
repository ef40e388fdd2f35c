#include <doctest.h>

#include <algorithm>
#include <map>
#include <set>
#include <sstream>

#include "rda/mesh.hpp"

using namespace rda;

namespace {

std::set<Index> brute_delta1(const TriMesh &mesh, Index k)
{
    std::set<Index> out;
    const auto &el = mesh.element(k);
    for (Index j = 0; j < mesh.num_elements(); ++j) {
        const auto &other = mesh.element(j);
        for (Index v : el)
            if (std::find(other.begin(), other.end(), v) != other.end())
                out.insert(j);
    }
    return out;
}

std::set<Index> brute_delta(const TriMesh &mesh, Index k, int s)
{
    std::set<Index> cur{k};
    for (int layer = 0; layer < s; ++layer) {
        std::set<Index> next;
        for (Index q : cur) {
            auto d = brute_delta1(mesh, q);
            next.insert(d.begin(), d.end());
        }
        cur = std::move(next);
    }
    return cur;
}

bool point_in_triangle(const Point2 &p, const std::array<Point2, 3> &t, double tol)
{
    for (int l = 0; l < 3; ++l)
        if (cross(t[(l + 1) % 3] - t[l], p - t[l]) < -tol)
            return false;
    return true;
}

double total_area(const TriMesh &mesh)
{
    double a = 0.0;
    for (Index k = 0; k < mesh.num_elements(); ++k)
        a += mesh.area(k);
    return a;
}

} // namespace

TEST_CASE("uniform mesh counts")
{
    const TriMesh m1 = build_uniform_mesh(1);
    CHECK(m1.num_elements() == 2);
    CHECK(m1.num_vertices() == 4);
    CHECK(m1.num_faces() == 5);
    int boundary = 0;
    for (const auto &f : m1.faces())
        boundary += f.boundary() ? 1 : 0;
    CHECK(boundary == 4);

    const TriMesh m20 = build_uniform_mesh(20);
    CHECK(m20.num_elements() == 800);
    CHECK(m20.num_vertices() == 441);
    CHECK(m20.diameter(0) == doctest::Approx(std::sqrt(2.0) * 0.1).epsilon(1e-14));

    CHECK_THROWS_AS(build_uniform_mesh(0), Error);
}

TEST_CASE("face adjacency and orientation")
{
    const TriMesh m = build_uniform_mesh(2);
    for (Index f = 0; f < m.num_faces(); ++f) {
        const Face &face = m.face(f);
        const Point2 mid = 0.5 * (m.vertex(face.vertices[0]) + m.vertex(face.vertices[1]));
        const bool on_boundary = std::abs(std::abs(mid.x) - 1.0) < 1e-14 || std::abs(std::abs(mid.y) - 1.0) < 1e-14;
        CHECK(face.boundary() == on_boundary);
        CHECK(face.elements[0] >= 0);
        if (!face.boundary()) {
            CHECK(face.elements[1] >= 0);
            CHECK(face.elements[0] != face.elements[1]);
        }
    }
    for (Index k = 0; k < m.num_elements(); ++k)
        CHECK(m.area(k) > 0.0);
    CHECK(total_area(m) == doctest::Approx(4.0).epsilon(1e-12));
}

TEST_CASE("face normals point out of the first element")
{
    const TriMesh m = build_uniform_mesh(3);
    for (Index f = 0; f < m.num_faces(); ++f) {
        const Point2 n = m.face_normal(f);
        const Face &face = m.face(f);
        const Point2 mid = 0.5 * (m.vertex(face.vertices[0]) + m.vertex(face.vertices[1]));
        CHECK(norm(n) == doctest::Approx(1.0).epsilon(1e-14));
        CHECK(dot(n, mid - m.barycenter(face.elements[0])) > 0.0);
    }
}

TEST_CASE("red refinement")
{
    const TriMesh coarse = build_uniform_mesh(1);
    const auto refined = refine(coarse);
    CHECK(refined.mesh.num_elements() == 8);
    std::map<Index, int> fiber;
    for (Index p : refined.parent)
        ++fiber[p];
    CHECK(fiber.size() == 2);
    for (const auto &[p, count] : fiber)
        CHECK(count == 4);

    for (Index p = 0; p < coarse.num_elements(); ++p) {
        double child_area = 0.0;
        for (Index c = 4 * p; c < 4 * p + 4; ++c) {
            CHECK(refined.parent[c] == p);
            child_area += refined.mesh.area(c);
            CHECK(refined.mesh.diameter(c) == doctest::Approx(0.5 * coarse.diameter(p)).epsilon(1e-14));
            for (const Point2 &v : refined.mesh.corners(c))
                CHECK(point_in_triangle(v, coarse.corners(p), 1e-12));
        }
        CHECK(std::abs(child_area - coarse.area(p)) <= 1e-14 * coarse.area(p));
    }

    const auto twice = refine(refined.mesh);
    CHECK(twice.mesh.max_diameter() == doctest::Approx(coarse.max_diameter() / 4.0).epsilon(1e-14));
}

TEST_CASE("hierarchy matches direct construction")
{
    const MeshHierarchy hier(5, 3);
    CHECK(hier.num_levels() == 4);
    CHECK(hier.finest().num_elements() == 3200);
    const TriMesh direct = build_uniform_mesh(40);
    const double h = 2.0 / 40;

    for (const Point2 &v : hier.finest().vertices()) {
        const double i = std::round((v.x + 1.0) / h);
        const double j = std::round((v.y + 1.0) / h);
        const Point2 &w = direct.vertex(static_cast<Index>(j) * 41 + static_cast<Index>(i));
        CHECK(distance(v, w) <= 1e-14);
    }

    // each finest element coincides with one direct element (matched by barycenter)
    std::map<std::pair<long, long>, Index> by_center;
    for (Index k = 0; k < direct.num_elements(); ++k) {
        const Point2 c = direct.barycenter(k);
        by_center[{std::lround(c.x * 3 / h), std::lround(c.y * 3 / h)}] = k;
    }
    CHECK(by_center.size() == 3200);
    std::set<Index> hit;
    for (Index k = 0; k < hier.finest().num_elements(); ++k) {
        const Point2 c = hier.finest().barycenter(k);
        auto it = by_center.find({std::lround(c.x * 3 / h), std::lround(c.y * 3 / h)});
        REQUIRE(it != by_center.end());
        CHECK(distance(direct.barycenter(it->second), c) <= 1e-14);
        hit.insert(it->second);
    }
    CHECK(hit.size() == 3200);

    for (int j = 1; j < hier.num_levels(); ++j) {
        CHECK(hier.level(j).max_diameter() == doctest::Approx(hier.level(0).max_diameter() / (1 << j)).epsilon(1e-13));
        for (Index k = 0; k < hier.level(j).num_elements(); ++k) {
            const auto ch = hier.children_of(j - 1, hier.parent_of(j, k));
            CHECK(std::find(ch.begin(), ch.end(), k) != ch.end());
        }
        CHECK(total_area(hier.level(j)) == doctest::Approx(4.0).epsilon(1e-12));
    }
    CHECK_THROWS_AS(MeshHierarchy(0, 2), Error);
}

TEST_CASE("neighbourhood of an interior element has 13 members")
{
    const TriMesh m = build_uniform_mesh(10);
    const Index k = 2 * (5 * 10 + 5);
    const auto d = neighborhood(m, k, 1);
    CHECK(d.size() == 13);
    const auto oracle = brute_delta1(m, k);
    CHECK(std::set<Index>(d.begin(), d.end()) == oracle);

    const auto corner = neighborhood(m, 0, 1);
    CHECK(std::find(corner.begin(), corner.end(), 0) != corner.end());
    CHECK_THROWS_AS(neighborhood(m, 0, 0), Error);
}

TEST_CASE("neighbourhood layers are monotone, symmetric and match recursion")
{
    const TriMesh m = build_uniform_mesh(5);
    std::vector<std::vector<std::vector<Index>>> layers(4);
    for (int s = 1; s <= 4; ++s)
        for (Index k = 0; k < m.num_elements(); ++k)
            layers[s - 1].push_back(neighborhood(m, k, s));

    for (Index k = 0; k < m.num_elements(); ++k) {
        for (int s = 1; s <= 3; ++s) {
            const auto &a = layers[s - 1][k];
            const auto &b = layers[s][k];
            CHECK(std::includes(b.begin(), b.end(), a.begin(), a.end()));
        }
        for (int s = 1; s <= 2; ++s) {
            const auto oracle = brute_delta(m, k, s);
            CHECK(std::set<Index>(layers[s - 1][k].begin(), layers[s - 1][k].end()) == oracle);
        }
    }
    for (int s = 1; s <= 3; ++s)
        for (Index k = 0; k < m.num_elements(); ++k)
            for (Index q : layers[s - 1][k]) {
                const auto &back = layers[s - 1][q];
                CHECK(std::binary_search(back.begin(), back.end(), k));
            }
}

TEST_CASE("face handshake")
{
    const TriMesh m = build_uniform_mesh(6);
    for (const auto &f : m.faces()) {
        if (f.boundary())
            continue;
        const auto a = neighborhood(m, f.elements[0], 1);
        const auto b = neighborhood(m, f.elements[1], 1);
        CHECK(std::binary_search(a.begin(), a.end(), f.elements[1]));
        CHECK(std::binary_search(b.begin(), b.end(), f.elements[0]));
    }
}

TEST_CASE("mesh dump format")
{
    std::ostringstream out;
    write_mesh(out, build_uniform_mesh(1));
    std::istringstream in(out.str());
    int nv = 0;
    in >> nv;
    CHECK(nv == 4);
    double x = 0, y = 0;
    for (int i = 0; i < nv; ++i)
        in >> x >> y;
    int ne = 0;
    in >> ne;
    CHECK(ne == 2);
    int a = 0, b = 0, c = 0;
    in >> a >> b >> c;
    CHECK(a == 0);
    CHECK(b == 1);
    CHECK(c == 3);
}
