#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>

#include "rda/geometry.hpp"

using namespace rda;

namespace {

TriMesh single_triangle(double h)
{
    return TriMesh({{0.0, 0.0}, {h, 0.0}, {0.0, h}}, {{0, 1, 2}});
}

/// Element of the n x n mesh whose square contains p (lower triangle).
Index element_at(int n, const Point2 &p)
{
    const double h = 2.0 / n;
    const int i = std::min(n - 1, static_cast<int>((p.x + 1.0) / h));
    const int j = std::min(n - 1, static_cast<int>((p.y + 1.0) / h));
    return 2 * (j * n + i);
}

} // namespace

TEST_CASE("level set values and gradients")
{
    const auto c = LevelSet::circle({0.0, 0.0}, 0.6);
    CHECK(c({0.6, 0.0}) == doctest::Approx(0.0));
    CHECK(c({0.0, 0.0}) == doctest::Approx(-0.6));
    CHECK(norm(c.gradient({0.3, 0.4}) - Point2{0.6, 0.8}) < 1e-15);

    const auto f = LevelSet::flower(0.5, 1.0 / 7.0, 5);
    // gradient against central differences
    for (const Point2 p : {Point2{0.4, 0.2}, Point2{-0.3, 0.45}, Point2{0.1, -0.6}}) {
        const double e = 1e-6;
        const Point2 fd{(f({p.x + e, p.y}) - f({p.x - e, p.y})) / (2 * e), (f({p.x, p.y + e}) - f({p.x, p.y - e})) / (2 * e)};
        CHECK(norm(fd - f.gradient(p)) < 1e-8);
    }
    const double theta = 0.3;
    const double rho = 0.5 + std::sin(5 * theta) / 7.0;
    CHECK(std::abs(f({rho * std::cos(theta), rho * std::sin(theta)})) < 1e-15);

    const auto a = LevelSet::affine({1.0, 0.0}, 0.5);
    CHECK(a({0.7, 3.0}) == doctest::Approx(0.2));
    CHECK_THROWS_AS(LevelSet::circle({0, 0}, 0.0), Error);
}

TEST_CASE("element classification")
{
    const int n = 40;
    const TriMesh mesh = build_uniform_mesh(n);
    const auto circle = LevelSet::circle({0.0, 0.0}, 0.6);
    CHECK(classify_element(circle, mesh, element_at(n, {0.01, 0.01}), 3) == ElementClass::Interior0);
    CHECK(classify_element(circle, mesh, element_at(n, {0.59, 0.101}), 3) == ElementClass::Cut);
    CHECK(classify_element(circle, mesh, element_at(n, {0.9, 0.9}), 3) == ElementClass::Interior1);

    const auto affine = LevelSet::affine({1.0, 0.0}, 0.5);
    CHECK(classify_element(affine, mesh, element_at(n, {0.8, 0.1}), 3) == ElementClass::Interior1);
    CHECK(classify_element(affine, mesh, element_at(n, {0.1, 0.1}), 3) == ElementClass::Interior0);

    const auto flat = LevelSet::custom([](const Point2 &) { return 0.0; }, [](const Point2 &) { return Point2{1.0, 0.0}; });
    CHECK_THROWS_AS(classify_element(flat, mesh, 0, 2), Error);
}

TEST_CASE("affine cut of a right triangle")
{
    for (const bool curved : {true, false}) {
        const double h = 0.1;
        const TriMesh mesh = single_triangle(h);
        const auto phi = LevelSet::affine({1.0, 0.0}, h / 2);
        GeometryOptions opts;
        opts.curved = curved;
        for (int depth : {0, 2, 3}) {
            opts.depth = depth;
            const auto cq = cut_volume_quadrature(phi, mesh, 0, opts);
            CHECK(std::abs(cq.measure[0] - 3 * h * h / 8) <= 1e-12 * h * h);
            CHECK(std::abs(cq.measure[1] - h * h / 8) <= 1e-12 * h * h);
            CHECK(std::abs(cq.interface_length - h / 2) <= 1e-12 * h);
            CHECK(std::abs(cq.volume[0].total_weight() - cq.measure[0]) <= 1e-15);
            for (const auto &n : cq.normals)
                CHECK(norm(n - Point2{1.0, 0.0}) <= 1e-12);
            for (double w : cq.volume[0].weights)
                CHECK(w > 0.0);
            for (double w : cq.volume[1].weights)
                CHECK(w > 0.0);
            for (std::size_t q = 0; q < cq.interface.size(); ++q)
                CHECK(std::abs(cq.interface.points[q].x - h / 2) <= 1e-14);
            // first moment of side 1: x over the corner triangle with vertices (h/2,0),(h,0),(h/2,h/2)
            double mx = 0.0;
            for (std::size_t q = 0; q < cq.volume[1].size(); ++q)
                mx += cq.volume[1].weights[q] * cq.volume[1].points[q].x;
            CHECK(mx == doctest::Approx(h * h / 8 * (h / 2 + h + h / 2) / 3).epsilon(1e-12));
        }
    }
}

TEST_CASE("face splitting")
{
    const TriMesh mesh({{0.0, 0.0}, {1.0, 0.0}, {0.0, 1.0}}, {{0, 1, 2}});
    Index vertical = -1;
    for (Index f = 0; f < mesh.num_faces(); ++f) {
        const auto &v = mesh.face(f).vertices;
        if ((v[0] == 0 && v[1] == 2) || (v[0] == 2 && v[1] == 0))
            vertical = f;
    }
    REQUIRE(vertical >= 0);
    GeometryOptions opts;
    const auto fq = face_cut_quadrature(LevelSet::affine({0.0, 1.0}, 0.25), mesh, vertical, opts);
    CHECK(fq.roots == 1);
    CHECK(std::abs(fq.length[0] - 0.25) <= 1e-12);
    CHECK(std::abs(fq.length[1] - 0.75) <= 1e-12);
    CHECK(std::abs(fq.part[0].total_weight() + fq.part[1].total_weight() - 1.0) <= 1e-12);
    CHECK(std::abs(fq.full.total_weight() - 1.0) <= 1e-14);

    const auto neg = face_cut_quadrature(LevelSet::affine({1.0, 0.0}, 5.0), mesh, vertical, opts);
    CHECK(neg.part[1].empty());
    CHECK(neg.length[0] == doctest::Approx(1.0));
    const auto pos = face_cut_quadrature(LevelSet::affine({1.0, 0.0}, -5.0), mesh, vertical, opts);
    CHECK(pos.part[0].empty());
    CHECK(pos.length[1] == doctest::Approx(1.0));

    // two crossings along one face
    const auto band = LevelSet::custom([](const Point2 &x) { return (x.y - 0.3) * (x.y - 0.7); },
                                       [](const Point2 &x) { return Point2{0.0, 2 * x.y - 1.0}; });
    const auto two = face_cut_quadrature(band, mesh, vertical, opts);
    CHECK(two.roots == 2);
    CHECK(std::abs(two.length[0] - 0.4) <= 1e-12);
    CHECK(std::abs(two.length[1] - 0.6) <= 1e-12);
}

TEST_CASE("circle geometry at h = 1/40")
{
    const int n = 80;
    const TriMesh mesh = build_uniform_mesh(n);
    const auto phi = LevelSet::circle({0.0, 0.0}, 0.6);
    GeometryOptions opts = GeometryOptions::for_degree(3);
    REQUIRE(opts.depth == 4);
    const auto geo = MeshGeometry::compute(phi, mesh, opts);

    const double pi = std::numbers::pi;
    CHECK(std::abs(geo.total_interface_length() - 2 * pi * 0.6) <= 1e-4 * 2 * pi * 0.6);
    CHECK(std::abs(geo.total_measure(0) - pi * 0.36) <= 1e-5 * pi * 0.36);
    CHECK(std::abs(geo.total_measure(0) + geo.total_measure(1) - 4.0) <= 1e-10);

    Point2 flux{0.0, 0.0};
    for (Index k : geo.cut_elements()) {
        const auto &cq = geo.cut(k);
        CHECK(std::abs(cq.measure[0] + cq.measure[1] - mesh.area(k)) <= 1e-10 * mesh.area(k));
        for (std::size_t q = 0; q < cq.interface.size(); ++q) {
            flux += cq.interface.weights[q] * cq.normals[q];
            CHECK(std::abs(norm(cq.normals[q]) - 1.0) <= 1e-12);
            // normal points from side 0 (inside) to side 1
            CHECK(dot(cq.normals[q], cq.interface.points[q]) > 0.0);
            CHECK(std::abs(phi(cq.interface.points[q])) <= 1e-12);
        }
    }
    CHECK(norm(flux) <= 1e-6);

    for (Index k = 0; k < mesh.num_elements(); ++k) {
        if (geo.is_cut(k))
            continue;
        const int side = geo.element_class(k) == ElementClass::Interior0 ? 0 : 1;
        CHECK(geo.measure(k, side) == mesh.area(k));
        CHECK(geo.measure(k, 1 - side) == 0.0);
    }

    // faces: part lengths partition the face
    for (Index f = 0; f < mesh.num_faces(); ++f) {
        if (geo.face_side(f) >= 0)
            continue;
        const auto &fq = geo.face_cut(f);
        CHECK(std::abs(fq.length[0] + fq.length[1] - mesh.face_length(f)) <= 1e-12);
    }
}

TEST_CASE("straight chords converge at second order in the depth")
{
    const int n = 20;
    const TriMesh mesh = build_uniform_mesh(n);
    const auto phi = LevelSet::circle({0.0, 0.0}, 0.6);
    std::vector<double> area;
    for (int depth = 1; depth <= 4; ++depth) {
        GeometryOptions opts;
        opts.depth = depth;
        opts.curved = false;
        area.push_back(MeshGeometry::compute(phi, mesh, opts).total_measure(0));
    }
    const double exact = std::numbers::pi * 0.36;
    for (int d = 0; d + 2 < 4; ++d) {
        const double ratio = std::abs(area[d + 1] - area[d]) / std::abs(area[d + 2] - area[d + 1]);
        CHECK(ratio >= 2.0);
        CHECK(ratio <= 8.0);
    }
    CHECK(std::abs(area[3] - exact) < std::abs(area[0] - exact));
}

TEST_CASE("flower interface resolves at h = 1/10")
{
    const int n = 20;
    const TriMesh mesh = build_uniform_mesh(n);
    const auto phi = LevelSet::flower(0.5, 1.0 / 7.0, 5);
    const auto geo = MeshGeometry::compute(phi, mesh, GeometryOptions::for_degree(2));
    // area of the star: integral of rho^2 / 2 over theta = pi (0.25 + 1 / 98)
    const double exact = std::numbers::pi * (0.25 + 1.0 / 98.0);
    CHECK(std::abs(geo.total_measure(0) - exact) <= 1e-6);
    CHECK(geo.cut_elements().size() > 0);
}

TEST_CASE("coarsened geometry sums the children")
{
    const MeshHierarchy hier(5, 2);
    const auto phi = LevelSet::circle({0.0, 0.0}, 0.6);
    const auto fine = MeshGeometry::compute(phi, hier.finest(), GeometryOptions::for_degree(1));
    std::vector<Index> parent(hier.finest().num_elements());
    for (Index k = 0; k < hier.finest().num_elements(); ++k)
        parent[k] = hier.parent_of(2, k);
    const auto coarse = MeshGeometry::coarsen(fine, hier.level(1), parent);
    CHECK(coarse.total_measure(0) == doctest::Approx(fine.total_measure(0)).epsilon(1e-13));
    CHECK(coarse.total_interface_length() == doctest::Approx(fine.total_interface_length()).epsilon(1e-13));
    CHECK_FALSE(coarse.has_quadrature());
    for (Index k = 0; k < hier.finest().num_elements(); ++k)
        for (int i = 0; i < 2; ++i)
            if (fine.active(k, i))
                CHECK(coarse.active(parent[k], i));
    CHECK(coarse.cut_elements().size() < fine.cut_elements().size());
}
