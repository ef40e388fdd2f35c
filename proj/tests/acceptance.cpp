// Acceptance run: one PASS/FAIL line per criterion. Exit status is 0 once all
// criteria were evaluated; --strict turns any FAIL into exit status 1.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <functional>
#include <iostream>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "rda/bench.hpp"

using namespace rda;

namespace {

struct Outcome {
    bool pass = false;
    std::string detail;
};

std::string fmt(double v, int precision = 4)
{
    std::ostringstream os;
    os.precision(precision);
    os << v;
    return os.str();
}

Vec random_vec(Index n, unsigned seed)
{
    std::mt19937 rng(seed);
    std::normal_distribution<double> g;
    Vec v(n);
    for (Index i = 0; i < n; ++i)
        v[i] = g(rng);
    return v;
}

int count(const std::string &cell)
{
    return std::stoi(cell[0] == '>' ? cell.substr(1) : cell);
}

bool converged(const std::string &cell) { return !cell.empty() && cell[0] != '>'; }

const Table &conditioning_table()
{
    static const Table table = [] {
        RunConfig c;
        c.degrees = {1, 2};
        c.h = {0.1, 0.05, 0.025};
        return run_conditioning(c);
    }();
    return table;
}

std::size_t row_of(const Table &t, int m, double h)
{
    for (std::size_t r = 0; r < t.rows().size(); ++r)
        if (t.at(r, "m") == std::to_string(m) && std::abs(t.number(r, "h") - h) < 1e-12)
            return r;
    fail(ErrorKind::InvalidArgument, "missing table row");
}

Outcome convergence_rates()
{
    Outcome o{true, ""};
    for (const char *name : {"example1", "example2"})
        for (int m : {1, 2, 3}) {
            RunConfig c;
            c.case_name = name;
            c.degrees = {m};
            c.h = {0.1, 0.05, 0.025};
            if (m == 1)
                c.h.push_back(0.0125);
            const Table t = run_convergence(c);
            const std::size_t last = t.rows().size() - 1;
            const double ee = t.number(last, "energy_eoc"), le = t.number(last, "l2_eoc");
            const bool ok = ee >= m - 0.25 && le >= m + 0.75;
            o.pass = o.pass && ok;
            o.detail += std::string(o.detail.empty() ? "" : "; ") + name + " m=" + std::to_string(m) +
                        " energy " + fmt(ee, 3) + " L2 " + fmt(le, 3);
        }
    return o;
}

Outcome conditioning_growth()
{
    const Table &t = conditioning_table();
    Outcome o{true, "kappa(A_m) ratios"};
    for (int m : {1, 2})
        for (double h : {0.05, 0.025}) {
            const double r = t.number(row_of(t, m, h), "kappa_Am_ratio");
            o.pass = o.pass && r >= 3.0 && r <= 6.0;
            o.detail += " m=" + std::to_string(m) + ":" + fmt(r, 3);
        }
    return o;
}

Outcome preconditioner_optimality()
{
    const Table &t = conditioning_table();
    Outcome o{true, ""};
    for (int m : {1, 2}) {
        const std::size_t r = row_of(t, m, 0.025);
        const double pre = t.number(r, "kappa_precond_ratio");
        const double plain = t.number(r, "kappa_Am_ratio");
        o.pass = o.pass && pre <= 1.5 && plain >= 3.0 && plain <= 5.0;
        o.detail += std::string(o.detail.empty() ? "" : "; ") + "m=" + std::to_string(m) + " kappa(A0^-1 A_m) " +
                    fmt(t.number(row_of(t, m, 0.05), "kappa_precond")) + " -> " + fmt(t.number(r, "kappa_precond")) +
                    " (x" + fmt(pre, 3) + "), kappa(A_m) x" + fmt(plain, 3);
    }
    return o;
}

Outcome pcg_robustness()
{
    const Table &t = conditioning_table();
    Outcome o{true, ""};
    for (int m : {1, 2}) {
        const std::size_t r10 = row_of(t, m, 0.1), r20 = row_of(t, m, 0.05), r40 = row_of(t, m, 0.025);
        std::string part = "m=" + std::to_string(m);
        for (const char *col : {"mg1_iters", "mg2_iters"}) {
            const std::string a = t.at(r20, col), b = t.at(r40, col);
            const bool ok = converged(a) && converged(b) && count(b) <= 1.3 * count(a);
            o.pass = o.pass && ok;
            part += std::string(" ") + col + " " + a + "->" + b;
        }
        const std::string c10 = t.at(r10, "cg_iters"), c20 = t.at(r20, "cg_iters"), c40 = t.at(r40, "cg_iters");
        const bool doubling = converged(c10) && converged(c20) && converged(c40) && count(c20) >= 2 * count(c10) &&
                              count(c40) >= 2 * count(c20);
        o.pass = o.pass && doubling;
        part += " cg " + c10 + "->" + c20 + "->" + c40 + " (x" + fmt(double(count(c20)) / count(c10), 3) + ", x" +
                fmt(double(count(c40)) / count(c20), 3) + ")";
        o.detail += (o.detail.empty() ? "" : "; ") + part;
    }
    return o;
}

Outcome alpha_robustness()
{
    RunConfig c;
    c.sweep_alpha0 = {1.0, 10.0, 1e4};
    c.sweep_degree = 2;
    c.sweep_h = 0.025;
    const Table t = run_alpha_sweep(c);
    double emin = 1e300, emax = 0.0;
    int imin = 1 << 30, imax = 0;
    bool all_converged = true;
    std::string detail;
    for (std::size_t r = 0; r < t.rows().size(); ++r) {
        const double e = t.number(r, "l2_err");
        const std::string it = t.at(r, "pcg_iters");
        all_converged = all_converged && converged(it);
        emin = std::min(emin, e);
        emax = std::max(emax, e);
        imin = std::min(imin, count(it));
        imax = std::max(imax, count(it));
        detail += (detail.empty() ? "" : ", ") + std::string("alpha0=") + t.at(r, "alpha0") + ": L2 " +
                  t.at(r, "l2_err") + " iters " + it;
    }
    const double er = emax / emin, ir = double(imax) / imin;
    return {all_converged && er <= 1.3 && ir <= 1.5,
            detail + " (error spread x" + fmt(er, 3) + ", iteration spread x" + fmt(ir, 3) + ")"};
}

Outcome reconstruction_exactness()
{
    const TriMesh mesh = build_uniform_mesh(40);
    const auto phi = LevelSet::circle({0.0, 0.0}, 0.6);
    std::mt19937 rng(5);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    double cons_err = 0.0, poly_err = 0.0;
    bool dims = true;
    for (int m = 0; m <= 3; ++m) {
        const MeshGeometry g = MeshGeometry::compute(phi, mesh, GeometryOptions::for_degree(m));
        ReconstructionOptions ro;
        ro.degree = m;
        const Reconstruction r(mesh, g, ro);
        const ActiveMeshes &a = r.active();
        Index expected = 0;
        for (Index k = 0; k < mesh.num_elements(); ++k)
            expected += (g.measure(k, 0) > 0.0) + (g.measure(k, 1) > 0.0);
        dims = dims && a.num_dofs() == expected;

        Vec v(a.num_dofs());
        for (Index d = 0; d < v.size(); ++d)
            v[d] = u(rng);
        for (int i = 0; i < 2; ++i)
            for (Index k : a.side(i).elements)
                for (Index c : r.patch(i, k).constraints)
                    cons_err = std::max(cons_err, std::abs(r.evaluate(i, k, v, mesh.barycenter(c)) - v[a.dof(i, c)]));

        // random polynomial of degree m
        std::vector<std::array<double, 3>> terms;
        for (int deg = 0; deg <= m; ++deg)
            for (int px = deg; px >= 0; --px)
                terms.push_back({u(rng), double(px), double(deg - px)});
        auto p = [&](const Point2 &x) {
            double s = 0.0;
            for (const auto &t : terms)
                s += t[0] * std::pow(x.x, t[1]) * std::pow(x.y, t[2]);
            return s;
        };
        Vec w(a.num_dofs());
        for (Index d = 0; d < w.size(); ++d)
            w[d] = p(mesh.barycenter(a.dof_element(d)));
        for (int i = 0; i < 2; ++i)
            for (Index k : a.side(i).elements) {
                const Patch &pt = r.patch(i, k);
                if (std::any_of(pt.members.begin(), pt.members.end(), [&](Index q) { return g.is_cut(q); }))
                    continue;
                const auto c = mesh.corners(k);
                for (const Point2 &x : {mesh.barycenter(k), 0.5 * (c[0] + c[1]), 0.2 * c[0] + 0.7 * c[2] + 0.1 * c[1]})
                    poly_err = std::max(poly_err, std::abs(r.evaluate(i, k, w, x) - p(x)));
            }
    }
    return {cons_err <= 1e-12 && poly_err <= 1e-12 && dims,
            "constraint error " + fmt(cons_err, 3) + ", reproduction error " + fmt(poly_err, 3) +
                ", dofs = #T0 + #T1 " + (dims ? "for m=0..3" : "violated")};
}

Outcome geometry_oracles()
{
    double affine = 0.0;
    {
        const double h = 0.1;
        const TriMesh tri({{0.0, 0.0}, {h, 0.0}, {0.0, h}}, {{0, 1, 2}});
        const auto cq = cut_volume_quadrature(LevelSet::affine({1.0, 0.0}, h / 2), tri, 0, GeometryOptions{});
        affine = std::max({affine, std::abs(cq.measure[0] - 3 * h * h / 8) / (h * h),
                           std::abs(cq.measure[1] - h * h / 8) / (h * h), std::abs(cq.interface_length - h / 2) / h});
    }
    {
        // x = 0.33 and the oblique line 0.6 x + 0.8 y = 0.13 on the 40 x 40 mesh
        const TriMesh mesh = build_uniform_mesh(40);
        const auto g = MeshGeometry::compute(LevelSet::affine({1.0, 0.0}, 0.33), mesh, GeometryOptions{});
        affine = std::max({affine, std::abs(g.total_measure(0) - 2.0 * 1.33) / 4.0,
                           std::abs(g.total_interface_length() - 2.0) / 2.0});
        const auto o = MeshGeometry::compute(LevelSet::affine({0.6, 0.8}, 0.13), mesh, GeometryOptions{});
        // the line crosses y = 1 at x = -1.1 / 0.6 < -1 and y = -1 at x = 0.93 / 0.6 > 1: it leaves through x = +-1
        const double y_left = (0.13 + 0.6) / 0.8, y_right = (0.13 - 0.6) / 0.8;
        const double below = 2.0 * (0.5 * (y_left + y_right) + 1.0);
        const double length = std::hypot(2.0, y_left - y_right);
        affine = std::max({affine, std::abs(o.total_measure(0) - below) / 4.0,
                           std::abs(o.total_interface_length() - length) / length});
    }

    const double pi = std::numbers::pi;
    const TriMesh mesh = build_uniform_mesh(80);
    GeometryOptions opts = GeometryOptions::for_degree(1);
    opts.depth = 4;
    const auto g = MeshGeometry::compute(LevelSet::circle({0.0, 0.0}, 0.6), mesh, opts);
    const double area = std::abs(g.total_measure(0) - pi * 0.36) / (pi * 0.36);
    const double len = std::abs(g.total_interface_length() - 1.2 * pi) / (1.2 * pi);
    Point2 flux{0.0, 0.0};
    for (Index k : g.cut_elements()) {
        const auto &cq = g.cut(k);
        for (std::size_t q = 0; q < cq.interface.size(); ++q)
            flux += cq.interface.weights[q] * cq.normals[q];
    }
    const double f = norm(flux) / (1.2 * pi);
    return {affine <= 1e-12 && area <= 1e-4 && len <= 1e-4 && f <= 1e-8,
            "affine relative error " + fmt(affine, 3) + ", circle area " + fmt(area, 3) + " length " + fmt(len, 3) +
                " relative, |closed normal integral| / |Gamma| " + fmt(f, 3)};
}

Outcome patch_test()
{
    double worst = 0.0;
    std::string detail;
    const std::vector<std::pair<LevelSet, std::string>> lines{{LevelSet::affine({1.0, 0.0}, 0.33), "x = 0.33"},
                                                               {LevelSet::affine({0.6, 0.8}, 0.13), "oblique"}};
    for (const auto &[phi, label] : lines) {
        BenchmarkCase b;
        b.name = "affine";
        b.levelset = phi;
        b.alpha0 = 10.0;
        b.alpha1 = 1.0;
        b.exact.value = [](const Point2 &x, int side) {
            return side == 0 ? 1.0 + 2.0 * x.x - x.y : 0.5 - x.x + 3.0 * x.y;
        };
        b.exact.gradient = [](const Point2 &, int side) { return side == 0 ? Point2{2.0, -1.0} : Point2{-1.0, 3.0}; };
        b.exact.laplacian = [](const Point2 &, int) { return 0.0; };
        RunConfig c;
        const DiscreteProblem p = build_problem(b, c, 1, 0.1);
        const Vec x = DirectSolver(p.system.matrix).solve(p.system.rhs);
        const ErrorNorms e = compute_errors(p.mesh(), p.geometry, p.reconstruction, p.spec, x, b.exact);
        worst = std::max(worst, e.energy);
        detail += (detail.empty() ? "" : ", ") + label + ": " + fmt(e.energy, 3);
    }
    return {worst <= 1e-9, "energy error " + detail};
}

Outcome multigrid_admissibility()
{
    auto levels_for = [](int refinements) {
        const MeshHierarchy h(5, refinements);
        const MeshGeometry g =
            MeshGeometry::compute(LevelSet::circle({0.0, 0.0}, 0.6), h.finest(), GeometryOptions::for_degree(1));
        return assemble_level_systems(h, g, make_case("example1").problem(), MassKind::Physical);
    };
    bool ok = true;
    double lin = 0.0, sym = 0.0, margin = 0.0;
    {
        const auto levels = levels_for(2);
        const Vec &d = levels.back().mass;
        for (MultigridKind kind : {MultigridKind::Smoothed, MultigridKind::Geometric}) {
            const Multigrid mg = Multigrid::from_levels(kind, levels, SolverConfig{});
            const Vec z1 = random_vec(mg.size(), 1), z2 = random_vec(mg.size(), 2);
            Vec y1, y2, y12;
            mg.apply_operator_form(z1, y1);
            mg.apply_operator_form(z2, y2);
            mg.apply_operator_form(z1 - 0.7 * z2, y12);
            lin = std::max(lin, (y12 - y1 + 0.7 * y2).norm() / y12.norm());
            const double l = y1.dot(d.cwiseProduct(z2)), r = z1.dot(d.cwiseProduct(y2));
            sym = std::max(sym, std::abs(l - r) / std::abs(l));
        }
    }
    {
        const Multigrid mg = Multigrid::from_levels(MultigridKind::Smoothed, levels_for(3), SolverConfig{});
        const auto rho = mg.level_spectral_radii();
        margin = 1.0;
        for (int j = 0; j < mg.num_levels(); ++j)
            margin = std::min(margin, 1.0 - rho[j] / mg.level(j).lambda);
    }
    std::string rates;
    double worst = 0.0;
    for (int j = 1; j <= 4; ++j) {
        const auto levels = levels_for(j);
        const Multigrid mg = Multigrid::from_levels(MultigridKind::Smoothed, levels, SolverConfig{});
        const double rate = stationary_contraction(levels.back().matrix, mg);
        worst = std::max(worst, rate);
        rates += (rates.empty() ? "" : ", ") + fmt(rate, 3);
    }
    ok = lin <= 1e-10 && sym <= 1e-10 && margin > 0.0 && worst < 0.95;
    return {ok, "linearity " + fmt(lin, 3) + ", D-symmetry " + fmt(sym, 3) + ", min 1 - rho_j/lambda_j " +
                    fmt(margin, 3) + ", MG-I contraction J=1..4: " + rates};
}

Outcome lambda_plateau()
{
    RunConfig c;
    c.lambda_degrees = {1};
    c.lambda_thresholds = {6, 10};
    c.lambda_h = 0.025;
    const Table t = run_lambda_sweep(c);
    const double l6 = t.number(0, "lambda"), l10 = t.number(1, "lambda");
    const double growth = l10 / l6 - 1.0;

    const TriMesh mesh = build_uniform_mesh(80);
    const auto phi = LevelSet::circle({0.0, 0.0}, 0.6);
    bool adequate = true;
    std::string thresholds;
    for (int m = 1; m <= 3; ++m) {
        ReconstructionOptions ro;
        ro.degree = m;
        const Reconstruction r(mesh, MeshGeometry::compute(phi, mesh, GeometryOptions::for_degree(m)), ro);
        adequate = adequate && r.stability().adequate;
        thresholds += (thresholds.empty() ? "" : ", ") + std::string("m=") + std::to_string(m) + " N=" +
                      std::to_string(r.threshold()) + (r.stability().adequate ? " adequate" : " inadequate");
    }
    return {growth <= 0.10 && adequate, "Lambda_1 " + fmt(l6) + " (N=6) -> " + fmt(l10) + " (N=10), growth " +
                                            fmt(100.0 * growth, 3) + "%; " + thresholds};
}

} // namespace

int main(int argc, char **argv)
{
    const bool strict = argc > 1 && std::strcmp(argv[1], "--strict") == 0;
    const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
        {"convergence rates", convergence_rates},
        {"conditioning growth", conditioning_growth},
        {"preconditioner optimality", preconditioner_optimality},
        {"PCG robustness", pcg_robustness},
        {"coefficient robustness", alpha_robustness},
        {"reconstruction exactness", reconstruction_exactness},
        {"geometry oracles", geometry_oracles},
        {"affine patch test", patch_test},
        {"multigrid admissibility", multigrid_admissibility},
        {"stability plateau", lambda_plateau},
    };
    const auto start = std::chrono::steady_clock::now();
    int passed = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        const auto t0 = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = criteria[i].second();
        } catch (const std::exception &e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        const double s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        passed += o.pass;
        std::printf("%s %2zu %s: %s [%.1f s]\n", o.pass ? "PASS" : "FAIL", i + 1, criteria[i].first.c_str(),
                    o.detail.c_str(), s);
        std::fflush(stdout);
    }
    const double total = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    std::printf("acceptance complete: %d/%zu criteria passed in %.1f s\n", passed, criteria.size(), total);
    return strict && passed != static_cast<int>(criteria.size()) ? 1 : 0;
}
