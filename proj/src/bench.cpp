#include "rda/bench.hpp"

#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <ostream>
#include <sstream>

#include "rda/quadrature.hpp"

namespace rda {

namespace {

constexpr double pi = std::numbers::pi;

} // namespace

ExactSolution trigonometric_solution()
{
    ExactSolution u;
    u.value = [](const Point2 &x, int side) {
        if (side == 0)
            return std::sin(pi * x.x) * std::sin(pi * x.y);
        return std::cos(2.0 * pi * x.x) * std::cos(4.0 * pi * x.y);
    };
    u.gradient = [](const Point2 &x, int side) -> Point2 {
        if (side == 0)
            return {pi * std::cos(pi * x.x) * std::sin(pi * x.y), pi * std::sin(pi * x.x) * std::cos(pi * x.y)};
        return {-2.0 * pi * std::sin(2.0 * pi * x.x) * std::cos(4.0 * pi * x.y),
                -4.0 * pi * std::cos(2.0 * pi * x.x) * std::sin(4.0 * pi * x.y)};
    };
    u.laplacian = [](const Point2 &x, int side) {
        if (side == 0)
            return -2.0 * pi * pi * std::sin(pi * x.x) * std::sin(pi * x.y);
        return -20.0 * pi * pi * std::cos(2.0 * pi * x.x) * std::cos(4.0 * pi * x.y);
    };
    return u;
}

ProblemSpec BenchmarkCase::problem() const
{
    ProblemSpec p;
    p.alpha0 = alpha0;
    p.alpha1 = alpha1;
    const ExactSolution u = exact;
    const double a0 = alpha0, a1 = alpha1;
    p.source = [u, a0, a1](const Point2 &x, int side) { return -(side == 0 ? a0 : a1) * u.laplacian(x, side); };
    p.boundary = [u](const Point2 &x, int side) { return u.value(x, side); };
    p.jump_a = [u](const Point2 &x) { return u.value(x, 0) - u.value(x, 1); };
    p.jump_b = [u, a0, a1](const Point2 &x, const Point2 &n) {
        return a0 * dot(u.gradient(x, 0), n) - a1 * dot(u.gradient(x, 1), n);
    };
    return p;
}

BenchmarkCase make_case(const std::string &name, double alpha0, double alpha1)
{
    BenchmarkCase c;
    c.name = name;
    c.alpha0 = alpha0;
    c.alpha1 = alpha1;
    c.exact = trigonometric_solution();
    if (name == "example1")
        c.levelset = LevelSet::circle({0.0, 0.0}, 0.6);
    else if (name == "example2")
        c.levelset = LevelSet::flower(0.5, 1.0 / 7.0, 5);
    else
        fail(ErrorKind::Config, "unknown case '" + name + "'");
    return c;
}

double jump_consistency_defect(const BenchmarkCase &bench, const ProblemSpec &spec)
{
    const TriMesh mesh = build_uniform_mesh(40);
    const MeshGeometry g = MeshGeometry::compute(bench.levelset, mesh, GeometryOptions{});
    double defect = 0.0;
    for (Index k : g.cut_elements()) {
        const CutQuadrature &cq = g.cut(k);
        for (std::size_t q = 0; q < cq.interface.size(); ++q) {
            const Point2 &x = cq.interface.points[q];
            const Point2 &n = cq.normals[q];
            const double a = bench.exact.value(x, 0) - bench.exact.value(x, 1);
            const double b =
                bench.alpha0 * dot(bench.exact.gradient(x, 0), n) - bench.alpha1 * dot(bench.exact.gradient(x, 1), n);
            defect = std::max(defect, std::abs(spec.jump_a(x) - a));
            defect = std::max(defect, std::abs(spec.jump_b(x, n) - b));
        }
    }
    return defect;
}

PreconditionerKind parse_preconditioner(const std::string &name)
{
    if (name == "identity" || name == "none")
        return PreconditionerKind::Identity;
    if (name == "direct")
        return PreconditionerKind::Direct;
    if (name == "mg1")
        return PreconditionerKind::MultigridI;
    if (name == "mg2")
        return PreconditionerKind::MultigridII;
    fail(ErrorKind::Config, "unknown preconditioner '" + name + "'");
}

std::string preconditioner_name(PreconditionerKind kind)
{
    switch (kind) {
    case PreconditionerKind::Identity:
        return "identity";
    case PreconditionerKind::Direct:
        return "direct";
    case PreconditionerKind::MultigridI:
        return "mg1";
    case PreconditionerKind::MultigridII:
        return "mg2";
    }
    return "unknown";
}

int cells_for(double h)
{
    if (!(h > 0.0) || h > 2.0)
        fail(ErrorKind::Config, "mesh size must lie in (0, 2]");
    const double n = 2.0 / h;
    const int cells = static_cast<int>(std::lround(n));
    if (std::abs(n - cells) > 1e-8 * n)
        fail(ErrorKind::Config, "mesh size " + format_number(h) + " does not divide the domain");
    return cells;
}

DiscreteProblem build_problem(const BenchmarkCase &bench, const RunConfig &config, int degree, double h)
{
    const int n = cells_for(h);
    int coarse = n;
    int refinements = 0;
    while (coarse % 2 == 0 && coarse / 2 >= config.coarse_cells) {
        coarse /= 2;
        ++refinements;
    }
    DiscreteProblem p{MeshHierarchy(coarse, refinements), MeshGeometry{}, Reconstruction{}, bench.problem(), {}, {}};
    p.geometry = MeshGeometry::compute(bench.levelset, p.mesh(), config.geometry_options(degree));
    ReconstructionOptions ro;
    ro.degree = degree;
    ro.threshold = config.threshold;
    ro.auto_increase = config.auto_threshold;
    ro.sigma_layers = config.sigma_layers;
    p.reconstruction = Reconstruction(p.mesh(), p.geometry, ro);
    p.system = assemble_highorder(p.mesh(), p.geometry, p.reconstruction, p.spec, config.penalty_for(degree));
    p.levels = assemble_level_systems(p.hierarchy, p.geometry, p.spec, config.mass);
    return p;
}

std::unique_ptr<LinearOperator> make_preconditioner(const DiscreteProblem &problem, PreconditionerKind kind,
                                                    const SolverConfig &solver)
{
    switch (kind) {
    case PreconditionerKind::Identity:
        return std::make_unique<IdentityOperator>(problem.system.matrix.rows());
    case PreconditionerKind::Direct:
        return std::make_unique<DirectSolver>(problem.lowest_order());
    case PreconditionerKind::MultigridI:
        return std::make_unique<Multigrid>(Multigrid::from_levels(MultigridKind::Smoothed, problem.levels, solver));
    case PreconditionerKind::MultigridII:
        return std::make_unique<Multigrid>(Multigrid::from_levels(MultigridKind::Geometric, problem.levels, solver));
    }
    fail(ErrorKind::InvalidArgument, "unknown preconditioner");
}

SolveResult solve_problem(const DiscreteProblem &problem, PreconditionerKind kind, const SolverConfig &solver)
{
    const auto start = std::chrono::steady_clock::now();
    SolveResult r;
    if (kind == PreconditionerKind::Identity) {
        r.report = cg(problem.system.matrix, problem.system.rhs, r.dofs, solver);
    } else {
        const auto pre = make_preconditioner(problem, kind, solver);
        r.report = pcg(problem.system.matrix, problem.system.rhs, *pre, r.dofs, solver);
    }
    r.report.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return r;
}

ErrorNorms compute_errors(const TriMesh &mesh, const MeshGeometry &geometry, const Reconstruction &recon,
                          const ProblemSpec &spec, const Vec &dofs, const ExactSolution &exact)
{
    if (!exact.value || !exact.gradient)
        fail(ErrorKind::MissingExact, "exact solution not provided");
    const ActiveMeshes &active = recon.active();
    if (dofs.size() != active.num_dofs())
        fail(ErrorKind::InvalidArgument, "solution size mismatch");
    const int m = recon.degree();
    const int order = 2 * m + 4;
    const int line = m + 4;
    double grad2 = 0.0, jump2 = 0.0, l2 = 0.0;

    std::array<std::vector<Vec>, 2> local;
    for (int i = 0; i < 2; ++i) {
        local[i].resize(active.side(i).size());
        for (Index s = 0; s < active.side(i).size(); ++s)
            local[i][s] = recon.coefficients(i, active.side(i).elements[s], dofs);
    }
    Vec v;
    Mat g;
    auto value = [&](int i, Index k, const Point2 &x, Point2 *grad) {
        recon.basis(k).evaluate(x, v, g);
        const Vec &c = local[i][active.side(i).slot[k]];
        if (grad)
            *grad = {g.col(0).dot(c), g.col(1).dot(c)};
        return v.dot(c);
    };

    for (int i = 0; i < 2; ++i) {
        const double alpha = spec.alpha(i);
        for (Index k : active.side(i).elements) {
            QuadRule own;
            const QuadRule *rule = &own;
            if (geometry.is_cut(k)) {
                rule = &geometry.cut(k).volume[i];
            } else {
                const auto c = mesh.corners(k);
                own = triangle_rule(c[0], c[1], c[2], order);
            }
            for (std::size_t q = 0; q < rule->size(); ++q) {
                const Point2 &x = rule->points[q];
                Point2 gh;
                const double e = exact.value(x, i) - value(i, k, x, &gh);
                const Point2 ge = exact.gradient(x, i) - gh;
                l2 += rule->weights[q] * e * e;
                grad2 += rule->weights[q] * alpha * dot(ge, ge);
            }
        }
        for (Index f : active.side(i).interior_faces) {
            const Face &face = mesh.face(f);
            QuadRule rule;
            append_segment_rule(rule, mesh.vertex(face.vertices[0]), mesh.vertex(face.vertices[1]), line);
            const double scale = alpha / mesh.face_length(f);
            for (std::size_t q = 0; q < rule.size(); ++q) {
                const double j = value(i, face.elements[0], rule.points[q], nullptr) -
                                 value(i, face.elements[1], rule.points[q], nullptr);
                jump2 += scale * rule.weights[q] * j * j;
            }
        }
        for (Index f : active.side(i).boundary_faces) {
            const Face &face = mesh.face(f);
            QuadRule rule;
            append_segment_rule(rule, mesh.vertex(face.vertices[0]), mesh.vertex(face.vertices[1]), line);
            const double scale = alpha / mesh.face_length(f);
            for (std::size_t q = 0; q < rule.size(); ++q) {
                const double j = exact.value(rule.points[q], i) - value(i, face.elements[0], rule.points[q], nullptr);
                jump2 += scale * rule.weights[q] * j * j;
            }
        }
    }
    const double aw = spec.harmonic_alpha();
    for (Index k : active.cut_elements()) {
        const CutQuadrature &cq = geometry.cut(k);
        const double scale = aw / mesh.diameter(k);
        for (std::size_t q = 0; q < cq.interface.size(); ++q) {
            const Point2 &x = cq.interface.points[q];
            const double exact_jump = exact.value(x, 0) - exact.value(x, 1);
            const double j = exact_jump - (value(0, k, x, nullptr) - value(1, k, x, nullptr));
            jump2 += scale * cq.interface.weights[q] * j * j;
        }
    }
    return {std::sqrt(grad2 + jump2), std::sqrt(l2)};
}

double eoc(double e_coarse, double e_fine, double h_coarse, double h_fine)
{
    return std::log(e_coarse / e_fine) / std::log(h_coarse / h_fine);
}

std::string format_number(double v)
{
    std::ostringstream os;
    os.precision(6);
    os << v;
    return os.str();
}

Table::Table(std::vector<std::string> header, std::ostream *sink) : header_(std::move(header)), sink_(sink)
{
    if (sink_) {
        for (std::size_t c = 0; c < header_.size(); ++c)
            *sink_ << (c ? "," : "") << header_[c];
        *sink_ << '\n' << std::flush;
    }
}

void Table::add(std::vector<std::string> row)
{
    row.resize(header_.size());
    if (sink_) {
        for (std::size_t c = 0; c < row.size(); ++c)
            *sink_ << (c ? "," : "") << row[c];
        *sink_ << '\n' << std::flush;
    }
    rows_.push_back(std::move(row));
}

std::string Table::at(std::size_t row, const std::string &column) const
{
    for (std::size_t c = 0; c < header_.size(); ++c)
        if (header_[c] == column)
            return rows_.at(row)[c];
    fail(ErrorKind::InvalidArgument, "no column '" + column + "'");
}

double Table::number(std::size_t row, const std::string &column) const
{
    const std::string s = at(row, column);
    return s.empty() ? std::nan("") : std::stod(s);
}

void Table::write_csv(std::ostream &out) const
{
    for (std::size_t c = 0; c < header_.size(); ++c)
        out << (c ? "," : "") << header_[c];
    out << '\n';
    for (const auto &row : rows_) {
        for (std::size_t c = 0; c < row.size(); ++c)
            out << (c ? "," : "") << row[c];
        out << '\n';
    }
}

namespace {

std::vector<double> sorted_sizes(std::vector<double> h)
{
    std::sort(h.begin(), h.end(), std::greater<>());
    return h;
}

void check_case(const BenchmarkCase &bench)
{
    const double defect = jump_consistency_defect(bench, bench.problem());
    if (!(defect <= 1e-10))
        fail(ErrorKind::InvalidArgument, "jump data inconsistent with the exact solution (defect " +
                                             format_number(defect) + ")");
}

} // namespace

Table run_convergence(const RunConfig &config, std::ostream *sink)
{
    config.validate();
    const BenchmarkCase bench = config.make_benchmark();
    check_case(bench);
    Table table({"case", "m", "h", "dofs", "energy_err", "energy_eoc", "l2_err", "l2_eoc", "iters", "seconds"}, sink);
    const auto hs = sorted_sizes(config.h);
    for (int m : config.degrees) {
        double prev_h = 0.0;
        ErrorNorms prev;
        for (double h : hs) {
            const auto start = std::chrono::steady_clock::now();
            const DiscreteProblem p = build_problem(bench, config, m, h);
            const SolveResult s = solve_problem(p, config.preconditioner, config.solver);
            const ErrorNorms e = compute_errors(p.mesh(), p.geometry, p.reconstruction, p.spec, s.dofs, bench.exact);
            const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
            const bool ratio = prev_h > 0.0 && std::abs(prev_h / h - 2.0) < 1e-9;
            table.add({bench.name, std::to_string(m), format_number(h), std::to_string(p.system.matrix.rows()),
                       format_number(e.energy), ratio ? format_number(eoc(prev.energy, e.energy, prev_h, h)) : "",
                       format_number(e.l2), ratio ? format_number(eoc(prev.l2, e.l2, prev_h, h)) : "",
                       s.report.converged ? std::to_string(s.report.iterations) : ">" + std::to_string(s.report.iterations),
                       format_number(seconds)});
            prev_h = h;
            prev = e;
        }
    }
    return table;
}

Table run_conditioning(const RunConfig &config, std::ostream *sink)
{
    config.validate();
    const BenchmarkCase bench = config.make_benchmark();
    std::vector<std::string> header{"m", "h", "dofs", "kappa_Am", "kappa_Am_ratio", "kappa_precond",
                                    "kappa_precond_ratio"};
    if (config.condition_iterations)
        header.insert(header.end(), {"cg_iters", "mg1_iters", "mg2_iters"});
    Table table(header, sink);
    const auto hs = sorted_sizes(config.h);
    auto iters = [](const SolveReport &r) {
        return r.converged ? std::to_string(r.iterations) : ">" + std::to_string(r.iterations);
    };
    for (int m : config.degrees) {
        double prev_h = 0.0, prev_a = 0.0, prev_p = 0.0;
        for (double h : hs) {
            const DiscreteProblem p = build_problem(bench, config, m, h);
            const ConditionEstimate ka = estimate_condition(p.system.matrix, config.condition_mode);
            const ConditionEstimate kp = estimate_pencil(p.system.matrix, p.lowest_order(), config.condition_mode);
            const bool ratio = prev_h > 0.0;
            std::vector<std::string> row{std::to_string(m),
                                         format_number(h),
                                         std::to_string(p.system.matrix.rows()),
                                         format_number(ka.kappa),
                                         ratio ? format_number(ka.kappa / prev_a) : "",
                                         format_number(kp.kappa),
                                         ratio ? format_number(kp.kappa / prev_p) : ""};
            if (config.condition_iterations) {
                row.push_back(iters(solve_problem(p, PreconditionerKind::Identity, config.solver).report));
                row.push_back(iters(solve_problem(p, PreconditionerKind::MultigridI, config.solver).report));
                row.push_back(iters(solve_problem(p, PreconditionerKind::MultigridII, config.solver).report));
            }
            table.add(row);
            prev_h = h;
            prev_a = ka.kappa;
            prev_p = kp.kappa;
        }
    }
    return table;
}

Table run_alpha_sweep(const RunConfig &config, std::ostream *sink)
{
    config.validate();
    Table table({"alpha0", "l2_err", "pcg_iters"}, sink);
    for (double a0 : config.sweep_alpha0) {
        RunConfig c = config;
        c.alpha0 = a0;
        const BenchmarkCase bench = c.make_benchmark();
        check_case(bench);
        const DiscreteProblem p = build_problem(bench, c, config.sweep_degree, config.sweep_h);
        const SolveResult s = solve_problem(p, config.preconditioner, config.solver);
        const ErrorNorms e = compute_errors(p.mesh(), p.geometry, p.reconstruction, p.spec, s.dofs, bench.exact);
        table.add({format_number(a0), format_number(e.l2),
                   s.report.converged ? std::to_string(s.report.iterations)
                                      : ">" + std::to_string(s.report.iterations)});
    }
    return table;
}

Table run_lambda_sweep(const RunConfig &config, std::ostream *sink)
{
    config.validate();
    const BenchmarkCase bench = config.make_benchmark();
    Table table({"m", "N", "lambda", "adequate"}, sink);
    const TriMesh mesh = build_uniform_mesh(cells_for(config.lambda_h));
    for (int m : config.lambda_degrees) {
        const MeshGeometry g = MeshGeometry::compute(bench.levelset, mesh, config.geometry_options(m));
        const ActiveMeshes active(mesh, g);
        const SigmaMap sigma = build_sigma_map(mesh, active, config.sigma_layers);
        for (int n : config.lambda_thresholds) {
            const StabilityReport r = stability_report(mesh, active, sigma, m, n);
            table.add({std::to_string(m), std::to_string(n), format_number(r.lambda_m), r.adequate ? "1" : "0"});
        }
    }
    return table;
}

SingleRun run_solve(const RunConfig &config, int degree, double h, const std::string &directory)
{
    config.validate();
    const BenchmarkCase bench = config.make_benchmark();
    check_case(bench);
    const DiscreteProblem p = build_problem(bench, config, degree, h);
    const SolveResult s = solve_problem(p, config.preconditioner, config.solver);
    SingleRun run;
    run.degree = degree;
    run.h = h;
    run.dofs = p.system.matrix.rows();
    run.report = s.report;
    run.errors = compute_errors(p.mesh(), p.geometry, p.reconstruction, p.spec, s.dofs, bench.exact);
    if (!directory.empty()) {
        std::filesystem::create_directories(directory);
        auto open = [&](const std::string &name) {
            std::ofstream out(std::filesystem::path(directory) / name);
            if (!out)
                fail(ErrorKind::Io, "cannot write " + name + " in " + directory);
            return out;
        };
        {
            auto out = open("A_m.txt");
            write_matrix(out, p.system.matrix);
        }
        {
            auto out = open("A_0.txt");
            write_matrix(out, p.lowest_order());
        }
        {
            auto out = open("rhs.txt");
            write_vector(out, p.system.rhs);
        }
        {
            auto out = open("solution.txt");
            write_vector(out, s.dofs);
        }
        {
            auto out = open("residuals.csv");
            s.report.write_csv(out);
        }
        {
            auto out = open("eigen.txt");
            s.report.write_eigen(out);
            out << "energy_err=" << run.errors.energy << '\n' << "l2_err=" << run.errors.l2 << '\n';
        }
    }
    return run;
}

} // namespace rda
