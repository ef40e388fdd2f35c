#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "rda/assembly.hpp"
#include "rda/geometry.hpp"
#include "rda/mesh.hpp"
#include "rda/reconstruction.hpp"
#include "rda/solvers.hpp"

namespace rda {

/// Piecewise exact solution u_i with gradient and Laplacian per side.
struct ExactSolution {
    std::function<double(const Point2 &, int)> value;
    std::function<Point2(const Point2 &, int)> gradient;
    std::function<double(const Point2 &, int)> laplacian;
};

struct BenchmarkCase {
    std::string name;
    LevelSet levelset = LevelSet::circle({0.0, 0.0}, 0.6);
    double alpha0 = 10.0;
    double alpha1 = 1.0;
    ExactSolution exact;

    /// f = -alpha lap u, g = u on the boundary, a and b from the traces of u.
    ProblemSpec problem() const;
};

/// u = sin(pi x) sin(pi y) inside, cos(2 pi x) cos(4 pi y) outside.
ExactSolution trigonometric_solution();
/// "example1" (circle r = 0.6) or "example2" (r = 1/2 + sin(5 theta)/7).
BenchmarkCase make_case(const std::string &name, double alpha0 = 10.0, double alpha1 = 1.0);

/// Largest mismatch of a and b against the traces of the exact solution at
/// interface quadrature points of a 40 x 40 mesh.
double jump_consistency_defect(const BenchmarkCase &bench, const ProblemSpec &spec);

enum class PreconditionerKind { Identity, Direct, MultigridI, MultigridII };

PreconditionerKind parse_preconditioner(const std::string &name);
std::string preconditioner_name(PreconditionerKind kind);

/// Everything a run needs, read from a flat INI file.
struct RunConfig {
    std::string case_name = "example1";
    /// custom case only: circle (cx, cy, r), flower (base, amplitude, lobes), affine (nx, ny, offset).
    std::string levelset = "circle";
    std::vector<double> levelset_params;
    double alpha0 = 10.0;
    double alpha1 = 1.0;
    /// 0 selects default_penalty(m).
    double penalty = 0.0;

    std::vector<int> degrees{1, 2, 3};
    std::vector<double> h{0.1, 0.05, 0.025};
    int coarse_cells = 20;

    /// Geometry overrides; 0 keeps the per-degree defaults.
    int volume_order = 0;
    int line_points = 0;
    int depth = 0;
    bool curved = true;

    int threshold = 0;
    bool auto_threshold = true;
    int sigma_layers = 3;

    SolverConfig solver;
    PreconditionerKind preconditioner = PreconditionerKind::MultigridII;
    MassKind mass = MassKind::Physical;

    ConditionMode condition_mode = ConditionMode::Auto;
    bool condition_iterations = true;

    std::vector<double> sweep_alpha0{1.0, 10.0, 1e4};
    int sweep_degree = 2;
    double sweep_h = 0.025;

    std::vector<int> lambda_thresholds{6, 7, 8, 9, 10, 11, 12};
    std::vector<int> lambda_degrees{1};
    double lambda_h = 0.025;

    unsigned seed = 7;
    std::string output = "out";

    void validate() const;
    BenchmarkCase make_benchmark() const;
    GeometryOptions geometry_options(int degree) const;
    double penalty_for(int degree) const;
};

/// Strict INI parsing: unknown sections or keys are rejected.
RunConfig parse_config(std::istream &in);
RunConfig load_config(const std::string &path);
/// Set one "section.key" entry with the same validation as the parser.
void set_config_value(RunConfig &config, const std::string &key, const std::string &value);

/// Cells per side for a mesh size h on (-1, 1)^2.
int cells_for(double h);

/// One discretization of a benchmark case on a uniform mesh with its multigrid hierarchy.
struct DiscreteProblem {
    MeshHierarchy hierarchy;
    MeshGeometry geometry;
    Reconstruction reconstruction;
    ProblemSpec spec;
    HighOrderSystem system;
    std::vector<LevelSystem> levels;

    const TriMesh &mesh() const { return hierarchy.finest(); }
    const SparseMatrix &lowest_order() const { return levels.back().matrix; }
};

DiscreteProblem build_problem(const BenchmarkCase &bench, const RunConfig &config, int degree, double h);

/// Preconditioner for A_m built from the lowest-order levels.
std::unique_ptr<LinearOperator> make_preconditioner(const DiscreteProblem &problem, PreconditionerKind kind,
                                                    const SolverConfig &solver);

struct SolveResult {
    Vec dofs;
    SolveReport report;
};

SolveResult solve_problem(const DiscreteProblem &problem, PreconditionerKind kind, const SolverConfig &solver);

struct ErrorNorms {
    double energy = 0.0;
    double l2 = 0.0;
};

/// Energy-norm and L2 errors of the reconstructed solution.
ErrorNorms compute_errors(const TriMesh &mesh, const MeshGeometry &geometry, const Reconstruction &recon,
                          const ProblemSpec &spec, const Vec &dofs, const ExactSolution &exact);

/// Observed order log(e_coarse / e_fine) / log(h_coarse / h_fine).
double eoc(double e_coarse, double e_fine, double h_coarse, double h_fine);

/// CSV table; rows are streamed to an optional sink as they are produced.
class Table {
public:
    Table(std::vector<std::string> header, std::ostream *sink = nullptr);

    void add(std::vector<std::string> row);
    const std::vector<std::string> &header() const { return header_; }
    const std::vector<std::vector<std::string>> &rows() const { return rows_; }
    /// Column lookup by name.
    std::string at(std::size_t row, const std::string &column) const;
    double number(std::size_t row, const std::string &column) const;
    void write_csv(std::ostream &out) const;

private:
    std::vector<std::string> header_;
    std::vector<std::vector<std::string>> rows_;
    std::ostream *sink_;
};

std::string format_number(double v);

/// case,m,h,dofs,energy_err,energy_eoc,l2_err,l2_eoc,iters,seconds
Table run_convergence(const RunConfig &config, std::ostream *sink = nullptr);
/// m,h,dofs,kappa_Am,kappa_Am_ratio,kappa_precond,kappa_precond_ratio[,cg_iters,mg1_iters,mg2_iters]
Table run_conditioning(const RunConfig &config, std::ostream *sink = nullptr);
/// alpha0,l2_err,pcg_iters
Table run_alpha_sweep(const RunConfig &config, std::ostream *sink = nullptr);
/// m,N,lambda,adequate
Table run_lambda_sweep(const RunConfig &config, std::ostream *sink = nullptr);

struct SingleRun {
    int degree = 1;
    double h = 0.1;
    Index dofs = 0;
    ErrorNorms errors;
    SolveReport report;
};

/// One solve; when `directory` is non-empty, writes A_m, A_0, the right-hand
/// side, the solution, the residual history and the eigenvalue estimates there.
SingleRun run_solve(const RunConfig &config, int degree, double h, const std::string &directory);

} // namespace rda
