#pragma once

#include <functional>
#include <iosfwd>
#include <memory>
#include <vector>

#include "rda/assembly.hpp"
#include "rda/common.hpp"

namespace rda {

struct SolverConfig {
    /// Relative residual ||b - A x|| / ||b||.
    double tol = 1e-8;
    int max_iter = 3000;
    /// Forward Gauss-Seidel sweeps before, backward sweeps after the coarse correction.
    int pre_sweeps = 1;
    int post_sweeps = 1;
    /// Start vector seed of the power iteration behind the smoothed hierarchy.
    unsigned seed = 7;

    void validate() const;
};

struct SolveReport {
    int iterations = 0;
    double relative_residual = 0.0;
    bool converged = false;
    /// Relative residual after each iteration; entry 0 is the initial one.
    std::vector<double> history;
    /// Extreme Ritz values of the (preconditioned) operator from the CG coefficients.
    double lambda_min = 0.0;
    double lambda_max = 0.0;
    double seconds = 0.0;

    void write_csv(std::ostream &out) const;
    void write_eigen(std::ostream &out) const;
};

/// Fixed linear map y = B x.
class LinearOperator {
public:
    virtual ~LinearOperator() = default;
    virtual Index size() const = 0;
    virtual void apply(const Vec &x, Vec &y) const = 0;
};

class IdentityOperator : public LinearOperator {
public:
    explicit IdentityOperator(Index n) : n_(n) {}
    Index size() const override { return n_; }
    void apply(const Vec &x, Vec &y) const override { y = x; }

private:
    Index n_;
};

/// Sparse Cholesky factorization; apply() solves A y = x.
class DirectSolver : public LinearOperator {
public:
    explicit DirectSolver(const SparseMatrix &a);
    ~DirectSolver() override;
    DirectSolver(DirectSolver &&) noexcept;
    DirectSolver &operator=(DirectSolver &&) noexcept;

    Index size() const override;
    void apply(const Vec &x, Vec &y) const override;
    Vec solve(const Vec &x) const;
    /// y = L^{-1} P x and y = P^T L^{-T} x for P A P^T = L L^T.
    Vec solve_lower(const Vec &x) const;
    Vec solve_upper(const Vec &x) const;

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

/// Conjugate gradients from the initial guess in x.
SolveReport cg(const SparseMatrix &a, const Vec &b, Vec &x, const SolverConfig &config);
/// Preconditioned conjugate gradients with z = B r.
SolveReport pcg(const SparseMatrix &a, const Vec &b, const LinearOperator &preconditioner, Vec &x,
                const SolverConfig &config);

/// Estimate of rho(D^{-1} A) by power iteration in the D inner product.
double power_iteration(const SparseMatrix &a, const Vec &d, int max_iter = 50, double stagnation = 1e-4,
                       unsigned seed = 7);

struct MultigridLevel {
    SparseMatrix matrix;
    Vec mass;
    Vec diagonal;
    /// Map from level j-1 to level j (smoothed for the smoothed variant); empty on level 0.
    SparseMatrix prolongation;
    SparseMatrix restriction;
    /// Smoother parameter lambda_j (smoothed variant only).
    double lambda = 0.0;
};

enum class MultigridKind { Smoothed, Geometric };

/// W-cycle preconditioner approximating A_J^{-1}; apply() works on matrix-form residuals.
class Multigrid : public LinearOperator {
public:
    /// Galerkin levels built from the finest matrix with prolongators smoothed by
    /// I - lambda_j^{-1} D_j^{-1} A_j. transfers[j] maps level j-1 to j (transfers[0] unused).
    static Multigrid smoothed(const SparseMatrix &fine, const std::vector<SparseMatrix> &transfers,
                              const std::vector<Vec> &masses, const SolverConfig &config, double safety = 1.1);
    /// Rediscretized level matrices with plain transfers.
    static Multigrid geometric(const std::vector<SparseMatrix> &matrices, const std::vector<SparseMatrix> &transfers,
                               const std::vector<Vec> &masses, const SolverConfig &config);
    static Multigrid from_levels(MultigridKind kind, const std::vector<LevelSystem> &levels,
                                 const SolverConfig &config);

    MultigridKind kind() const { return kind_; }
    Index size() const override;
    int num_levels() const { return static_cast<int>(levels_.size()); }
    const MultigridLevel &level(int j) const { return levels_[j]; }
    /// Top-level lambda (smoothed variant).
    double lambda() const { return levels_.back().lambda; }

    void apply(const Vec &z, Vec &y) const override;
    /// Same cycle acting on D-scaled residuals: y = B D z.
    void apply_operator_form(const Vec &z, Vec &y) const;
    /// rho(D_j^{-1} A_j) per level by power iteration.
    std::vector<double> level_spectral_radii(int max_iter = 200, double stagnation = 1e-6) const;

private:
    void cycle(int j, const Vec &z, Vec &y) const;

    MultigridKind kind_ = MultigridKind::Geometric;
    SolverConfig config_;
    std::vector<MultigridLevel> levels_;
    std::shared_ptr<DirectSolver> coarse_;
};

/// Asymptotic A-norm error reduction per step of y <- y + B (b - A y).
double stationary_contraction(const SparseMatrix &a, const LinearOperator &b, int iterations = 30,
                              unsigned seed = 11);

enum class ConditionMode { Auto, Dense, Lanczos };

struct ConditionEstimate {
    double lambda_min = 0.0;
    double lambda_max = 0.0;
    double kappa = 0.0;
};

/// Largest eigenvalue of a symmetric operator by Lanczos with full reorthogonalization.
double lanczos_largest(const std::function<void(const Vec &, Vec &)> &op, Index n, int max_steps = 400,
                       double tol = 1e-9, unsigned seed = 3);

/// Extreme eigenvalues of an SPD matrix.
ConditionEstimate estimate_condition(const SparseMatrix &a, ConditionMode mode = ConditionMode::Auto);
/// Extreme eigenvalues of B^{-1} A for SPD A and B.
ConditionEstimate estimate_pencil(const SparseMatrix &a, const SparseMatrix &b,
                                  ConditionMode mode = ConditionMode::Auto);

} // namespace rda
