#include "rda/solvers.hpp"

#include <chrono>
#include <cmath>
#include <ostream>
#include <random>

#include <Eigen/Eigenvalues>
#include <Eigen/SparseCholesky>

namespace rda {

void SolverConfig::validate() const
{
    if (!(tol > 0.0))
        fail(ErrorKind::Config, "tol must be positive");
    if (max_iter < 1)
        fail(ErrorKind::Config, "max_iter must be at least 1");
    if (pre_sweeps < 1 || post_sweeps < 1)
        fail(ErrorKind::Config, "smoothing sweeps must be at least 1");
}

void SolveReport::write_csv(std::ostream &out) const
{
    out << "iteration,residual\n";
    out.precision(10);
    for (std::size_t k = 0; k < history.size(); ++k)
        out << k << ',' << history[k] << '\n';
}

void SolveReport::write_eigen(std::ostream &out) const
{
    out.precision(10);
    out << "iterations=" << iterations << '\n'
        << "converged=" << (converged ? 1 : 0) << '\n'
        << "relative_residual=" << relative_residual << '\n'
        << "lambda_min=" << lambda_min << '\n'
        << "lambda_max=" << lambda_max << '\n'
        << "kappa=" << (lambda_min > 0.0 ? lambda_max / lambda_min : 0.0) << '\n';
}

struct DirectSolver::Impl {
    Eigen::SimplicialLLT<SparseMatrix, Eigen::Lower> llt;
};

DirectSolver::DirectSolver(const SparseMatrix &a) : impl_(std::make_unique<Impl>())
{
    impl_->llt.compute(a);
    if (impl_->llt.info() != Eigen::Success)
        fail(ErrorKind::FactorizationFailure, "Cholesky factorization failed (matrix not SPD)");
}

DirectSolver::~DirectSolver() = default;
DirectSolver::DirectSolver(DirectSolver &&) noexcept = default;
DirectSolver &DirectSolver::operator=(DirectSolver &&) noexcept = default;

Index DirectSolver::size() const { return impl_->llt.rows(); }

void DirectSolver::apply(const Vec &x, Vec &y) const { y = impl_->llt.solve(x); }

Vec DirectSolver::solve(const Vec &x) const { return impl_->llt.solve(x); }

Vec DirectSolver::solve_lower(const Vec &x) const
{
    Vec y = impl_->llt.permutationP() * x;
    impl_->llt.matrixL().solveInPlace(y);
    return y;
}

Vec DirectSolver::solve_upper(const Vec &x) const
{
    Vec y = x;
    impl_->llt.matrixU().solveInPlace(y);
    return impl_->llt.permutationPinv() * y;
}

namespace {

using Clock = std::chrono::steady_clock;

/// Extreme eigenvalues of the Lanczos tridiagonal built from CG coefficients.
void ritz_from_cg(const std::vector<double> &alphas, const std::vector<double> &betas, SolveReport &report)
{
    const std::size_t k = alphas.size();
    if (k == 0)
        return;
    Vec diag(k), off(k > 1 ? k - 1 : 0);
    for (std::size_t i = 0; i < k; ++i) {
        diag[i] = 1.0 / alphas[i] + (i > 0 ? betas[i - 1] / alphas[i - 1] : 0.0);
        if (i + 1 < k)
            off[i] = std::sqrt(betas[i]) / alphas[i];
    }
    if (k == 1) {
        report.lambda_min = report.lambda_max = diag[0];
        return;
    }
    Eigen::SelfAdjointEigenSolver<Mat> es;
    es.computeFromTridiagonal(diag, off, Eigen::EigenvaluesOnly);
    report.lambda_min = es.eigenvalues()[0];
    report.lambda_max = es.eigenvalues()[k - 1];
}

SolveReport run_cg(const SparseMatrix &a, const Vec &b, const LinearOperator *m, Vec &x, const SolverConfig &config)
{
    config.validate();
    const auto start = Clock::now();
    const Index n = a.rows();
    if (a.cols() != n || b.size() != n)
        fail(ErrorKind::InvalidArgument, "dimension mismatch");
    if (x.size() != n)
        x = Vec::Zero(n);

    SolveReport report;
    const double bnorm = b.norm();
    if (bnorm == 0.0) {
        x.setZero();
        report.converged = true;
        report.history.push_back(0.0);
        return report;
    }
    Vec r = b - a * x;
    Vec z(n), p(n), q(n);
    auto precondition = [&] {
        if (m)
            m->apply(r, z);
        else
            z = r;
    };
    double rel = r.norm() / bnorm;
    report.history.push_back(rel);
    std::vector<double> alphas, betas;
    if (rel <= config.tol) {
        report.converged = true;
        report.relative_residual = rel;
        return report;
    }
    precondition();
    double rz = r.dot(z);
    if (!(rz > 0.0))
        fail(ErrorKind::NonlinearPreconditioner, "preconditioner is not positive definite: (z, r) <= 0");
    p = z;
    int it = 0;
    while (it < config.max_iter) {
        q.noalias() = a * p;
        const double pq = p.dot(q);
        if (!(pq > 0.0))
            fail(ErrorKind::Breakdown, "non-positive curvature p^T A p at iteration " + std::to_string(it));
        const double alpha = rz / pq;
        x.noalias() += alpha * p;
        r.noalias() -= alpha * q;
        ++it;
        alphas.push_back(alpha);
        rel = r.norm() / bnorm;
        report.history.push_back(rel);
        if (rel <= config.tol)
            break;
        precondition();
        const double rz_new = r.dot(z);
        if (!(rz_new > 0.0))
            fail(ErrorKind::NonlinearPreconditioner, "preconditioner is not positive definite: (z, r) <= 0");
        const double beta = rz_new / rz;
        betas.push_back(beta);
        rz = rz_new;
        p = z + beta * p;
    }
    report.iterations = it;
    report.relative_residual = rel;
    report.converged = rel <= config.tol;
    ritz_from_cg(alphas, betas, report);
    report.seconds = std::chrono::duration<double>(Clock::now() - start).count();
    return report;
}

Vec random_vector(Index n, unsigned seed)
{
    std::mt19937 rng(seed);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    Vec v(n);
    for (Index i = 0; i < n; ++i)
        v[i] = u(rng);
    return v;
}

void check_symmetric_positive(const SparseMatrix &a, int level)
{
    for (Index i = 0; i < a.rows(); ++i)
        if (!(a.coeff(i, i) > 0.0))
            fail(ErrorKind::IndefiniteLevel, "level " + std::to_string(level) + " has a non-positive diagonal");
}

SparseMatrix symmetric_part(const SparseMatrix &a)
{
    SparseMatrix t = a.transpose();
    SparseMatrix s = 0.5 * (a + t);
    s.prune(0.0);
    return s;
}

} // namespace

SolveReport cg(const SparseMatrix &a, const Vec &b, Vec &x, const SolverConfig &config)
{
    return run_cg(a, b, nullptr, x, config);
}

SolveReport pcg(const SparseMatrix &a, const Vec &b, const LinearOperator &preconditioner, Vec &x,
                const SolverConfig &config)
{
    if (preconditioner.size() != a.rows())
        fail(ErrorKind::InvalidArgument, "preconditioner size mismatch");
    return run_cg(a, b, &preconditioner, x, config);
}

double power_iteration(const SparseMatrix &a, const Vec &d, int max_iter, double stagnation, unsigned seed)
{
    const Index n = a.rows();
    if (d.size() != n)
        fail(ErrorKind::InvalidArgument, "mass size mismatch");
    Vec v = random_vector(n, seed);
    v /= std::sqrt(v.dot(d.cwiseProduct(v)));
    double theta = 0.0;
    for (int it = 0; it < max_iter; ++it) {
        const Vec av = a * v;
        const double next = v.dot(av);
        Vec w = av.cwiseQuotient(d);
        const double wn = std::sqrt(w.dot(d.cwiseProduct(w)));
        if (wn == 0.0)
            return 0.0;
        v = w / wn;
        const bool done = it > 0 && std::abs(next - theta) <= stagnation * std::abs(next);
        theta = next;
        if (done)
            break;
    }
    return theta;
}

Multigrid Multigrid::smoothed(const SparseMatrix &fine, const std::vector<SparseMatrix> &transfers,
                              const std::vector<Vec> &masses, const SolverConfig &config, double safety)
{
    config.validate();
    const int levels = static_cast<int>(masses.size());
    if (levels < 1 || static_cast<int>(transfers.size()) != levels)
        fail(ErrorKind::InvalidArgument, "one transfer and one mass per level expected");
    Multigrid mg;
    mg.kind_ = MultigridKind::Smoothed;
    mg.config_ = config;
    mg.levels_.resize(levels);
    const int top = levels - 1;
    mg.levels_[top].matrix = fine;
    const double lambda = safety * power_iteration(fine, masses[top], 50, 1e-4, config.seed);
    for (int j = top; j >= 0; --j) {
        MultigridLevel &l = mg.levels_[j];
        l.mass = masses[j];
        l.lambda = lambda * std::pow(4.0, j - top);
        if (l.mass.size() != l.matrix.rows())
            fail(ErrorKind::InvalidArgument, "mass size mismatch on level " + std::to_string(j));
        check_symmetric_positive(l.matrix, j);
        l.diagonal = l.matrix.diagonal();
        if (j == 0)
            break;
        const SparseMatrix &p = transfers[j];
        if (p.rows() != l.matrix.rows() || p.cols() != masses[j - 1].size())
            fail(ErrorKind::InvalidArgument, "transfer size mismatch on level " + std::to_string(j));
        const SparseMatrix ap = l.matrix * p;
        SparseMatrix smoothed = p - SparseMatrix((1.0 / l.lambda) * l.mass.cwiseInverse().asDiagonal() * ap);
        smoothed.prune(0.0);
        l.prolongation = smoothed;
        l.restriction = smoothed.transpose();
        const SparseMatrix as = l.matrix * smoothed;
        mg.levels_[j - 1].matrix = symmetric_part(l.restriction * as);
    }
    try {
        mg.coarse_ = std::make_shared<DirectSolver>(mg.levels_[0].matrix);
    } catch (const Error &) {
        fail(ErrorKind::IndefiniteLevel, "coarsest Galerkin matrix is not positive definite");
    }
    return mg;
}

Multigrid Multigrid::geometric(const std::vector<SparseMatrix> &matrices, const std::vector<SparseMatrix> &transfers,
                               const std::vector<Vec> &masses, const SolverConfig &config)
{
    config.validate();
    const int levels = static_cast<int>(matrices.size());
    if (levels < 1 || static_cast<int>(transfers.size()) != levels || static_cast<int>(masses.size()) != levels)
        fail(ErrorKind::InvalidArgument, "one matrix, transfer and mass per level expected");
    Multigrid mg;
    mg.kind_ = MultigridKind::Geometric;
    mg.config_ = config;
    mg.levels_.resize(levels);
    for (int j = 0; j < levels; ++j) {
        MultigridLevel &l = mg.levels_[j];
        l.matrix = matrices[j];
        l.mass = masses[j];
        check_symmetric_positive(l.matrix, j);
        l.diagonal = l.matrix.diagonal();
        if (j > 0) {
            if (transfers[j].rows() != l.matrix.rows() || transfers[j].cols() != matrices[j - 1].rows())
                fail(ErrorKind::InvalidArgument, "transfer size mismatch on level " + std::to_string(j));
            l.prolongation = transfers[j];
            l.restriction = transfers[j].transpose();
        }
    }
    mg.coarse_ = std::make_shared<DirectSolver>(mg.levels_[0].matrix);
    return mg;
}

Multigrid Multigrid::from_levels(MultigridKind kind, const std::vector<LevelSystem> &levels,
                                 const SolverConfig &config)
{
    std::vector<SparseMatrix> matrices, transfers;
    std::vector<Vec> masses;
    for (const LevelSystem &l : levels) {
        matrices.push_back(l.matrix);
        transfers.push_back(l.prolongation);
        masses.push_back(l.mass);
    }
    if (kind == MultigridKind::Smoothed)
        return smoothed(matrices.back(), transfers, masses, config);
    return geometric(matrices, transfers, masses, config);
}

Index Multigrid::size() const { return levels_.empty() ? 0 : levels_.back().matrix.rows(); }

namespace {

void gauss_seidel(const MultigridLevel &l, const Vec &z, Vec &y, bool forward)
{
    const SparseMatrix &a = l.matrix;
    const Index n = a.cols();
    auto relax = [&](Index i) {
        // column i equals row i by symmetry
        double s = z[i];
        for (SparseMatrix::InnerIterator it(a, i); it; ++it)
            if (it.row() != i)
                s -= it.value() * y[it.row()];
        y[i] = s / l.diagonal[i];
    };
    if (forward)
        for (Index i = 0; i < n; ++i)
            relax(i);
    else
        for (Index i = n - 1; i >= 0; --i)
            relax(i);
}

} // namespace

void Multigrid::cycle(int j, const Vec &z, Vec &y) const
{
    if (j == 0) {
        y = coarse_->solve(z);
        return;
    }
    const MultigridLevel &l = levels_[j];
    y = Vec::Zero(z.size());
    for (int s = 0; s < config_.pre_sweeps; ++s)
        gauss_seidel(l, z, y, true);
    const Vec xi = l.restriction * (z - l.matrix * y);
    Vec w1, w2;
    cycle(j - 1, xi, w1);
    cycle(j - 1, xi - levels_[j - 1].matrix * w1, w2);
    w1 += w2;
    y.noalias() += l.prolongation * w1;
    for (int s = 0; s < config_.post_sweeps; ++s)
        gauss_seidel(l, z, y, false);
}

void Multigrid::apply(const Vec &z, Vec &y) const
{
    if (z.size() != size())
        fail(ErrorKind::InvalidArgument, "cycle input size mismatch");
    cycle(num_levels() - 1, z, y);
}

void Multigrid::apply_operator_form(const Vec &z, Vec &y) const
{
    apply(levels_.back().mass.cwiseProduct(z), y);
}

std::vector<double> Multigrid::level_spectral_radii(int max_iter, double stagnation) const
{
    std::vector<double> rho;
    for (const MultigridLevel &l : levels_)
        rho.push_back(power_iteration(l.matrix, l.mass, max_iter, stagnation));
    return rho;
}

double stationary_contraction(const SparseMatrix &a, const LinearOperator &b, int iterations, unsigned seed)
{
    Vec e = random_vector(a.rows(), seed);
    auto energy = [&](const Vec &v) { return std::sqrt(v.dot(a * v)); };
    e /= energy(e);
    Vec c;
    double log_sum = 0.0;
    int counted = 0;
    const int tail = std::max(1, std::min(10, iterations / 2));
    for (int it = 0; it < iterations; ++it) {
        b.apply(a * e, c);
        e -= c;
        const double ratio = energy(e);
        if (ratio == 0.0)
            return 0.0;
        e /= ratio;
        if (it >= iterations - tail) {
            log_sum += std::log(ratio);
            ++counted;
        }
    }
    return std::exp(log_sum / counted);
}

double lanczos_largest(const std::function<void(const Vec &, Vec &)> &op, Index n, int max_steps, double tol,
                       unsigned seed)
{
    const int steps = static_cast<int>(std::min<Index>(max_steps, n));
    std::vector<Vec> basis;
    basis.reserve(steps + 1);
    Vec q = random_vector(n, seed);
    q.normalize();
    basis.push_back(q);
    std::vector<double> alpha, beta;
    Vec w;
    double theta = 0.0;
    for (int k = 0; k < steps; ++k) {
        op(basis[k], w);
        alpha.push_back(basis[k].dot(w));
        for (int pass = 0; pass < 2; ++pass)
            for (const Vec &v : basis)
                w -= v.dot(w) * v;
        const double b = w.norm();
        const int m = k + 1;
        const bool last = m == steps || b <= 1e-14 * std::abs(alpha.back());
        if (m % 5 == 0 || last) {
            Vec d = Eigen::Map<const Vec>(alpha.data(), m);
            Vec off = m > 1 ? Vec(Eigen::Map<const Vec>(beta.data(), m - 1)) : Vec();
            double s_last = 1.0;
            if (m == 1) {
                theta = d[0];
            } else {
                Eigen::SelfAdjointEigenSolver<Mat> es;
                es.computeFromTridiagonal(d, off, Eigen::ComputeEigenvectors);
                theta = es.eigenvalues()[m - 1];
                s_last = es.eigenvectors()(m - 1, m - 1);
            }
            if (last || b * std::abs(s_last) <= tol * std::abs(theta))
                return theta;
        }
        beta.push_back(b);
        basis.push_back(w / b);
    }
    return theta;
}

namespace {

bool use_dense(ConditionMode mode, Index n)
{
    if (mode == ConditionMode::Dense)
        return true;
    if (mode == ConditionMode::Lanczos)
        return false;
    return n <= 1500;
}

ConditionEstimate make_estimate(double lo, double hi)
{
    ConditionEstimate e;
    e.lambda_min = lo;
    e.lambda_max = hi;
    e.kappa = hi / lo;
    return e;
}

} // namespace

ConditionEstimate estimate_condition(const SparseMatrix &a, ConditionMode mode)
{
    const Index n = a.rows();
    if (use_dense(mode, n)) {
        Eigen::SelfAdjointEigenSolver<Mat> es(Mat(a), Eigen::EigenvaluesOnly);
        if (es.info() != Eigen::Success || !(es.eigenvalues()[0] > 0.0))
            fail(ErrorKind::FactorizationFailure, "matrix is not positive definite");
        return make_estimate(es.eigenvalues()[0], es.eigenvalues()[n - 1]);
    }
    const DirectSolver solver(a);
    const double hi = lanczos_largest([&](const Vec &x, Vec &y) { y = a * x; }, n);
    const double inv = lanczos_largest([&](const Vec &x, Vec &y) { y = solver.solve(x); }, n);
    return make_estimate(1.0 / inv, hi);
}

ConditionEstimate estimate_pencil(const SparseMatrix &a, const SparseMatrix &b, ConditionMode mode)
{
    const Index n = a.rows();
    if (b.rows() != n)
        fail(ErrorKind::InvalidArgument, "pencil size mismatch");
    if (use_dense(mode, n)) {
        Eigen::GeneralizedSelfAdjointEigenSolver<Mat> es(Mat(a), Mat(b), Eigen::EigenvaluesOnly);
        if (es.info() != Eigen::Success || !(es.eigenvalues()[0] > 0.0))
            fail(ErrorKind::FactorizationFailure, "pencil is not positive definite");
        return make_estimate(es.eigenvalues()[0], es.eigenvalues()[n - 1]);
    }
    const DirectSolver fb(b);
    const DirectSolver fa(a);
    const double hi = lanczos_largest([&](const Vec &x, Vec &y) { y = fb.solve_lower(a * fb.solve_upper(x)); }, n);
    const double inv = lanczos_largest([&](const Vec &x, Vec &y) { y = fa.solve_lower(b * fa.solve_upper(x)); }, n);
    return make_estimate(1.0 / inv, hi);
}

} // namespace rda
