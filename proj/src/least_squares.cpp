#include <algorithm>
#include <cmath>
#include <limits>

#include <Eigen/Dense>

#include "paramode/errors.hpp"
#include "paramode/fitting.hpp"

namespace paramode {
namespace {

using Eigen::MatrixXd;
using Eigen::VectorXd;

struct Evaluator {
    const FitProblem& problem;

    // A model failure away from the starting point rejects the step.
    VectorXd residual_or_nan(const VectorXd& theta) const
    {
        try {
            return residual(theta);
        } catch (const NumericalError&) {
            return VectorXd::Constant(static_cast<Eigen::Index>(problem.y.size()),
                                      std::numeric_limits<double>::quiet_NaN());
        }
    }

    VectorXd residual(const VectorXd& theta) const
    {
        const std::vector<double> pred = problem.predict(std::span<const double>(theta.data(), theta.size()));
        if (pred.size() != problem.y.size())
            throw ConfigError("model prediction length does not match the observation count");
        VectorXd r(static_cast<Eigen::Index>(pred.size()));
        for (std::size_t i = 0; i < pred.size(); ++i) {
            const double w = problem.weights.empty() ? 1.0 : problem.weights[i];
            r[static_cast<Eigen::Index>(i)] = w * (pred[i] - problem.y[i]);
        }
        return r;
    }
};

double typical(const FitProblem& p, std::size_t i)
{
    if (!p.scale.empty() && p.scale[i] > 0.0)
        return p.scale[i];
    const double t0 = std::abs(p.theta0[i]);
    return t0 > 0.0 ? t0 : 1.0;
}

VectorXd project(const FitProblem& p, VectorXd theta)
{
    for (Eigen::Index i = 0; i < theta.size(); ++i) {
        const auto k = static_cast<std::size_t>(i);
        if (!p.lower.empty())
            theta[i] = std::max(theta[i], p.lower[k]);
        if (!p.upper.empty())
            theta[i] = std::min(theta[i], p.upper[k]);
    }
    return theta;
}

MatrixXd jacobian(const Evaluator& ev, const FitProblem& p, const VectorXd& theta, Eigen::Index m,
                  double rel_step)
{
    MatrixXd J(m, theta.size());
    for (Eigen::Index j = 0; j < theta.size(); ++j) {
        const double h = rel_step * std::max(std::abs(theta[j]), typical(p, static_cast<std::size_t>(j)));
        const auto k = static_cast<std::size_t>(j);
        VectorXd plus = theta, minus = theta;
        plus[j] += h;
        minus[j] -= h;
        // One-sided differences keep the probe inside the box.
        const bool low_ok = p.lower.empty() || minus[j] >= p.lower[k];
        const bool high_ok = p.upper.empty() || plus[j] <= p.upper[k];
        if (low_ok && high_ok)
            J.col(j) = (ev.residual(plus) - ev.residual(minus)) / (2.0 * h);
        else if (high_ok)
            J.col(j) = (ev.residual(plus) - ev.residual(theta)) / h;
        else
            J.col(j) = (ev.residual(theta) - ev.residual(minus)) / h;
    }
    return J;
}

// Column scaling for the normal equations, floored so that a parameter the
// data does not constrain still gets a finite damped step.
VectorXd column_scale(const MatrixXd& A)
{
    VectorXd d = A.diagonal().cwiseMax(0.0).cwiseSqrt();
    const double floor = std::max(d.maxCoeff() * 1e-12, std::numeric_limits<double>::min());
    return d.cwiseMax(floor);
}

} // namespace

std::string to_string(ModelKind kind)
{
    switch (kind) {
    case ModelKind::single_mode: return "single-mode";
    case ModelKind::lambda: return "lambda";
    case ModelKind::flux_arch: return "flux-arch";
    case ModelKind::polynomial: return "polynomial";
    }
    return "unknown";
}

void FitProblem::validate() const
{
    const std::size_t n = theta0.size();
    if (n == 0)
        throw ConfigError("fit problem has no parameters");
    if (!predict)
        throw ConfigError("fit problem has no forward model");
    if (y.size() < n + 1)
        throw ConfigError("fit problem needs more observations than parameters");
    if ((!lower.empty() && lower.size() != n) || (!upper.empty() && upper.size() != n))
        throw ConfigError("bounds must match the parameter count");
    if (!weights.empty() && weights.size() != y.size())
        throw ConfigError("weights must match the observation count");
    if (!scale.empty() && scale.size() != n)
        throw ConfigError("scales must match the parameter count");
    for (std::size_t i = 0; i < n; ++i) {
        if ((!lower.empty() && theta0[i] < lower[i]) || (!upper.empty() && theta0[i] > upper[i]))
            throw ConfigError("initial parameter " + std::to_string(i) + " lies outside its bounds");
    }
}

std::vector<double> FitResult::standard_errors() const
{
    std::vector<double> se(covariance.size());
    for (std::size_t i = 0; i < covariance.size(); ++i)
        se[i] = std::sqrt(std::max(covariance[i][i], 0.0));
    return se;
}

FitResult least_squares(const FitProblem& problem, const LeastSquaresOptions& options)
{
    problem.validate();
    const Evaluator ev{problem};
    const auto n = static_cast<Eigen::Index>(problem.theta0.size());
    const auto m = static_cast<Eigen::Index>(problem.y.size());

    VectorXd theta = Eigen::Map<const VectorXd>(problem.theta0.data(), n);
    VectorXd r = ev.residual(theta);
    double ssr = r.squaredNorm();

    FitResult out;
    out.initial_residual_norm = ssr;
    double lambda = 1e-3;

    auto small_step = [&](const VectorXd& step, const VectorXd& at) {
        for (Eigen::Index i = 0; i < n; ++i) {
            const double ref = std::max(std::abs(at[i]), typical(problem, static_cast<std::size_t>(i)));
            if (std::abs(step[i]) > options.step_tolerance * ref)
                return false;
        }
        return true;
    };

    int it = 0;
    while (it < options.max_iterations) {
        if (ssr == 0.0) {
            out.converged = true;
            break;
        }
        const MatrixXd J = jacobian(ev, problem, theta, m, options.fd_relative_step);
        const MatrixXd A = J.transpose() * J;
        const VectorXd grad = J.transpose() * r;
        const VectorXd D = column_scale(A);
        const MatrixXd As = D.asDiagonal().inverse() * A * D.asDiagonal().inverse();
        const VectorXd gs = grad.cwiseQuotient(D);

        bool accepted = false;
        bool stalled = false;
        while (!accepted) {
            MatrixXd lhs = As;
            lhs.diagonal().array() += lambda;
            const VectorXd step = -(lhs.ldlt().solve(gs)).cwiseQuotient(D);
            if (!step.allFinite()) {
                lambda *= 10.0;
                if (lambda > 1e20) {
                    stalled = true;
                    break;
                }
                continue;
            }
            const VectorXd trial = project(problem, theta + step);
            const VectorXd actual = trial - theta;
            const VectorXd r_trial = ev.residual_or_nan(trial);
            const double ssr_trial = r_trial.squaredNorm();
            // Change in the sum of squares without cancellation against ssr.
            const double change = std::isfinite(ssr_trial) ? (r_trial - r).dot(r_trial + r) : ssr_trial;
            // A step already below tolerance may show a rounding-level increase.
            const bool rounding = small_step(actual, theta) && change <= 16.0 * std::numeric_limits<double>::epsilon() * ssr;
            if (std::isfinite(change) && (change <= 0.0 || rounding)) {
                theta = trial;
                r = r_trial;
                const bool done = small_step(actual, theta);
                ssr = ssr_trial;
                lambda = std::max(lambda / 3.0, 1e-15);
                accepted = true;
                ++it;
                if (done) {
                    out.converged = true;
                    stalled = true;
                }
            } else {
                if (small_step(actual, theta)) {
                    // No representable improvement left.
                    out.converged = true;
                    stalled = true;
                    break;
                }
                lambda *= 4.0;
                if (lambda > 1e20) {
                    stalled = true;
                    break;
                }
            }
        }
        if (stalled)
            break;
    }

    out.iterations = it;
    out.theta.assign(theta.data(), theta.data() + n);
    out.residual_norm = ssr;

    // Linearized covariance s^2 (J^T J)^-1 at the solution.
    const MatrixXd J = jacobian(ev, problem, theta, m, options.fd_relative_step);
    const MatrixXd A = J.transpose() * J;
    const VectorXd D = column_scale(A);
    const MatrixXd As = D.asDiagonal().inverse() * A * D.asDiagonal().inverse();
    const MatrixXd inv = D.asDiagonal().inverse() * As.completeOrthogonalDecomposition().pseudoInverse()
                         * D.asDiagonal().inverse();
    const double dof = static_cast<double>(m - n);
    const MatrixXd cov = (ssr / dof) * 0.5 * (inv + inv.transpose());
    out.covariance.assign(static_cast<std::size_t>(n), std::vector<double>(static_cast<std::size_t>(n)));
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j < n; ++j)
            out.covariance[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] = cov(i, j);
    if (!out.converged)
        out.warnings.push_back("least squares did not converge within " + std::to_string(options.max_iterations)
                               + " iterations");
    return out;
}

} // namespace paramode
