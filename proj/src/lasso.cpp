#include <catfuse/solver.hpp>
#include <Eigen/Cholesky>
#include <algorithm>
#include <cmath>

namespace catfuse {

namespace {

double soft(double v, double t)
{
    if (v > t) return v - t;
    if (v < -t) return v + t;
    return 0.0;
}

void check_shapes(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, double lambda)
{
    if (X.rows() != y.size()) {
        throw Error(ErrorCode::ShapeMismatch, "design rows do not match response length");
    }
    if (!(lambda >= 0.0) || !std::isfinite(lambda)) {
        throw Error(ErrorCode::InvalidArgument, "lambda must be finite and >= 0");
    }
}

// Solve the stationarity equations on the support of theta with its signs
// held fixed; keep the result only if it is sign-consistent and optimal.
bool polish_on_support(const Eigen::MatrixXd& X,
                       const Eigen::VectorXd& y,
                       double lambda,
                       Eigen::VectorXd& theta)
{
    std::vector<Eigen::Index> support;
    for (Eigen::Index j = 0; j < theta.size(); ++j) {
        if (theta[j] != 0.0) support.push_back(j);
    }
    if (support.empty()) return false;
    const auto m = static_cast<Eigen::Index>(support.size());
    Eigen::MatrixXd XS(X.rows(), m);
    Eigen::VectorXd rhs(m);
    for (Eigen::Index t = 0; t < m; ++t) XS.col(t) = X.col(support[t]);
    for (Eigen::Index t = 0; t < m; ++t) {
        rhs[t] = XS.col(t).dot(y) - 0.5 * lambda * (theta[support[t]] > 0 ? 1.0 : -1.0);
    }
    Eigen::LDLT<Eigen::MatrixXd> ldlt(XS.transpose() * XS);
    if (ldlt.info() != Eigen::Success || !ldlt.isPositive()) return false;
    Eigen::VectorXd xs = ldlt.solve(rhs);
    if (!xs.allFinite()) return false;
    Eigen::VectorXd cand = Eigen::VectorXd::Zero(theta.size());
    for (Eigen::Index t = 0; t < m; ++t) {
        if (xs[t] * theta[support[t]] <= 0.0) return false;
        cand[support[t]] = xs[t];
    }
    const double scale = std::max(1.0, lambda);
    if (kkt_violation(X, y, cand, lambda) > 1e-9 * scale) return false;
    if (lasso_objective(X, y, cand, lambda) > lasso_objective(X, y, theta, lambda)) return false;
    theta = cand;
    return true;
}

} // namespace

double lasso_objective(const Eigen::MatrixXd& X,
                       const Eigen::VectorXd& y,
                       const Eigen::VectorXd& theta,
                       double lambda)
{
    return (y - X * theta).squaredNorm() + lambda * theta.lpNorm<1>();
}

double lasso_lambda_max(const Eigen::MatrixXd& X, const Eigen::VectorXd& y)
{
    if (X.cols() == 0) return 0.0;
    return 2.0 * (X.transpose() * y).cwiseAbs().maxCoeff();
}

double kkt_violation(const Eigen::MatrixXd& X,
                     const Eigen::VectorXd& y,
                     const Eigen::VectorXd& theta,
                     double lambda)
{
    const Eigen::VectorXd g = 2.0 * (X.transpose() * (y - X * theta));
    double worst = 0.0;
    for (Eigen::Index j = 0; j < theta.size(); ++j) {
        if (theta[j] != 0.0) {
            const double s = theta[j] > 0 ? 1.0 : -1.0;
            worst = std::max(worst, std::abs(g[j] - lambda * s));
        } else {
            worst = std::max(worst, std::abs(g[j]) - lambda);
        }
    }
    return worst;
}

LassoSolution solve_lasso(const Eigen::MatrixXd& X,
                          const Eigen::VectorXd& y,
                          double lambda,
                          const std::optional<Eigen::VectorXd>& warm_start,
                          const LassoOptions& options)
{
    check_shapes(X, y, lambda);
    const Eigen::Index p = X.cols();
    LassoSolution sol;
    sol.theta = Eigen::VectorXd::Zero(p);
    if (warm_start) {
        if (warm_start->size() != p) {
            throw Error(ErrorCode::ShapeMismatch, "warm start length does not match design");
        }
        sol.theta = *warm_start;
    }
    const Eigen::VectorXd norms = X.colwise().squaredNorm().transpose();
    for (Eigen::Index j = 0; j < p; ++j) {
        if (norms[j] == 0.0) sol.theta[j] = 0.0;
    }
    Eigen::VectorXd r = y - X * sol.theta;
    const double half = 0.5 * lambda;

    for (sol.sweeps = 1; sol.sweeps <= options.max_sweeps; ++sol.sweeps) {
        double max_change = 0.0;
        for (Eigen::Index j = 0; j < p; ++j) {
            if (norms[j] == 0.0) continue;
            const double old = sol.theta[j];
            const double v = X.col(j).dot(r) + norms[j] * old;
            const double upd = soft(v, half) / norms[j];
            if (upd != old) {
                r.noalias() -= (upd - old) * X.col(j);
                sol.theta[j] = upd;
                max_change = std::max(max_change, std::abs(upd - old));
            }
        }
        if (options.trace) sol.trace.push_back(lasso_objective(X, y, sol.theta, lambda));
        if (max_change < options.tol) {
            sol.converged = true;
            break;
        }
    }
    if (!sol.converged) {
        throw Error(ErrorCode::NotConverged,
                    "coordinate descent did not converge in " + std::to_string(options.max_sweeps)
                        + " sweeps");
    }
    if (options.polish) polish_on_support(X, y, lambda, sol.theta);
    sol.objective = lasso_objective(X, y, sol.theta, lambda);
    return sol;
}

Eigen::VectorXd ista_oracle(const Eigen::MatrixXd& X,
                            const Eigen::VectorXd& y,
                            double lambda,
                            const IstaOptions& options)
{
    check_shapes(X, y, lambda);
    const Eigen::Index p = X.cols();
    const Eigen::MatrixXd G = X.transpose() * X;
    const Eigen::VectorXd c = X.transpose() * y;
    auto smooth = [&](const Eigen::VectorXd& t) { return (y - X * t).squaredNorm(); };
    auto objective = [&](const Eigen::VectorXd& t) { return smooth(t) + lambda * t.lpNorm<1>(); };

    Eigen::VectorXd x = Eigen::VectorXd::Zero(p);
    Eigen::VectorXd z = x;
    double tk = 1.0;
    double L = 1.0;
    double f_old = objective(x);
    int calm = 0;
    for (int it = 0; it < options.max_iter; ++it) {
        const Eigen::VectorXd grad = 2.0 * (G * z - c);
        const double fz = smooth(z);
        Eigen::VectorXd x_new;
        for (;;) {
            x_new = z - grad / L;
            for (Eigen::Index j = 0; j < p; ++j) x_new[j] = soft(x_new[j], lambda / L);
            const Eigen::VectorXd d = x_new - z;
            if (smooth(x_new) <= fz + grad.dot(d) + 0.5 * L * d.squaredNorm() + 1e-15 * std::abs(fz)) break;
            L *= 2.0;
        }
        const double f_new = objective(x_new);
        double t_new = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * tk * tk));
        if (f_new > f_old + 1e-15 * std::abs(f_old)) {
            // restart momentum from the last accepted iterate
            z = x;
            tk = 1.0;
            continue;
        }
        const double step = (x_new - x).lpNorm<Eigen::Infinity>();
        z = x_new + ((tk - 1.0) / t_new) * (x_new - x);
        const double change = std::abs(f_old - f_new);
        x = x_new;
        tk = t_new;
        const bool small = change <= options.tol * std::max(1.0, std::abs(f_new)) && step < 1e-12;
        calm = small ? calm + 1 : 0;
        f_old = f_new;
        if (calm >= 10) return x;
    }
    throw Error(ErrorCode::NotConverged, "proximal gradient oracle did not converge");
}

} // namespace catfuse
