#pragma once
#include <Eigen/Core>
#include <catfuse/coding.hpp>
#include <catfuse/data.hpp>
#include <optional>
#include <vector>

namespace catfuse {

// Objective throughout: ||y - X theta||^2 + lambda * sum_j |theta_j|.

struct LassoOptions
{
    double tol = 1e-10;                 // max coefficient change per sweep
    int max_sweeps = 100000;
    bool polish = true;                 // exact least squares on the final support
    bool trace = false;                 // record the objective after every sweep
};

struct LassoSolution
{
    Eigen::VectorXd theta;
    int sweeps = 0;
    bool converged = false;
    double objective = 0.0;
    std::vector<double> trace;
};

double lasso_objective(const Eigen::MatrixXd& X,
                       const Eigen::VectorXd& y,
                       const Eigen::VectorXd& theta,
                       double lambda);

// 2 max_j |x_j' y|: the smallest lambda with an all-zero solution.
double lasso_lambda_max(const Eigen::MatrixXd& X, const Eigen::VectorXd& y);

// Cyclic coordinate descent with soft-thresholding. Throws NotConverged.
LassoSolution solve_lasso(const Eigen::MatrixXd& X,
                          const Eigen::VectorXd& y,
                          double lambda,
                          const std::optional<Eigen::VectorXd>& warm_start = std::nullopt,
                          const LassoOptions& options = {});

struct IstaOptions
{
    double tol = 1e-14;                 // relative objective change
    int max_iter = 2000000;
};

// Accelerated proximal gradient with backtracking and restarts. Throws NotConverged.
Eigen::VectorXd ista_oracle(const Eigen::MatrixXd& X,
                            const Eigen::VectorXd& y,
                            double lambda,
                            const IstaOptions& options = {});

// Largest violation of the stationarity conditions, scaled like lambda:
// |2 x_j'r| - lambda on the support, (|2 x_j'r| - lambda)_+ off it.
double kkt_violation(const Eigen::MatrixXd& X,
                     const Eigen::VectorXd& y,
                     const Eigen::VectorXd& theta,
                     double lambda);

/*
 * Weighted lasso with an optional quadratic restriction term
 *
 *   ||y - Z theta||^2 + gamma ||A theta||^2 + lambda * sum_j w_j |theta_j|,
 *
 * which is the augmented problem written in unscaled coordinates. With A
 * empty it is a plain weighted lasso on Z.
 */
struct HomotopyProblem
{
    Eigen::MatrixXd Z;
    Eigen::VectorXd y;
    Eigen::MatrixXd A;                  // r x q, may have zero rows
    Eigen::VectorXd w;                  // strictly positive
    double gamma = 0.0;

    static HomotopyProblem from(const AugmentedProblem& prob);
    static HomotopyProblem unrestricted(const AugmentedProblem& prob);
};

struct HomotopyOptions
{
    int max_knots = 0;                  // 0 picks 50 q + 1000
    int max_pivots = 5000;              // per knot
};

// Exact solution path: theta is linear in lambda between consecutive knots.
class PiecewiseLinearPath
{
public:
    PiecewiseLinearPath() = default;
    PiecewiseLinearPath(std::vector<double> lambdas,
                        std::vector<Eigen::VectorXd> thetas,
                        Eigen::VectorXd w);

    // knots, lambda strictly decreasing, last knot lambda = 0
    const std::vector<double>& lambdas() const { return lambdas_; }
    const std::vector<Eigen::VectorXd>& thetas() const { return thetas_; }
    std::size_t knot_count() const { return lambdas_.size(); }
    double lambda_max() const { return lambdas_.front(); }

    Eigen::VectorXd theta_at(double lambda) const;
    // sum_j w_j |theta_j(lambda)|
    double l1_at(double lambda) const;
    // lambda whose weighted L1 norm equals fraction * l1_at(0); exact since
    // the norm is linear and non-increasing in lambda on every segment
    double lambda_for_fraction(double fraction) const;

private:
    std::vector<double> lambdas_;
    std::vector<Eigen::VectorXd> thetas_;
    std::vector<double> l1_;
    Eigen::VectorXd w_;
};

PiecewiseLinearPath compute_homotopy(const HomotopyProblem& problem,
                                     const HomotopyOptions& options = {});

struct PrecisionReport
{
    double delta = 0.0;                 // ||A theta||^2
    double bound = 0.0;                 // lambda (|theta_LS| - |theta_0,lambda|) / gamma
    bool satisfied = false;
};

inline constexpr double kPrecisionSlack = 1e-12;

struct PathPoint
{
    double lambda = 0.0;
    double s_ratio = 0.0;
    Eigen::VectorXd theta;              // unscaled differences
    Coefficients beta;
    PrecisionReport precision;
};

struct PathDiagnostics
{
    std::size_t knots = 0;
    bool converged = true;
};

struct PathResult
{
    std::vector<PathPoint> points;      // lambda decreasing, last point lambda = 0
    double ols_theta_l1 = 0.0;
    double lambda_max = 0.0;
    double gamma = 0.0;
    PathDiagnostics diagnostics;
    PiecewiseLinearPath homotopy;
    PiecewiseLinearPath unrestricted;   // gamma = 0 path on Z, for the precision bound
    ThetaLayout layout;
    Eigen::MatrixXd A;
    double y_mean = 0.0;
    std::vector<Eigen::VectorXd> level_means;

    // solution at an arbitrary s_ratio in [0,1], interpolated exactly
    PathPoint at_s_ratio(double s) const;
    PathPoint at_lambda(double lambda) const;
};

// grid_size - 1 log-spaced lambdas from lambda_max to lambda_max * 1e-4, then 0.
PathResult path(const AugmentedProblem& problem, std::size_t grid_size = 100);

// Dummy coefficients from unscaled theta: nominal beta_i = theta_i0,
// ordinal beta = cumulative sums of the adjacent differences.
Coefficients coefficients_from_theta(const Eigen::VectorXd& theta,
                                     const ThetaLayout& layout,
                                     double y_mean,
                                     const std::vector<Eigen::VectorXd>& level_means);

// Per-factor dummy coefficients from the rescaled lasso variable W theta.
std::vector<Eigen::VectorXd> back_transform(const Eigen::VectorXd& theta_tilde,
                                            const ThetaLayout& layout,
                                            const WeightSet& weights);

} // namespace catfuse
