#pragma once
#include <Eigen/Core>
#include <catfuse/data.hpp>
#include <catfuse/layout.hpp>
#include <catfuse/weights.hpp>
#include <string_view>
#include <vector>

namespace catfuse {

inline constexpr double kDefaultSqrtGamma = 1e5;

enum class ColumnKind { Dummy, Split, Difference };

// What a design column encodes: dummy of `level`, split at `level`
// (indicator of C >= level), or difference pair (level, other).
struct ColumnMeaning
{
    std::size_t factor = 0;
    ColumnKind kind = ColumnKind::Dummy;
    int level = 0;
    int other = 0;
    bool operator==(const ColumnMeaning&) const = default;
};

struct DesignBundle
{
    Eigen::MatrixXd X;              // centered, n x p
    std::vector<ColumnMeaning> column_map;
    Eigen::VectorXd y_centered;
    double y_mean = 0.0;
    Eigen::VectorXd column_means;   // X + 1 * column_means' is the raw design

    Eigen::MatrixXd raw() const;
};

DesignBundle dummy_design(const Dataset& ds);

struct SplitColumns
{
    Eigen::MatrixXd columns;        // raw (uncentered) n x k indicators
    std::vector<ColumnMeaning> column_map;
};

SplitColumns split_design(const Dataset& ds, std::string_view factor);

// delta_i = beta_i - beta_{i-1} with beta_0 = 0 (beta excludes the reference).
Eigen::VectorXd u_transform(const Eigen::VectorXd& beta);
// beta_i = sum_{s <= i} delta_s
Eigen::VectorXd u_back_transform(const Eigen::VectorXd& delta);

// Least squares via pivoted QR; throws RankDeficient on a singular design.
Eigen::VectorXd least_squares(const Eigen::MatrixXd& X, const Eigen::VectorXd& y);

// Unpenalized fit with dummy coding and an intercept.
Coefficients fit_ols(const Dataset& ds);

/*
 * Lasso data for the penalized criterion. Penalized columns are divided by
 * their weights so a unit L1 penalty applies to theta_tilde = W theta:
 *
 *   Z_tilde = [ Z W^-1 ; sqrt(gamma) A W^-1 ],   y_tilde = [ y - mean(y) ; 0 ]
 *
 * Z holds the centered dummy columns in the (i,0) positions of nominal
 * blocks (zeros elsewhere) and centered split columns for ordinal blocks.
 * A holds one row theta_i0 - theta_j0 - theta_ij = 0 per nominal pair i>j>0.
 */
struct AugmentedProblem
{
    ThetaLayout layout;
    WeightSet weights;
    double gamma = 0.0;

    Eigen::MatrixXd Z;              // unscaled, n x q
    Eigen::MatrixXd A;              // unscaled (+1/-1), r x q
    Eigen::VectorXd y_centered;
    double y_mean = 0.0;
    std::vector<Eigen::VectorXd> level_means;   // per factor, n_i/n per level
    Eigen::VectorXd penalty_weights;            // w per theta entry

    Eigen::MatrixXd Z_tilde;        // (n + r) x q, rescaled and stacked
    Eigen::VectorXd y_tilde;

    std::size_t n() const { return static_cast<std::size_t>(Z.rows()); }
    std::size_t q() const { return static_cast<std::size_t>(Z.cols()); }
    std::size_t r() const { return static_cast<std::size_t>(A.rows()); }
};

AugmentedProblem build_augmented(const Dataset& ds, const WeightSet& weights, double gamma);

// theta (unscaled) with theta_ij = beta_i - beta_j for nominal blocks and
// adjacent differences for ordinal blocks.
Eigen::VectorXd theta_from_coefficients(const Coefficients& beta, const ThetaLayout& layout);

// Intercept implied by centering: mean(y) - sum_l sum_i (n_i/n) beta_li.
double centered_intercept(double y_mean,
                          const std::vector<Eigen::VectorXd>& level_means,
                          const Coefficients& beta);

} // namespace catfuse
