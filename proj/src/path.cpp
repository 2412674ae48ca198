#include <catfuse/solver.hpp>
#include <cmath>

namespace catfuse {

Coefficients coefficients_from_theta(const Eigen::VectorXd& theta,
                                     const ThetaLayout& layout,
                                     double y_mean,
                                     const std::vector<Eigen::VectorXd>& level_means)
{
    if (static_cast<std::size_t>(theta.size()) != layout.size()) {
        throw Error(ErrorCode::LayoutMismatch, "theta length does not match layout");
    }
    Coefficients out;
    out.factors.resize(layout.blocks.size());
    for (const auto& block : layout.blocks) {
        Eigen::VectorXd b = Eigen::VectorXd::Zero(block.k + 1);
        const auto off = static_cast<Eigen::Index>(block.offset);
        if (block.kind == PenaltyKind::Ordinal) {
            b.tail(block.k) = u_back_transform(theta.segment(off, block.k));
        } else {
            b.tail(block.k) = theta.segment(off, block.k);
        }
        out.factors[block.factor] = std::move(b);
    }
    out.intercept = level_means.size() == out.factors.size()
                        ? centered_intercept(y_mean, level_means, out)
                        : y_mean;
    return out;
}

std::vector<Eigen::VectorXd> back_transform(const Eigen::VectorXd& theta_tilde,
                                            const ThetaLayout& layout,
                                            const WeightSet& weights)
{
    const Eigen::VectorXd w = weights.flattened();
    if (w.size() != theta_tilde.size() || static_cast<std::size_t>(w.size()) != layout.size()) {
        throw Error(ErrorCode::LayoutMismatch, "theta, weights and layout disagree in length");
    }
    const Eigen::VectorXd theta = theta_tilde.cwiseQuotient(w);
    return coefficients_from_theta(theta, layout, 0.0, {}).factors;
}

PathPoint PathResult::at_lambda(double lambda) const
{
    PathPoint pt;
    pt.lambda = lambda;
    pt.theta = homotopy.theta_at(lambda);
    pt.beta = coefficients_from_theta(pt.theta, layout, y_mean, level_means);
    const double l1 = homotopy.l1_at(lambda);
    pt.s_ratio = ols_theta_l1 > 0.0 ? std::min(1.0, l1 / ols_theta_l1) : (lambda == 0.0 ? 1.0 : 0.0);
    pt.precision.delta = A.rows() > 0 ? (A * pt.theta).squaredNorm() : 0.0;
    pt.precision.bound = gamma > 0.0 ? lambda * (ols_theta_l1 - unrestricted.l1_at(lambda)) / gamma : 0.0;
    pt.precision.satisfied = pt.precision.delta <= pt.precision.bound + kPrecisionSlack;
    return pt;
}

PathPoint PathResult::at_s_ratio(double s) const
{
    if (!(s >= 0.0 && s <= 1.0)) throw Error(ErrorCode::InvalidArgument, "s_ratio must lie in [0,1]");
    PathPoint pt = at_lambda(homotopy.lambda_for_fraction(s));
    pt.s_ratio = s;
    return pt;
}

PathResult path(const AugmentedProblem& problem, std::size_t grid_size)
{
    if (grid_size < 2) throw Error(ErrorCode::InvalidArgument, "grid_size must be at least 2");
    PathResult res;
    res.gamma = problem.gamma;
    res.layout = problem.layout;
    res.A = problem.A;
    res.y_mean = problem.y_mean;
    res.level_means = problem.level_means;
    res.homotopy = compute_homotopy(HomotopyProblem::from(problem));
    res.unrestricted = compute_homotopy(HomotopyProblem::unrestricted(problem));
    res.lambda_max = res.homotopy.lambda_max();
    res.ols_theta_l1 = res.homotopy.l1_at(0.0);
    res.diagnostics.knots = res.homotopy.knot_count();
    res.diagnostics.converged = true;

    const std::size_t log_points = grid_size - 1;
    for (std::size_t k = 0; k < log_points; ++k) {
        const double frac = log_points > 1 ? static_cast<double>(k) / static_cast<double>(log_points - 1) : 0.0;
        res.points.push_back(res.at_lambda(res.lambda_max * std::pow(10.0, -4.0 * frac)));
    }
    res.points.push_back(res.at_lambda(0.0));
    return res;
}

} // namespace catfuse
