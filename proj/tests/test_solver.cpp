#include "helpers.hpp"
#include <catfuse/solver.hpp>
#include <Eigen/Cholesky>
#include <gtest/gtest.h>
#include <cmath>

using namespace catfuse;

namespace {

Eigen::MatrixXd random_matrix(std::mt19937_64& rng, Eigen::Index n, Eigen::Index p)
{
    std::normal_distribution<double> nd(0.0, 1.0);
    Eigen::MatrixXd X(n, p);
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j < p; ++j) X(i, j) = nd(rng);
    return X;
}

Eigen::VectorXd random_vector(std::mt19937_64& rng, Eigen::Index n)
{
    std::normal_distribution<double> nd(0.0, 1.0);
    Eigen::VectorXd v(n);
    for (Eigen::Index i = 0; i < n; ++i) v[i] = nd(rng);
    return v;
}

// Stacked rescaled design of the augmented problem and its lasso variable.
Eigen::VectorXd scaled(const AugmentedProblem& prob, const Eigen::VectorXd& theta)
{
    return theta.cwiseProduct(prob.penalty_weights);
}

} // namespace

TEST(SolveLasso, ZeroLambdaIsLeastSquares)
{
    std::mt19937_64 rng(3);
    const Eigen::MatrixXd X = random_matrix(rng, 50, 8);
    const Eigen::VectorXd y = random_vector(rng, 50);
    const Eigen::VectorXd ols = (X.transpose() * X).ldlt().solve(X.transpose() * y);
    const auto sol = solve_lasso(X, y, 0.0);
    EXPECT_LT((sol.theta - ols).cwiseAbs().maxCoeff(), 1e-8);
}

TEST(SolveLasso, LambdaMaxGivesExactZero)
{
    std::mt19937_64 rng(4);
    const Eigen::MatrixXd X = random_matrix(rng, 40, 6);
    const Eigen::VectorXd y = random_vector(rng, 40);
    const double lmax = lasso_lambda_max(X, y);
    EXPECT_TRUE(solve_lasso(X, y, lmax).theta.isZero(0.0));
    EXPECT_TRUE(solve_lasso(X, y, 3.0 * lmax).theta.isZero(0.0));
    EXPECT_FALSE(solve_lasso(X, y, 0.9 * lmax).theta.isZero(0.0));
}

TEST(SolveLasso, MatchesProximalOracle)
{
    std::mt19937_64 rng(5);
    const Eigen::MatrixXd X = random_matrix(rng, 50, 10);
    const Eigen::VectorXd y = X.leftCols(3).rowwise().sum() + random_vector(rng, 50);
    const double lambda = 0.3 * lasso_lambda_max(X, y);
    const auto cd = solve_lasso(X, y, lambda);
    const auto ista = ista_oracle(X, y, lambda);
    EXPECT_LT((cd.theta - ista).cwiseAbs().maxCoeff(), 1e-6);
}

TEST(SolveLasso, ObjectiveNonIncreasingAcrossSweeps)
{
    std::mt19937_64 rng(6);
    const Eigen::MatrixXd X = random_matrix(rng, 60, 12);
    const Eigen::VectorXd y = random_vector(rng, 60);
    LassoOptions opt;
    opt.trace = true;
    const auto sol = solve_lasso(X, y, 0.1 * lasso_lambda_max(X, y), std::nullopt, opt);
    ASSERT_GE(sol.trace.size(), 2u);
    for (std::size_t i = 1; i < sol.trace.size(); ++i) EXPECT_LE(sol.trace[i], sol.trace[i - 1] * (1 + 1e-15));
}

TEST(SolveLasso, WarmStartAndShapeErrors)
{
    std::mt19937_64 rng(7);
    const Eigen::MatrixXd X = random_matrix(rng, 30, 5);
    const Eigen::VectorXd y = random_vector(rng, 30);
    const double lambda = 0.2 * lasso_lambda_max(X, y);
    const auto cold = solve_lasso(X, y, lambda);
    const auto warm = solve_lasso(X, y, lambda, cold.theta);
    EXPECT_LT((cold.theta - warm.theta).cwiseAbs().maxCoeff(), 1e-9);
    EXPECT_THROW(solve_lasso(X, random_vector(rng, 29), lambda), Error);
    EXPECT_THROW(solve_lasso(X, y, -1.0), Error);
}

TEST(SolveLasso, NotConvergedIsReported)
{
    std::mt19937_64 rng(8);
    const Eigen::MatrixXd X = random_matrix(rng, 30, 5);
    const Eigen::VectorXd y = random_vector(rng, 30);
    LassoOptions opt;
    opt.max_sweeps = 1;
    opt.tol = 0.0;
    try {
        solve_lasso(X, y, 0.0, std::nullopt, opt);
        FAIL() << "expected NotConverged";
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::NotConverged);
    }
}

TEST(IstaOracle, ScalarSoftThreshold)
{
    Eigen::MatrixXd X(1, 1);
    X << 1.0;
    Eigen::VectorXd y(1);
    y << 2.0;
    EXPECT_NEAR(ista_oracle(X, y, 2.0)[0], 1.0, 1e-12);
    EXPECT_EQ(ista_oracle(X, y, 100.0)[0], 0.0);
}

TEST(Homotopy, MatchesOracleOnModerateGamma)
{
    std::mt19937_64 rng(11);
    const std::vector<FactorSchema> schemas{testutil::factor("a", Scale::Nominal, 5),
                                            testutil::factor("b", Scale::Ordinal, 4)};
    const Dataset ds = testutil::random_dataset(rng, schemas, 80);
    const auto prob = build_augmented(ds, standard_weights(ds, true), 1.0);
    const auto hp = compute_homotopy(HomotopyProblem::from(prob));
    const double lmax = lasso_lambda_max(prob.Z_tilde, prob.y_tilde);
    EXPECT_NEAR(hp.lambda_max(), lmax, 1e-10 * lmax);
    for (double frac : {0.9, 0.5, 0.2, 0.05, 0.0}) {
        const double lambda = frac * lmax;
        const Eigen::VectorXd oracle = ista_oracle(prob.Z_tilde, prob.y_tilde, lambda);
        EXPECT_LT((scaled(prob, hp.theta_at(lambda)) - oracle).cwiseAbs().maxCoeff(), 1e-6) << frac;
    }
}

TEST(Homotopy, SatisfiesKktAlongPath)
{
    std::mt19937_64 rng(12);
    const std::vector<FactorSchema> schemas{testutil::factor("a", Scale::Nominal, 6),
                                            testutil::factor("b", Scale::Nominal, 3),
                                            testutil::factor("c", Scale::Ordinal, 5)};
    const Dataset ds = testutil::random_dataset(rng, schemas, 120);
    for (double sqrt_gamma : {1.0, 1e2, 1e3}) {
        const auto prob = build_augmented(ds, standard_weights(ds, false), sqrt_gamma * sqrt_gamma);
        const auto hp = compute_homotopy(HomotopyProblem::from(prob));
        for (std::size_t i = 0; i < hp.knot_count(); ++i) {
            const double lambda = hp.lambdas()[i];
            const Eigen::VectorXd t = scaled(prob, hp.thetas()[i]);
            EXPECT_LT(kkt_violation(prob.Z_tilde, prob.y_tilde, t, lambda), 1e-6) << sqrt_gamma << " knot " << i;
        }
    }
}

TEST(Homotopy, FractionInversionIsExact)
{
    std::mt19937_64 rng(13);
    const std::vector<FactorSchema> schemas{testutil::factor("a", Scale::Nominal, 5)};
    const Dataset ds = testutil::random_dataset(rng, schemas, 60);
    const auto prob = build_augmented(ds, standard_weights(ds, false), 1e10);
    const auto hp = compute_homotopy(HomotopyProblem::from(prob));
    const double total = hp.l1_at(0.0);
    for (double f : {0.0, 0.1, 0.33, 0.5, 0.77, 1.0}) {
        const double lambda = hp.lambda_for_fraction(f);
        EXPECT_NEAR(hp.l1_at(lambda), f * total, 1e-9 * total) << f;
    }
}

TEST(Path, ScenarioOneLimitsAndPrecision)
{
    const Dataset ds = testutil::s1_train(1);
    const auto prob = build_augmented(ds, standard_weights(ds, false), kDefaultSqrtGamma * kDefaultSqrtGamma);
    const PathResult pr = path(prob, 100);
    ASSERT_EQ(pr.points.size(), 100u);

    const Coefficients ols = fit_ols(ds);
    const auto& last = pr.points.back();
    EXPECT_EQ(last.lambda, 0.0);
    EXPECT_NEAR(last.s_ratio, 1.0, 1e-12);
    EXPECT_LT((last.beta.factors[0] - ols.factors[0]).cwiseAbs().maxCoeff(), 1e-8);
    EXPECT_NEAR(last.beta.intercept, ols.intercept, 1e-8);

    const auto& first = pr.points.front();
    EXPECT_EQ(first.s_ratio, 0.0);
    EXPECT_TRUE(first.beta.factors[0].isZero(0.0));
    const Eigen::VectorXd fitted = first.beta.predict(ds);
    EXPECT_LT((fitted.array() - ds.y().mean()).abs().maxCoeff(), 1e-10);

    for (std::size_t i = 0; i < pr.points.size(); ++i) {
        const auto& pt = pr.points[i];
        EXPECT_TRUE(pt.precision.satisfied) << i << " delta " << pt.precision.delta << " bound " << pt.precision.bound;
        if (pt.s_ratio >= 1e-3) {
            EXPECT_LE(pt.precision.delta, 1e-10);
        }
        if (i > 0) {
            EXPECT_LT(pt.lambda, pr.points[i - 1].lambda);
            EXPECT_GE(pt.s_ratio, pr.points[i - 1].s_ratio - 1e-12);
        }
        EXPECT_GE(pt.s_ratio, 0.0);
        EXPECT_LE(pt.s_ratio, 1.0);
    }
}

TEST(Path, SolutionsBeatPerturbedCandidates)
{
    std::mt19937_64 rng(14);
    const std::vector<FactorSchema> schemas{testutil::factor("a", Scale::Nominal, 4),
                                            testutil::factor("b", Scale::Ordinal, 4)};
    const Dataset ds = testutil::random_dataset(rng, schemas, 70);
    const auto prob = build_augmented(ds, standard_weights(ds, true), 1e4);
    const PathResult pr = path(prob, 20);
    std::normal_distribution<double> nd(0.0, 1e-3);
    for (const auto& pt : pr.points) {
        const Eigen::VectorXd t = scaled(prob, pt.theta);
        const double f0 = lasso_objective(prob.Z_tilde, prob.y_tilde, t, pt.lambda);
        for (int k = 0; k < 5; ++k) {
            Eigen::VectorXd cand = t;
            for (Eigen::Index j = 0; j < cand.size(); ++j) cand[j] += nd(rng);
            EXPECT_LE(f0, lasso_objective(prob.Z_tilde, prob.y_tilde, cand, pt.lambda) + 1e-9);
        }
    }
}

TEST(Path, OrdinalOnlyMatchesSplitCodedLasso)
{
    std::mt19937_64 rng(15);
    const std::vector<FactorSchema> schemas{testutil::factor("a", Scale::Ordinal, 6),
                                            testutil::factor("b", Scale::Ordinal, 4)};
    const Dataset ds = testutil::random_dataset(rng, schemas, 90);
    const WeightSet w = standard_weights(ds, true);
    const auto prob = build_augmented(ds, w, 1e10);
    ASSERT_EQ(prob.r(), 0u);
    const PathResult pr = path(prob, 30);

    // direct lasso on centered split columns divided by the weights
    Eigen::MatrixXd S(static_cast<Eigen::Index>(ds.n()), 0);
    for (const auto& f : schemas) {
        const auto sc = split_design(ds, f.name);
        Eigen::MatrixXd cols = sc.columns.rowwise() - sc.columns.colwise().mean();
        S.conservativeResize(Eigen::NoChange, S.cols() + cols.cols());
        S.rightCols(cols.cols()) = cols;
    }
    const Eigen::VectorXd wf = w.flattened();
    const Eigen::MatrixXd St = S * wf.cwiseInverse().asDiagonal();
    const Eigen::VectorXd yc = ds.y().array() - ds.y().mean();
    for (const auto& pt : pr.points) {
        const auto sol = solve_lasso(St, yc, pt.lambda);
        EXPECT_LT((sol.theta.cwiseQuotient(wf) - pt.theta).cwiseAbs().maxCoeff(), 1e-8) << pt.lambda;
    }
}

TEST(BackTransform, OrdinalCumulativeSums)
{
    const std::vector<FactorSchema> schemas{testutil::factor("o", Scale::Ordinal, 4)};
    const ThetaLayout layout = make_layout(schemas);
    WeightSet w;
    w.layout = layout;
    w.factors = {Eigen::VectorXd::Ones(3)};
    Eigen::VectorXd delta(3);
    delta << 1, 2, 3;
    const auto beta = back_transform(delta, layout, w);
    Eigen::VectorXd expect(4);
    expect << 0, 1, 3, 6;
    EXPECT_EQ(beta[0], expect);
}

TEST(BackTransform, NominalZeroAndConsistentTheta)
{
    const std::vector<FactorSchema> schemas{testutil::factor("n", Scale::Nominal, 5)};
    const ThetaLayout layout = make_layout(schemas);
    WeightSet w;
    w.layout = layout;
    w.factors = {Eigen::VectorXd::Constant(10, 0.4)};
    EXPECT_TRUE(back_transform(Eigen::VectorXd::Zero(10), layout, w)[0].isZero(0.0));

    const Coefficients beta = testutil::coefficients({{0.0, 1.5, -0.25, 2.0, 0.75}});
    const Eigen::VectorXd theta = theta_from_coefficients(beta, layout);
    const auto back = back_transform(theta * 0.4, layout, w);
    EXPECT_LT((back[0] - beta.factors[0]).cwiseAbs().maxCoeff(), 1e-15);
    for (const auto& pr : layout.blocks[0].pairs) {
        const int t = layout.blocks[0].pair_position(pr.high, pr.low);
        EXPECT_NEAR(theta[t], back[0][pr.high] - back[0][pr.low], 1e-15);
    }
    EXPECT_THROW(back_transform(Eigen::VectorXd::Zero(9), layout, w), Error);
}
