#include "helpers.hpp"
#include <catfuse/coding.hpp>
#include <catfuse/error.hpp>
#include <catfuse/weights.hpp>
#include <gtest/gtest.h>

using namespace catfuse;
using testutil::factor;

TEST(Layout, NominalPairOrderAndRestrictions)
{
    auto layout = make_layout({factor("a", Scale::Nominal, 4), factor("b", Scale::Ordinal, 3),
                               factor("c", Scale::Binary, 2)});
    ASSERT_EQ(layout.blocks.size(), 3u);
    const auto& a = layout.blocks[0];
    std::vector<LevelPair> want{{1, 0}, {2, 0}, {3, 0}, {2, 1}, {3, 1}, {3, 2}};
    EXPECT_EQ(a.pairs, want);
    EXPECT_EQ(a.pair_position(3, 1), 4);
    EXPECT_EQ(layout.blocks[1].pairs, (std::vector<LevelPair>{{1, 0}, {2, 1}}));
    EXPECT_EQ(layout.blocks[1].pair_position(2, 0), -1);
    EXPECT_EQ(layout.blocks[1].offset, 6u);
    EXPECT_EQ(layout.blocks[2].kind, PenaltyKind::Nominal);
    EXPECT_EQ(layout.size(), 9u);
    EXPECT_EQ(layout.restriction_count(), 3u);
}

TEST(Design, DummyColumnsAreCenteredIndicators)
{
    std::mt19937_64 rng(3);
    Dataset ds = testutil::random_dataset(rng, {factor("a", Scale::Nominal, 3), factor("b", Scale::Ordinal, 4)}, 40);
    DesignBundle d = dummy_design(ds);
    ASSERT_EQ(d.X.cols(), 5);
    EXPECT_LT(d.X.colwise().sum().cwiseAbs().maxCoeff(), 1e-12);
    EXPECT_NEAR(d.y_centered.sum(), 0.0, 1e-10);
    Eigen::MatrixXd raw = d.raw();
    for (Eigen::Index j = 0; j < raw.cols(); ++j) {
        const auto& m = d.column_map[static_cast<std::size_t>(j)];
        EXPECT_EQ(m.kind, ColumnKind::Dummy);
        for (std::size_t t = 0; t < ds.n(); ++t) {
            EXPECT_NEAR(raw(static_cast<Eigen::Index>(t), j), ds.level(t, m.factor) == m.level ? 1.0 : 0.0, 1e-12);
        }
    }
}

TEST(Design, SplitColumnsAreThresholdIndicators)
{
    std::mt19937_64 rng(4);
    Dataset ds = testutil::random_dataset(rng, {factor("a", Scale::Nominal, 2), factor("o", Scale::Ordinal, 4)}, 30);
    SplitColumns s = split_design(ds, "o");
    ASSERT_EQ(s.columns.cols(), 3);
    for (std::size_t t = 0; t < ds.n(); ++t) {
        for (int j = 0; j < 3; ++j) {
            EXPECT_EQ(s.columns(static_cast<Eigen::Index>(t), j), ds.level(t, 1) >= j + 1 ? 1.0 : 0.0);
        }
    }
    EXPECT_THROW(split_design(ds, "a"), Error);
}

TEST(Transform, UTransformInvertsAndMatchesDifferences)
{
    std::mt19937_64 rng(5);
    std::normal_distribution<double> nd;
    for (int rep = 0; rep < 200; ++rep) {
        Eigen::VectorXd b(1 + rep % 9);
        for (auto& v : b) v = nd(rng);
        Eigen::VectorXd d = u_transform(b);
        EXPECT_NEAR(d[0], b[0], 1e-15);
        for (Eigen::Index i = 1; i < b.size(); ++i) EXPECT_NEAR(d[i], b[i] - b[i - 1], 1e-14);
        EXPECT_LT((u_back_transform(d) - b).cwiseAbs().maxCoeff(), 1e-12);
    }
}

TEST(Ols, SingleNominalFactorGivesGroupMeans)
{
    std::mt19937_64 rng(6);
    Dataset ds = testutil::random_dataset(rng, {factor("a", Scale::Nominal, 4)}, 60);
    std::vector<double> sum(4, 0.0), cnt(4, 0.0);
    for (std::size_t t = 0; t < ds.n(); ++t) {
        sum[static_cast<std::size_t>(ds.level(t, 0))] += ds.y()[static_cast<Eigen::Index>(t)];
        cnt[static_cast<std::size_t>(ds.level(t, 0))] += 1;
    }
    Coefficients c = fit_ols(ds);
    const double m0 = sum[0] / cnt[0];
    EXPECT_NEAR(c.intercept, m0, 1e-10);
    EXPECT_EQ(c.factors[0][0], 0.0);
    for (int i = 1; i < 4; ++i) EXPECT_NEAR(c.factors[0][i], sum[static_cast<std::size_t>(i)] / cnt[static_cast<std::size_t>(i)] - m0, 1e-10);
}

TEST(Ols, RankDeficientDesignThrows)
{
    std::vector<FactorSchema> s{factor("a", Scale::Nominal, 3)};
    Eigen::VectorXd y(4);
    y << 1, 2, 3, 4;
    Dataset ds(s, y, {{0, 1, 0, 1}});
    try {
        fit_ols(ds);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::RankDeficient);
    }
}

TEST(Augmented, ThetaOfBetaSatisfiesRestrictionsAndReproducesFit)
{
    std::mt19937_64 rng(7);
    std::normal_distribution<double> nd;
    std::vector<FactorSchema> s{factor("a", Scale::Nominal, 5), factor("b", Scale::Ordinal, 4),
                                factor("c", Scale::Binary, 2)};
    Dataset ds = testutil::random_dataset(rng, s, 80);
    WeightSet w = standard_weights(ds, true);
    AugmentedProblem p = build_augmented(ds, w, 1e6);
    EXPECT_EQ(p.r(), 6u);
    EXPECT_EQ(p.Z_tilde.rows(), static_cast<Eigen::Index>(ds.n() + p.r()));

    for (int rep = 0; rep < 50; ++rep) {
        Coefficients beta = zero_coefficients(s);
        beta.intercept = nd(rng);
        for (auto& f : beta.factors) {
            for (Eigen::Index i = 1; i < f.size(); ++i) f[i] = nd(rng);
        }
        Eigen::VectorXd theta = theta_from_coefficients(beta, p.layout);
        EXPECT_LT((p.A * theta).cwiseAbs().maxCoeff(), 1e-12);
        // nominal block: theta_ij = beta_i - beta_j
        const auto& blk = p.layout.blocks[0];
        for (std::size_t t = 0; t < blk.pairs.size(); ++t) {
            EXPECT_NEAR(theta[static_cast<Eigen::Index>(blk.offset + t)],
                        beta.factors[0][blk.pairs[t].high] - beta.factors[0][blk.pairs[t].low], 1e-14);
        }
        // centered design reproduces centered predictions
        Eigen::VectorXd pred = beta.predict(ds);
        Eigen::VectorXd centered = pred.array() - pred.mean();
        EXPECT_LT((p.Z * theta - centered).cwiseAbs().maxCoeff(), 1e-10);
        // intercept recovered from centering
        const double icpt = centered_intercept(pred.mean(), p.level_means, beta);
        EXPECT_NEAR(icpt, beta.intercept, 1e-10);
        // scaled system: Z_tilde (W theta) == [Z theta; sqrt(gamma) A theta]
        Eigen::VectorXd tt = p.penalty_weights.cwiseProduct(theta);
        EXPECT_LT((p.Z_tilde.topRows(static_cast<Eigen::Index>(ds.n())) * tt - p.Z * theta).cwiseAbs().maxCoeff(), 1e-9);
    }
}

TEST(Augmented, RejectsNonPositiveGamma)
{
    std::mt19937_64 rng(8);
    Dataset ds = testutil::random_dataset(rng, {factor("a", Scale::Nominal, 3)}, 20);
    WeightSet w = standard_weights(ds, false);
    for (double g : {0.0, -1.0, std::numeric_limits<double>::infinity()}) {
        try {
            build_augmented(ds, w, g);
            FAIL();
        } catch (const Error& e) {
            EXPECT_EQ(e.code(), ErrorCode::NonPositiveGamma);
        }
    }
}
