#include "helpers.hpp"
#include <catfuse/error.hpp>
#include <catfuse/simlab.hpp>
#include <catfuse/structure.hpp>
#include <gtest/gtest.h>
#include <json.hpp>

using namespace catfuse;
using testutil::factor;

TEST(Scenarios, ShapesAndTruth)
{
    Scenario s1 = make_scenario("S1");
    ASSERT_EQ(s1.schemas.size(), 1u);
    EXPECT_EQ(s1.schemas[0].levels.size(), 9u);
    EXPECT_EQ(s1.n_train, 180u);

    Scenario s2 = make_scenario("S2");
    EXPECT_EQ(s2.schemas.size(), 8u);
    EXPECT_EQ(s2.n_train, 500u);
    EXPECT_EQ(s2.n_test, 1000u);
    auto rel = s2.relevant();
    EXPECT_EQ(std::count(rel.begin(), rel.end(), true), 4);

    Scenario s3 = make_scenario("S3");
    EXPECT_EQ(s3.schemas.size(), 16u);
    auto rel3 = s3.relevant();
    EXPECT_EQ(std::count(rel3.begin(), rel3.end(), true), 4);
    for (const auto& sc : {s1, s2, s3}) EXPECT_NO_THROW(sc.validate());

    try {
        make_scenario("S4");
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::UnknownScenario);
    }
}

TEST(Scenarios, GenerationIsDeterministicAndBalanced)
{
    auto a = generate(make_scenario("S1", 9));
    auto b = generate(make_scenario("S1", 9));
    auto c = generate(make_scenario("S1", 10));
    EXPECT_EQ(a.train.y(), b.train.y());
    EXPECT_EQ(a.test.codes(0), b.test.codes(0));
    EXPECT_NE(a.train.y(), c.train.y());
    for (auto n : a.train.counts(0)) EXPECT_EQ(n, 20u);
    EXPECT_EQ(a.test.n(), 180u);
    EXPECT_EQ(a.truth.partition.factors[0].clusters.size(), 3u);
}

TEST(Scenarios, ResponseFollowsTheModel)
{
    // residuals from the true model should have roughly the nominal sd
    Scenario s = make_scenario("S2", 3);
    auto g = generate(s);
    Eigen::VectorXd mean = g.truth.beta.predict(g.test);
    const double sd = std::sqrt((g.test.y() - mean).squaredNorm() / static_cast<double>(g.test.n()));
    EXPECT_NEAR(sd, s.noise_sd, 0.1);
    EXPECT_DOUBLE_EQ(g.truth.beta.intercept, s.alpha);
}

TEST(Metrics, HandComputedRates)
{
    std::vector<FactorSchema> s{factor("a", Scale::Nominal, 4), factor("o", Scale::Ordinal, 3),
                                factor("z", Scale::Nominal, 3)};
    Truth t;
    t.beta = testutil::coefficients({{0, 0, 1, 1}, {0, 0, 2}, {0, 0, 0}}, 1.0);
    t.relevant = {true, true, false};
    t.partition = extract_clusters(t.beta, s);
    auto est = testutil::coefficients({{0, 0.5, 1, 1}, {0, 0, 0}, {0, 0, 0.25}}, 1.0);
    Metrics m = evaluate(est, extract_clusters(est, s), t, s);
    // squared errors 0.25 + 4 + 0.0625 over 7 dummies
    EXPECT_NEAR(m.coef_mse, (0.25 + 4.0 + 0.0625) / 7.0, 1e-15);
    EXPECT_EQ(m.sel_fpr, 1.0);
    EXPECT_EQ(m.sel_fnr, 0.5);
    // zero pairs: a (1,0),(3,2); o (1,0) -> split only a (1,0)
    EXPECT_NEAR(m.clu_fpr, 1.0 / 3.0, 1e-15);
    // nonzero pairs: a has 4, o has (2,1) -> fused only o (2,1)
    EXPECT_NEAR(m.clu_fnr, 1.0 / 5.0, 1e-15);
}

TEST(Variants, ParsesLabels)
{
    auto v = parse_variants("ols,stdrd,adapt+rf,stdrd+nij+rf");
    ASSERT_EQ(v.size(), 4u);
    EXPECT_TRUE(v[0].ols);
    EXPECT_FALSE(v[1].adaptive);
    EXPECT_TRUE(v[2].adaptive && v[2].refit && !v[2].use_frequency);
    EXPECT_TRUE(v[3].use_frequency && v[3].refit);
    for (const auto& x : v) EXPECT_EQ(parse_variant(x.label()).label(), x.label());
    EXPECT_THROW(parse_variant("lasso"), Error);
    EXPECT_THROW(parse_variants(""), Error);
}

TEST(Study, MedianAndReportLayout)
{
    EXPECT_DOUBLE_EQ(median({3, 1, 2}), 2.0);
    EXPECT_DOUBLE_EQ(median({4, 1, 2, 3}), 2.5);

    StudyOptions opt;
    opt.grid_size = 20;
    auto variants = parse_variants("ols,adapt,adapt+rf");
    SimReport r = run_study(make_scenario("S1"), variants, 2, 4, opt);
    ASSERT_EQ(r.records.size(), 6u);
    EXPECT_EQ(r.records[4].replicate, 1u);
    EXPECT_EQ(r.records[4].variant, "adapt");
    for (const auto& rec : r.records) {
        EXPECT_GE(rec.metrics.msep, 0.0);
        EXPECT_GE(rec.metrics.df, 1.0);
    }
    EXPECT_EQ(r.column("ols", &Metrics::s_ratio), (std::vector<double>{1.0, 1.0}));
    EXPECT_EQ(r.column("ols", &Metrics::df), (std::vector<double>{9.0, 9.0}));

    SimReport again = run_study(make_scenario("S1"), variants, 2, 4, opt);
    EXPECT_EQ(report_to_csv(r), report_to_csv(again));
    const std::string csv = report_to_csv(r);
    EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 7);
    auto j = nlohmann::json::parse(report_summary_json(r));
    EXPECT_TRUE(j["variants"]["adapt+rf"]["coef_mse"].contains("median"));
}
