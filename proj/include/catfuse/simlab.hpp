#pragma once
#include <catfuse/data.hpp>
#include <catfuse/selection.hpp>
#include <catfuse/structure.hpp>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace catfuse {

struct Scenario
{
    std::string name;
    std::vector<FactorSchema> schemas;
    std::vector<Eigen::VectorXd> beta;          // per factor, all levels, entry 0 = 0
    double alpha = 1.0;
    double noise_sd = 1.0;
    std::vector<std::vector<double>> probabilities;
    bool balanced = false;                      // exact equal class sizes (one factor)
    std::size_t n_train = 0;
    std::size_t n_test = 0;
    std::uint64_t seed = 1;

    void validate() const;
    // a factor is relevant when any of its true coefficients is nonzero
    std::vector<bool> relevant() const;
};

// "S1", "S2" or "S3"; throws UnknownScenario otherwise.
Scenario make_scenario(std::string_view name, std::uint64_t seed = 1);

struct Truth
{
    Coefficients beta;
    std::vector<bool> relevant;
    ClusterPartition partition;
};

struct GeneratedData
{
    Dataset train;
    Dataset test;
    Truth truth;
};

GeneratedData generate(const Scenario& scenario);

struct Metrics
{
    double coef_mse = 0.0;
    double msep = 0.0;
    double sel_fpr = 0.0;
    double sel_fnr = 0.0;
    double clu_fpr = 0.0;
    double clu_fnr = 0.0;
    double s_ratio = 0.0;
    double df = 0.0;
};

/*
 * Structure is read from the partition: a factor is selected when it has a
 * nonzero cluster, a difference is zero when both levels share a cluster.
 * Rates with an empty denominator are 0. msep, s_ratio and df are left for
 * the caller.
 */
Metrics evaluate(const Coefficients& estimate,
                 const ClusterPartition& partition,
                 const Truth& truth,
                 const std::vector<FactorSchema>& schemas);

struct VariantConfig
{
    bool ols = false;
    bool adaptive = false;
    bool use_frequency = false;
    bool refit = false;

    std::string label() const;
};

// "ols", or "stdrd"/"adapt" optionally followed by "+nij" and/or "+rf".
VariantConfig parse_variant(std::string_view label);
std::vector<VariantConfig> parse_variants(std::string_view comma_list);

struct StudyOptions
{
    std::size_t K = 5;
    std::size_t grid_size = 100;
    double gamma = kDefaultSqrtGamma * kDefaultSqrtGamma;
    double cluster_tol = kDefaultClusterTol;
};

struct SimRecord
{
    std::size_t replicate = 0;
    std::string variant;
    Metrics metrics;
};

struct SimReport
{
    std::string scenario;
    std::uint64_t seed = 0;
    std::size_t replicates = 0;
    std::vector<std::string> variants;
    std::vector<SimRecord> records;             // replicate-major, variant order

    std::vector<double> column(std::string_view variant, double Metrics::*field) const;
};

SimReport run_study(const Scenario& scenario,
                    const std::vector<VariantConfig>& variants,
                    std::size_t replicates,
                    std::uint64_t seed,
                    const StudyOptions& options = {});

double median(std::vector<double> values);

std::string report_to_csv(const SimReport& report);
// per variant: mean and median of every metric
std::string report_summary_json(const SimReport& report, int indent = 2);

} // namespace catfuse
