#pragma once
#include <catfuse/coding.hpp>
#include <catfuse/data.hpp>
#include <catfuse/simlab.hpp>
#include <random>
#include <string>
#include <vector>

namespace testutil {

inline catfuse::FactorSchema factor(std::string name, catfuse::Scale scale, int levels)
{
    catfuse::FactorSchema f;
    f.name = std::move(name);
    f.scale = scale;
    for (int i = 0; i < levels; ++i) f.levels.push_back("l" + std::to_string(i));
    return f;
}

// Every level observed at least twice; remaining codes uniform at random.
// Response: sum of random level effects plus N(0, sd^2) noise.
inline catfuse::Dataset random_dataset(std::mt19937_64& rng,
                                       const std::vector<catfuse::FactorSchema>& schemas,
                                       std::size_t n,
                                       double sd = 1.0)
{
    std::vector<std::vector<int>> codes;
    std::normal_distribution<double> nd(0.0, 1.0);
    Eigen::VectorXd y = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n));
    for (const auto& f : schemas) {
        const int L = static_cast<int>(f.levels.size());
        std::vector<int> c(n);
        std::uniform_int_distribution<int> pick(0, L - 1);
        for (std::size_t t = 0; t < n; ++t) c[t] = t < static_cast<std::size_t>(2 * L) ? static_cast<int>(t) % L : pick(rng);
        std::vector<double> eff(static_cast<std::size_t>(L));
        for (int i = 1; i < L; ++i) eff[static_cast<std::size_t>(i)] = 2.0 * nd(rng);
        for (std::size_t t = 0; t < n; ++t) y[static_cast<Eigen::Index>(t)] += eff[static_cast<std::size_t>(c[t])];
        codes.push_back(std::move(c));
    }
    for (std::size_t t = 0; t < n; ++t) y[static_cast<Eigen::Index>(t)] += 1.0 + sd * nd(rng);
    return catfuse::Dataset(schemas, std::move(y), std::move(codes));
}

inline catfuse::Dataset s1_train(std::uint64_t seed)
{
    return catfuse::generate(catfuse::make_scenario("S1", seed)).train;
}

inline catfuse::Coefficients coefficients(std::vector<std::vector<double>> per_factor, double intercept = 0.0)
{
    catfuse::Coefficients c;
    c.intercept = intercept;
    for (auto& v : per_factor) c.factors.push_back(Eigen::Map<Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size())));
    return c;
}

} // namespace testutil
