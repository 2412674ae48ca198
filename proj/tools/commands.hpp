#pragma once
#include <cstdint>
#include <optional>
#include <string>

namespace catfuse::cli {

inline constexpr const char* kSoftwareVersion = "0.1.0";

struct RunConfig
{
    std::string command;
    std::string data;
    std::string schema;
    std::string response = "y";
    std::string scenario;
    std::string out = ".";
    bool adaptive = false;
    bool frequency = false;
    std::optional<double> spatial_h;
    double spatial_floor = 1e-6;
    double gamma = 1e10;
    std::size_t grid = 100;
    std::size_t k_folds = 5;
    std::uint64_t seed = 1;
    bool refit = false;
    std::optional<double> s_ratio;
    std::string cv_result;
    std::size_t replicates = 1;
    std::string variants = "ols,stdrd,stdrd+rf,adapt,adapt+rf";
    double cluster_tol = 1e-8;
};

// Throws catfuse::Error on invalid configurations.
void validate(const RunConfig& config);

void cmd_fit(const RunConfig& config);
void cmd_path(const RunConfig& config);
void cmd_cv(const RunConfig& config);
void cmd_simulate(const RunConfig& config);

} // namespace catfuse::cli
