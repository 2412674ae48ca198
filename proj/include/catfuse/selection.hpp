#pragma once
#include <catfuse/coding.hpp>
#include <catfuse/solver.hpp>
#include <catfuse/structure.hpp>
#include <catfuse/weights.hpp>
#include <cstdint>
#include <string>
#include <vector>

namespace catfuse {

struct CvConfig
{
    std::size_t K = 5;
    std::size_t grid_size = 100;
    std::uint64_t seed = 1;
    WeightOptions weights;
    bool refit_inside = false;
    double gamma = kDefaultSqrtGamma * kDefaultSqrtGamma;
    double cluster_tol = kDefaultClusterTol;
};

struct CvCurve
{
    std::vector<double> s_grid;                 // k / (G - 1), ascending
    std::vector<double> mean_score;
    std::vector<std::vector<double>> fold_scores;   // [fold][grid point]
    std::vector<int> folds;                     // fold index per observation
    double chosen_s_ratio = 0.0;
    std::size_t chosen_index = 0;
    std::uint64_t seed = 0;
    bool refit_inside = false;
};

// Seeded shuffle, then fold = position mod K. Fold sizes differ by at most 1.
std::vector<int> fold_assignment(std::size_t n, std::size_t K, std::uint64_t seed);

// Index of the smallest score; near-ties (1e-12 relative) go to the lower index.
std::size_t argmin_first(const std::vector<double>& scores);

CvCurve kfold_cv(const Dataset& ds, const CvConfig& config);

// Both curves from one set of fold paths: {without refit, with refit}.
std::pair<CvCurve, CvCurve> kfold_cv_both(const Dataset& ds, const CvConfig& config);

// s_ratio, mean_score, fold_1..fold_K
std::string cv_to_csv(const CvCurve& curve);

enum class InformationCriterion { AIC, BIC };

// n log(RSS/n) + (2 or log n) df per path point. With `use_refit` the RSS of
// the refitted model on the extracted partition is used.
std::vector<double> information_criterion(const Dataset& ds,
                                          const PathResult& path,
                                          InformationCriterion kind,
                                          bool use_refit = false,
                                          double cluster_tol = kDefaultClusterTol);

} // namespace catfuse
