#pragma once
#include <catfuse/data.hpp>
#include <string>
#include <vector>

namespace catfuse {

inline constexpr double kDefaultClusterTol = 1e-8;

// Levels of one factor grouped into clusters that share a coefficient.
// Clusters are sorted by their smallest level, so cluster 0 always holds the
// reference level (the zero cluster).
struct FactorPartition
{
    std::vector<std::vector<int>> clusters;
    std::vector<double> values;         // coefficient per cluster, values[0] == 0

    std::size_t nonzero_clusters() const { return clusters.empty() ? 0 : clusters.size() - 1; }
    // cluster index of every level
    std::vector<int> labels(int num_levels) const;
    void validate(int num_levels, bool contiguous) const;
};

struct ClusterPartition
{
    std::vector<FactorPartition> factors;

    bool operator==(const ClusterPartition& other) const;
};

/*
 * Nominal: levels i, j fused when |b_i - b_j| <= tol * max(1, max_i |b_i|),
 * closed transitively. Ordinal: only adjacent levels are merged, so clusters
 * are runs. The threshold scale is taken per factor.
 */
ClusterPartition extract_clusters(const Coefficients& beta,
                                  const std::vector<FactorSchema>& schemas,
                                  double tol = kDefaultClusterTol);

// Coefficients in which every level takes its cluster's value.
Coefficients partition_coefficients(const ClusterPartition& partition, double intercept);

struct RefitResult
{
    Coefficients coefficients;
    ClusterPartition partition;         // same clusters, refitted values
    double rss = 0.0;
};

// OLS on the design with one indicator per nonzero cluster. Throws RankDeficient.
RefitResult refit(const Dataset& ds, const ClusterPartition& partition);

// 1 + number of nonzero clusters over all factors.
std::size_t degrees_of_freedom(const ClusterPartition& partition);

std::string partition_to_json(const ClusterPartition& partition,
                              const std::vector<FactorSchema>& schemas,
                              int indent = 2);

} // namespace catfuse
