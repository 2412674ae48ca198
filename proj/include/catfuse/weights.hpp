#pragma once
#include <Eigen/Core>
#include <catfuse/data.hpp>
#include <catfuse/layout.hpp>
#include <optional>

namespace catfuse {

inline constexpr double kAdaptiveWeightCap = 1e12;
inline constexpr double kDefaultSpatialFloor = 1e-6;

struct WeightFlags
{
    bool use_frequency = false;
    bool adaptive = false;
    bool spatial = false;
};

/*
 * One strictly positive weight per penalized difference, stored per factor
 * in the order of the factor's FactorBlock::pairs.
 */
struct WeightSet
{
    ThetaLayout layout;
    std::vector<Eigen::VectorXd> factors;
    WeightFlags flags;
    std::optional<Coefficients> ols_reference;

    std::size_t total() const;
    // weights laid out like the global theta vector
    Eigen::VectorXd flattened() const;
    void validate() const;
};

/*
 * Nominal pair (i,j): 2/(k+1) * sqrt((n_i+n_j)/n), or 2/(k+1) without the
 * frequency term. Ordinal adjacent pair: sqrt((n_i+n_{i-1})/n), or 1.
 */
WeightSet standard_weights(const Dataset& ds, bool use_frequency);

// Multiplies each weight by 1/|b_i - b_j| of the supplied least-squares fit.
WeightSet adaptive_weights(const WeightSet& base, const Coefficients& ols);

// Fits OLS on `ds` first; a singular design raises OlsUnavailable.
WeightSet adaptive_weights(const WeightSet& base, const Dataset& ds);

double epanechnikov(double u);

// zeta_ij = max(K((s_i - s_j)/h), floor) for every penalized pair of the block.
Eigen::VectorXd spatial_factors(const FactorSchema& schema,
                                const FactorBlock& block,
                                double h,
                                double floor = kDefaultSpatialFloor);

// Applies spatial multipliers to every factor that carries coordinates.
WeightSet apply_spatial(const WeightSet& base,
                        const std::vector<FactorSchema>& schemas,
                        double h,
                        double floor = kDefaultSpatialFloor);

struct WeightOptions
{
    bool use_frequency = false;
    bool adaptive = false;
    std::optional<double> spatial_h;
    double spatial_floor = kDefaultSpatialFloor;
};

// standard -> adaptive (OLS on ds) -> spatial, as requested by the options.
WeightSet make_weights(const Dataset& ds, const WeightOptions& options);

} // namespace catfuse
