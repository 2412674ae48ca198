#include <catfuse/coding.hpp>
#include <catfuse/weights.hpp>
#include <algorithm>
#include <cmath>

namespace catfuse {

std::size_t WeightSet::total() const
{
    std::size_t t = 0;
    for (const auto& w : factors) t += static_cast<std::size_t>(w.size());
    return t;
}

Eigen::VectorXd WeightSet::flattened() const
{
    Eigen::VectorXd out(static_cast<Eigen::Index>(total()));
    Eigen::Index pos = 0;
    for (const auto& w : factors) {
        out.segment(pos, w.size()) = w;
        pos += w.size();
    }
    return out;
}

void WeightSet::validate() const
{
    if (factors.size() != layout.blocks.size()) {
        throw Error(ErrorCode::LayoutMismatch, "one weight vector per factor required");
    }
    for (std::size_t l = 0; l < factors.size(); ++l) {
        if (static_cast<std::size_t>(factors[l].size()) != layout.blocks[l].size()) {
            throw Error(ErrorCode::LayoutMismatch, "weight count does not match penalized differences");
        }
        for (Eigen::Index t = 0; t < factors[l].size(); ++t) {
            double w = factors[l][t];
            if (!(w > 0.0) || !std::isfinite(w)) {
                throw Error(ErrorCode::NonPositiveWeight,
                            "weight " + std::to_string(t) + " of factor " + std::to_string(l)
                                + " is not strictly positive and finite");
            }
        }
    }
}

WeightSet standard_weights(const Dataset& ds, bool use_frequency)
{
    WeightSet ws;
    ws.layout = make_layout(ds.schemas());
    ws.flags.use_frequency = use_frequency;
    const double n = static_cast<double>(ds.n());
    for (const auto& block : ws.layout.blocks) {
        const auto& counts = ds.counts(block.factor);
        if (use_frequency) {
            for (std::size_t i = 0; i < counts.size(); ++i) {
                if (counts[i] == 0) {
                    throw Error(ErrorCode::UnobservedLevel,
                                "factor '" + ds.schema(block.factor).name + "' level '"
                                    + ds.schema(block.factor).levels[i]
                                    + "' has no observations; frequency weights undefined");
                }
            }
        }
        const double base = block.kind == PenaltyKind::Nominal ? 2.0 / (block.k + 1) : 1.0;
        Eigen::VectorXd w(static_cast<Eigen::Index>(block.size()));
        for (std::size_t t = 0; t < block.pairs.size(); ++t) {
            double v = base;
            if (use_frequency) {
                const auto [hi, lo] = block.pairs[t];
                v *= std::sqrt(static_cast<double>(counts[hi] + counts[lo]) / n);
            }
            w[static_cast<Eigen::Index>(t)] = v;
        }
        ws.factors.push_back(std::move(w));
    }
    return ws;
}

WeightSet adaptive_weights(const WeightSet& base, const Coefficients& ols)
{
    if (ols.factors.size() != base.layout.blocks.size()) {
        throw Error(ErrorCode::ShapeMismatch, "OLS fit does not match the weight layout");
    }
    WeightSet out = base;
    out.flags.adaptive = true;
    out.ols_reference = ols;
    for (const auto& block : base.layout.blocks) {
        const auto& b = ols.factors[block.factor];
        if (b.size() != block.k + 1) {
            throw Error(ErrorCode::ShapeMismatch, "OLS coefficient vector length mismatch");
        }
        auto& w = out.factors[block.factor];
        for (std::size_t t = 0; t < block.pairs.size(); ++t) {
            const double diff = std::abs(b[block.pairs[t].high] - b[block.pairs[t].low]);
            const double v = w[static_cast<Eigen::Index>(t)];
            w[static_cast<Eigen::Index>(t)] =
                diff > 0.0 ? std::min(v / diff, kAdaptiveWeightCap) : kAdaptiveWeightCap;
        }
    }
    return out;
}

WeightSet adaptive_weights(const WeightSet& base, const Dataset& ds)
{
    Coefficients ols;
    try {
        ols = fit_ols(ds);
    } catch (const Error& e) {
        if (e.code() == ErrorCode::RankDeficient) {
            throw Error(ErrorCode::OlsUnavailable, std::string("adaptive weights: ") + e.what());
        }
        throw;
    }
    return adaptive_weights(base, ols);
}

double epanechnikov(double u)
{
    return std::abs(u) <= 1.0 ? 0.75 * (1.0 - u * u) : 0.0;
}

Eigen::VectorXd spatial_factors(const FactorSchema& schema,
                                const FactorBlock& block,
                                double h,
                                double floor)
{
    if (!schema.spatial_coords) {
        throw Error(ErrorCode::MissingCoordinates, "factor '" + schema.name + "' has no spatial_coords");
    }
    if (!(h > 0.0)) throw Error(ErrorCode::InvalidArgument, "bandwidth h must be positive");
    if (!(floor >= 0.0)) throw Error(ErrorCode::InvalidArgument, "spatial floor must be >= 0");
    const auto& s = *schema.spatial_coords;
    Eigen::VectorXd zeta(static_cast<Eigen::Index>(block.size()));
    for (std::size_t t = 0; t < block.pairs.size(); ++t) {
        const auto [hi, lo] = block.pairs[t];
        zeta[static_cast<Eigen::Index>(t)] = std::max(epanechnikov((s[hi] - s[lo]) / h), floor);
    }
    return zeta;
}

WeightSet apply_spatial(const WeightSet& base,
                        const std::vector<FactorSchema>& schemas,
                        double h,
                        double floor)
{
    WeightSet out = base;
    for (const auto& block : base.layout.blocks) {
        const auto& f = schemas.at(block.factor);
        if (!f.spatial_coords) continue;
        out.factors[block.factor] =
            out.factors[block.factor].cwiseProduct(spatial_factors(f, block, h, floor));
        out.flags.spatial = true;
    }
    return out;
}

WeightSet make_weights(const Dataset& ds, const WeightOptions& options)
{
    WeightSet ws = standard_weights(ds, options.use_frequency);
    if (options.adaptive) ws = adaptive_weights(ws, ds);
    if (options.spatial_h) ws = apply_spatial(ws, ds.schemas(), *options.spatial_h, options.spatial_floor);
    return ws;
}

} // namespace catfuse
