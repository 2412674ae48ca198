#pragma once
#include <Eigen/Core>
#include <catfuse/error.hpp>
#include <cstddef>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace catfuse {

enum class Scale { Nominal, Ordinal, Binary };

std::string_view to_string(Scale scale);
Scale parse_scale(std::string_view text);

/*
 * Metadata of one categorical predictor. Level 0 is the reference category.
 * spatial_coords, when present, holds one distance-to-center (km) per level.
 */
struct FactorSchema
{
    std::string name;
    Scale scale = Scale::Nominal;
    std::vector<std::string> levels;
    std::optional<std::vector<double>> spatial_coords;

    // number of free dummy coefficients
    int k() const { return static_cast<int>(levels.size()) - 1; }

    // Binary factors are penalized like nominal ones with k = 1.
    bool penalized_as_ordinal() const { return scale == Scale::Ordinal; }

    // Throws InvalidSchema when an invariant is violated.
    void validate() const;

    // Index of a level label or -1.
    int level_index(std::string_view label) const;
};

std::vector<FactorSchema> parse_schema_json(std::string_view json_text);
std::vector<FactorSchema> load_schema(const std::filesystem::path& path);
std::string schema_to_json(const std::vector<FactorSchema>& schemas);

/*
 * Response plus per-observation level indices. Immutable once built; the
 * constructor validates level ranges and finiteness and tallies class counts.
 */
class Dataset
{
public:
    Dataset(std::vector<FactorSchema> schemas,
            Eigen::VectorXd y,
            std::vector<std::vector<int>> codes);

    std::size_t n() const { return static_cast<std::size_t>(y_.size()); }
    std::size_t num_factors() const { return schemas_.size(); }

    const std::vector<FactorSchema>& schemas() const { return schemas_; }
    const FactorSchema& schema(std::size_t l) const { return schemas_[l]; }
    const Eigen::VectorXd& y() const { return y_; }

    // level index of observation `row` for factor `l`
    int level(std::size_t row, std::size_t l) const { return codes_[l][row]; }
    const std::vector<int>& codes(std::size_t l) const { return codes_[l]; }

    // n_i^{(l)} for every level i of factor l
    const std::vector<std::size_t>& counts(std::size_t l) const { return counts_[l]; }

    std::size_t factor_index(std::string_view name) const;

    Dataset subset(std::span<const std::size_t> rows) const;

private:
    std::vector<FactorSchema> schemas_;
    Eigen::VectorXd y_;
    std::vector<std::vector<int>> codes_;
    std::vector<std::vector<std::size_t>> counts_;
};

Dataset ingest_csv(const std::filesystem::path& path,
                   const std::vector<FactorSchema>& schema,
                   std::string_view response_column);

// Same as ingest_csv but reads from an in-memory buffer.
Dataset parse_csv(std::string_view text,
                  const std::vector<FactorSchema>& schema,
                  std::string_view response_column);

std::vector<std::size_t> class_frequencies(const Dataset& ds, std::string_view factor);

/*
 * Fitted model in dummy parameterization: one vector per factor holding the
 * coefficient of every level (entry 0 is the reference and is always 0).
 */
struct Coefficients
{
    double intercept = 0.0;
    std::vector<Eigen::VectorXd> factors;

    std::size_t num_dummies() const;
    Eigen::VectorXd predict(const Dataset& ds) const;
    double rss(const Dataset& ds) const;
};

// Zero coefficients shaped after the schemas.
Coefficients zero_coefficients(const std::vector<FactorSchema>& schemas);

} // namespace catfuse
