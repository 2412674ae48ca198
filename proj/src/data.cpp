#include <catfuse/data.hpp>
#include <json.hpp>
#include <charconv>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>
#include <unordered_map>

namespace catfuse {

std::string_view to_string(ErrorCode code)
{
    switch (code) {
        case ErrorCode::InvalidArgument: return "InvalidArgument";
        case ErrorCode::InvalidSchema: return "InvalidSchema";
        case ErrorCode::Io: return "Io";
        case ErrorCode::MissingColumn: return "MissingColumn";
        case ErrorCode::UnknownLevel: return "UnknownLevel";
        case ErrorCode::NonNumericResponse: return "NonNumericResponse";
        case ErrorCode::EmptyDataset: return "EmptyDataset";
        case ErrorCode::UnknownFactor: return "UnknownFactor";
        case ErrorCode::DegenerateFactor: return "DegenerateFactor";
        case ErrorCode::NotOrdinal: return "NotOrdinal";
        case ErrorCode::NonPositiveWeight: return "NonPositiveWeight";
        case ErrorCode::NonPositiveGamma: return "NonPositiveGamma";
        case ErrorCode::UnobservedLevel: return "UnobservedLevel";
        case ErrorCode::OlsUnavailable: return "OlsUnavailable";
        case ErrorCode::MissingCoordinates: return "MissingCoordinates";
        case ErrorCode::NotConverged: return "NotConverged";
        case ErrorCode::LayoutMismatch: return "LayoutMismatch";
        case ErrorCode::RankDeficient: return "RankDeficient";
        case ErrorCode::FoldRankDeficient: return "FoldRankDeficient";
        case ErrorCode::ShapeMismatch: return "ShapeMismatch";
        case ErrorCode::UnknownScenario: return "UnknownScenario";
    }
    return "Unknown";
}

std::string_view to_string(Scale scale)
{
    switch (scale) {
        case Scale::Nominal: return "nominal";
        case Scale::Ordinal: return "ordinal";
        case Scale::Binary: return "binary";
    }
    return "nominal";
}

Scale parse_scale(std::string_view text)
{
    if (text == "nominal") return Scale::Nominal;
    if (text == "ordinal") return Scale::Ordinal;
    if (text == "binary") return Scale::Binary;
    throw Error(ErrorCode::InvalidSchema, "unknown scale '" + std::string(text) + "'");
}

void FactorSchema::validate() const
{
    if (name.empty()) {
        throw Error(ErrorCode::InvalidSchema, "factor with empty name");
    }
    if (levels.size() < 2) {
        throw Error(ErrorCode::DegenerateFactor,
                    "factor '" + name + "' needs at least 2 levels");
    }
    std::set<std::string> seen(levels.begin(), levels.end());
    if (seen.size() != levels.size()) {
        throw Error(ErrorCode::InvalidSchema, "factor '" + name + "' has duplicate level labels");
    }
    if (scale == Scale::Binary && levels.size() != 2) {
        throw Error(ErrorCode::InvalidSchema, "binary factor '" + name + "' must have 2 levels");
    }
    if (spatial_coords) {
        if (spatial_coords->size() != levels.size()) {
            throw Error(ErrorCode::InvalidSchema,
                        "factor '" + name + "': spatial_coords needs one entry per level");
        }
        for (double c : *spatial_coords) {
            if (!std::isfinite(c) || c < 0.0) {
                throw Error(ErrorCode::InvalidSchema,
                            "factor '" + name + "': spatial_coords must be finite and >= 0");
            }
        }
    }
}

int FactorSchema::level_index(std::string_view label) const
{
    for (std::size_t i = 0; i < levels.size(); ++i) {
        if (levels[i] == label) return static_cast<int>(i);
    }
    return -1;
}

namespace {

std::string json_scalar_to_label(const nlohmann::json& v)
{
    if (v.is_string()) return v.get<std::string>();
    if (v.is_number_integer()) return std::to_string(v.get<long long>());
    if (v.is_number()) {
        std::ostringstream os;
        os << v.get<double>();
        return os.str();
    }
    throw Error(ErrorCode::InvalidSchema, "level labels must be strings or numbers");
}

} // namespace

std::vector<FactorSchema> parse_schema_json(std::string_view json_text)
{
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(json_text);
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::InvalidSchema, std::string("schema is not valid JSON: ") + e.what());
    }
    if (!doc.is_array()) {
        throw Error(ErrorCode::InvalidSchema, "schema must be a JSON array");
    }
    std::vector<FactorSchema> out;
    std::set<std::string> names;
    for (const auto& item : doc) {
        if (!item.is_object() || !item.contains("name") || !item.contains("scale")
            || !item.contains("levels")) {
            throw Error(ErrorCode::InvalidSchema,
                        "every schema entry needs name, scale and levels");
        }
        FactorSchema f;
        f.name = item.at("name").get<std::string>();
        f.scale = parse_scale(item.at("scale").get<std::string>());
        for (const auto& lv : item.at("levels")) f.levels.push_back(json_scalar_to_label(lv));
        if (item.contains("spatial_coords") && !item.at("spatial_coords").is_null()) {
            f.spatial_coords = item.at("spatial_coords").get<std::vector<double>>();
        }
        f.validate();
        if (!names.insert(f.name).second) {
            throw Error(ErrorCode::InvalidSchema, "duplicate factor name '" + f.name + "'");
        }
        out.push_back(std::move(f));
    }
    if (out.empty()) {
        throw Error(ErrorCode::InvalidSchema, "schema declares no factors");
    }
    return out;
}

std::vector<FactorSchema> load_schema(const std::filesystem::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::Io, "cannot open schema " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_schema_json(ss.str());
}

std::string schema_to_json(const std::vector<FactorSchema>& schemas)
{
    nlohmann::json doc = nlohmann::json::array();
    for (const auto& f : schemas) {
        nlohmann::json item;
        item["name"] = f.name;
        item["scale"] = std::string(to_string(f.scale));
        item["levels"] = f.levels;
        if (f.spatial_coords) item["spatial_coords"] = *f.spatial_coords;
        doc.push_back(item);
    }
    return doc.dump();
}

Dataset::Dataset(std::vector<FactorSchema> schemas,
                 Eigen::VectorXd y,
                 std::vector<std::vector<int>> codes)
    : schemas_(std::move(schemas))
    , y_(std::move(y))
    , codes_(std::move(codes))
{
    if (y_.size() == 0) throw Error(ErrorCode::EmptyDataset, "dataset has no observations");
    if (codes_.size() != schemas_.size()) {
        throw Error(ErrorCode::ShapeMismatch, "one code column per factor required");
    }
    for (Eigen::Index i = 0; i < y_.size(); ++i) {
        if (!std::isfinite(y_[i])) {
            throw Error(ErrorCode::NonNumericResponse,
                        "response at row " + std::to_string(i) + " is not finite");
        }
    }
    counts_.resize(schemas_.size());
    for (std::size_t l = 0; l < schemas_.size(); ++l) {
        schemas_[l].validate();
        if (codes_[l].size() != n()) {
            throw Error(ErrorCode::ShapeMismatch,
                        "code column of factor '" + schemas_[l].name + "' has wrong length");
        }
        counts_[l].assign(schemas_[l].levels.size(), 0);
        for (int c : codes_[l]) {
            if (c < 0 || c > schemas_[l].k()) {
                throw Error(ErrorCode::UnknownLevel,
                            "level index " + std::to_string(c) + " out of range for '"
                                + schemas_[l].name + "'");
            }
            ++counts_[l][static_cast<std::size_t>(c)];
        }
    }
}

std::size_t Dataset::factor_index(std::string_view name) const
{
    for (std::size_t l = 0; l < schemas_.size(); ++l) {
        if (schemas_[l].name == name) return l;
    }
    throw Error(ErrorCode::UnknownFactor, "unknown factor '" + std::string(name) + "'");
}

Dataset Dataset::subset(std::span<const std::size_t> rows) const
{
    Eigen::VectorXd y(static_cast<Eigen::Index>(rows.size()));
    std::vector<std::vector<int>> codes(schemas_.size());
    for (auto& c : codes) c.reserve(rows.size());
    for (std::size_t m = 0; m < rows.size(); ++m) {
        y[static_cast<Eigen::Index>(m)] = y_[static_cast<Eigen::Index>(rows[m])];
        for (std::size_t l = 0; l < schemas_.size(); ++l) codes[l].push_back(codes_[l][rows[m]]);
    }
    return Dataset(schemas_, std::move(y), std::move(codes));
}

namespace {

// Splits one CSV record. Double-quoted fields may contain commas and "" escapes.
std::vector<std::string> split_record(std::string_view line)
{
    std::vector<std::string> fields;
    std::string cur;
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        char ch = line[i];
        if (quoted) {
            if (ch == '"') {
                if (i + 1 < line.size() && line[i + 1] == '"') {
                    cur.push_back('"');
                    ++i;
                } else {
                    quoted = false;
                }
            } else {
                cur.push_back(ch);
            }
        } else if (ch == '"') {
            quoted = true;
        } else if (ch == ',') {
            fields.push_back(std::move(cur));
            cur.clear();
        } else {
            cur.push_back(ch);
        }
    }
    fields.push_back(std::move(cur));
    return fields;
}

std::string_view trim(std::string_view s)
{
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    return s;
}

bool parse_double(std::string_view s, double& out)
{
    s = trim(s);
    if (s.empty()) return false;
    if (s.front() == '+') s.remove_prefix(1);
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
    return ec == std::errc() && ptr == s.data() + s.size() && std::isfinite(out);
}

} // namespace

Dataset parse_csv(std::string_view text,
                  const std::vector<FactorSchema>& schema,
                  std::string_view response_column)
{
    std::vector<std::string_view> lines;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        std::size_t end = text.find('\n', pos);
        if (end == std::string_view::npos) end = text.size();
        std::string_view line = text.substr(pos, end - pos);
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
        lines.push_back(line);
        pos = end + 1;
    }
    while (!lines.empty() && trim(lines.back()).empty()) lines.pop_back();
    if (lines.empty()) throw Error(ErrorCode::EmptyDataset, "CSV input has no header row");

    std::string_view header_line = lines.front();
    // tolerate a UTF-8 byte order mark
    if (header_line.size() >= 3 && header_line.substr(0, 3) == "\xEF\xBB\xBF") {
        header_line.remove_prefix(3);
    }
    auto header = split_record(header_line);
    std::unordered_map<std::string, std::size_t> column;
    for (std::size_t c = 0; c < header.size(); ++c) column.emplace(std::string(trim(header[c])), c);

    auto find_column = [&](const std::string& name) {
        auto it = column.find(name);
        if (it == column.end()) {
            throw Error(ErrorCode::MissingColumn, "column '" + name + "' not found in header");
        }
        return it->second;
    };
    const std::size_t ycol = find_column(std::string(response_column));
    std::vector<std::size_t> fcol;
    for (const auto& f : schema) {
        f.validate();
        fcol.push_back(find_column(f.name));
    }

    std::vector<double> y;
    std::vector<std::vector<int>> codes(schema.size());
    for (std::size_t r = 1; r < lines.size(); ++r) {
        const std::size_t row = r - 1;
        auto fields = split_record(lines[r]);
        if (fields.size() != header.size()) {
            throw Error(ErrorCode::ShapeMismatch,
                        "row " + std::to_string(row) + " has " + std::to_string(fields.size())
                            + " fields, header has " + std::to_string(header.size()));
        }
        double value = 0.0;
        if (!parse_double(fields[ycol], value)) {
            throw Error(ErrorCode::NonNumericResponse,
                        "row " + std::to_string(row) + ": response '" + fields[ycol]
                            + "' is not a finite number");
        }
        y.push_back(value);
        for (std::size_t l = 0; l < schema.size(); ++l) {
            std::string_view token = trim(fields[fcol[l]]);
            int idx = schema[l].level_index(token);
            if (idx < 0) {
                throw Error(ErrorCode::UnknownLevel,
                            "row " + std::to_string(row) + ", factor '" + schema[l].name
                                + "': unknown level '" + std::string(token) + "'");
            }
            codes[l].push_back(idx);
        }
    }
    if (y.empty()) throw Error(ErrorCode::EmptyDataset, "CSV input has no data rows");
    Eigen::VectorXd yv = Eigen::Map<Eigen::VectorXd>(y.data(), static_cast<Eigen::Index>(y.size()));
    return Dataset(schema, std::move(yv), std::move(codes));
}

Dataset ingest_csv(const std::filesystem::path& path,
                   const std::vector<FactorSchema>& schema,
                   std::string_view response_column)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::Io, "cannot open data file " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_csv(ss.str(), schema, response_column);
}

std::vector<std::size_t> class_frequencies(const Dataset& ds, std::string_view factor)
{
    return ds.counts(ds.factor_index(factor));
}

std::size_t Coefficients::num_dummies() const
{
    std::size_t total = 0;
    for (const auto& b : factors) total += static_cast<std::size_t>(b.size()) - 1;
    return total;
}

Eigen::VectorXd Coefficients::predict(const Dataset& ds) const
{
    if (factors.size() != ds.num_factors()) {
        throw Error(ErrorCode::ShapeMismatch, "coefficients do not match dataset factors");
    }
    Eigen::VectorXd out = Eigen::VectorXd::Constant(static_cast<Eigen::Index>(ds.n()), intercept);
    for (std::size_t l = 0; l < factors.size(); ++l) {
        const auto& codes = ds.codes(l);
        for (std::size_t i = 0; i < ds.n(); ++i) out[static_cast<Eigen::Index>(i)] += factors[l][codes[i]];
    }
    return out;
}

double Coefficients::rss(const Dataset& ds) const
{
    return (ds.y() - predict(ds)).squaredNorm();
}

Coefficients zero_coefficients(const std::vector<FactorSchema>& schemas)
{
    Coefficients c;
    for (const auto& f : schemas) c.factors.push_back(Eigen::VectorXd::Zero(static_cast<Eigen::Index>(f.levels.size())));
    return c;
}

} // namespace catfuse
