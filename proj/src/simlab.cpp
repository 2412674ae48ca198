#include <catfuse/coding.hpp>
#include <catfuse/io.hpp>
#include <catfuse/simlab.hpp>
#include <json.hpp>
#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <random>

namespace catfuse {

namespace {

FactorSchema make_factor(std::string name, Scale scale, int levels)
{
    FactorSchema f;
    f.name = std::move(name);
    f.scale = scale;
    for (int i = 0; i < levels; ++i) f.levels.push_back(std::to_string(i));
    return f;
}

Eigen::VectorXd vec(std::initializer_list<double> v)
{
    Eigen::VectorXd out(static_cast<Eigen::Index>(v.size()));
    Eigen::Index i = 0;
    for (double x : v) out[i++] = x;
    return out;
}

const std::vector<double> kProb8{0.1, 0.1, 0.2, 0.05, 0.2, 0.1, 0.2, 0.05};
const std::vector<double> kProb4{0.1, 0.4, 0.2, 0.3};

Dataset draw(const Scenario& sc, std::size_t n, std::mt19937_64& rng)
{
    std::vector<std::vector<int>> codes(sc.schemas.size(), std::vector<int>(n));
    for (std::size_t l = 0; l < sc.schemas.size(); ++l) {
        if (sc.balanced) {
            const std::size_t levels = sc.schemas[l].levels.size();
            for (std::size_t t = 0; t < n; ++t) codes[l][t] = static_cast<int>(t * levels / n);
        } else {
            std::discrete_distribution<int> dist(sc.probabilities[l].begin(), sc.probabilities[l].end());
            for (std::size_t t = 0; t < n; ++t) codes[l][t] = dist(rng);
        }
    }
    std::normal_distribution<double> noise(0.0, 1.0);
    Eigen::VectorXd y(static_cast<Eigen::Index>(n));
    for (std::size_t t = 0; t < n; ++t) {
        double v = sc.alpha;
        for (std::size_t l = 0; l < sc.schemas.size(); ++l) v += sc.beta[l][codes[l][t]];
        y[static_cast<Eigen::Index>(t)] = v + sc.noise_sd * noise(rng);
    }
    return Dataset(sc.schemas, std::move(y), std::move(codes));
}

double rate(std::size_t hits, std::size_t total)
{
    return total == 0 ? 0.0 : static_cast<double>(hits) / static_cast<double>(total);
}

struct Fit
{
    Coefficients beta;
    ClusterPartition partition;
    double s_ratio = 1.0;
};

Fit finish_fit(const Dataset& train, const PathResult& pr, double s, bool use_refit, double tol)
{
    Fit fit;
    fit.s_ratio = s;
    const PathPoint pt = pr.at_s_ratio(s);
    fit.partition = extract_clusters(pt.beta, train.schemas(), tol);
    if (use_refit) {
        RefitResult rf = refit(train, fit.partition);
        fit.beta = std::move(rf.coefficients);
        fit.partition = std::move(rf.partition);
    } else {
        fit.beta = pt.beta;
    }
    return fit;
}

} // namespace

void Scenario::validate() const
{
    if (schemas.empty()) throw Error(ErrorCode::InvalidArgument, "scenario without factors");
    if (beta.size() != schemas.size() || (!balanced && probabilities.size() != schemas.size())) {
        throw Error(ErrorCode::ShapeMismatch, "scenario parts disagree in factor count");
    }
    for (std::size_t l = 0; l < schemas.size(); ++l) {
        schemas[l].validate();
        const auto levels = schemas[l].levels.size();
        if (static_cast<std::size_t>(beta[l].size()) != levels || beta[l][0] != 0.0) {
            throw Error(ErrorCode::ShapeMismatch, "true coefficients must cover every level with beta_0 = 0");
        }
        if (!balanced) {
            const auto& p = probabilities[l];
            if (p.size() != levels) throw Error(ErrorCode::ShapeMismatch, "one probability per level required");
            const double sum = std::accumulate(p.begin(), p.end(), 0.0);
            if (std::abs(sum - 1.0) > 1e-12 || *std::min_element(p.begin(), p.end()) < 0.0) {
                throw Error(ErrorCode::InvalidArgument, "class probabilities must be >= 0 and sum to 1");
            }
        }
    }
    if (balanced && schemas.size() != 1) {
        throw Error(ErrorCode::InvalidArgument, "balanced designs support a single factor");
    }
    if (n_train == 0 || !(noise_sd >= 0.0)) throw Error(ErrorCode::InvalidArgument, "invalid scenario sizes");
}

std::vector<bool> Scenario::relevant() const
{
    std::vector<bool> out;
    for (const auto& b : beta) out.push_back(b.cwiseAbs().maxCoeff() > 0.0);
    return out;
}

Scenario make_scenario(std::string_view name, std::uint64_t seed)
{
    Scenario sc;
    sc.name = std::string(name);
    sc.seed = seed;
    sc.alpha = 1.0;
    if (name == "S1") {
        sc.schemas.push_back(make_factor("x", Scale::Nominal, 9));
        sc.beta.push_back(vec({0, 0, 0, 3, 3, 3, -3, -3, -3}));
        sc.probabilities.push_back(std::vector<double>(9, 1.0 / 9.0));
        sc.balanced = true;
        sc.noise_sd = 2.0;
        sc.n_train = 180;
        sc.n_test = 180;
        return sc;
    }
    if (name != "S2" && name != "S3") {
        throw Error(ErrorCode::UnknownScenario, "unknown scenario '" + std::string(name) + "'");
    }
    // true vectors below start with level 0 (the reference), followed by the dummies
    sc.schemas = {make_factor("nom1", Scale::Nominal, 8), make_factor("nom2", Scale::Nominal, 8),
                  make_factor("nom3", Scale::Nominal, 4), make_factor("nom4", Scale::Nominal, 4),
                  make_factor("ord1", Scale::Ordinal, 8), make_factor("ord2", Scale::Ordinal, 8),
                  make_factor("ord3", Scale::Ordinal, 4), make_factor("ord4", Scale::Ordinal, 4)};
    sc.beta = {vec({0, 0, 1, 1, 1, 1, -2, -2}), Eigen::VectorXd::Zero(8),
               vec({0, 0, 2, 2}),               Eigen::VectorXd::Zero(4),
               vec({0, 0, 1, 1, 2, 2, 4, 4}),   Eigen::VectorXd::Zero(8),
               vec({0, 0, -2, -2}),             Eigen::VectorXd::Zero(4)};
    sc.probabilities = {kProb8, kProb8, kProb4, kProb4, kProb8, kProb8, kProb4, kProb4};
    if (name == "S3") {
        for (int i = 1; i <= 4; ++i) {
            sc.schemas.push_back(make_factor("noise_nom" + std::to_string(i), Scale::Nominal, 6));
            sc.beta.push_back(Eigen::VectorXd::Zero(6));
            sc.probabilities.push_back(std::vector<double>(6, 1.0 / 6.0));
        }
        for (int i = 1; i <= 4; ++i) {
            sc.schemas.push_back(make_factor("noise_ord" + std::to_string(i), Scale::Ordinal, 6));
            sc.beta.push_back(Eigen::VectorXd::Zero(6));
            sc.probabilities.push_back(std::vector<double>(6, 1.0 / 6.0));
        }
    }
    sc.noise_sd = 1.0;
    sc.n_train = 500;
    sc.n_test = 1000;
    return sc;
}

GeneratedData generate(const Scenario& scenario)
{
    scenario.validate();
    std::mt19937_64 rng(scenario.seed);
    Dataset train = draw(scenario, scenario.n_train, rng);
    Dataset test = draw(scenario, std::max<std::size_t>(scenario.n_test, 1), rng);
    Truth truth;
    truth.beta.intercept = scenario.alpha;
    truth.beta.factors = scenario.beta;
    truth.relevant = scenario.relevant();
    truth.partition = extract_clusters(truth.beta, scenario.schemas, 0.0);
    return {std::move(train), std::move(test), std::move(truth)};
}

Metrics evaluate(const Coefficients& estimate,
                 const ClusterPartition& partition,
                 const Truth& truth,
                 const std::vector<FactorSchema>& schemas)
{
    const std::size_t L = schemas.size();
    if (estimate.factors.size() != L || partition.factors.size() != L || truth.beta.factors.size() != L
        || truth.relevant.size() != L) {
        throw Error(ErrorCode::ShapeMismatch, "estimate and truth disagree in factor count");
    }
    Metrics m;
    double sq = 0.0;
    std::size_t dummies = 0;
    std::size_t noise = 0, noise_hit = 0, rel = 0, rel_miss = 0;
    std::size_t zero_pairs = 0, zero_split = 0, diff_pairs = 0, diff_fused = 0;
    for (std::size_t l = 0; l < L; ++l) {
        const auto& b = estimate.factors[l];
        const auto& t = truth.beta.factors[l];
        const int levels = static_cast<int>(schemas[l].levels.size());
        if (b.size() != levels || t.size() != levels) {
            throw Error(ErrorCode::ShapeMismatch, "coefficient length mismatch for factor " + schemas[l].name);
        }
        for (int i = 1; i < levels; ++i) sq += (b[i] - t[i]) * (b[i] - t[i]);
        dummies += static_cast<std::size_t>(levels - 1);

        const auto& fp = partition.factors[l];
        const bool selected = fp.nonzero_clusters() > 0;
        if (!truth.relevant[l]) {
            ++noise;
            if (selected) ++noise_hit;
            continue;
        }
        ++rel;
        if (!selected) ++rel_miss;
        const std::vector<int> lab = fp.labels(levels);
        auto score_pair = [&](int i, int j) {
            const bool fused = lab[static_cast<std::size_t>(i)] == lab[static_cast<std::size_t>(j)];
            if (t[i] == t[j]) {
                ++zero_pairs;
                if (!fused) ++zero_split;
            } else {
                ++diff_pairs;
                if (fused) ++diff_fused;
            }
        };
        if (schemas[l].penalized_as_ordinal()) {
            for (int i = 1; i < levels; ++i) score_pair(i, i - 1);
        } else {
            for (int j = 0; j < levels; ++j) {
                for (int i = j + 1; i < levels; ++i) score_pair(i, j);
            }
        }
    }
    m.coef_mse = dummies ? sq / static_cast<double>(dummies) : 0.0;
    m.sel_fpr = rate(noise_hit, noise);
    m.sel_fnr = rate(rel_miss, rel);
    m.clu_fpr = rate(zero_split, zero_pairs);
    m.clu_fnr = rate(diff_fused, diff_pairs);
    return m;
}

std::string VariantConfig::label() const
{
    if (ols) return "ols";
    std::string s = adaptive ? "adapt" : "stdrd";
    if (use_frequency) s += "+nij";
    if (refit) s += "+rf";
    return s;
}

VariantConfig parse_variant(std::string_view label)
{
    VariantConfig v;
    std::vector<std::string> parts;
    std::size_t start = 0;
    while (true) {
        const auto pos = label.find('+', start);
        parts.emplace_back(label.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start));
        if (pos == std::string_view::npos) break;
        start = pos + 1;
    }
    auto bad = [&] { return Error(ErrorCode::InvalidArgument, "unknown variant '" + std::string(label) + "'"); };
    if (parts[0] == "ols") {
        if (parts.size() != 1) throw bad();
        v.ols = true;
        return v;
    }
    if (parts[0] == "adapt") v.adaptive = true;
    else if (parts[0] != "stdrd") throw bad();
    for (std::size_t i = 1; i < parts.size(); ++i) {
        if (parts[i] == "nij" && !v.use_frequency) v.use_frequency = true;
        else if (parts[i] == "rf" && !v.refit) v.refit = true;
        else throw bad();
    }
    return v;
}

std::vector<VariantConfig> parse_variants(std::string_view comma_list)
{
    std::vector<VariantConfig> out;
    std::size_t start = 0;
    while (start <= comma_list.size()) {
        auto pos = comma_list.find(',', start);
        if (pos == std::string_view::npos) pos = comma_list.size();
        auto item = comma_list.substr(start, pos - start);
        while (!item.empty() && item.front() == ' ') item.remove_prefix(1);
        while (!item.empty() && item.back() == ' ') item.remove_suffix(1);
        if (!item.empty()) out.push_back(parse_variant(item));
        start = pos + 1;
    }
    if (out.empty()) throw Error(ErrorCode::InvalidArgument, "no variants given");
    return out;
}

std::vector<double> SimReport::column(std::string_view variant, double Metrics::*field) const
{
    std::vector<double> out;
    for (const auto& r : records) {
        if (r.variant == variant) out.push_back(r.metrics.*field);
    }
    return out;
}

SimReport run_study(const Scenario& scenario,
                    const std::vector<VariantConfig>& variants,
                    std::size_t replicates,
                    std::uint64_t seed,
                    const StudyOptions& options)
{
    if (replicates < 1) throw Error(ErrorCode::InvalidArgument, "replicates must be >= 1");
    if (variants.empty()) throw Error(ErrorCode::InvalidArgument, "no variants given");
    SimReport report;
    report.scenario = scenario.name;
    report.seed = seed;
    report.replicates = replicates;
    for (const auto& v : variants) report.variants.push_back(v.label());

    for (std::size_t r = 0; r < replicates; ++r) {
        Scenario sc = scenario;
        sc.seed = seed + r;
        const GeneratedData data = generate(sc);
        const auto& schemas = data.train.schemas();

        // one CV run and one full path per weight type, shared by rf / non-rf
        std::map<std::pair<bool, bool>, std::pair<CvCurve, CvCurve>> curves;
        std::map<std::pair<bool, bool>, PathResult> paths;
        for (const auto& v : variants) {
            const std::string tag = "replicate " + std::to_string(r) + ", variant " + v.label() + ": ";
            try {
                Fit fit;
                if (v.ols) {
                    fit.beta = fit_ols(data.train);
                    fit.partition = extract_clusters(fit.beta, schemas, options.cluster_tol);
                    fit.s_ratio = 1.0;
                } else {
                    const std::pair<bool, bool> key{v.adaptive, v.use_frequency};
                    if (!curves.count(key)) {
                        CvConfig cfg;
                        cfg.K = options.K;
                        cfg.grid_size = options.grid_size;
                        cfg.seed = sc.seed;
                        cfg.weights.adaptive = v.adaptive;
                        cfg.weights.use_frequency = v.use_frequency;
                        cfg.gamma = options.gamma;
                        cfg.cluster_tol = options.cluster_tol;
                        curves.emplace(key, kfold_cv_both(data.train, cfg));
                        const WeightSet w = make_weights(data.train, cfg.weights);
                        paths.emplace(key, path(build_augmented(data.train, w, options.gamma), 2));
                    }
                    const auto& cv = v.refit ? curves.at(key).second : curves.at(key).first;
                    fit = finish_fit(data.train, paths.at(key), cv.chosen_s_ratio, v.refit, options.cluster_tol);
                }
                Metrics m = evaluate(fit.beta, fit.partition, data.truth, schemas);
                m.msep = (data.test.y() - fit.beta.predict(data.test)).squaredNorm()
                         / static_cast<double>(data.test.n());
                m.s_ratio = fit.s_ratio;
                m.df = static_cast<double>(degrees_of_freedom(fit.partition));
                report.records.push_back({r, v.label(), m});
            } catch (const Error& e) {
                throw Error(e.code(), tag + e.what());
            }
        }
    }
    return report;
}

double median(std::vector<double> values)
{
    if (values.empty()) return std::nan("");
    std::sort(values.begin(), values.end());
    const std::size_t m = values.size() / 2;
    return values.size() % 2 ? values[m] : 0.5 * (values[m - 1] + values[m]);
}

namespace {

const std::vector<std::pair<const char*, double Metrics::*>> kMetricFields{
    {"coef_mse", &Metrics::coef_mse}, {"msep", &Metrics::msep},     {"sel_fpr", &Metrics::sel_fpr},
    {"sel_fnr", &Metrics::sel_fnr},   {"clu_fpr", &Metrics::clu_fpr}, {"clu_fnr", &Metrics::clu_fnr},
    {"s_ratio", &Metrics::s_ratio},   {"df", &Metrics::df}};

} // namespace

std::string report_to_csv(const SimReport& report)
{
    std::string out = "replicate,variant";
    for (const auto& [name, field] : kMetricFields) out += std::string(",") + name;
    out += '\n';
    for (const auto& rec : report.records) {
        out += std::to_string(rec.replicate) + ',' + rec.variant;
        for (const auto& [name, field] : kMetricFields) out += ',' + format_double(rec.metrics.*field);
        out += '\n';
    }
    return out;
}

std::string report_summary_json(const SimReport& report, int indent)
{
    nlohmann::ordered_json doc;
    doc["scenario"] = report.scenario;
    doc["seed"] = report.seed;
    doc["replicates"] = report.replicates;
    nlohmann::ordered_json vars = nlohmann::ordered_json::object();
    for (const auto& v : report.variants) {
        nlohmann::ordered_json entry;
        for (const auto& [name, field] : kMetricFields) {
            const auto col = report.column(v, field);
            const double mean = col.empty() ? 0.0 : std::accumulate(col.begin(), col.end(), 0.0) / static_cast<double>(col.size());
            entry[name] = {{"median", median(col)}, {"mean", mean}};
        }
        vars[v] = std::move(entry);
    }
    doc["variants"] = std::move(vars);
    return doc.dump(indent);
}

} // namespace catfuse
