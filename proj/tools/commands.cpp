#include "commands.hpp"
#include <catfuse/io.hpp>
#include <catfuse/selection.hpp>
#include <catfuse/simlab.hpp>
#include <catfuse/structure.hpp>
#include <json.hpp>
#include <algorithm>
#include <filesystem>

namespace catfuse::cli {

namespace fs = std::filesystem;
using ojson = nlohmann::ordered_json;

namespace {

ojson config_json(const RunConfig& c)
{
    ojson j;
    j["command"] = c.command;
    j["data"] = c.data;
    j["schema"] = c.schema;
    j["response"] = c.response;
    j["scenario"] = c.scenario;
    j["adaptive"] = c.adaptive;
    j["frequency"] = c.frequency;
    j["spatial_h"] = c.spatial_h ? ojson(*c.spatial_h) : ojson(nullptr);
    j["spatial_floor"] = c.spatial_floor;
    j["gamma"] = c.gamma;
    j["grid"] = c.grid;
    j["k_folds"] = c.k_folds;
    j["seed"] = c.seed;
    j["refit"] = c.refit;
    j["s_ratio"] = c.s_ratio ? ojson(*c.s_ratio) : ojson(nullptr);
    j["cv_result"] = c.cv_result;
    j["replicates"] = c.replicates;
    j["variants"] = c.variants;
    j["cluster_tol"] = c.cluster_tol;
    j["software_version"] = kSoftwareVersion;
    return j;
}

ojson header(const RunConfig& c)
{
    ojson j;
    j["schema_version"] = kSchemaVersion;
    j["config"] = config_json(c);
    return j;
}

std::string csv_config_line(const RunConfig& c)
{
    return "# config: " + header(c).dump() + "\n";
}

WeightOptions weight_options(const RunConfig& c)
{
    WeightOptions w;
    w.adaptive = c.adaptive;
    w.use_frequency = c.frequency;
    w.spatial_h = c.spatial_h;
    w.spatial_floor = c.spatial_floor;
    return w;
}

// Data from --data/--schema, or the training part of a generated scenario.
Dataset load_data(const RunConfig& c)
{
    if (!c.data.empty()) return ingest_csv(c.data, load_schema(c.schema), c.response);
    return generate(make_scenario(c.scenario, c.seed)).train;
}

fs::path prepare_out(const RunConfig& c)
{
    fs::path out(c.out);
    std::error_code ec;
    fs::create_directories(out, ec);
    if (!fs::is_directory(out)) throw Error(ErrorCode::Io, "cannot create output directory " + out.string());
    return out;
}

std::string level_column(const FactorSchema& f, std::size_t level)
{
    return f.name + ":" + f.levels[level];
}

double resolve_s_ratio(const RunConfig& c)
{
    if (c.s_ratio) return *c.s_ratio;
    const auto doc = nlohmann::json::parse(read_file(c.cv_result), nullptr, false);
    if (doc.is_discarded() || !doc.contains("chosen_s_ratio") || !doc["chosen_s_ratio"].is_number()) {
        throw Error(ErrorCode::InvalidArgument, "cv result file lacks a numeric chosen_s_ratio: " + c.cv_result);
    }
    return doc["chosen_s_ratio"].get<double>();
}

ojson coefficients_json(const Coefficients& beta, const std::vector<FactorSchema>& schemas)
{
    ojson out = ojson::object();
    for (std::size_t l = 0; l < schemas.size(); ++l) {
        ojson f = ojson::object();
        for (std::size_t i = 0; i < schemas[l].levels.size(); ++i) {
            f[schemas[l].levels[i]] = beta.factors[l][static_cast<Eigen::Index>(i)];
        }
        out[schemas[l].name] = std::move(f);
    }
    return out;
}

} // namespace

void validate(const RunConfig& c)
{
    const bool needs_data = c.command != "simulate";
    if (needs_data) {
        if (c.data.empty() == c.scenario.empty()) {
            throw Error(ErrorCode::InvalidArgument, "give either --data with --schema, or --scenario");
        }
        if (!c.data.empty()) {
            if (c.schema.empty()) throw Error(ErrorCode::InvalidArgument, "--data requires --schema");
            if (!fs::exists(c.data)) throw Error(ErrorCode::Io, "data file not found: " + c.data);
            if (!fs::exists(c.schema)) throw Error(ErrorCode::Io, "schema file not found: " + c.schema);
        }
    } else if (c.scenario.empty()) {
        throw Error(ErrorCode::InvalidArgument, "simulate requires --scenario");
    }
    if (!c.scenario.empty()) make_scenario(c.scenario, c.seed);
    if (!(c.gamma > 0.0)) throw Error(ErrorCode::NonPositiveGamma, "--gamma must be positive");
    if (c.grid < 2) throw Error(ErrorCode::InvalidArgument, "--grid must be at least 2");
    if (c.k_folds < 2) throw Error(ErrorCode::InvalidArgument, "--k-folds must be at least 2");
    if (c.replicates < 1) throw Error(ErrorCode::InvalidArgument, "--replicates must be at least 1");
    if (c.spatial_h && !(*c.spatial_h > 0.0)) throw Error(ErrorCode::InvalidArgument, "--spatial-h must be positive");
    if (c.s_ratio && !(*c.s_ratio >= 0.0 && *c.s_ratio <= 1.0)) {
        throw Error(ErrorCode::InvalidArgument, "--s-ratio must lie in [0,1]");
    }
    if (c.command == "fit" && !c.s_ratio) {
        if (c.cv_result.empty()) throw Error(ErrorCode::InvalidArgument, "fit needs --s-ratio or --cv-result");
        if (!fs::exists(c.cv_result)) throw Error(ErrorCode::Io, "cv result not found: " + c.cv_result);
    }
    if (c.command == "simulate") parse_variants(c.variants);
}

void cmd_fit(const RunConfig& c)
{
    validate(c);
    const Dataset ds = load_data(c);
    const double s = resolve_s_ratio(c);
    const WeightSet w = make_weights(ds, weight_options(c));
    const PathResult pr = path(build_augmented(ds, w, c.gamma), 2);
    const PathPoint pt = pr.at_s_ratio(s);

    ClusterPartition part = extract_clusters(pt.beta, ds.schemas(), c.cluster_tol);
    Coefficients beta = pt.beta;
    double rss = beta.rss(ds);
    if (c.refit) {
        RefitResult rf = refit(ds, part);
        beta = rf.coefficients;
        part = rf.partition;
        rss = rf.rss;
    } else {
        for (std::size_t l = 0; l < part.factors.size(); ++l) {
            auto& fp = part.factors[l];
            // report the mean penalized coefficient of each cluster
            for (std::size_t k = 1; k < fp.clusters.size(); ++k) {
                double sum = 0.0;
                for (int lv : fp.clusters[k]) sum += beta.factors[l][lv];
                fp.values[k] = sum / static_cast<double>(fp.clusters[k].size());
            }
        }
    }
    const std::size_t df = degrees_of_freedom(part);
    const fs::path out = prepare_out(c);

    ojson coef = header(c);
    coef["s_ratio"] = s;
    coef["lambda"] = pt.lambda;
    coef["df"] = df;
    coef["refit"] = c.refit;
    coef["rss"] = rss;
    coef["tolerances"] = {{"cluster_tol", c.cluster_tol}, {"gamma", c.gamma}, {"precision_slack", kPrecisionSlack}};
    coef["precision"] = {{"delta", pt.precision.delta}, {"bound", pt.precision.bound}, {"satisfied", pt.precision.satisfied}};
    coef["software_version"] = kSoftwareVersion;
    coef["intercept"] = beta.intercept;
    coef["coefficients"] = coefficients_json(beta, ds.schemas());
    write_atomic(out / "coefficients.json", coef.dump(2) + "\n");

    ojson pj = header(c);
    const ojson body = ojson::parse(partition_to_json(part, ds.schemas()));
    pj["df"] = df;
    pj["s_ratio"] = s;
    pj["clusters"] = body["clusters"];
    pj["coefficients"] = body["coefficients"];
    write_atomic(out / "partition.json", pj.dump(2) + "\n");

    std::string log = csv_config_line(c);
    log += "catfuse fit " + std::string(kSoftwareVersion) + "\n";
    log += "observations " + std::to_string(ds.n()) + ", factors " + std::to_string(ds.num_factors()) + "\n";
    log += "s_ratio " + format_double(s) + ", lambda " + format_double(pt.lambda) + ", lambda_max "
           + format_double(pr.lambda_max) + "\n";
    log += "path knots " + std::to_string(pr.diagnostics.knots) + "\n";
    log += "precision delta " + format_double(pt.precision.delta) + ", bound " + format_double(pt.precision.bound)
           + (pt.precision.satisfied ? " (ok)" : " (violated)") + "\n";
    log += "df " + std::to_string(df) + ", rss " + format_double(rss) + (c.refit ? " (refitted)" : "") + "\n";
    write_atomic(out / "fit.log", log);
}

void cmd_path(const RunConfig& c)
{
    validate(c);
    const Dataset ds = load_data(c);
    const WeightSet w = make_weights(ds, weight_options(c));
    const PathResult pr = path(build_augmented(ds, w, c.gamma), c.grid);
    const auto& schemas = ds.schemas();

    std::string csv = csv_config_line(c);
    csv += "s_ratio,lambda";
    for (const auto& f : schemas) {
        for (std::size_t i = 0; i < f.levels.size(); ++i) csv += "," + level_column(f, i);
    }
    csv += ",df,delta,bound\n";
    // largest s first: the first row is the least-squares fit
    for (auto it = pr.points.rbegin(); it != pr.points.rend(); ++it) {
        const auto& pt = *it;
        csv += format_double(pt.s_ratio) + "," + format_double(pt.lambda);
        for (const auto& b : pt.beta.factors) {
            for (Eigen::Index i = 0; i < b.size(); ++i) csv += "," + format_double(b[i]);
        }
        const auto df = degrees_of_freedom(extract_clusters(pt.beta, schemas, c.cluster_tol));
        csv += "," + std::to_string(df) + "," + format_double(pt.precision.delta) + ","
               + format_double(pt.precision.bound) + "\n";
    }
    write_atomic(prepare_out(c) / "path.csv", csv);
}

void cmd_cv(const RunConfig& c)
{
    validate(c);
    const Dataset ds = load_data(c);
    CvConfig cfg;
    cfg.K = c.k_folds;
    cfg.grid_size = c.grid;
    cfg.seed = c.seed;
    cfg.weights = weight_options(c);
    cfg.refit_inside = c.refit;
    cfg.gamma = c.gamma;
    cfg.cluster_tol = c.cluster_tol;
    const CvCurve curve = kfold_cv(ds, cfg);
    const fs::path out = prepare_out(c);
    write_atomic(out / "cv.csv", csv_config_line(c) + cv_to_csv(curve));

    ojson chosen = header(c);
    chosen["chosen_s_ratio"] = curve.chosen_s_ratio;
    chosen["chosen_index"] = curve.chosen_index;
    chosen["min_mean_score"] = curve.mean_score[curve.chosen_index];
    chosen["refit_inside"] = curve.refit_inside;
    chosen["k_folds"] = c.k_folds;
    chosen["seed"] = c.seed;
    chosen["tie_rule"] = "smallest s_ratio among scores within 1e-12 (relative) of the minimum";
    write_atomic(out / "chosen.json", chosen.dump(2) + "\n");
}

void cmd_simulate(const RunConfig& c)
{
    validate(c);
    StudyOptions opt;
    opt.K = c.k_folds;
    opt.grid_size = c.grid;
    opt.gamma = c.gamma;
    opt.cluster_tol = c.cluster_tol;
    const SimReport rep = run_study(make_scenario(c.scenario, c.seed), parse_variants(c.variants),
                                    c.replicates, c.seed, opt);
    const fs::path out = prepare_out(c);
    write_atomic(out / "simreport.csv", csv_config_line(c) + report_to_csv(rep));
    ojson summary = header(c);
    const ojson body = ojson::parse(report_summary_json(rep));
    for (auto it = body.begin(); it != body.end(); ++it) summary[it.key()] = it.value();
    write_atomic(out / "summary.json", summary.dump(2) + "\n");
}

} // namespace catfuse::cli
