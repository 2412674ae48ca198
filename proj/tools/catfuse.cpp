#include "commands.hpp"
#include <CLI11.hpp>
#include <catfuse/error.hpp>
#include <json.hpp>
#include <iostream>

namespace {

int fail(std::string_view code, const std::string& message)
{
    nlohmann::ordered_json j;
    j["error"] = {{"code", code}, {"message", message}};
    std::cerr << j.dump() << "\n";
    return 1;
}

void add_common(CLI::App* sub, catfuse::cli::RunConfig& c)
{
    sub->add_option("--data", c.data, "CSV file with the response and one column per factor");
    sub->add_option("--schema", c.schema, "JSON factor schema");
    sub->add_option("--response", c.response, "response column name")->capture_default_str();
    sub->add_option("--scenario", c.scenario, "use generated data from scenario S1, S2 or S3");
    sub->add_option("--out", c.out, "output directory")->capture_default_str();
    sub->add_flag("--adaptive", c.adaptive, "adaptive weights from the least-squares fit");
    sub->add_flag("--frequency", c.frequency, "include class-frequency terms in the weights");
    sub->add_option("--spatial-h", c.spatial_h, "kernel bandwidth for factors with spatial coordinates");
    sub->add_option("--spatial-floor", c.spatial_floor, "lower bound of the spatial weight factor")->capture_default_str();
    sub->add_option("--gamma", c.gamma, "restriction penalty gamma (not its square root)")->capture_default_str();
    sub->add_option("--grid", c.grid, "number of grid points")->capture_default_str();
    sub->add_option("--k-folds", c.k_folds, "cross-validation folds")->capture_default_str();
    sub->add_option("--seed", c.seed, "seed for folds and generated data")->capture_default_str();
    sub->add_flag("--refit", c.refit, "refit by least squares on the fused design");
    sub->add_option("--cluster-tol", c.cluster_tol, "relative fusion tolerance")->capture_default_str();
}

} // namespace

int main(int argc, char** argv)
{
    catfuse::cli::RunConfig c;
    CLI::App app{"Fused L1 regression for categorical predictors"};
    app.require_subcommand(1);
    app.set_version_flag("--version", catfuse::cli::kSoftwareVersion);

    auto* fit = app.add_subcommand("fit", "fit at one s_ratio and write coefficients and clusters");
    add_common(fit, c);
    fit->add_option("--s-ratio", c.s_ratio, "penalty budget s/s_max in [0,1]");
    fit->add_option("--cv-result", c.cv_result, "chosen.json from the cv command");

    auto* pth = app.add_subcommand("path", "write the coefficient path on a grid");
    add_common(pth, c);

    auto* cv = app.add_subcommand("cv", "cross-validate s_ratio");
    add_common(cv, c);

    auto* sim = app.add_subcommand("simulate", "run a simulation study");
    add_common(sim, c);
    sim->add_option("--replicates", c.replicates, "number of replicates")->capture_default_str();
    sim->add_option("--variants", c.variants, "comma-separated estimator labels")->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        return fail("InvalidArgument", e.what());
    }

    try {
        if (fit->parsed()) {
            c.command = "fit";
            catfuse::cli::cmd_fit(c);
        } else if (pth->parsed()) {
            c.command = "path";
            catfuse::cli::cmd_path(c);
        } else if (cv->parsed()) {
            c.command = "cv";
            catfuse::cli::cmd_cv(c);
        } else {
            c.command = "simulate";
            catfuse::cli::cmd_simulate(c);
        }
    } catch (const catfuse::Error& e) {
        return fail(catfuse::to_string(e.code()), e.what());
    } catch (const std::exception& e) {
        return fail("Internal", e.what());
    }
    return 0;
}
