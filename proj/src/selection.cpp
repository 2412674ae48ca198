#include <catfuse/io.hpp>
#include <catfuse/selection.hpp>
#include <cmath>
#include <limits>
#include <numeric>
#include <optional>
#include <random>

namespace catfuse {

namespace {

Error tag_fold(const Error& e, std::size_t fold)
{
    const std::string msg = "fold " + std::to_string(fold + 1) + ": " + e.what();
    if (e.code() == ErrorCode::OlsUnavailable || e.code() == ErrorCode::RankDeficient) {
        return Error(ErrorCode::FoldRankDeficient, msg);
    }
    return Error(e.code(), msg);
}

double msep(const Dataset& test, const Coefficients& beta)
{
    return (test.y() - beta.predict(test)).squaredNorm() / static_cast<double>(test.n());
}

std::vector<double> common_grid(std::size_t G)
{
    std::vector<double> s(G);
    for (std::size_t k = 0; k < G; ++k) s[k] = static_cast<double>(k) / static_cast<double>(G - 1);
    return s;
}

void finish(CvCurve& curve)
{
    const std::size_t G = curve.s_grid.size();
    const double K = static_cast<double>(curve.fold_scores.size());
    curve.mean_score.assign(G, 0.0);
    for (const auto& f : curve.fold_scores) {
        for (std::size_t k = 0; k < G; ++k) curve.mean_score[k] += f[k];
    }
    for (auto& v : curve.mean_score) v /= K;
    curve.chosen_index = argmin_first(curve.mean_score);
    curve.chosen_s_ratio = curve.s_grid[curve.chosen_index];
}

} // namespace

std::vector<int> fold_assignment(std::size_t n, std::size_t K, std::uint64_t seed)
{
    if (K < 2) throw Error(ErrorCode::InvalidArgument, "K must be at least 2");
    if (n < K) throw Error(ErrorCode::InvalidArgument, "fewer observations than folds");
    std::vector<std::size_t> perm(n);
    std::iota(perm.begin(), perm.end(), std::size_t{0});
    // explicit Fisher-Yates so the permutation does not depend on the
    // standard library's distribution implementations
    std::mt19937_64 rng(seed);
    for (std::size_t i = n; i > 1; --i) {
        const std::uint64_t bound = i;
        const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() - std::numeric_limits<std::uint64_t>::max() % bound;
        std::uint64_t draw;
        do draw = rng(); while (draw >= limit);
        std::swap(perm[i - 1], perm[static_cast<std::size_t>(draw % bound)]);
    }
    std::vector<int> folds(n);
    for (std::size_t pos = 0; pos < n; ++pos) folds[perm[pos]] = static_cast<int>(pos % K);
    return folds;
}

std::size_t argmin_first(const std::vector<double>& scores)
{
    if (scores.empty()) throw Error(ErrorCode::InvalidArgument, "empty score vector");
    double best = scores[0];
    for (double v : scores) best = std::min(best, v);
    const double cut = best + 1e-12 * std::abs(best);
    for (std::size_t k = 0; k < scores.size(); ++k) {
        if (scores[k] <= cut) return k;
    }
    return 0;
}

std::pair<CvCurve, CvCurve> kfold_cv_both(const Dataset& ds, const CvConfig& config)
{
    if (config.K < 2) throw Error(ErrorCode::InvalidArgument, "K must be at least 2");
    if (ds.n() < 2 * config.K) throw Error(ErrorCode::InvalidArgument, "cross-validation needs n >= 2K");
    if (config.grid_size < 2) throw Error(ErrorCode::InvalidArgument, "grid_size must be at least 2");

    CvCurve plain, refitted;
    plain.s_grid = common_grid(config.grid_size);
    plain.folds = fold_assignment(ds.n(), config.K, config.seed);
    plain.seed = config.seed;
    refitted = plain;
    refitted.refit_inside = true;

    for (std::size_t f = 0; f < config.K; ++f) {
        std::vector<std::size_t> train_rows, test_rows;
        for (std::size_t i = 0; i < ds.n(); ++i) {
            (plain.folds[i] == static_cast<int>(f) ? test_rows : train_rows).push_back(i);
        }
        const Dataset train = ds.subset(train_rows);
        const Dataset test = ds.subset(test_rows);
        std::vector<double> sp(config.grid_size), sr(config.grid_size);
        try {
            const WeightSet w = make_weights(train, config.weights);
            const PathResult pr = path(build_augmented(train, w, config.gamma), 2);
            std::optional<ClusterPartition> last_partition;
            double last_refit = 0.0;
            for (std::size_t k = 0; k < config.grid_size; ++k) {
                const PathPoint pt = pr.at_s_ratio(plain.s_grid[k]);
                sp[k] = msep(test, pt.beta);
                const ClusterPartition part = extract_clusters(pt.beta, train.schemas(), config.cluster_tol);
                if (!last_partition || !(part == *last_partition)) {
                    last_refit = msep(test, refit(train, part).coefficients);
                    last_partition = part;
                }
                sr[k] = last_refit;
            }
        } catch (const Error& e) {
            throw tag_fold(e, f);
        }
        plain.fold_scores.push_back(std::move(sp));
        refitted.fold_scores.push_back(std::move(sr));
    }
    finish(plain);
    finish(refitted);
    return {std::move(plain), std::move(refitted)};
}

CvCurve kfold_cv(const Dataset& ds, const CvConfig& config)
{
    auto both = kfold_cv_both(ds, config);
    return config.refit_inside ? std::move(both.second) : std::move(both.first);
}

std::string cv_to_csv(const CvCurve& curve)
{
    std::string out = "s_ratio,mean_score";
    for (std::size_t f = 0; f < curve.fold_scores.size(); ++f) out += ",fold_" + std::to_string(f + 1);
    out += '\n';
    for (std::size_t k = 0; k < curve.s_grid.size(); ++k) {
        out += format_double(curve.s_grid[k]) + ',' + format_double(curve.mean_score[k]);
        for (const auto& f : curve.fold_scores) out += ',' + format_double(f[k]);
        out += '\n';
    }
    return out;
}

std::vector<double> information_criterion(const Dataset& ds,
                                          const PathResult& path,
                                          InformationCriterion kind,
                                          bool use_refit,
                                          double cluster_tol)
{
    const double n = static_cast<double>(ds.n());
    const double pen = kind == InformationCriterion::AIC ? 2.0 : std::log(n);
    std::vector<double> out;
    out.reserve(path.points.size());
    for (const auto& pt : path.points) {
        const ClusterPartition part = extract_clusters(pt.beta, ds.schemas(), cluster_tol);
        const double rss = use_refit ? refit(ds, part).rss : pt.beta.rss(ds);
        const double df = static_cast<double>(degrees_of_freedom(part));
        out.push_back(n * std::log(std::max(rss, 1e-300) / n) + pen * df);
    }
    return out;
}

} // namespace catfuse
