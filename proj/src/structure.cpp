#include <catfuse/coding.hpp>
#include <catfuse/structure.hpp>
#include <json.hpp>
#include <algorithm>
#include <cmath>
#include <numeric>

namespace catfuse {

namespace {

int find_root(std::vector<int>& parent, int i)
{
    while (parent[i] != i) {
        parent[i] = parent[parent[i]];
        i = parent[i];
    }
    return i;
}

void unite(std::vector<int>& parent, int a, int b)
{
    a = find_root(parent, a);
    b = find_root(parent, b);
    // smallest level stays the representative
    if (a < b) parent[b] = a;
    else if (b < a) parent[a] = b;
}

} // namespace

std::vector<int> FactorPartition::labels(int num_levels) const
{
    std::vector<int> out(static_cast<std::size_t>(num_levels), -1);
    for (std::size_t c = 0; c < clusters.size(); ++c) {
        for (int lv : clusters[c]) {
            if (lv >= 0 && lv < num_levels) out[static_cast<std::size_t>(lv)] = static_cast<int>(c);
        }
    }
    return out;
}

void FactorPartition::validate(int num_levels, bool contiguous) const
{
    std::vector<int> seen(static_cast<std::size_t>(num_levels), 0);
    for (const auto& c : clusters) {
        if (c.empty()) throw Error(ErrorCode::InvalidArgument, "empty cluster");
        for (int lv : c) {
            if (lv < 0 || lv >= num_levels) throw Error(ErrorCode::InvalidArgument, "cluster level out of range");
            if (seen[static_cast<std::size_t>(lv)]++) throw Error(ErrorCode::InvalidArgument, "clusters overlap");
        }
        if (contiguous && c.back() - c.front() + 1 != static_cast<int>(c.size())) {
            throw Error(ErrorCode::InvalidArgument, "ordinal cluster is not a run of adjacent levels");
        }
    }
    if (std::find(seen.begin(), seen.end(), 0) != seen.end()) {
        throw Error(ErrorCode::InvalidArgument, "clusters do not cover every level");
    }
    if (clusters.front().front() != 0) throw Error(ErrorCode::InvalidArgument, "first cluster must hold level 0");
}

bool ClusterPartition::operator==(const ClusterPartition& other) const
{
    if (factors.size() != other.factors.size()) return false;
    for (std::size_t l = 0; l < factors.size(); ++l) {
        if (factors[l].clusters != other.factors[l].clusters) return false;
    }
    return true;
}

ClusterPartition extract_clusters(const Coefficients& beta,
                                  const std::vector<FactorSchema>& schemas,
                                  double tol)
{
    if (!(tol >= 0.0)) throw Error(ErrorCode::InvalidArgument, "cluster tolerance must be >= 0");
    if (beta.factors.size() != schemas.size()) {
        throw Error(ErrorCode::ShapeMismatch, "coefficients do not match schemas");
    }
    ClusterPartition out;
    for (std::size_t l = 0; l < schemas.size(); ++l) {
        const Eigen::VectorXd& b = beta.factors[l];
        const int levels = static_cast<int>(b.size());
        if (levels != static_cast<int>(schemas[l].levels.size())) {
            throw Error(ErrorCode::ShapeMismatch, "coefficient vector length mismatch");
        }
        const double thr = tol * std::max(1.0, b.cwiseAbs().maxCoeff());
        std::vector<int> parent(static_cast<std::size_t>(levels));
        std::iota(parent.begin(), parent.end(), 0);
        if (schemas[l].penalized_as_ordinal()) {
            for (int i = 1; i < levels; ++i) {
                if (std::abs(b[i] - b[i - 1]) <= thr) unite(parent, i, i - 1);
            }
        } else {
            for (int i = 0; i < levels; ++i) {
                for (int j = i + 1; j < levels; ++j) {
                    if (std::abs(b[i] - b[j]) <= thr) unite(parent, i, j);
                }
            }
        }
        FactorPartition fp;
        std::vector<int> index_of_root(static_cast<std::size_t>(levels), -1);
        for (int i = 0; i < levels; ++i) {
            const int root = find_root(parent, i);
            auto& idx = index_of_root[static_cast<std::size_t>(root)];
            if (idx < 0) {
                idx = static_cast<int>(fp.clusters.size());
                fp.clusters.emplace_back();
                fp.values.push_back(root == 0 ? 0.0 : b[root]);
            }
            fp.clusters[static_cast<std::size_t>(idx)].push_back(i);
        }
        out.factors.push_back(std::move(fp));
    }
    return out;
}

Coefficients partition_coefficients(const ClusterPartition& partition, double intercept)
{
    Coefficients out;
    out.intercept = intercept;
    for (const auto& fp : partition.factors) {
        int levels = 0;
        for (const auto& c : fp.clusters) levels += static_cast<int>(c.size());
        Eigen::VectorXd b = Eigen::VectorXd::Zero(levels);
        for (std::size_t c = 0; c < fp.clusters.size(); ++c) {
            for (int lv : fp.clusters[c]) b[lv] = c == 0 ? 0.0 : fp.values[c];
        }
        out.factors.push_back(std::move(b));
    }
    return out;
}

RefitResult refit(const Dataset& ds, const ClusterPartition& partition)
{
    if (partition.factors.size() != ds.num_factors()) {
        throw Error(ErrorCode::ShapeMismatch, "partition does not match dataset factors");
    }
    std::size_t cols = 0;
    std::vector<std::vector<int>> labels;
    for (std::size_t l = 0; l < ds.num_factors(); ++l) {
        const auto& fp = partition.factors[l];
        const int levels = static_cast<int>(ds.schema(l).levels.size());
        fp.validate(levels, ds.schema(l).penalized_as_ordinal());
        labels.push_back(fp.labels(levels));
        cols += fp.nonzero_clusters();
    }
    const auto n = static_cast<Eigen::Index>(ds.n());
    Eigen::MatrixXd X = Eigen::MatrixXd::Zero(n, static_cast<Eigen::Index>(cols));
    Eigen::Index base = 0;
    for (std::size_t l = 0; l < ds.num_factors(); ++l) {
        const auto& codes = ds.codes(l);
        for (Eigen::Index t = 0; t < n; ++t) {
            const int c = labels[l][static_cast<std::size_t>(codes[static_cast<std::size_t>(t)])];
            if (c > 0) X(t, base + c - 1) = 1.0;
        }
        base += static_cast<Eigen::Index>(partition.factors[l].nonzero_clusters());
    }
    const Eigen::VectorXd means = X.colwise().mean().transpose();
    X.rowwise() -= means.transpose();
    const double ybar = ds.y().mean();
    const Eigen::VectorXd yc = ds.y().array() - ybar;
    const Eigen::VectorXd b = least_squares(X, yc);

    RefitResult res;
    res.partition = partition;
    double intercept = ybar;
    base = 0;
    for (auto& fp : res.partition.factors) {
        fp.values.assign(fp.clusters.size(), 0.0);
        for (std::size_t c = 1; c < fp.clusters.size(); ++c) {
            const double v = b[base + static_cast<Eigen::Index>(c) - 1];
            fp.values[c] = v;
            intercept -= means[base + static_cast<Eigen::Index>(c) - 1] * v;
        }
        base += static_cast<Eigen::Index>(fp.nonzero_clusters());
    }
    res.coefficients = partition_coefficients(res.partition, intercept);
    res.rss = (yc - X * b).squaredNorm();
    return res;
}

std::size_t degrees_of_freedom(const ClusterPartition& partition)
{
    std::size_t df = 1;
    for (const auto& fp : partition.factors) df += fp.nonzero_clusters();
    return df;
}

std::string partition_to_json(const ClusterPartition& partition,
                              const std::vector<FactorSchema>& schemas,
                              int indent)
{
    nlohmann::ordered_json clusters = nlohmann::ordered_json::object();
    nlohmann::ordered_json coefs = nlohmann::ordered_json::object();
    for (std::size_t l = 0; l < partition.factors.size(); ++l) {
        const auto& fp = partition.factors[l];
        const auto& f = schemas.at(l);
        nlohmann::ordered_json groups = nlohmann::ordered_json::array();
        for (const auto& c : fp.clusters) {
            nlohmann::ordered_json g = nlohmann::ordered_json::array();
            for (int lv : c) g.push_back(f.levels.at(static_cast<std::size_t>(lv)));
            groups.push_back(std::move(g));
        }
        clusters[f.name] = std::move(groups);
        coefs[f.name] = fp.values;
    }
    nlohmann::ordered_json doc;
    doc["clusters"] = std::move(clusters);
    doc["coefficients"] = std::move(coefs);
    return doc.dump(indent);
}

} // namespace catfuse
