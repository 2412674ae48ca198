#include <catfuse/coding.hpp>
#include <Eigen/QR>
#include <cmath>

namespace catfuse {

int FactorBlock::pair_position(int high, int low) const
{
    for (std::size_t t = 0; t < pairs.size(); ++t) {
        if (pairs[t].high == high && pairs[t].low == low) return static_cast<int>(t);
    }
    return -1;
}

std::size_t ThetaLayout::size() const
{
    std::size_t q = 0;
    for (const auto& b : blocks) q += b.size();
    return q;
}

std::size_t ThetaLayout::restriction_count() const
{
    std::size_t r = 0;
    for (const auto& b : blocks) {
        if (b.kind == PenaltyKind::Nominal && b.k >= 2) {
            r += static_cast<std::size_t>((b.k - 1) * b.k / 2);
        }
    }
    return r;
}

ThetaLayout make_layout(const std::vector<FactorSchema>& schemas)
{
    ThetaLayout layout;
    std::size_t offset = 0;
    for (std::size_t l = 0; l < schemas.size(); ++l) {
        const auto& f = schemas[l];
        f.validate();
        FactorBlock block;
        block.factor = l;
        block.k = f.k();
        block.offset = offset;
        if (f.penalized_as_ordinal()) {
            block.kind = PenaltyKind::Ordinal;
            for (int i = 1; i <= block.k; ++i) block.pairs.push_back({i, i - 1});
        } else {
            block.kind = PenaltyKind::Nominal;
            for (int i = 1; i <= block.k; ++i) block.pairs.push_back({i, 0});
            for (int j = 1; j < block.k; ++j) {
                for (int i = j + 1; i <= block.k; ++i) block.pairs.push_back({i, j});
            }
        }
        offset += block.size();
        layout.blocks.push_back(std::move(block));
    }
    return layout;
}

Eigen::MatrixXd DesignBundle::raw() const
{
    return X.rowwise() + column_means.transpose();
}

DesignBundle dummy_design(const Dataset& ds)
{
    std::size_t p = 0;
    for (const auto& f : ds.schemas()) {
        if (f.levels.size() < 2) {
            throw Error(ErrorCode::DegenerateFactor, "factor '" + f.name + "' has fewer than 2 levels");
        }
        p += static_cast<std::size_t>(f.k());
    }
    const auto n = static_cast<Eigen::Index>(ds.n());
    DesignBundle out;
    out.X = Eigen::MatrixXd::Zero(n, static_cast<Eigen::Index>(p));
    Eigen::Index col = 0;
    for (std::size_t l = 0; l < ds.num_factors(); ++l) {
        const int k = ds.schema(l).k();
        const auto& codes = ds.codes(l);
        for (Eigen::Index r = 0; r < n; ++r) {
            int c = codes[static_cast<std::size_t>(r)];
            if (c > 0) out.X(r, col + c - 1) = 1.0;
        }
        for (int i = 1; i <= k; ++i) out.column_map.push_back({l, ColumnKind::Dummy, i, 0});
        col += k;
    }
    out.column_means = out.X.colwise().mean().transpose();
    out.X.rowwise() -= out.column_means.transpose();
    out.y_mean = ds.y().mean();
    out.y_centered = ds.y().array() - out.y_mean;
    return out;
}

SplitColumns split_design(const Dataset& ds, std::string_view factor)
{
    const std::size_t l = ds.factor_index(factor);
    const auto& f = ds.schema(l);
    if (f.scale != Scale::Ordinal) {
        throw Error(ErrorCode::NotOrdinal, "factor '" + f.name + "' is not ordinal");
    }
    const int k = f.k();
    SplitColumns out;
    out.columns = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(ds.n()), k);
    const auto& codes = ds.codes(l);
    for (std::size_t r = 0; r < ds.n(); ++r) {
        for (int i = 1; i <= codes[r]; ++i) out.columns(static_cast<Eigen::Index>(r), i - 1) = 1.0;
    }
    for (int i = 1; i <= k; ++i) out.column_map.push_back({l, ColumnKind::Split, i, 0});
    return out;
}

Eigen::VectorXd u_transform(const Eigen::VectorXd& beta)
{
    Eigen::VectorXd delta(beta.size());
    double prev = 0.0;
    for (Eigen::Index i = 0; i < beta.size(); ++i) {
        delta[i] = beta[i] - prev;
        prev = beta[i];
    }
    return delta;
}

Eigen::VectorXd u_back_transform(const Eigen::VectorXd& delta)
{
    Eigen::VectorXd beta(delta.size());
    double acc = 0.0;
    for (Eigen::Index i = 0; i < delta.size(); ++i) {
        acc += delta[i];
        beta[i] = acc;
    }
    return beta;
}

Eigen::VectorXd least_squares(const Eigen::MatrixXd& X, const Eigen::VectorXd& y)
{
    if (X.cols() == 0) return Eigen::VectorXd(0);
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(X);
    qr.setThreshold(1e-10);
    if (qr.rank() < X.cols()) {
        throw Error(ErrorCode::RankDeficient,
                    "design has rank " + std::to_string(qr.rank()) + " < "
                        + std::to_string(X.cols()) + " columns");
    }
    return qr.solve(y);
}

Coefficients fit_ols(const Dataset& ds)
{
    DesignBundle d = dummy_design(ds);
    Eigen::VectorXd b = least_squares(d.X, d.y_centered);
    Coefficients out = zero_coefficients(ds.schemas());
    Eigen::Index col = 0;
    double intercept = d.y_mean;
    for (std::size_t l = 0; l < ds.num_factors(); ++l) {
        for (int i = 1; i <= ds.schema(l).k(); ++i, ++col) {
            out.factors[l][i] = b[col];
            intercept -= d.column_means[col] * b[col];
        }
    }
    out.intercept = intercept;
    return out;
}

AugmentedProblem build_augmented(const Dataset& ds, const WeightSet& weights, double gamma)
{
    if (!(gamma > 0.0) || !std::isfinite(gamma)) {
        throw Error(ErrorCode::NonPositiveGamma, "gamma must be positive and finite");
    }
    weights.validate();
    AugmentedProblem prob;
    prob.layout = make_layout(ds.schemas());
    if (weights.layout.blocks.size() != prob.layout.blocks.size()
        || weights.total() != prob.layout.size()) {
        throw Error(ErrorCode::LayoutMismatch, "weight set does not match the dataset's factors");
    }
    prob.weights = weights;
    prob.gamma = gamma;

    const auto n = static_cast<Eigen::Index>(ds.n());
    const auto q = static_cast<Eigen::Index>(prob.layout.size());
    const auto r = static_cast<Eigen::Index>(prob.layout.restriction_count());
    prob.y_mean = ds.y().mean();
    prob.y_centered = ds.y().array() - prob.y_mean;
    prob.Z = Eigen::MatrixXd::Zero(n, q);
    prob.A = Eigen::MatrixXd::Zero(r, q);
    prob.penalty_weights = weights.flattened();

    Eigen::Index row = 0;
    for (const auto& block : prob.layout.blocks) {
        const auto& codes = ds.codes(block.factor);
        const auto off = static_cast<Eigen::Index>(block.offset);
        Eigen::VectorXd means(block.k + 1);
        for (int i = 0; i <= block.k; ++i) {
            means[i] = static_cast<double>(ds.counts(block.factor)[static_cast<std::size_t>(i)])
                       / static_cast<double>(ds.n());
        }
        prob.level_means.push_back(means);
        if (block.kind == PenaltyKind::Ordinal) {
            // split column i: indicator of level >= i
            for (Eigen::Index t = 0; t < n; ++t) {
                int c = codes[static_cast<std::size_t>(t)];
                for (int i = 1; i <= c; ++i) prob.Z(t, off + i - 1) = 1.0;
            }
            for (int i = 1; i <= block.k; ++i) {
                prob.Z.col(off + i - 1).array() -= prob.Z.col(off + i - 1).mean();
            }
        } else {
            for (Eigen::Index t = 0; t < n; ++t) {
                int c = codes[static_cast<std::size_t>(t)];
                if (c > 0) prob.Z(t, off + c - 1) = 1.0;
            }
            for (int i = 1; i <= block.k; ++i) {
                prob.Z.col(off + i - 1).array() -= means[i];
            }
            for (std::size_t t = static_cast<std::size_t>(block.k); t < block.pairs.size(); ++t) {
                const auto [hi, lo] = block.pairs[t];
                prob.A(row, off + hi - 1) = 1.0;
                prob.A(row, off + lo - 1) = -1.0;
                prob.A(row, off + static_cast<Eigen::Index>(t)) = -1.0;
                ++row;
            }
        }
    }

    const Eigen::VectorXd inv_w = prob.penalty_weights.cwiseInverse();
    prob.Z_tilde.resize(n + r, q);
    prob.Z_tilde.topRows(n) = prob.Z * inv_w.asDiagonal();
    prob.Z_tilde.bottomRows(r) = std::sqrt(gamma) * (prob.A * inv_w.asDiagonal());
    prob.y_tilde = Eigen::VectorXd::Zero(n + r);
    prob.y_tilde.head(n) = prob.y_centered;
    return prob;
}

Eigen::VectorXd theta_from_coefficients(const Coefficients& beta, const ThetaLayout& layout)
{
    if (beta.factors.size() != layout.blocks.size()) {
        throw Error(ErrorCode::LayoutMismatch, "coefficients do not match layout");
    }
    Eigen::VectorXd theta(static_cast<Eigen::Index>(layout.size()));
    for (const auto& block : layout.blocks) {
        const auto& b = beta.factors[block.factor];
        if (b.size() != block.k + 1) {
            throw Error(ErrorCode::LayoutMismatch, "coefficient vector length mismatch");
        }
        for (std::size_t t = 0; t < block.pairs.size(); ++t) {
            theta[static_cast<Eigen::Index>(block.offset + t)] = b[block.pairs[t].high] - b[block.pairs[t].low];
        }
    }
    return theta;
}

double centered_intercept(double y_mean,
                          const std::vector<Eigen::VectorXd>& level_means,
                          const Coefficients& beta)
{
    double a = y_mean;
    for (std::size_t l = 0; l < beta.factors.size(); ++l) {
        a -= level_means[l].dot(beta.factors[l]);
    }
    return a;
}

} // namespace catfuse
