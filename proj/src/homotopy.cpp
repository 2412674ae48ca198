#include <catfuse/solver.hpp>
#include <Eigen/LU>
#include <Eigen/QR>
#include <algorithm>
#include <cmath>

/*
 * Exact path of the weighted lasso with a quadratic restriction term.
 *
 * Stationarity, with multipliers p = gamma A theta (so A theta - p/gamma = 0):
 *   cor := Z'y - Z'Z theta - A'p,   cor_j = lambda w_j sign(theta_j) / 2 on the support,
 *                                   |cor_j| <= lambda w_j / 2 elsewhere.
 * For a fixed support S with signs s the solution is affine in lambda and
 * comes from one saddle-point system with two right-hand sides. Restriction
 * rows touching S may be linearly dependent on S (nominal triangles); only an
 * independent subset B is kept and the others carry p_D = C p_B, which keeps
 * the system well posed even for gamma around 1e10.
 *
 * At a knot several coordinates can be tied. The support for the next segment
 * is then found by least-index principal pivoting over the tied set.
 */

namespace catfuse {

namespace {

struct Segment
{
    Eigen::VectorXd x0, dx;             // theta(lambda) = x0 + lambda dx
    Eigen::VectorXd cor0, dcor;
};

class Solver
{
public:
    explicit Solver(const HomotopyProblem& pb) : pb_(pb)
    {
        G_ = pb.Z.transpose() * pb.Z;
        c_ = pb.Z.transpose() * pb.y;
        eps_ = pb.gamma > 0.0 ? 1.0 / pb.gamma : 0.0;
        rows_of_col_.resize(static_cast<std::size_t>(pb.A.cols()));
        for (Eigen::Index r = 0; r < pb.A.rows(); ++r) {
            for (Eigen::Index j = 0; j < pb.A.cols(); ++j) {
                if (pb.A(r, j) != 0.0) rows_of_col_[static_cast<std::size_t>(j)].push_back(r);
            }
        }
    }

    const Eigen::VectorXd& c() const { return c_; }

    Segment segment(const std::vector<Eigen::Index>& S, const Eigen::VectorXd& sign) const
    {
        const Eigen::Index q = pb_.Z.cols();
        const Eigen::Index r = pb_.A.rows();
        const auto m = static_cast<Eigen::Index>(S.size());

        std::vector<Eigen::Index> rows;
        {
            std::vector<char> seen(static_cast<std::size_t>(r), 0);
            for (Eigen::Index j : S) {
                for (Eigen::Index row : rows_of_col_[static_cast<std::size_t>(j)]) {
                    if (!seen[static_cast<std::size_t>(row)]) {
                        seen[static_cast<std::size_t>(row)] = 1;
                        rows.push_back(row);
                    }
                }
            }
            std::sort(rows.begin(), rows.end());
        }

        std::vector<Eigen::Index> B, D;
        Eigen::MatrixXd AB(0, m), C(0, 0);
        if (!rows.empty()) {
            const auto nr = static_cast<Eigen::Index>(rows.size());
            Eigen::MatrixXd AST(m, nr);
            for (Eigen::Index t = 0; t < nr; ++t) {
                for (Eigen::Index u = 0; u < m; ++u) AST(u, t) = pb_.A(rows[static_cast<std::size_t>(t)], S[static_cast<std::size_t>(u)]);
            }
            Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(AST);
            qr.setThreshold(1e-9);
            const Eigen::Index rk = qr.rank();
            const auto& perm = qr.colsPermutation().indices();
            for (Eigen::Index t = 0; t < nr; ++t) {
                (t < rk ? B : D).push_back(rows[static_cast<std::size_t>(perm[t])]);
            }
            std::sort(B.begin(), B.end());
            std::sort(D.begin(), D.end());
            AB.resize(static_cast<Eigen::Index>(B.size()), m);
            for (std::size_t t = 0; t < B.size(); ++t) {
                for (Eigen::Index u = 0; u < m; ++u) AB(static_cast<Eigen::Index>(t), u) = pb_.A(B[t], S[static_cast<std::size_t>(u)]);
            }
            if (!D.empty()) {
                Eigen::MatrixXd AD(static_cast<Eigen::Index>(D.size()), m);
                for (std::size_t t = 0; t < D.size(); ++t) {
                    for (Eigen::Index u = 0; u < m; ++u) AD(static_cast<Eigen::Index>(t), u) = pb_.A(D[t], S[static_cast<std::size_t>(u)]);
                }
                // AD = C AB
                C = AB.transpose().colPivHouseholderQr().solve(AD.transpose()).transpose();
            }
        }
        const auto rk = static_cast<Eigen::Index>(B.size());

        Eigen::MatrixXd M = Eigen::MatrixXd::Zero(m + rk, m + rk);
        for (Eigen::Index a = 0; a < m; ++a) {
            for (Eigen::Index b = 0; b < m; ++b) M(a, b) = G_(S[static_cast<std::size_t>(a)], S[static_cast<std::size_t>(b)]);
        }
        if (rk > 0) {
            Eigen::MatrixXd IC = Eigen::MatrixXd::Identity(rk, rk);
            if (C.rows() > 0) IC += C.transpose() * C;
            M.topRightCorner(m, rk) = AB.transpose() * IC;
            M.bottomLeftCorner(rk, m) = AB;
            M.bottomRightCorner(rk, rk) = -eps_ * Eigen::MatrixXd::Identity(rk, rk);
        }
        Eigen::MatrixXd rhs = Eigen::MatrixXd::Zero(m + rk, 2);
        for (Eigen::Index a = 0; a < m; ++a) {
            const auto j = S[static_cast<std::size_t>(a)];
            rhs(a, 0) = c_[j];
            rhs(a, 1) = -0.5 * sign[j] * pb_.w[j];
        }
        Eigen::MatrixXd sol = m + rk > 0 ? Eigen::MatrixXd(M.partialPivLu().solve(rhs))
                                         : Eigen::MatrixXd(0, 2);

        Segment seg;
        seg.x0 = Eigen::VectorXd::Zero(q);
        seg.dx = Eigen::VectorXd::Zero(q);
        for (Eigen::Index a = 0; a < m; ++a) {
            seg.x0[S[static_cast<std::size_t>(a)]] = sol(a, 0);
            seg.dx[S[static_cast<std::size_t>(a)]] = sol(a, 1);
        }
        Eigen::VectorXd p0 = Eigen::VectorXd::Zero(r), pd = Eigen::VectorXd::Zero(r);
        for (Eigen::Index t = 0; t < rk; ++t) {
            p0[B[static_cast<std::size_t>(t)]] = sol(m + t, 0);
            pd[B[static_cast<std::size_t>(t)]] = sol(m + t, 1);
        }
        if (!D.empty()) {
            const Eigen::VectorXd cp0 = C * sol.col(0).tail(rk);
            const Eigen::VectorXd cpd = C * sol.col(1).tail(rk);
            for (std::size_t t = 0; t < D.size(); ++t) {
                p0[D[t]] = cp0[static_cast<Eigen::Index>(t)];
                pd[D[t]] = cpd[static_cast<Eigen::Index>(t)];
            }
        }
        seg.cor0 = c_ - G_ * seg.x0;
        seg.dcor = -(G_ * seg.dx);
        if (r > 0) {
            seg.cor0.noalias() -= pb_.A.transpose() * p0;
            seg.dcor.noalias() -= pb_.A.transpose() * pd;
        }
        return seg;
    }

private:
    const HomotopyProblem& pb_;
    Eigen::MatrixXd G_;
    Eigen::VectorXd c_;
    double eps_ = 0.0;
    std::vector<std::vector<Eigen::Index>> rows_of_col_;
};

double sgn(double v) { return v > 0 ? 1.0 : (v < 0 ? -1.0 : 0.0); }

} // namespace

HomotopyProblem HomotopyProblem::from(const AugmentedProblem& prob)
{
    return {prob.Z, prob.y_centered, prob.A, prob.penalty_weights, prob.gamma};
}

HomotopyProblem HomotopyProblem::unrestricted(const AugmentedProblem& prob)
{
    return {prob.Z, prob.y_centered, Eigen::MatrixXd(0, prob.Z.cols()), prob.penalty_weights, 0.0};
}

PiecewiseLinearPath compute_homotopy(const HomotopyProblem& pb, const HomotopyOptions& options)
{
    const Eigen::Index q = pb.Z.cols();
    if (pb.Z.rows() != pb.y.size() || pb.w.size() != q || (pb.A.rows() > 0 && pb.A.cols() != q)) {
        throw Error(ErrorCode::ShapeMismatch, "homotopy problem dimensions disagree");
    }
    if (q > 0 && !(pb.w.minCoeff() > 0.0)) {
        throw Error(ErrorCode::NonPositiveWeight, "penalty weights must be strictly positive");
    }
    if (pb.A.rows() > 0 && !(pb.gamma > 0.0)) {
        throw Error(ErrorCode::NonPositiveGamma, "gamma must be positive when restrictions are present");
    }
    Solver solver(pb);
    const Eigen::VectorXd& c = solver.c();

    double lam = 0.0;
    for (Eigen::Index j = 0; j < q; ++j) lam = std::max(lam, 2.0 * std::abs(c[j]) / pb.w[j]);
    const double lam_max = lam;

    std::vector<double> lambdas{lam};
    std::vector<Eigen::VectorXd> thetas{Eigen::VectorXd::Zero(q)};
    if (lam_max == 0.0) return PiecewiseLinearPath(lambdas, thetas, pb.w);

    const int max_knots = options.max_knots > 0 ? options.max_knots : static_cast<int>(50 * q + 1000);
    const double tol_b = 1e-9 * lam_max;
    std::vector<char> active(static_cast<std::size_t>(q), 0);
    Eigen::VectorXd sign = Eigen::VectorXd::Zero(q);
    Eigen::VectorXd theta = Eigen::VectorXd::Zero(q);
    Eigen::VectorXd cor = c;

    while (lam > 0.0) {
        if (static_cast<int>(lambdas.size()) > max_knots) {
            throw Error(ErrorCode::NotConverged, "homotopy exceeded " + std::to_string(max_knots) + " knots");
        }
        const double theta_scale = 1.0 + theta.lpNorm<Eigen::Infinity>();
        std::vector<Eigen::Index> bset, kept;
        std::vector<char> in_b(static_cast<std::size_t>(q), 0);
        for (Eigen::Index j = 0; j < q; ++j) {
            const auto uj = static_cast<std::size_t>(j);
            const bool tied = active[uj]
                                  ? std::abs(theta[j]) <= 1e-14 * theta_scale
                                  : std::abs(std::abs(cor[j]) / pb.w[j] - 0.5 * lam) <= tol_b;
            if (tied) {
                bset.push_back(j);
                in_b[uj] = 1;
            } else if (active[uj]) {
                kept.push_back(j);
            }
        }
        Eigen::VectorXd sig = sign;
        std::vector<char> inside(static_cast<std::size_t>(q), 0);
        for (Eigen::Index j : bset) {
            const auto uj = static_cast<std::size_t>(j);
            if (!active[uj]) sig[j] = sgn(cor[j]);
            inside[uj] = active[uj];
        }

        Segment seg;
        std::vector<Eigen::Index> S;
        bool settled = false;
        for (int pivot = 0; pivot < options.max_pivots; ++pivot) {
            S = kept;
            for (Eigen::Index j : bset) {
                if (inside[static_cast<std::size_t>(j)]) S.push_back(j);
            }
            std::sort(S.begin(), S.end());
            seg = solver.segment(S, sig);
            Eigen::Index flip = -1;
            for (Eigen::Index j : bset) {
                const double viol = inside[static_cast<std::size_t>(j)]
                                        ? -sig[j] * seg.dx[j] * pb.w[j]
                                        : sig[j] * seg.dcor[j] / pb.w[j] - 0.5;
                if (viol < -1e-12) {
                    flip = j;
                    break;
                }
            }
            if (flip < 0) {
                settled = true;
                break;
            }
            inside[static_cast<std::size_t>(flip)] ^= 1;
        }
        if (!settled) throw Error(ErrorCode::NotConverged, "homotopy pivoting did not settle at a knot");

        std::fill(active.begin(), active.end(), 0);
        for (Eigen::Index j : S) {
            active[static_cast<std::size_t>(j)] = 1;
            sign[j] = sig[j];
        }

        double best = 0.0;
        Eigen::Index drop = -1;
        for (Eigen::Index j : S) {
            if (in_b[static_cast<std::size_t>(j)] || seg.dx[j] == 0.0) continue;
            const double l = -seg.x0[j] / seg.dx[j];
            if (l < lam && l > best) {
                best = l;
                drop = j;
            }
        }
        for (Eigen::Index j = 0; j < q; ++j) {
            if (active[static_cast<std::size_t>(j)]) continue;
            for (double sg : {1.0, -1.0}) {
                if (in_b[static_cast<std::size_t>(j)] && sg == sig[j]) continue;
                const double den = 0.5 * sg * pb.w[j] - seg.dcor[j];
                if (den == 0.0) continue;
                const double l = seg.cor0[j] / den;
                if (l < lam * (1.0 - 1e-12) && l > best) {
                    best = l;
                    drop = -1;
                }
            }
        }
        lam = best;
        theta = seg.x0 + lam * seg.dx;
        cor = seg.cor0 + lam * seg.dcor;
        if (drop >= 0) theta[drop] = 0.0;
        for (Eigen::Index j = 0; j < q; ++j) {
            if (!active[static_cast<std::size_t>(j)]) theta[j] = 0.0;
        }
        lambdas.push_back(lam);
        thetas.push_back(theta);
    }
    return PiecewiseLinearPath(std::move(lambdas), std::move(thetas), pb.w);
}

PiecewiseLinearPath::PiecewiseLinearPath(std::vector<double> lambdas,
                                         std::vector<Eigen::VectorXd> thetas,
                                         Eigen::VectorXd w)
    : lambdas_(std::move(lambdas)), thetas_(std::move(thetas)), w_(std::move(w))
{
    if (lambdas_.empty() || lambdas_.size() != thetas_.size() || lambdas_.back() != 0.0) {
        throw Error(ErrorCode::InvalidArgument, "path knots must end at lambda = 0");
    }
    for (const auto& t : thetas_) l1_.push_back(t.cwiseAbs().dot(w_));
}

Eigen::VectorXd PiecewiseLinearPath::theta_at(double lambda) const
{
    if (lambda >= lambdas_.front()) return thetas_.front();
    if (lambda <= 0.0) return thetas_.back();
    // first knot with lambda_i <= lambda
    auto it = std::lower_bound(lambdas_.begin(), lambdas_.end(), lambda, std::greater<double>());
    const auto i = static_cast<std::size_t>(it - lambdas_.begin());
    if (lambdas_[i] == lambda) return thetas_[i];
    const double hi = lambdas_[i - 1], lo = lambdas_[i];
    const double t = (lambda - lo) / (hi - lo);
    return thetas_[i] + t * (thetas_[i - 1] - thetas_[i]);
}

double PiecewiseLinearPath::l1_at(double lambda) const
{
    return theta_at(lambda).cwiseAbs().dot(w_);
}

double PiecewiseLinearPath::lambda_for_fraction(double fraction) const
{
    const double total = l1_.back();
    if (total <= 0.0 || fraction >= 1.0) return 0.0;
    if (fraction <= 0.0) return lambdas_.front();
    const double target = fraction * total;
    for (std::size_t i = 0; i + 1 < l1_.size(); ++i) {
        if (l1_[i + 1] >= target) {
            const double span = l1_[i + 1] - l1_[i];
            if (span <= 0.0) return lambdas_[i + 1];
            const double t = std::clamp((target - l1_[i]) / span, 0.0, 1.0);
            return lambdas_[i] + t * (lambdas_[i + 1] - lambdas_[i]);
        }
    }
    return 0.0;
}

} // namespace catfuse
