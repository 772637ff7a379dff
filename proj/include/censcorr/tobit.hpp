#pragma once

// Tobit regression with a (possibly asymmetric) normal prior on the
// coefficients, fitted by EM.
//
// Model: y = <w, x> + eps, eps ~ N(0, 1/beta); targets below the detection
// limit theta are not observed. Matrices store one observation per column.
//
// The w-update of the M-step maximizes
//     -beta/2 ||X^T w - ybar||^2 - sum_h (lp_h (w_h)_+^2 + ln_h (-w_h)_+^2) / 2,
// which after splitting w = w+ - w- (both >= 0) is NNLS(A, b) with
//     A = [[X, diag(lp/beta)^1/2, 0], [-X, 0, diag(ln/beta)^1/2]],  b = [ybar; 0].
// For the symmetric prior the same subproblem is ridge regression and is
// solved directly.

#include <Eigen/Cholesky>
#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "censcorr/error.hpp"
#include "censcorr/nnls.hpp"
#include "censcorr/truncnorm.hpp"

namespace censcorr {

struct TobitModel {
    Eigen::VectorXd w;
    double beta = 1.0;

    void validate() const {
        if (!(beta > 0.0) || !std::isfinite(beta)) {
            throw InvalidArgument("tobit: precision must be positive, got " + std::to_string(beta));
        }
        if (!w.allFinite()) throw InvalidArgument("tobit: non-finite coefficient");
    }
};

// Rows with observed targets first, censored rows second. Each column of
// x_visible / x_hidden is one feature vector.
struct RegressionData {
    Eigen::MatrixXd x_visible;  // d x n_v
    Eigen::VectorXd y_visible;  // n_v
    Eigen::MatrixXd x_hidden;   // d x n_h
    double theta = 0.0;

    Index dim() const { return x_visible.rows(); }
    Index n_visible() const { return x_visible.cols(); }
    Index n_hidden() const { return x_hidden.cols(); }
    Index n() const { return n_visible() + n_hidden(); }

    void validate() const {
        if (n_visible() < 1) {
            throw InsufficientData("tobit: at least one observed target is required");
        }
        if (y_visible.size() != n_visible()) {
            throw DimensionMismatch("tobit: y_visible length does not match x_visible columns");
        }
        if (n_hidden() > 0 && x_hidden.rows() != dim()) {
            throw DimensionMismatch("tobit: visible and hidden feature dimensions differ");
        }
        if (dim() < 1) throw InvalidArgument("tobit: at least one feature is required");
        if (!std::isfinite(theta)) throw InvalidArgument("tobit: detection limit must be finite");
        if (!x_visible.allFinite() || !y_visible.allFinite() || !x_hidden.allFinite()) {
            throw InvalidArgument("tobit: non-finite entry in regression data");
        }
        for (Index i = 0; i < n_visible(); ++i) {
            if (y_visible[i] < theta) {
                throw InvalidArgument("tobit: observed target " + std::to_string(y_visible[i]) +
                                      " lies below the detection limit " + std::to_string(theta));
            }
        }
    }

    // [X_visible, X_hidden]
    Eigen::MatrixXd x_all() const {
        Eigen::MatrixXd x(dim(), n());
        x.leftCols(n_visible()) = x_visible;
        if (n_hidden() > 0) x.rightCols(n_hidden()) = x_hidden;
        return x;
    }
};

enum class PriorKind { symmetric, asymmetric };

inline const char* to_string(PriorKind k) {
    return k == PriorKind::symmetric ? "symmetric" : "asymmetric";
}

// Per-coefficient penalties on the positive and negative parts of w.
struct PriorSpec {
    PriorKind kind = PriorKind::symmetric;
    double lambda = 1.0;
    Eigen::VectorXd lambda_pos;
    Eigen::VectorXd lambda_neg;

    static PriorSpec symmetric(double lambda, Index d) {
        PriorSpec p;
        p.kind = PriorKind::symmetric;
        p.lambda = lambda;
        p.lambda_pos = Eigen::VectorXd::Constant(d, lambda);
        p.lambda_neg = p.lambda_pos;
        return p;
    }

    static PriorSpec asymmetric(double lambda, Eigen::VectorXd pos, Eigen::VectorXd neg) {
        PriorSpec p;
        p.kind = PriorKind::asymmetric;
        p.lambda = lambda;
        p.lambda_pos = std::move(pos);
        p.lambda_neg = std::move(neg);
        return p;
    }

    Index dim() const { return lambda_pos.size(); }

    void validate(Index d) const {
        if (!(lambda > 0.0) || !std::isfinite(lambda)) {
            throw InvalidArgument("prior: base lambda must be positive");
        }
        if (lambda_pos.size() != d || lambda_neg.size() != d) {
            throw DimensionMismatch("prior: lambda vectors have length " +
                                    std::to_string(lambda_pos.size()) + ", expected " +
                                    std::to_string(d));
        }
        if (!lambda_pos.allFinite() || !lambda_neg.allFinite() || (lambda_pos.array() <= 0.0).any() ||
            (lambda_neg.array() <= 0.0).any()) {
            throw InvalidArgument("prior: every lambda entry must be positive and finite");
        }
        if (kind == PriorKind::symmetric && (lambda_pos != lambda_neg)) {
            throw InvalidArgument("prior: symmetric prior needs equal positive/negative penalties");
        }
    }
};

// lambda_pos_h = 100 lambda for h in neg_set, lambda_neg_h = 100 lambda for
// h in pos_set, lambda otherwise. Indices are zero-based.
inline std::pair<Eigen::VectorXd, Eigen::VectorXd> build_lambda_vectors(
    const std::vector<Index>& pos_set, const std::vector<Index>& neg_set, double lambda, Index d) {
    if (!(lambda > 0.0)) throw InvalidArgument("build_lambda_vectors: lambda must be positive");
    Eigen::VectorXd lp = Eigen::VectorXd::Constant(d, lambda);
    Eigen::VectorXd ln = Eigen::VectorXd::Constant(d, lambda);
    std::vector<char> seen(static_cast<std::size_t>(d), 0);
    auto check = [&](Index h) {
        if (h < 0 || h >= d) {
            throw InvalidArgument("build_lambda_vectors: index " + std::to_string(h) +
                                  " out of range");
        }
    };
    for (Index h : pos_set) {
        check(h);
        seen[static_cast<std::size_t>(h)] = 1;
        ln[h] = 100.0 * lambda;
    }
    for (Index h : neg_set) {
        check(h);
        if (seen[static_cast<std::size_t>(h)]) {
            throw InvalidArgument("build_lambda_vectors: index " + std::to_string(h) +
                                  " is in both sign sets");
        }
        lp[h] = 100.0 * lambda;
    }
    return {std::move(lp), std::move(ln)};
}

struct EMConfig {
    enum class Init { zeros, visible_ols };

    int max_iters = 30;
    double loglik_tol = 1e-8;
    Init init = Init::zeros;
    std::uint64_t seed = 0;  // reserved for randomized tie-breaks; the fit is deterministic

    void validate() const {
        if (max_iters < 1) throw InvalidArgument("em: max_iters must be at least 1");
        if (!(loglik_tol >= 0.0)) throw InvalidArgument("em: loglik_tol must be nonnegative");
    }
};

struct EMIterate {
    int iteration = 0;
    double loglik = 0.0;  // regularized log-likelihood after the iteration
    double beta = 0.0;
    double w_norm = 0.0;
    int nnls_iterations = 0;
    double y_bar_norm = 0.0;
    double v = 0.0;
};

struct EMTrace {
    double initial_loglik = 0.0;
    std::vector<EMIterate> iterations;
    bool converged = false;
};

class EMFailure : public Error {
public:
    EMFailure(const std::string& what, EMTrace partial) : Error(what), partial_(std::move(partial)) {}
    const char* kind() const noexcept override { return "em_failure"; }
    const EMTrace& partial_trace() const noexcept { return partial_; }

private:
    EMTrace partial_;
};

struct EStep {
    Eigen::VectorXd y_bar;  // length n: observed targets then conditional means
    double v = 0.0;         // summed conditional variances of the censored targets
};

struct MStepW {
    Eigen::VectorXd w;
    int nnls_iterations = 0;
};

struct EMResult {
    TobitModel model;
    EMTrace trace;
};

namespace detail {

inline void check_model_data(const TobitModel& model, const RegressionData& data) {
    model.validate();
    data.validate();
    if (model.w.size() != data.dim()) {
        throw DimensionMismatch("tobit: model has " + std::to_string(model.w.size()) +
                                " coefficients, data has " + std::to_string(data.dim()) +
                                " features");
    }
}

inline void check_y_bar(const RegressionData& data, const Eigen::VectorXd& y_bar) {
    if (y_bar.size() != data.n()) {
        throw DimensionMismatch("tobit: completed target has length " +
                                std::to_string(y_bar.size()) + ", expected " +
                                std::to_string(data.n()));
    }
}

// X^T w - y_bar over all rows, without concatenating X.
inline double residual_squared_norm(const RegressionData& data, const Eigen::VectorXd& w,
                                    const Eigen::VectorXd& y_bar) {
    double total = (data.x_visible.transpose() * w - y_bar.head(data.n_visible())).squaredNorm();
    if (data.n_hidden() > 0) {
        total += (data.x_hidden.transpose() * w - y_bar.tail(data.n_hidden())).squaredNorm();
    }
    return total;
}

// X X^T and X y_bar.
inline std::pair<Eigen::MatrixXd, Eigen::VectorXd> normal_equations(const RegressionData& data,
                                                                    const Eigen::VectorXd& y_bar) {
    Eigen::MatrixXd s(data.dim(), data.dim());
    s.noalias() = data.x_visible * data.x_visible.transpose();
    Eigen::VectorXd xy = data.x_visible * y_bar.head(data.n_visible());
    if (data.n_hidden() > 0) {
        s.noalias() += data.x_hidden * data.x_hidden.transpose();
        xy.noalias() += data.x_hidden * y_bar.tail(data.n_hidden());
    }
    return {std::move(s), std::move(xy)};
}

inline void check_prior_beta(const RegressionData& data, const PriorSpec& prior, double beta_prev) {
    data.validate();
    prior.validate(data.dim());
    if (!(beta_prev > 0.0) || !std::isfinite(beta_prev)) {
        throw InvalidArgument("m-step: previous precision must be positive");
    }
}

}  // namespace detail

// sum_visible [log beta / 2 + log phi(sqrt(beta)(y - <w,x>))]
//   + sum_hidden log Phi(sqrt(beta)(theta - <w,x>))
inline double tobit_loglik(const TobitModel& model, const RegressionData& data) {
    detail::check_model_data(model, data);
    const double sb = std::sqrt(model.beta);
    const Eigen::VectorXd fit_v = data.x_visible.transpose() * model.w;
    double total = 0.5 * static_cast<double>(data.n_visible()) * std::log(model.beta);
    for (Index i = 0; i < data.n_visible(); ++i) {
        total += log_std_normal_pdf(sb * (data.y_visible[i] - fit_v[i]));
    }
    if (data.n_hidden() > 0) {
        const Eigen::VectorXd fit_h = data.x_hidden.transpose() * model.w;
        for (Index i = 0; i < data.n_hidden(); ++i) {
            total += log_std_normal_cdf(sb * (data.theta - fit_h[i]));
        }
    }
    return total;
}

// log p(w) with normalizer Z_h = sqrt(pi / (2 lp_h)) + sqrt(pi / (2 ln_h)).
inline double log_prior(const Eigen::VectorXd& w, const PriorSpec& prior) {
    prior.validate(w.size());
    double total = 0.0;
    for (Index h = 0; h < w.size(); ++h) {
        const double lp = prior.lambda_pos[h];
        const double ln = prior.lambda_neg[h];
        const double pos = std::max(w[h], 0.0);
        const double neg = std::max(-w[h], 0.0);
        const double z = std::sqrt(std::numbers::pi / (2.0 * lp)) + std::sqrt(std::numbers::pi / (2.0 * ln));
        total += -0.5 * (lp * pos * pos + ln * neg * neg) - std::log(z);
    }
    return total;
}

inline double regularized_loglik(const TobitModel& model, const RegressionData& data,
                                 const PriorSpec& prior) {
    return log_prior(model.w, prior) + tobit_loglik(model, data);
}

inline EStep e_step(const TobitModel& model, const RegressionData& data) {
    detail::check_model_data(model, data);
    EStep out;
    out.y_bar.resize(data.n());
    out.y_bar.head(data.n_visible()) = data.y_visible;
    if (data.n_hidden() > 0) {
        const Eigen::VectorXd fit_h = data.x_hidden.transpose() * model.w;
        for (Index i = 0; i < data.n_hidden(); ++i) {
            const TruncParams p{fit_h[i], model.beta, data.theta};
            out.y_bar[data.n_visible() + i] = upper_truncated_mean(p);
            out.v += upper_truncated_variance(p);
        }
    }
    return out;
}

// Expected complete-data log-posterior given the E-step summaries:
// log p(w) + n/2 log beta - n log sqrt(2 pi) - beta/2 (||X^T w - ybar||^2 + v).
inline double q_function(const RegressionData& data, const PriorSpec& prior, const Eigen::VectorXd& w,
                         double beta, const EStep& estep) {
    detail::check_y_bar(data, estep.y_bar);
    const auto n = static_cast<double>(data.n());
    return log_prior(w, prior) + 0.5 * n * std::log(beta) - n * detail::kLogSqrt2Pi -
           0.5 * beta * (detail::residual_squared_norm(data, w, estep.y_bar) + estep.v);
}

namespace detail {

// The M-step NNLS over x = (w+, w-) in normal-equations form without
// materializing the 2d x 2d Gram matrix [S + Dp, -S; -S, S + Dn].
class SplitGramBackend {
public:
    // penalties enter as lambda / beta on the diagonal
    SplitGramBackend(const Eigen::MatrixXd& s, const Eigen::VectorXd& xy, const Eigen::VectorXd& lp,
                     const Eigen::VectorXd& ln, double beta, double yy)
        : s_(s), xy_(xy), lp_(lp), ln_(ln), inv_beta_(1.0 / beta), yy_(yy), d_(s.rows()) {}

    Index size() const { return 2 * d_; }

    void gradient(const Eigen::VectorXd& x, Eigen::VectorXd& g) const {
        sw_.noalias() = s_ * (x.head(d_) - x.tail(d_));
        g.head(d_) = sw_ + inv_beta_ * lp_.cwiseProduct(x.head(d_)) - xy_;
        g.tail(d_) = -sw_ + inv_beta_ * ln_.cwiseProduct(x.tail(d_)) + xy_;
    }

    // x^T G x - 2 c^T x + ||y||^2 with G x = g + c and c^T x = <xy, w>
    double objective(const Eigen::VectorXd& x, const Eigen::VectorXd& g) const {
        return std::max(0.0, x.dot(g) - xy_.dot(x.head(d_) - x.tail(d_)) + yy_);
    }

    double objective(const Eigen::VectorXd& x) const {
        Eigen::VectorXd g(size());
        gradient(x, g);
        return objective(x, g);
    }

    void solve_passive(const std::vector<Index>& passive, Eigen::VectorXd& z) const {
        z.setZero(size());
        if (passive.empty()) return;
        const auto k = static_cast<Index>(passive.size());
        sub_.resize(k, k);
        rhs_.resize(k);
        // passive is sorted: the w+ block comes first
        const auto split = static_cast<Index>(std::lower_bound(passive.begin(), passive.end(), d_) - passive.begin());
        for (Index c = 0; c < k; ++c) {
            const bool pc = c < split;
            const Index hc = pc ? passive[c] : passive[c] - d_;
            rhs_[c] = pc ? xy_[hc] : -xy_[hc];
            for (Index r = 0; r < k; ++r) {
                const double v = s_(r < split ? passive[r] : passive[r] - d_, hc);
                sub_(r, c) = (r < split) == pc ? v : -v;
            }
            sub_(c, c) += inv_beta_ * (pc ? lp_[hc] : ln_[hc]);
        }
        llt_.compute(sub_);
        if (llt_.info() == Eigen::Success) {
            llt_.solveInPlace(rhs_);
        } else {
            rhs_ = sub_.ldlt().solve(rhs_);
        }
        for (Index r = 0; r < k; ++r) z[passive[r]] = rhs_[r];
    }

private:
    const Eigen::MatrixXd& s_;
    const Eigen::VectorXd& xy_;
    const Eigen::VectorXd& lp_;
    const Eigen::VectorXd& ln_;
    double inv_beta_;
    double yy_;
    Index d_;
    mutable Eigen::VectorXd sw_;
    mutable Eigen::MatrixXd sub_;
    mutable Eigen::VectorXd rhs_;
    mutable Eigen::LLT<Eigen::MatrixXd> llt_;
};

}  // namespace detail

inline NnlsProblem build_mstep_system(const RegressionData& data, const PriorSpec& prior,
                                      double beta_prev, const Eigen::VectorXd& y_bar) {
    detail::check_prior_beta(data, prior, beta_prev);
    detail::check_y_bar(data, y_bar);
    const Index d = data.dim();
    const Index n = data.n();
    NnlsProblem p;
    p.a = Eigen::MatrixXd::Zero(2 * d, n + 2 * d);
    const Eigen::MatrixXd x = data.x_all();
    p.a.block(0, 0, d, n) = x;
    p.a.block(d, 0, d, n) = -x;
    for (Index h = 0; h < d; ++h) {
        p.a(h, n + h) = std::sqrt(prior.lambda_pos[h] / beta_prev);
        p.a(d + h, n + d + h) = std::sqrt(prior.lambda_neg[h] / beta_prev);
    }
    p.b = Eigen::VectorXd::Zero(n + 2 * d);
    p.b.head(n) = y_bar;
    return p;
}

// The same NNLS problem in normal-equations form, built from X X^T without
// forming A.
inline NnlsGramProblem build_mstep_gram(const RegressionData& data, const PriorSpec& prior,
                                        double beta_prev, const Eigen::VectorXd& y_bar) {
    detail::check_prior_beta(data, prior, beta_prev);
    detail::check_y_bar(data, y_bar);
    const Index d = data.dim();
    auto [s, xy] = detail::normal_equations(data, y_bar);
    NnlsGramProblem g;
    g.gram.resize(2 * d, 2 * d);
    g.gram.topLeftCorner(d, d) = s;
    g.gram.bottomRightCorner(d, d) = s;
    g.gram.topRightCorner(d, d) = -s;
    g.gram.bottomLeftCorner(d, d) = -s;
    g.gram.diagonal().head(d) += prior.lambda_pos / beta_prev;
    g.gram.diagonal().tail(d) += prior.lambda_neg / beta_prev;
    g.c.resize(2 * d);
    g.c.head(d) = xy;
    g.c.tail(d) = -xy;
    g.b_squared_norm = y_bar.squaredNorm();
    g.b_inf_norm = y_bar.size() ? y_bar.lpNorm<Eigen::Infinity>() : 0.0;
    return g;
}

// argmax_w Q(w, beta_prev, q). Symmetric priors reduce to a ridge solve;
// asymmetric priors go through NNLS on the split coefficients. `warm` is the
// previous coefficient vector, used only to seed the NNLS passive set.
inline MStepW m_step_w(const RegressionData& data, const PriorSpec& prior, double beta_prev,
                       const Eigen::VectorXd& y_bar, const Eigen::VectorXd* warm = nullptr) {
    const Index d = data.dim();
    MStepW out;
    if (prior.kind == PriorKind::symmetric) {
        detail::check_prior_beta(data, prior, beta_prev);
        detail::check_y_bar(data, y_bar);
        auto [s, xy] = detail::normal_equations(data, y_bar);
        s.diagonal() += prior.lambda_pos / beta_prev;
        out.w = s.llt().solve(xy);
        return out;
    }
    detail::check_prior_beta(data, prior, beta_prev);
    detail::check_y_bar(data, y_bar);
    auto [s, xy] = detail::normal_equations(data, y_bar);
    if (!s.diagonal().allFinite() || !xy.allFinite()) {
        throw InvalidArgument("m-step: non-finite normal equations");
    }
    const detail::SplitGramBackend be(s, xy, prior.lambda_pos, prior.lambda_neg, beta_prev, y_bar.squaredNorm());
    NnlsOptions opts;
    Eigen::VectorXd seed;
    if (warm && warm->size() == d && (warm->array() != 0.0).any()) {
        seed.noalias() = *warm;
    } else {
        // cold start: take the support of the ridge solution with averaged
        // penalties instead of growing the passive set one variable at a time
        Eigen::MatrixXd r = s;
        r.diagonal() += 0.5 * (prior.lambda_pos + prior.lambda_neg) / beta_prev;
        seed = r.llt().solve(xy);
    }
    if (seed.allFinite()) {
        Eigen::VectorXd start(2 * d);
        start.head(d) = seed.cwiseMax(0.0);
        start.tail(d) = (-seed).cwiseMax(0.0);
        opts.warm_start = std::move(start);
    }
    const double b_inf = y_bar.size() ? y_bar.lpNorm<Eigen::Infinity>() : 0.0;
    const NnlsSolution sol = detail::active_set_solve(be, detail::resolve_tol(opts, b_inf),
                                                      detail::resolve_cap(opts, 2 * d), opts);
    out.w = sol.x.head(d) - sol.x.tail(d);
    out.nnls_iterations = sol.iterations;
    return out;
}

// beta = n / (||X^T w - ybar||^2 + v)
inline double m_step_beta(const RegressionData& data, const Eigen::VectorXd& w,
                          const Eigen::VectorXd& y_bar, double v) {
    data.validate();
    detail::check_y_bar(data, y_bar);
    if (w.size() != data.dim()) throw DimensionMismatch("m_step_beta: coefficient length mismatch");
    const double denom = detail::residual_squared_norm(data, w, y_bar) + v;
    if (!(denom > 0.0) || !std::isfinite(denom)) {
        throw InvalidArgument(
            "m_step_beta: zero residual and zero censored variance (exact interpolation); "
            "add jitter to the targets or increase lambda");
    }
    return static_cast<double>(data.n()) / denom;
}

inline TobitModel initial_model(const RegressionData& data, const PriorSpec& prior,
                                const EMConfig& config) {
    const Index nv = data.n_visible();
    const double mean = data.y_visible.mean();
    const double var = nv > 1 ? (data.y_visible.array() - mean).square().sum() / static_cast<double>(nv) : 0.0;
    TobitModel m;
    m.beta = 1.0 / std::max(var, 1e-6);
    m.w = Eigen::VectorXd::Zero(data.dim());
    if (config.init == EMConfig::Init::visible_ols) {
        Eigen::MatrixXd s = data.x_visible * data.x_visible.transpose();
        s.diagonal() += prior.lambda_pos.cwiseMin(prior.lambda_neg) / m.beta;
        m.w = s.llt().solve(data.x_visible * data.y_visible);
    }
    return m;
}

// EM iterations: E-step, w-update, beta-update, until max_iters or the
// relative change of the regularized log-likelihood drops below loglik_tol.
inline EMResult fit_em(const RegressionData& data, const PriorSpec& prior, const EMConfig& config) {
    data.validate();
    prior.validate(data.dim());
    config.validate();

    EMResult res;
    res.model = initial_model(data, prior, config);
    double prev = regularized_loglik(res.model, data, prior);
    res.trace.initial_loglik = prev;
    res.trace.iterations.reserve(static_cast<std::size_t>(config.max_iters));

    for (int t = 1; t <= config.max_iters; ++t) {
        try {
            const EStep es = e_step(res.model, data);
            MStepW mw = m_step_w(data, prior, res.model.beta, es.y_bar, &res.model.w);
            const double beta = m_step_beta(data, mw.w, es.y_bar, es.v);
            res.model.w = std::move(mw.w);
            res.model.beta = beta;

            EMIterate rec;
            rec.iteration = t;
            rec.loglik = regularized_loglik(res.model, data, prior);
            rec.beta = beta;
            rec.w_norm = res.model.w.norm();
            rec.nnls_iterations = mw.nnls_iterations;
            rec.y_bar_norm = es.y_bar.norm();
            rec.v = es.v;
            res.trace.iterations.push_back(rec);

            if (std::abs(rec.loglik - prev) / (1.0 + std::abs(rec.loglik)) < config.loglik_tol) {
                res.trace.converged = true;
                break;
            }
            prev = rec.loglik;
        } catch (const Error& e) {
            throw EMFailure("em: iteration " + std::to_string(t) + " failed: " + e.what(),
                            res.trace);
        }
    }
    return res;
}

// Observed targets unchanged, censored targets replaced by E[y | y < theta, x].
// Output order follows the data: visible rows then hidden rows.
inline Eigen::VectorXd impute(const TobitModel& model, const RegressionData& data) {
    return e_step(model, data).y_bar;
}

// ---------------------------------------------------------------------------
// Fitting on standardized features with an intercept.

struct Standardization {
    Eigen::VectorXd means;  // per raw feature
    Eigen::VectorXd stds;
    double target_mean = 0.0;
    double target_std = 1.0;
    bool intercept = true;
};

struct FitOptions {
    bool standardize = true;
    bool intercept = true;
};

struct TobitFit {
    TobitModel model;  // in standardized units; intercept last when present
    PriorSpec prior;   // as fitted, including the intercept entry
    Standardization scaling;
    EMTrace trace;
    Eigen::VectorXd w_original;  // per raw feature, original units
    double intercept_original = 0.0;
    double beta_original = 1.0;
};

namespace detail {

inline double usable_scale(double s, double location) {
    return s > 1e-12 * (1.0 + std::abs(location)) ? s : 1.0;
}

}  // namespace detail

// Feature and target location/scale from the rows with observed targets.
inline Standardization compute_standardization(const RegressionData& data, const FitOptions& opts) {
    data.validate();
    const Index d = data.dim();
    Standardization s;
    s.intercept = opts.intercept;
    s.means = Eigen::VectorXd::Zero(d);
    s.stds = Eigen::VectorXd::Ones(d);
    if (!opts.standardize) return s;
    const auto nv = static_cast<double>(data.n_visible());
    for (Index h = 0; h < d; ++h) {
        const auto row = data.x_visible.row(h).array();
        const double m = row.mean();
        s.means[h] = m;
        s.stds[h] = detail::usable_scale(std::sqrt((row - m).square().sum() / nv), m);
    }
    const double ym = data.y_visible.mean();
    s.target_mean = ym;
    s.target_std =
        detail::usable_scale(std::sqrt((data.y_visible.array() - ym).square().sum() / nv), ym);
    return s;
}

inline RegressionData apply_standardization(const RegressionData& data, const Standardization& s) {
    const Index d = data.dim();
    const Index extra = s.intercept ? 1 : 0;
    auto transform = [&](const Eigen::MatrixXd& x) {
        Eigen::MatrixXd out(d + extra, x.cols());
        for (Index h = 0; h < d; ++h) {
            out.row(h) = (x.row(h).array() - s.means[h]) / s.stds[h];
        }
        if (extra) out.row(d).setOnes();
        return out;
    };
    RegressionData out;
    out.x_visible = transform(data.x_visible);
    out.x_hidden = data.n_hidden() > 0 ? transform(data.x_hidden) : Eigen::MatrixXd(d + extra, 0);
    out.y_visible = (data.y_visible.array() - s.target_mean) / s.target_std;
    out.theta = (data.theta - s.target_mean) / s.target_std;
    return out;
}

// Standardizes, appends the intercept (always with the symmetric base
// penalty), runs EM and maps the coefficients back to original units.
inline TobitFit fit_tobit(const RegressionData& data, const PriorSpec& feature_prior,
                          const EMConfig& config, const FitOptions& opts = {}) {
    data.validate();
    feature_prior.validate(data.dim());
    TobitFit fit;
    fit.scaling = compute_standardization(data, opts);
    const RegressionData scaled = apply_standardization(data, fit.scaling);

    const Index d = data.dim();
    fit.prior = feature_prior;
    if (opts.intercept) {
        fit.prior.lambda_pos.conservativeResize(d + 1);
        fit.prior.lambda_neg.conservativeResize(d + 1);
        fit.prior.lambda_pos[d] = feature_prior.lambda;
        fit.prior.lambda_neg[d] = feature_prior.lambda;
    }

    EMResult em = fit_em(scaled, fit.prior, config);
    fit.model = std::move(em.model);
    fit.trace = std::move(em.trace);

    const auto& sc = fit.scaling;
    fit.w_original.resize(d);
    double shift = opts.intercept ? fit.model.w[d] : 0.0;
    for (Index h = 0; h < d; ++h) {
        fit.w_original[h] = sc.target_std * fit.model.w[h] / sc.stds[h];
        shift -= fit.model.w[h] * sc.means[h] / sc.stds[h];
    }
    fit.intercept_original = sc.target_mean + sc.target_std * shift;
    fit.beta_original = fit.model.beta / (sc.target_std * sc.target_std);
    return fit;
}

// Completed targets in original units (visible rows then hidden rows).
inline Eigen::VectorXd impute(const TobitFit& fit, const RegressionData& data) {
    const RegressionData scaled = apply_standardization(data, fit.scaling);
    Eigen::VectorXd y = impute(fit.model, scaled);
    y = (y.array() * fit.scaling.target_std + fit.scaling.target_mean).matrix();
    // observed entries round-trip through the affine map; restore them exactly
    y.head(data.n_visible()) = data.y_visible;
    // and keep imputations strictly below the limit after the back-transform
    for (Index i = data.n_visible(); i < data.n(); ++i) {
        if (!(y[i] < data.theta)) y[i] = std::nextafter(data.theta, -INFINITY);
    }
    return y;
}

}  // namespace censcorr
