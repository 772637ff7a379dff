#pragma once

// Pearson correlation between two left-censored series: the naive estimate
// over commonly observed rows, and two-stage Tobit imputation (symmetric or
// sign-aware asymmetric prior) followed by an ordinary correlation.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "censcorr/error.hpp"
#include "censcorr/tobit.hpp"

namespace censcorr {

// Polarity of a variable. The correlation sign between two variables is the
// product of their polarities, unknown if either is unknown.
enum class Sign { positive, negative, unknown };

inline Sign combine(Sign a, Sign b) {
    if (a == Sign::unknown || b == Sign::unknown) return Sign::unknown;
    return a == b ? Sign::positive : Sign::negative;
}

inline const char* to_string(Sign s) {
    switch (s) {
        case Sign::positive: return "positive";
        case Sign::negative: return "negative";
        default: return "unknown";
    }
}

inline Sign parse_sign(std::string_view s) {
    if (s == "positive") return Sign::positive;
    if (s == "negative") return Sign::negative;
    if (s == "unknown") return Sign::unknown;
    throw InvalidArgument("unrecognized sign label '" + std::string(s) +
                          "' (expected positive, negative or unknown)");
}

// One target variable. Censored slots hold NaN and are never read as data.
struct CensoredSeries {
    std::vector<double> values;
    std::vector<char> visible;
    double theta = 0.0;

    // Entries strictly below theta are censored.
    static CensoredSeries censor_below(std::span<const double> raw, double theta) {
        CensoredSeries s;
        s.theta = theta;
        s.values.reserve(raw.size());
        s.visible.reserve(raw.size());
        for (double v : raw) {
            const bool vis = v >= theta;
            s.visible.push_back(vis ? 1 : 0);
            s.values.push_back(vis ? v : std::numeric_limits<double>::quiet_NaN());
        }
        return s;
    }

    std::size_t size() const { return values.size(); }

    std::size_t count_visible() const {
        return static_cast<std::size_t>(std::count(visible.begin(), visible.end(), 1));
    }
};

struct PairedCensoredData {
    CensoredSeries a;
    CensoredSeries b;
    Eigen::MatrixXd side_info;     // d_s x n, fully observed
    std::vector<Sign> side_signs;  // polarity per side variable
    Sign sign_a = Sign::unknown;
    Sign sign_b = Sign::unknown;

    Index n() const { return static_cast<Index>(a.size()); }

    void validate() const {
        if (a.size() != b.size() || a.visible.size() != a.size() || b.visible.size() != b.size()) {
            throw DimensionMismatch("paired data: target series lengths differ");
        }
        if (side_info.cols() != n()) {
            throw DimensionMismatch("paired data: side information has " +
                                    std::to_string(side_info.cols()) + " rows, expected " +
                                    std::to_string(n()));
        }
        if (static_cast<Index>(side_signs.size()) != side_info.rows()) {
            throw DimensionMismatch("paired data: one sign label per side variable is required");
        }
        if (!side_info.allFinite()) {
            throw InvalidArgument("paired data: side information must be fully observed");
        }
        auto check = [](const CensoredSeries& s, const char* which) {
            for (std::size_t i = 0; i < s.size(); ++i) {
                if (s.visible[i] && !(std::isfinite(s.values[i]) && s.values[i] >= s.theta)) {
                    throw InvalidArgument(std::string("paired data: observed value of target ") +
                                          which + " is non-finite or below its limit");
                }
            }
        };
        check(a, "A");
        check(b, "B");
    }
};

enum class Method { naive, sym_tobit, asym_tobit };

inline const char* to_string(Method m) {
    switch (m) {
        case Method::naive: return "naive";
        case Method::sym_tobit: return "sym_tobit";
        default: return "asym_tobit";
    }
}

struct StageSummary {
    std::string target;  // "B" (stage 1) or "A" (stage 2)
    Index n_visible = 0;
    Index n_hidden = 0;
    bool fitted = false;
    int iterations = 0;
    double final_loglik = 0.0;
    bool converged = false;
    bool asymmetric = false;
    Eigen::VectorXd w_original;
};

struct CorrelationDiagnostics {
    Index imputed_a = 0;
    Index imputed_b = 0;
    std::vector<StageSummary> stages;
};

struct CorrelationEstimate {
    Method method = Method::naive;
    double r = 0.0;
    Index n_effective = 0;
    CorrelationDiagnostics diagnostics;
};

class StageFailure : public Error {
public:
    StageFailure(std::string stage, const std::string& what)
        : Error("stage " + stage + ": " + what), stage_(std::move(stage)) {}
    const char* kind() const noexcept override { return "stage_failure"; }
    const std::string& stage() const noexcept { return stage_; }

private:
    std::string stage_;
};

// Sample Pearson correlation.
inline double pcc(std::span<const double> ya, std::span<const double> yb) {
    if (ya.size() != yb.size()) throw DimensionMismatch("pcc: series lengths differ");
    if (ya.size() < 2) throw InsufficientData("pcc: at least two pairs are required");
    const auto n = static_cast<double>(ya.size());
    double ma = 0.0, mb = 0.0;
    for (std::size_t i = 0; i < ya.size(); ++i) {
        ma += ya[i];
        mb += yb[i];
    }
    ma /= n;
    mb /= n;
    double sab = 0.0, saa = 0.0, sbb = 0.0;
    for (std::size_t i = 0; i < ya.size(); ++i) {
        const double da = ya[i] - ma;
        const double db = yb[i] - mb;
        sab += da * db;
        saa += da * da;
        sbb += db * db;
    }
    if (!(saa > 0.0) || !(sbb > 0.0)) {
        throw UndefinedCorrelation("pcc: a series has zero variance");
    }
    return std::clamp(sab / (std::sqrt(saa) * std::sqrt(sbb)), -1.0, 1.0);
}

// Correlation over the rows observed in both series.
inline CorrelationEstimate naive_pcc(const PairedCensoredData& data) {
    data.validate();
    std::vector<double> va, vb;
    for (std::size_t i = 0; i < data.a.size(); ++i) {
        if (data.a.visible[i] && data.b.visible[i]) {
            va.push_back(data.a.values[i]);
            vb.push_back(data.b.values[i]);
        }
    }
    if (va.size() < 2) {
        throw InsufficientData("naive: " + std::to_string(va.size()) +
                               " commonly observed pairs, at least two are required");
    }
    CorrelationEstimate est;
    est.method = Method::naive;
    est.r = pcc(va, vb);
    est.n_effective = static_cast<Index>(va.size());
    return est;
}

struct SignPreprocessing {
    Eigen::MatrixXd x;             // rows labelled negative are negated
    std::vector<Index> pos_set;    // rows with a known sign (all positive now)
};

inline SignPreprocessing preprocess_signs(const Eigen::MatrixXd& x, const std::vector<Sign>& labels) {
    if (static_cast<Index>(labels.size()) != x.rows()) {
        throw DimensionMismatch("preprocess_signs: one label per feature row is required");
    }
    SignPreprocessing out{x, {}};
    for (Index h = 0; h < x.rows(); ++h) {
        const Sign s = labels[static_cast<std::size_t>(h)];
        if (s == Sign::negative) out.x.row(h) *= -1.0;
        if (s != Sign::unknown) out.pos_set.push_back(h);
    }
    return out;
}

struct TobitPccConfig {
    EMConfig em;
    double lambda = 1.0;
    // When B's sign relative to A is unknown, take it from the naive
    // correlation of the commonly observed pairs.
    bool infer_b_sign = true;
    FitOptions fit;
};

namespace detail {

// Fits `target` on `features` (d x n) and returns the completed series in
// original row order.
inline std::vector<double> complete_series(const CensoredSeries& target, const Eigen::MatrixXd& features,
                                           const std::vector<Sign>& relation, PriorKind kind,
                                           const TobitPccConfig& cfg, StageSummary& summary) {
    std::vector<Index> vis, hid;
    for (std::size_t i = 0; i < target.size(); ++i) {
        (target.visible[i] ? vis : hid).push_back(static_cast<Index>(i));
    }
    summary.n_visible = static_cast<Index>(vis.size());
    summary.n_hidden = static_cast<Index>(hid.size());
    if (hid.empty()) return target.values;
    if (vis.empty()) {
        throw StageFailure(summary.target, "every value is censored; the fit has no anchor");
    }

    const SignPreprocessing pre = kind == PriorKind::asymmetric
                                      ? preprocess_signs(features, relation)
                                      : SignPreprocessing{features, {}};
    const Index d = features.rows();
    PriorSpec prior;
    if (pre.pos_set.empty()) {
        prior = PriorSpec::symmetric(cfg.lambda, d);
    } else {
        auto [lp, ln] = build_lambda_vectors(pre.pos_set, {}, cfg.lambda, d);
        prior = PriorSpec::asymmetric(cfg.lambda, std::move(lp), std::move(ln));
    }
    summary.asymmetric = prior.kind == PriorKind::asymmetric;

    RegressionData reg;
    reg.theta = target.theta;
    reg.x_visible.resize(d, static_cast<Index>(vis.size()));
    reg.y_visible.resize(static_cast<Index>(vis.size()));
    reg.x_hidden.resize(d, static_cast<Index>(hid.size()));
    for (std::size_t k = 0; k < vis.size(); ++k) {
        reg.x_visible.col(static_cast<Index>(k)) = pre.x.col(vis[k]);
        reg.y_visible[static_cast<Index>(k)] = target.values[static_cast<std::size_t>(vis[k])];
    }
    for (std::size_t k = 0; k < hid.size(); ++k) {
        reg.x_hidden.col(static_cast<Index>(k)) = pre.x.col(hid[k]);
    }

    try {
        const TobitFit fit = fit_tobit(reg, prior, cfg.em, cfg.fit);
        const Eigen::VectorXd y = impute(fit, reg);
        summary.fitted = true;
        summary.iterations = static_cast<int>(fit.trace.iterations.size());
        summary.final_loglik =
            fit.trace.iterations.empty() ? fit.trace.initial_loglik : fit.trace.iterations.back().loglik;
        summary.converged = fit.trace.converged;
        summary.w_original = fit.w_original;
        std::vector<double> out = target.values;
        for (std::size_t k = 0; k < hid.size(); ++k) {
            out[static_cast<std::size_t>(hid[k])] = y[static_cast<Index>(vis.size() + k)];
        }
        return out;
    } catch (const StageFailure&) {
        throw;
    } catch (const Error& e) {
        throw StageFailure(summary.target, e.what());
    }
}

}  // namespace detail

// Stage 1 completes B from the side information; stage 2 completes A from the
// side information plus completed B. The correlation of the two completed
// series is returned.
inline CorrelationEstimate tobit_pcc(const PairedCensoredData& data, PriorKind kind,
                                     const TobitPccConfig& cfg = {}) {
    data.validate();
    if (data.side_info.rows() < 1) {
        throw InvalidArgument("tobit_pcc: side information is required");
    }
    const Index n = data.n();
    const Index ds = data.side_info.rows();

    CorrelationEstimate est;
    est.method = kind == PriorKind::symmetric ? Method::sym_tobit : Method::asym_tobit;

    std::vector<Sign> rel_b(static_cast<std::size_t>(ds));
    std::vector<Sign> rel_a(static_cast<std::size_t>(ds) + 1);
    for (Index h = 0; h < ds; ++h) {
        rel_b[static_cast<std::size_t>(h)] = combine(data.side_signs[static_cast<std::size_t>(h)], data.sign_b);
        rel_a[static_cast<std::size_t>(h)] = combine(data.side_signs[static_cast<std::size_t>(h)], data.sign_a);
    }
    Sign b_for_a = combine(data.sign_b, data.sign_a);
    if (b_for_a == Sign::unknown && kind == PriorKind::asymmetric && cfg.infer_b_sign) {
        try {
            const double r = naive_pcc(data).r;
            if (r > 0.0) b_for_a = Sign::positive;
            if (r < 0.0) b_for_a = Sign::negative;
        } catch (const Error&) {
            // too few common pairs; leave the sign unknown
        }
    }
    rel_a[static_cast<std::size_t>(ds)] = b_for_a;

    StageSummary stage_b;
    stage_b.target = "B";
    const std::vector<double> yb = detail::complete_series(data.b, data.side_info, rel_b, kind, cfg, stage_b);

    Eigen::MatrixXd features_a(ds + 1, n);
    features_a.topRows(ds) = data.side_info;
    for (Index i = 0; i < n; ++i) features_a(ds, i) = yb[static_cast<std::size_t>(i)];

    StageSummary stage_a;
    stage_a.target = "A";
    const std::vector<double> ya = detail::complete_series(data.a, features_a, rel_a, kind, cfg, stage_a);

    est.r = pcc(ya, yb);
    est.n_effective = n;
    est.diagnostics.imputed_a = stage_a.n_hidden;
    est.diagnostics.imputed_b = stage_b.n_hidden;
    est.diagnostics.stages = {std::move(stage_b), std::move(stage_a)};
    return est;
}

}  // namespace censcorr
