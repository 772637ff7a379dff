#pragma once

// JSON encodings of fitted models, correlation estimates, experiment reports
// and benchmark tables. Non-finite numbers become null.

#include <nlohmann/json.hpp>

#include <string>
#include <vector>

#include "censcorr/correlation.hpp"
#include "censcorr/error.hpp"
#include "censcorr/harness.hpp"
#include "censcorr/tobit.hpp"

namespace censcorr {

using nlohmann::json;

namespace detail {

inline json vec(const Eigen::VectorXd& v) {
    json out = json::array();
    for (Index i = 0; i < v.size(); ++i) out.push_back(v[i]);
    return out;
}

inline Eigen::VectorXd vec_from(const json& j) {
    const auto xs = j.get<std::vector<double>>();
    return Eigen::Map<const Eigen::VectorXd>(xs.data(), static_cast<Index>(xs.size()));
}

inline json number_or_null(double x) { return std::isfinite(x) ? json(x) : json(nullptr); }

}  // namespace detail

inline json to_json(const EMTrace& t) {
    json it = json::array();
    for (const auto& r : t.iterations) {
        it.push_back({{"iteration", r.iteration},
                      {"loglik", detail::number_or_null(r.loglik)},
                      {"beta", r.beta},
                      {"w_norm", r.w_norm},
                      {"nnls_iterations", r.nnls_iterations},
                      {"y_bar_norm", r.y_bar_norm},
                      {"v", r.v}});
    }
    return {{"initial_loglik", detail::number_or_null(t.initial_loglik)},
            {"converged", t.converged},
            {"iterations", std::move(it)}};
}

inline json to_json(const PriorSpec& p) {
    return {{"kind", p.kind == PriorKind::symmetric ? "sym" : "asym"},
            {"lambda", p.lambda},
            {"lambda_pos", detail::vec(p.lambda_pos)},
            {"lambda_neg", detail::vec(p.lambda_neg)}};
}

inline PriorSpec prior_from_json(const json& j) {
    PriorSpec p;
    p.kind = j.at("kind").get<std::string>() == "sym" ? PriorKind::symmetric : PriorKind::asymmetric;
    p.lambda = j.at("lambda").get<double>();
    p.lambda_pos = detail::vec_from(j.at("lambda_pos"));
    p.lambda_neg = detail::vec_from(j.at("lambda_neg"));
    return p;
}

// `w`, `intercept` and `beta` are in original units; `standardized` holds the
// model the EM actually fitted, which is what imputation needs.
inline json to_json(const TobitFit& fit, const std::vector<std::string>& features = {},
                    const std::string& target = {}, double theta = 0.0) {
    const auto& s = fit.scaling;
    json j = {{"target", target},
              {"features", features},
              {"theta", theta},
              {"w", detail::vec(fit.w_original)},
              {"intercept", fit.intercept_original},
              {"beta", fit.beta_original},
              {"prior", to_json(fit.prior)},
              {"standardization",
               {{"means", detail::vec(s.means)},
                {"stds", detail::vec(s.stds)},
                {"target_mean", s.target_mean},
                {"target_std", s.target_std},
                {"intercept", s.intercept}}},
              {"standardized", {{"w", detail::vec(fit.model.w)}, {"beta", fit.model.beta}}},
              {"initial_loglik", detail::number_or_null(fit.trace.initial_loglik)},
              {"converged", fit.trace.converged},
              {"trace", to_json(fit.trace).at("iterations")}};
    return j;
}

inline TobitFit fit_from_json(const json& j) {
    try {
        TobitFit fit;
        const json& s = j.at("standardization");
        fit.scaling.means = detail::vec_from(s.at("means"));
        fit.scaling.stds = detail::vec_from(s.at("stds"));
        fit.scaling.target_mean = s.at("target_mean").get<double>();
        fit.scaling.target_std = s.at("target_std").get<double>();
        fit.scaling.intercept = s.at("intercept").get<bool>();
        fit.model.w = detail::vec_from(j.at("standardized").at("w"));
        fit.model.beta = j.at("standardized").at("beta").get<double>();
        fit.prior = prior_from_json(j.at("prior"));
        fit.w_original = detail::vec_from(j.at("w"));
        fit.intercept_original = j.at("intercept").get<double>();
        fit.beta_original = j.at("beta").get<double>();
        fit.model.validate();
        const Index expect = fit.scaling.means.size() + (fit.scaling.intercept ? 1 : 0);
        if (fit.model.w.size() != expect || fit.scaling.stds.size() != fit.scaling.means.size()) {
            throw DataError("model json: coefficient and standardization lengths disagree");
        }
        return fit;
    } catch (const json::exception& e) {
        throw DataError(std::string("model json: ") + e.what());
    }
}

inline json to_json(const StageSummary& s) {
    json j = {{"target", s.target},
              {"n_visible", s.n_visible},
              {"n_hidden", s.n_hidden},
              {"fitted", s.fitted}};
    if (s.fitted) {
        j["iterations"] = s.iterations;
        j["final_loglik"] = detail::number_or_null(s.final_loglik);
        j["converged"] = s.converged;
        j["prior"] = s.asymmetric ? "asym" : "sym";
        j["w"] = detail::vec(s.w_original);
    }
    return j;
}

inline json to_json(const CorrelationEstimate& e) {
    json stages = json::array();
    for (const auto& s : e.diagnostics.stages) stages.push_back(to_json(s));
    return {{"method", to_string(e.method)},
            {"available", true},
            {"r", e.r},
            {"n_effective", e.n_effective},
            {"diagnostics",
             {{"imputed_a", e.diagnostics.imputed_a},
              {"imputed_b", e.diagnostics.imputed_b},
              {"stages", std::move(stages)}}}};
}

inline json error_json(const std::string& kind, const std::string& message) {
    return {{"kind", kind}, {"message", message}};
}

inline json unavailable_json(Method m, const Error& e) {
    return {{"method", to_string(m)},
            {"available", false},
            {"r", nullptr},
            {"n_effective", 0},
            {"error", error_json(e.kind(), e.what())}};
}

inline json to_json(const MethodSummary& s) {
    return {{"mean", detail::number_or_null(s.mean)},
            {"std", detail::number_or_null(s.std)},
            {"count", s.count}};
}

inline json to_json(const TrialResult& t) {
    json errors = json::object();
    json estimates = json::object();
    json failures = json::object();
    for (Method m : kMethods) {
        const auto slot = method_slot(m);
        errors[to_string(m)] = t.errors[slot] ? json(*t.errors[slot]) : json(nullptr);
        estimates[to_string(m)] = t.estimates[slot] ? json(*t.estimates[slot]) : json(nullptr);
        if (!t.failures[slot].empty()) failures[to_string(m)] = t.failures[slot];
    }
    return {{"seed", t.seed},
            {"reference_r", detail::number_or_null(t.reference_r)},
            {"errors", std::move(errors)},
            {"estimates", std::move(estimates)},
            {"failures", std::move(failures)},
            {"seconds", t.seconds}};
}

// Wall-clock seconds are omitted unless requested so that reports are
// reproducible byte for byte.
inline json to_json(const ExperimentReport& r, bool include_trials = true, bool include_timing = false) {
    const auto& c = r.config;
    json pairs = json::array();
    for (const auto& p : r.pairs) {
        json summary = json::object();
        json winners = json::array();
        for (Method m : kMethods) {
            summary[to_string(m)] = to_json(p.summary[method_slot(m)]);
            if (p.winner[method_slot(m)]) winners.push_back(to_string(m));
        }
        json pj = {{"a", p.var_a}, {"b", p.var_b}, {"summary", std::move(summary)}, {"winners", std::move(winners)}};
        if (include_trials) {
            json trials = json::array();
            for (const auto& t : p.trials) {
                json tj = to_json(t);
                if (!include_timing) tj.erase("seconds");
                trials.push_back(std::move(tj));
            }
            pj["trials"] = std::move(trials);
        }
        pairs.push_back(std::move(pj));
    }
    json winner_counts = json::object();
    for (Method m : kMethods) winner_counts[to_string(m)] = r.winner_counts[method_slot(m)];
    return {{"config",
             {{"n_sub", c.trial.n_sub},
              {"trials", c.trials},
              {"ratio", c.trial.negative_ratio},
              {"lambda", c.trial.tobit.lambda},
              {"iters", c.trial.tobit.em.max_iters},
              {"base_seed", c.base_seed}}},
            {"pairs", std::move(pairs)},
            {"winner_counts", std::move(winner_counts)}};
}

inline json to_json(const std::vector<BenchRow>& rows, const BenchConfig& cfg) {
    json out = json::array();
    for (const auto& r : rows) {
        out.push_back({{"n", r.n},
                       {"d", r.d},
                       {"asym", {{"mean", r.asym.mean}, {"std", r.asym.std}}},
                       {"sym", {{"mean", r.sym.mean}, {"std", r.sym.std}}},
                       {"ratio", detail::number_or_null(r.ratio())},
                       {"batch", r.batch}});
    }
    return {{"iters", cfg.iters}, {"repeats", cfg.repeats}, {"ratio", cfg.negative_ratio}, {"rows", std::move(out)}};
}

inline std::string format_bench_table(const std::vector<BenchRow>& rows) {
    std::ostringstream os;
    os << std::left << std::setw(6) << "n" << std::setw(22) << "asym [s]" << std::setw(22) << "sym [s]"
       << "asym/sym\n";
    for (const auto& r : rows) {
        std::ostringstream a, s;
        a << std::scientific << std::setprecision(3) << r.asym.mean << " (" << r.asym.std << ")";
        s << std::scientific << std::setprecision(3) << r.sym.mean << " (" << r.sym.std << ")";
        os << std::setw(6) << r.n << std::setw(22) << a.str() << std::setw(22) << s.str() << std::fixed
           << std::setprecision(3) << r.ratio() << "\n";
    }
    return os.str();
}

}  // namespace censcorr
