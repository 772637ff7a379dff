// censcorr: command-line front end.
//
//   censcorr fit        fit a Tobit regression for one column of a CSV
//   censcorr impute     replace censored values of a column by conditional means
//   censcorr correlate  naive / symmetric / asymmetric correlation of two columns
//   censcorr simulate   repeated-subsample censoring experiment
//   censcorr bench      EM runtime by sample size for both priors
//
// Exit status: 0 success, 1 computation failure (error JSON on stdout),
// 2 usage error.

#include <CLI11.hpp>

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "censcorr/correlation.hpp"
#include "censcorr/harness.hpp"
#include "censcorr/serialize.hpp"
#include "censcorr/tobit.hpp"

namespace {

using namespace censcorr;

struct Options {
    std::string input;
    std::vector<std::string> targets;
    std::vector<std::string> features;
    std::string prior = "asym";
    double lambda = 1.0;
    std::optional<double> ratio;
    std::vector<double> limits;
    Index n_sub = 50;
    int trials = 50;
    std::optional<std::uint64_t> seed;
    std::string signs;
    std::string output;
    std::string format;
    int jobs = 1;
    int iters = 30;
    double tol = 1e-8;
    std::vector<std::string> methods{"naive", "sym", "asym"};
    std::vector<double> synthetic;
    std::vector<Index> n_values{10, 17, 31, 56, 100, 177, 316, 562, 1000};
    int repeats = 10;
    std::string model;
    bool no_infer_sign = false;
    bool no_standardize = false;
    bool timing = false;
};

std::uint64_t resolve_seed(const Options& o) {
    if (o.seed) return *o.seed;
    if (const char* env = std::getenv("CENSCORR_SEED"); env && *env) {
        try {
            std::size_t pos = 0;
            const unsigned long long v = std::stoull(env, &pos);
            if (pos == std::string(env).size()) return v;
        } catch (const std::exception&) {
        }
        throw CLI::ValidationError("CENSCORR_SEED", "must be a nonnegative integer");
    }
    return 0;
}

void emit(const Options& o, const std::string& text) {
    if (o.output.empty()) {
        std::cout << text;
        if (!text.empty() && text.back() != '\n') std::cout << '\n';
        return;
    }
    std::ofstream out(o.output);
    if (!out) throw DataError("cannot open output file '" + o.output + "'");
    out << text;
    if (!text.empty() && text.back() != '\n') out << '\n';
}

std::string dump(const json& j) { return j.dump(2); }

SignMap signs_of(const Options& o) { return o.signs.empty() ? SignMap{} : load_signs(o.signs); }

Dataset dataset_from(const Options& o, const std::vector<std::string>& required) {
    if (!o.synthetic.empty()) {
        if (o.synthetic.size() != 3) throw CLI::ValidationError("--synthetic", "expects d,n,rho");
        return synth_generate(static_cast<Index>(o.synthetic[0]), static_cast<Index>(o.synthetic[1]),
                              o.synthetic[2], resolve_seed(o));
    }
    if (o.input.empty()) throw CLI::RequiredError("--input");
    const CsvLoad load = load_csv(o.input, required);
    if (load.dropped_rows > 0) {
        std::cerr << "censcorr: dropped " << load.dropped_rows << " row(s) with missing cells\n";
    }
    return load.dataset;
}

double limit_for(const Options& o, std::size_t which, const std::vector<double>& column) {
    if (!o.limits.empty()) return o.limits.at(which);
    if (o.ratio) return censoring_limit(column, *o.ratio);
    // nothing is censored
    return *std::min_element(column.begin(), column.end());
}

void check_limit_flags(const Options& o, std::size_t expected) {
    if (!o.limits.empty() && o.limits.size() != expected) {
        throw CLI::ValidationError("--limits", "expects " + std::to_string(expected) + " value(s)");
    }
}

EMConfig em_config(const Options& o) {
    EMConfig em;
    em.max_iters = o.iters;
    em.loglik_tol = o.tol;
    em.seed = resolve_seed(o);
    return em;
}

struct Regression {
    RegressionData data;
    std::vector<std::string> features;
    std::vector<Index> visible_rows, hidden_rows;
    std::vector<double> target;
};

Regression regression_from(const Dataset& ds, const std::string& target, std::vector<std::string> features,
                           double theta) {
    const Index tc = ds.column(target);
    if (features.empty()) {
        for (const auto& name : ds.names)
            if (name != target) features.push_back(name);
    }
    std::vector<Index> fc;
    for (const auto& f : features) {
        if (f == target) throw CLI::ValidationError("--features", "must not include the target");
        fc.push_back(ds.column(f));
    }
    Regression r;
    r.features = features;
    r.target = ds.column_values(tc);
    for (Index i = 0; i < ds.rows(); ++i) {
        (r.target[static_cast<std::size_t>(i)] >= theta ? r.visible_rows : r.hidden_rows).push_back(i);
    }
    const auto d = static_cast<Index>(fc.size());
    auto gather = [&](const std::vector<Index>& rows) {
        Eigen::MatrixXd x(d, static_cast<Index>(rows.size()));
        for (std::size_t k = 0; k < rows.size(); ++k)
            for (Index h = 0; h < d; ++h) x(h, static_cast<Index>(k)) = ds.values(rows[k], fc[static_cast<std::size_t>(h)]);
        return x;
    };
    r.data.theta = theta;
    r.data.x_visible = gather(r.visible_rows);
    r.data.x_hidden = gather(r.hidden_rows);
    r.data.y_visible.resize(static_cast<Index>(r.visible_rows.size()));
    for (std::size_t k = 0; k < r.visible_rows.size(); ++k) {
        r.data.y_visible[static_cast<Index>(k)] = r.target[static_cast<std::size_t>(r.visible_rows[k])];
    }
    return r;
}

PriorSpec prior_for(const Options& o, const std::string& target, const std::vector<std::string>& features) {
    const auto d = static_cast<Index>(features.size());
    if (o.prior == "sym") return PriorSpec::symmetric(o.lambda, d);
    const SignMap signs = signs_of(o);
    const Sign st = lookup_sign(signs, target);
    std::vector<Index> pos, neg;
    for (Index h = 0; h < d; ++h) {
        const Sign rel = combine(lookup_sign(signs, features[static_cast<std::size_t>(h)]), st);
        if (rel == Sign::positive) pos.push_back(h);
        if (rel == Sign::negative) neg.push_back(h);
    }
    auto [lp, ln] = build_lambda_vectors(pos, neg, o.lambda, d);
    return PriorSpec::asymmetric(o.lambda, std::move(lp), std::move(ln));
}

FitOptions fit_options(const Options& o) {
    FitOptions f;
    f.standardize = !o.no_standardize;
    return f;
}

int cmd_fit(const Options& o) {
    if (o.targets.size() != 1) throw CLI::ValidationError("--targets", "fit expects one target column");
    check_limit_flags(o, 1);
    std::vector<std::string> required = o.targets;
    required.insert(required.end(), o.features.begin(), o.features.end());
    const Dataset ds = dataset_from(o, required);
    const double theta = limit_for(o, 0, ds.column_values(ds.column(o.targets[0])));
    const Regression reg = regression_from(ds, o.targets[0], o.features, theta);
    const PriorSpec prior = prior_for(o, o.targets[0], reg.features);
    const TobitFit fit = fit_tobit(reg.data, prior, em_config(o), fit_options(o));
    emit(o, dump(to_json(fit, reg.features, o.targets[0], theta)));
    return 0;
}

int cmd_impute(const Options& o) {
    if (o.targets.size() != 1) throw CLI::ValidationError("--targets", "impute expects one target column");
    check_limit_flags(o, 1);
    std::optional<json> model;
    std::vector<std::string> features = o.features;
    if (!o.model.empty()) {
        std::ifstream in(o.model);
        if (!in) throw DataError("cannot open model file '" + o.model + "'");
        try {
            model = json::parse(in);
            features = model->at("features").get<std::vector<std::string>>();
        } catch (const json::exception& e) {
            throw DataError(std::string("model json: ") + e.what());
        }
    }
    std::vector<std::string> required = o.targets;
    required.insert(required.end(), features.begin(), features.end());
    const Dataset ds = dataset_from(o, required);
    const auto column = ds.column_values(ds.column(o.targets[0]));
    double theta = 0.0;
    if (model && o.limits.empty() && !o.ratio) {
        theta = model->at("theta").get<double>();
    } else {
        theta = limit_for(o, 0, column);
    }
    const Regression reg = regression_from(ds, o.targets[0], features, theta);

    TobitFit fit;
    if (model) {
        fit = fit_from_json(*model);
        if (fit.scaling.means.size() != reg.data.dim()) {
            throw DataError("model has " + std::to_string(fit.scaling.means.size()) + " features, data has " +
                            std::to_string(reg.data.dim()));
        }
    } else {
        fit = fit_tobit(reg.data, prior_for(o, o.targets[0], reg.features), em_config(o), fit_options(o));
    }
    const Eigen::VectorXd completed = impute(fit, reg.data);

    std::vector<double> values(column.size());
    std::vector<bool> censored(column.size(), false);
    for (std::size_t k = 0; k < reg.visible_rows.size(); ++k) {
        values[static_cast<std::size_t>(reg.visible_rows[k])] = completed[static_cast<Index>(k)];
    }
    for (std::size_t k = 0; k < reg.hidden_rows.size(); ++k) {
        const auto row = static_cast<std::size_t>(reg.hidden_rows[k]);
        values[row] = completed[static_cast<Index>(reg.visible_rows.size() + k)];
        censored[row] = true;
    }
    if (o.format == "table") {
        std::ostringstream os;
        os << "row," << o.targets[0] << ",censored\n";
        os << std::setprecision(17);
        for (std::size_t i = 0; i < values.size(); ++i) os << i << "," << values[i] << "," << (censored[i] ? 1 : 0) << "\n";
        emit(o, os.str());
    } else {
        emit(o, dump({{"target", o.targets[0]},
                      {"theta", theta},
                      {"n_imputed", reg.hidden_rows.size()},
                      {"values", values},
                      {"censored", censored}}));
    }
    return 0;
}

std::vector<Method> parse_methods(const std::vector<std::string>& names) {
    std::vector<Method> out;
    for (const auto& m : names) {
        if (m == "naive") out.push_back(Method::naive);
        else if (m == "sym") out.push_back(Method::sym_tobit);
        else if (m == "asym") out.push_back(Method::asym_tobit);
        else throw CLI::ValidationError("--methods", "unknown method '" + m + "' (naive, sym, asym)");
    }
    return out;
}

int cmd_correlate(const Options& o) {
    if (o.targets.size() != 2) throw CLI::ValidationError("--targets", "correlate expects A,B");
    check_limit_flags(o, 2);
    const std::vector<Method> methods = parse_methods(o.methods);
    const Dataset ds = dataset_from(o, o.targets);
    const double theta_a = limit_for(o, 0, ds.column_values(ds.column(o.targets[0])));
    const double theta_b = limit_for(o, 1, ds.column_values(ds.column(o.targets[1])));

    // censor() picks limits from a ratio; explicit limits are applied here
    PairedCensoredData data = censor(ds, o.targets[0], o.targets[1], 0.5, signs_of(o));
    data.a = CensoredSeries::censor_below(ds.column_values(ds.column(o.targets[0])), theta_a);
    data.b = CensoredSeries::censor_below(ds.column_values(ds.column(o.targets[1])), theta_b);

    TobitPccConfig cfg;
    cfg.lambda = o.lambda;
    cfg.em = em_config(o);
    cfg.infer_b_sign = !o.no_infer_sign;
    cfg.fit = fit_options(o);

    json estimates = json::array();
    std::ostringstream table;
    table << std::left << std::setw(12) << "method" << std::setw(12) << "r" << "n_effective\n";
    for (Method m : methods) {
        try {
            const CorrelationEstimate est =
                m == Method::naive ? naive_pcc(data)
                                   : tobit_pcc(data, m == Method::sym_tobit ? PriorKind::symmetric : PriorKind::asymmetric, cfg);
            estimates.push_back(to_json(est));
            table << std::setw(12) << to_string(m) << std::setw(12) << std::fixed << std::setprecision(6) << est.r
                  << est.n_effective << "\n";
        } catch (const Error& e) {
            estimates.push_back(unavailable_json(m, e));
            table << std::setw(12) << to_string(m) << std::setw(12) << "n/a" << e.what() << "\n";
            std::cerr << "censcorr: " << to_string(m) << " unavailable: " << e.what() << "\n";
        }
    }
    if (o.format == "table") {
        emit(o, table.str());
    } else {
        emit(o, dump({{"targets", o.targets},
                      {"theta", {{"a", theta_a}, {"b", theta_b}}},
                      {"n", data.n()},
                      {"estimates", std::move(estimates)}}));
    }
    return 0;
}

int cmd_simulate(const Options& o) {
    if (!o.targets.empty() && o.targets.size() != 2) throw CLI::ValidationError("--targets", "expects A,B");
    if (!o.synthetic.empty() && !o.input.empty()) {
        throw CLI::ValidationError("--synthetic", "cannot be combined with --input");
    }
    const Dataset ds = dataset_from(o, o.targets);
    ExperimentConfig cfg;
    cfg.trials = o.trials;
    cfg.base_seed = resolve_seed(o);
    cfg.jobs = o.jobs;
    cfg.trial.n_sub = o.n_sub;
    cfg.trial.negative_ratio = o.ratio.value_or(0.8);
    cfg.trial.tobit.lambda = o.lambda;
    cfg.trial.tobit.em = em_config(o);
    cfg.trial.tobit.fit = fit_options(o);
    if (!o.signs.empty()) {
        cfg.trial.signs = signs_of(o);
    } else if (!o.synthetic.empty()) {
        // the generator makes every pair positively correlated
        for (const auto& name : ds.names) cfg.trial.signs[name] = Sign::positive;
    }
    const auto pairs = o.targets.empty() ? all_ordered_pairs(ds.names)
                                         : std::vector<std::pair<std::string, std::string>>{{o.targets[0], o.targets[1]}};
    const ExperimentReport report = run_experiment(ds, pairs, cfg);
    emit(o, o.format == "json" ? dump(to_json(report, true, o.timing)) : format_table(report));
    return 0;
}

int cmd_bench(const Options& o) {
    if (o.targets.size() > 1) throw CLI::ValidationError("--targets", "bench expects at most one target");
    if (!o.synthetic.empty() && !o.input.empty()) {
        throw CLI::ValidationError("--synthetic", "cannot be combined with --input");
    }
    Options src = o;
    if (src.input.empty() && src.synthetic.empty()) src.synthetic = {8, 1000, 0.5};
    const Dataset ds = dataset_from(src, o.targets);
    BenchConfig cfg;
    cfg.n_values = o.n_values;
    cfg.iters = o.iters;
    cfg.repeats = o.repeats;
    cfg.negative_ratio = o.ratio.value_or(0.8);
    cfg.lambda = o.lambda;
    cfg.seed = resolve_seed(o);
    if (!o.targets.empty()) cfg.target = o.targets[0];
    const auto rows = benchmark_runtime(ds, cfg);
    emit(o, o.format == "table" ? format_bench_table(rows) : dump(to_json(rows, cfg)));
    return 0;
}

void add_common(CLI::App* sub, Options& o) {
    sub->add_option("--input", o.input, "CSV file with a header row");
    sub->add_option("--seed", o.seed, "random seed (falls back to CENSCORR_SEED, then 0)");
    sub->add_option("--lambda", o.lambda, "base prior penalty")->check(CLI::PositiveNumber);
    sub->add_option("--iters", o.iters, "EM iterations")->check(CLI::Range(1, 100000));
    sub->add_option("--output", o.output, "write the result here instead of stdout");
    sub->add_option("--format", o.format, "json or table (simulate defaults to table, the rest to json)")->check(CLI::IsMember({"json", "table"}));
    sub->add_flag("--no-standardize", o.no_standardize, "fit on raw features and target");
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Correlation and regression for left-censored measurements"};
    app.require_subcommand(1);
    Options o;
    const auto ratio_check = CLI::Range(0.0, 1.0) & CLI::Validator(
        [](std::string& s) {
            const double v = std::stod(s);
            return v > 0.0 && v < 1.0 ? std::string{} : std::string("must lie strictly between 0 and 1");
        },
        "(0,1)");

    auto* fit = app.add_subcommand("fit", "fit a Tobit regression and print the model");
    add_common(fit, o);
    fit->add_option("--targets", o.targets, "target column")->required()->delimiter(',');
    fit->add_option("--features", o.features, "feature columns (default: all others)")->delimiter(',');
    fit->add_option("--prior", o.prior, "sym or asym")->check(CLI::IsMember({"sym", "asym"}));
    fit->add_option("--tol", o.tol, "relative log-likelihood tolerance")->check(CLI::NonNegativeNumber);
    auto* fr = fit->add_option("--ratio", o.ratio, "censor the target at this negative ratio")->check(ratio_check);
    fit->add_option("--limits", o.limits, "detection limit of the target")->delimiter(',')->excludes(fr);
    fit->add_option("--signs", o.signs, "sign sidecar JSON");

    auto* imp = app.add_subcommand("impute", "complete censored values of a column");
    add_common(imp, o);
    imp->add_option("--targets", o.targets, "target column")->required()->delimiter(',');
    imp->add_option("--features", o.features, "feature columns (default: all others)")->delimiter(',');
    imp->add_option("--model", o.model, "model JSON from `fit` (otherwise fitted here)");
    imp->add_option("--prior", o.prior, "sym or asym")->check(CLI::IsMember({"sym", "asym"}));
    imp->add_option("--tol", o.tol, "relative log-likelihood tolerance")->check(CLI::NonNegativeNumber);
    auto* ir = imp->add_option("--ratio", o.ratio, "censor the target at this negative ratio")->check(ratio_check);
    imp->add_option("--limits", o.limits, "detection limit of the target")->delimiter(',')->excludes(ir);
    imp->add_option("--signs", o.signs, "sign sidecar JSON");

    auto* cor = app.add_subcommand("correlate", "estimate the correlation of two censored columns");
    add_common(cor, o);
    cor->add_option("--targets", o.targets, "A,B")->required()->delimiter(',');
    cor->add_option("--methods", o.methods, "subset of naive,sym,asym")->delimiter(',');
    cor->add_option("--tol", o.tol, "relative log-likelihood tolerance")->check(CLI::NonNegativeNumber);
    auto* cr = cor->add_option("--ratio", o.ratio, "censor both columns at this negative ratio")->check(ratio_check);
    cor->add_option("--limits", o.limits, "detection limits theta_a,theta_b")->delimiter(',')->excludes(cr);
    cor->add_option("--signs", o.signs, "sign sidecar JSON");
    cor->add_flag("--no-infer-sign", o.no_infer_sign, "do not take B's sign from the commonly observed pairs");

    auto* sim = app.add_subcommand("simulate", "repeated subsample censoring experiment");
    add_common(sim, o);
    sim->add_option("--targets", o.targets, "restrict to the pair A,B")->delimiter(',');
    sim->add_option("--synthetic", o.synthetic, "generate d,n,rho exchangeable normal data")->delimiter(',');
    sim->add_option("--n-sub", o.n_sub, "rows per trial")->check(CLI::Range(Index{2}, Index{1} << 40));
    sim->add_option("--trials", o.trials, "trials per pair")->check(CLI::Range(1, 1 << 30));
    sim->add_option("--ratio", o.ratio, "negative ratio")->check(ratio_check);
    sim->add_option("--signs", o.signs, "sign sidecar JSON");
    sim->add_option("--jobs", o.jobs, "worker threads")->check(CLI::Range(1, 1024));
    sim->add_flag("--timing", o.timing, "include per-trial wall-clock seconds in JSON");

    auto* bench = app.add_subcommand("bench", "EM runtime for both priors over a grid of sample sizes");
    add_common(bench, o);
    bench->add_option("--targets", o.targets, "target column (default: first)")->delimiter(',');
    bench->add_option("--synthetic", o.synthetic, "generate d,n,rho data (default 8,1000,0.5)")->delimiter(',');
    bench->add_option("--n-values", o.n_values, "sample sizes (default 10,17,31,56,100,177,316,562,1000)")->delimiter(',');
    bench->add_option("--repeats", o.repeats, "timed repeats per size")->check(CLI::Range(1, 100000));
    bench->add_option("--ratio", o.ratio, "negative ratio")->check(ratio_check);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (*fit) return cmd_fit(o);
        if (*imp) return cmd_impute(o);
        if (*cor) return cmd_correlate(o);
        if (*sim) return cmd_simulate(o);
        if (*bench) return cmd_bench(o);
    } catch (const CLI::Error& e) {
        std::cerr << "censcorr: " << e.what() << "\n" << app.help();
        return 2;
    } catch (const Error& e) {
        std::cout << dump({{"error", error_json(e.kind(), e.what())}}) << "\n";
        std::cerr << "censcorr: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cout << dump({{"error", error_json("internal", e.what())}}) << "\n";
        std::cerr << "censcorr: " << e.what() << "\n";
        return 1;
    }
    return 2;
}
