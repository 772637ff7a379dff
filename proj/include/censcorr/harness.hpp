#pragma once

// Experiment harness: CSV ingestion, simulated censoring at a target negative
// ratio, repeated subsample trials comparing the three estimators, synthetic
// exchangeable-correlation data and EM runtime benchmarking.

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>
#include <nlohmann/json.hpp>

#include <algorithm>
#include <array>
#include <atomic>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <map>
#include <numeric>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "censcorr/correlation.hpp"
#include "censcorr/error.hpp"
#include "censcorr/tobit.hpp"

namespace censcorr {

struct Dataset {
    std::vector<std::string> names;
    Eigen::MatrixXd values;  // rows are records, columns follow `names`
    std::string provenance;

    Index rows() const { return values.rows(); }
    Index cols() const { return values.cols(); }

    Index column(const std::string& name) const {
        const auto it = std::find(names.begin(), names.end(), name);
        if (it == names.end()) throw DataError("dataset has no column named '" + name + "'");
        return static_cast<Index>(it - names.begin());
    }

    std::vector<double> column_values(Index c) const {
        std::vector<double> out(static_cast<std::size_t>(rows()));
        for (Index i = 0; i < rows(); ++i) out[static_cast<std::size_t>(i)] = values(i, c);
        return out;
    }

    void validate() const {
        if (static_cast<Index>(names.size()) != cols()) {
            throw DataError("dataset: header and value matrix disagree on column count");
        }
        if (cols() < 3) {
            throw DataError("dataset: two targets and at least one side variable are required");
        }
        if (!values.allFinite()) throw DataError("dataset: non-finite value");
    }
};

struct CsvLoad {
    Dataset dataset;
    std::size_t dropped_rows = 0;
};

namespace detail {

inline std::string trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r\n");
    std::string out(s.substr(b, e - b + 1));
    if (out.size() >= 2 && out.front() == '"' && out.back() == '"') out = out.substr(1, out.size() - 2);
    return out;
}

inline std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> cells;
    std::string cur;
    bool quoted = false;
    for (char ch : line) {
        if (ch == '"') {
            quoted = !quoted;
            cur.push_back(ch);
        } else if (ch == ',' && !quoted) {
            cells.push_back(trim(cur));
            cur.clear();
        } else {
            cur.push_back(ch);
        }
    }
    cells.push_back(trim(cur));
    return cells;
}

inline bool is_missing(const std::string& cell) {
    return cell.empty() || cell == "NA" || cell == "NaN" || cell == "nan" || cell == "null";
}

}  // namespace detail

// Comma-separated, header row first. Rows with a blank/NA cell are dropped and
// counted; any other non-numeric cell is an error naming its row and column.
inline CsvLoad parse_csv(std::istream& in, const std::vector<std::string>& required,
                         std::string provenance = {}) {
    std::string line;
    if (!std::getline(in, line)) throw DataError("csv: empty input, header row expected");
    if (line.rfind("\xEF\xBB\xBF", 0) == 0) line.erase(0, 3);
    CsvLoad out;
    out.dataset.names = detail::split_csv_line(line);
    out.dataset.provenance = std::move(provenance);
    const std::size_t p = out.dataset.names.size();
    for (const auto& name : required) {
        if (std::find(out.dataset.names.begin(), out.dataset.names.end(), name) ==
            out.dataset.names.end()) {
            throw DataError("csv: missing required column '" + name + "'");
        }
    }

    std::vector<double> flat;
    std::size_t row_no = 1;
    while (std::getline(in, line)) {
        ++row_no;
        if (detail::trim(line).empty()) continue;
        const auto cells = detail::split_csv_line(line);
        bool missing = cells.size() < p;
        std::vector<double> row;
        row.reserve(p);
        for (std::size_t c = 0; c < p && !missing; ++c) {
            const std::string& cell = cells[c];
            if (detail::is_missing(cell)) {
                missing = true;
                break;
            }
            double v = 0.0;
            const char* first = cell.data();
            const char* last = first + cell.size();
            if (*first == '+') ++first;
            const auto [ptr, ec] = std::from_chars(first, last, v);
            if (ec != std::errc() || ptr != last || !std::isfinite(v)) {
                throw DataError("csv: unparseable cell '" + cell + "' at row " +
                                std::to_string(row_no) + ", column '" + out.dataset.names[c] + "'");
            }
            row.push_back(v);
        }
        if (cells.size() > p) {
            throw DataError("csv: row " + std::to_string(row_no) + " has " +
                            std::to_string(cells.size()) + " cells, header has " + std::to_string(p));
        }
        if (missing) {
            ++out.dropped_rows;
            continue;
        }
        flat.insert(flat.end(), row.begin(), row.end());
    }
    const auto n = static_cast<Index>(flat.size() / std::max<std::size_t>(p, 1));
    out.dataset.values =
        Eigen::Map<Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(
            flat.data(), n, static_cast<Index>(p));
    return out;
}

inline CsvLoad load_csv(const std::filesystem::path& path, const std::vector<std::string>& required) {
    std::ifstream in(path);
    if (!in) throw DataError("csv: cannot open '" + path.string() + "'");
    return parse_csv(in, required, path.string());
}

using SignMap = std::map<std::string, Sign>;

inline SignMap parse_signs(const nlohmann::json& j) {
    if (!j.is_object()) throw DataError("signs: expected a JSON object of name -> label");
    SignMap out;
    for (const auto& [name, label] : j.items()) {
        if (!label.is_string()) throw DataError("signs: label for '" + name + "' must be a string");
        out[name] = parse_sign(label.get<std::string>());
    }
    return out;
}

inline SignMap load_signs(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw DataError("signs: cannot open '" + path.string() + "'");
    try {
        return parse_signs(nlohmann::json::parse(in));
    } catch (const nlohmann::json::exception& e) {
        throw DataError(std::string("signs: ") + e.what());
    }
}

inline Sign lookup_sign(const SignMap& signs, const std::string& name) {
    const auto it = signs.find(name);
    return it == signs.end() ? Sign::unknown : it->second;
}

// Detection limit giving round(ratio * n) values strictly below it when the
// values are distinct: the midpoint between the k-th and (k+1)-th order
// statistics. Ties make the count land on a tie-group boundary.
inline double censoring_limit(std::span<const double> values, double ratio) {
    if (!(ratio > 0.0 && ratio < 1.0)) {
        throw InvalidArgument("censor: negative ratio must lie in (0, 1)");
    }
    if (values.size() < 2) throw InsufficientData("censor: at least two values are required");
    std::vector<double> sorted(values.begin(), values.end());
    std::sort(sorted.begin(), sorted.end());
    if (sorted.front() == sorted.back()) throw InvalidArgument("censor: column is constant");
    const auto n = static_cast<long long>(sorted.size());
    const long long k = std::clamp<long long>(std::llround(ratio * static_cast<double>(n)), 0, n - 1);
    if (k == 0) {
        const auto next = std::upper_bound(sorted.begin(), sorted.end(), sorted.front());
        return sorted.front() - 0.5 * (*next - sorted.front());
    }
    return 0.5 * (sorted[static_cast<std::size_t>(k - 1)] + sorted[static_cast<std::size_t>(k)]);
}

// Censors the two targets at their empirical negative_ratio limits; every
// other column becomes side information.
inline PairedCensoredData censor(const Dataset& ds, const std::string& var_a, const std::string& var_b,
                                 double negative_ratio, const SignMap& signs = {}) {
    const Index ca = ds.column(var_a);
    const Index cb = ds.column(var_b);
    if (ca == cb) throw InvalidArgument("censor: the two targets must differ");
    const auto a = ds.column_values(ca);
    const auto b = ds.column_values(cb);

    PairedCensoredData out;
    out.a = CensoredSeries::censor_below(a, censoring_limit(a, negative_ratio));
    out.b = CensoredSeries::censor_below(b, censoring_limit(b, negative_ratio));
    out.sign_a = lookup_sign(signs, var_a);
    out.sign_b = lookup_sign(signs, var_b);
    std::vector<Index> side;
    for (Index c = 0; c < ds.cols(); ++c) {
        if (c != ca && c != cb) side.push_back(c);
    }
    out.side_info.resize(static_cast<Index>(side.size()), ds.rows());
    for (std::size_t k = 0; k < side.size(); ++k) {
        out.side_info.row(static_cast<Index>(k)) = ds.values.col(side[k]).transpose();
        out.side_signs.push_back(lookup_sign(signs, ds.names[static_cast<std::size_t>(side[k])]));
    }
    return out;
}

inline constexpr std::array<Method, 3> kMethods = {Method::asym_tobit, Method::sym_tobit, Method::naive};

inline std::size_t method_slot(Method m) {
    switch (m) {
        case Method::asym_tobit: return 0;
        case Method::sym_tobit: return 1;
        default: return 2;
    }
}

struct TrialConfig {
    Index n_sub = 50;
    double negative_ratio = 0.8;
    TobitPccConfig tobit;
    SignMap signs;

    TrialConfig() { tobit.infer_b_sign = false; }
};

struct TrialResult {
    std::string var_a, var_b;
    std::uint64_t seed = 0;
    double reference_r = std::numeric_limits<double>::quiet_NaN();
    // |estimate - reference| indexed by method_slot; empty when the estimator
    // could not produce a value
    std::array<std::optional<double>, 3> errors;
    std::array<std::optional<double>, 3> estimates;
    std::array<std::string, 3> failures;
    double seconds = 0.0;
};

// Subsample without replacement, compute the reference correlation on the
// uncensored subsample, censor, and score every estimator.
inline TrialResult run_trial(const Dataset& ds, const std::string& var_a, const std::string& var_b,
                             const TrialConfig& cfg, std::uint64_t seed) {
    const auto start = std::chrono::steady_clock::now();
    if (cfg.n_sub < 2 || cfg.n_sub > ds.rows()) {
        throw InvalidArgument("run_trial: subsample size " + std::to_string(cfg.n_sub) +
                              " outside [2, " + std::to_string(ds.rows()) + "]");
    }
    TrialResult res;
    res.var_a = var_a;
    res.var_b = var_b;
    res.seed = seed;

    std::mt19937_64 rng(seed);
    std::vector<Index> idx(static_cast<std::size_t>(ds.rows()));
    std::iota(idx.begin(), idx.end(), Index{0});
    for (Index i = 0; i < cfg.n_sub; ++i) {
        std::uniform_int_distribution<Index> pick(i, ds.rows() - 1);
        std::swap(idx[static_cast<std::size_t>(i)], idx[static_cast<std::size_t>(pick(rng))]);
    }
    Dataset sub;
    sub.names = ds.names;
    sub.values.resize(cfg.n_sub, ds.cols());
    for (Index i = 0; i < cfg.n_sub; ++i) sub.values.row(i) = ds.values.row(idx[static_cast<std::size_t>(i)]);

    const auto ya = sub.column_values(sub.column(var_a));
    const auto yb = sub.column_values(sub.column(var_b));
    try {
        res.reference_r = pcc(ya, yb);
    } catch (const Error& e) {
        for (auto& f : res.failures) f = std::string("reference: ") + e.what();
        return res;
    }

    PairedCensoredData data;
    try {
        data = censor(sub, var_a, var_b, cfg.negative_ratio, cfg.signs);
    } catch (const Error& e) {
        for (auto& f : res.failures) f = std::string("censor: ") + e.what();
        return res;
    }
    for (Method m : kMethods) {
        const std::size_t slot = method_slot(m);
        try {
            const CorrelationEstimate est =
                m == Method::naive ? naive_pcc(data)
                                   : tobit_pcc(data,
                                               m == Method::sym_tobit ? PriorKind::symmetric
                                                                      : PriorKind::asymmetric,
                                               cfg.tobit);
            res.estimates[slot] = est.r;
            res.errors[slot] = std::abs(est.r - res.reference_r);
        } catch (const Error& e) {
            res.failures[slot] = e.what();
        }
    }
    res.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return res;
}

struct MethodSummary {
    double mean = std::numeric_limits<double>::quiet_NaN();
    double std = std::numeric_limits<double>::quiet_NaN();
    std::size_t count = 0;  // trials with a value
};

struct PairReport {
    std::string var_a, var_b;
    std::array<MethodSummary, 3> summary;  // indexed by method_slot
    std::vector<TrialResult> trials;
    std::array<bool, 3> winner{};          // attains the minimal mean error
};

struct ExperimentConfig {
    TrialConfig trial;
    int trials = 50;
    std::uint64_t base_seed = 0;
    int jobs = 1;
};

struct ExperimentReport {
    ExperimentConfig config;
    std::vector<PairReport> pairs;
    std::array<int, 3> winner_counts{};
};

// Mean and population standard deviation of the available values.
inline MethodSummary summarize(const std::vector<TrialResult>& trials, std::size_t slot) {
    MethodSummary s;
    double sum = 0.0;
    for (const auto& t : trials) {
        if (t.errors[slot]) {
            sum += *t.errors[slot];
            ++s.count;
        }
    }
    if (s.count == 0) return s;
    s.mean = sum / static_cast<double>(s.count);
    double ss = 0.0;
    for (const auto& t : trials) {
        if (t.errors[slot]) ss += (*t.errors[slot] - s.mean) * (*t.errors[slot] - s.mean);
    }
    s.std = std::sqrt(ss / static_cast<double>(s.count));
    return s;
}

inline void score_winners(ExperimentReport& report) {
    report.winner_counts = {0, 0, 0};
    for (auto& pr : report.pairs) {
        double best = std::numeric_limits<double>::infinity();
        for (std::size_t s = 0; s < 3; ++s) {
            if (pr.summary[s].count > 0) best = std::min(best, pr.summary[s].mean);
        }
        for (std::size_t s = 0; s < 3; ++s) {
            pr.winner[s] = pr.summary[s].count > 0 && pr.summary[s].mean <= best;
            if (pr.winner[s]) ++report.winner_counts[s];
        }
    }
}

inline std::vector<std::pair<std::string, std::string>> all_ordered_pairs(const std::vector<std::string>& names) {
    std::vector<std::pair<std::string, std::string>> out;
    for (const auto& a : names)
        for (const auto& b : names)
            if (a != b) out.emplace_back(a, b);
    return out;
}

// Trials use seeds base_seed + t for t = 0..trials-1, shared across pairs.
inline ExperimentReport run_experiment(const Dataset& ds,
                                       const std::vector<std::pair<std::string, std::string>>& pairs,
                                       const ExperimentConfig& cfg) {
    ds.validate();
    if (cfg.trials < 1) throw InvalidArgument("run_experiment: trials must be at least 1");
    for (const auto& [a, b] : pairs) {
        ds.column(a);
        ds.column(b);
        if (a == b) throw InvalidArgument("run_experiment: pair (" + a + ", " + b + ") repeats a variable");
    }

    ExperimentReport report;
    report.config = cfg;
    report.pairs.resize(pairs.size());
    const auto trials = static_cast<std::size_t>(cfg.trials);
    for (std::size_t p = 0; p < pairs.size(); ++p) {
        report.pairs[p].var_a = pairs[p].first;
        report.pairs[p].var_b = pairs[p].second;
        report.pairs[p].trials.resize(trials);
    }

    const std::size_t total = pairs.size() * trials;
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t task = next++; task < total; task = next++) {
            const std::size_t p = task / trials;
            const std::size_t t = task % trials;
            report.pairs[p].trials[t] =
                run_trial(ds, pairs[p].first, pairs[p].second, cfg.trial, cfg.base_seed + t);
        }
    };
    const int jobs = std::max(1, cfg.jobs);
    if (jobs == 1) {
        worker();
    } else {
        std::vector<std::jthread> pool;
        for (int j = 0; j < jobs; ++j) pool.emplace_back(worker);
    }

    for (auto& pr : report.pairs) {
        for (std::size_t s = 0; s < 3; ++s) pr.summary[s] = summarize(pr.trials, s);
    }
    score_winners(report);
    return report;
}

// "mean (std)" cells with three decimals; the minimal mean in each row is
// marked with '*'.
inline std::string format_table(const ExperimentReport& report) {
    std::size_t wa = 1, wb = 1;
    for (const auto& pr : report.pairs) {
        wa = std::max(wa, pr.var_a.size());
        wb = std::max(wb, pr.var_b.size());
    }
    auto cell = [](const MethodSummary& s, bool win) {
        if (s.count == 0) return std::string("n/a");
        std::ostringstream os;
        os << std::fixed << std::setprecision(3) << s.mean << (win ? "* " : "  ") << "(" << s.std << ")";
        return os.str();
    };
    std::ostringstream os;
    os << std::left << std::setw(static_cast<int>(wa)) << "A" << "  " << std::setw(static_cast<int>(wb)) << "B"
       << "  " << std::setw(16) << "Asym Tobit" << "  " << std::setw(16) << "Sym Tobit" << "  " << "Naive" << "\n";
    for (const auto& pr : report.pairs) {
        os << std::setw(static_cast<int>(wa)) << pr.var_a << "  " << std::setw(static_cast<int>(wb)) << pr.var_b;
        for (std::size_t s = 0; s < 3; ++s) {
            os << "  " << std::setw(s < 2 ? 16 : 0) << cell(pr.summary[s], pr.winner[s]);
        }
        os << "\n";
    }
    os << "minimal-error pairs: asym " << report.winner_counts[0] << ", sym " << report.winner_counts[1]
       << ", naive " << report.winner_counts[2] << " (of " << report.pairs.size() << ")\n";
    return os.str();
}

// n rows from a d-variate normal with unit variances and every off-diagonal
// correlation equal to rho. Columns are named V1..Vd.
inline Dataset synth_generate(Index d, Index n, double rho, std::uint64_t seed) {
    if (d < 3) throw InvalidArgument("synth_generate: at least three variables are required");
    if (n < 1) throw InvalidArgument("synth_generate: at least one row is required");
    if (!(std::abs(rho) < 1.0)) throw InvalidArgument("synth_generate: |rho| must be below 1");
    if (rho < -1.0 / static_cast<double>(d - 1)) {
        throw InvalidArgument("synth_generate: rho below -1/(d-1) is not positive semidefinite");
    }
    Eigen::MatrixXd cov = Eigen::MatrixXd::Constant(d, d, rho);
    cov.diagonal().setOnes();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(cov);
    const Eigen::MatrixXd root =
        eig.eigenvectors() * eig.eigenvalues().cwiseMax(0.0).cwiseSqrt().asDiagonal();

    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    Eigen::MatrixXd z(n, d);
    for (Index i = 0; i < n; ++i)
        for (Index j = 0; j < d; ++j) z(i, j) = normal(rng);

    Dataset ds;
    ds.values = z * root.transpose();
    for (Index j = 0; j < d; ++j) ds.names.push_back("V" + std::to_string(j + 1));
    std::ostringstream prov;
    prov << "synthetic exchangeable normal d=" << d << " n=" << n << " rho=" << rho << " seed=" << seed;
    ds.provenance = prov.str();
    return ds;
}

struct BenchConfig {
    std::vector<Index> n_values{10, 17, 31, 56, 100, 177, 316, 562, 1000};
    int iters = 30;
    int repeats = 10;
    double negative_ratio = 0.8;
    double lambda = 1.0;
    std::string target;          // empty: first column
    double min_seconds = 0.02;   // per timed repeat; short fits are batched
    std::uint64_t seed = 0;
};

struct BenchTiming {
    double mean = 0.0;
    double std = 0.0;
};

struct BenchRow {
    Index n = 0;
    Index d = 0;  // features including the intercept
    BenchTiming asym;
    BenchTiming sym;
    int batch = 1;  // fits per timed repeat

    double ratio() const { return asym.mean / sym.mean; }
};

namespace detail {

// Target censored at the negative ratio, every other column a feature.
inline RegressionData bench_regression(const Dataset& ds, Index target, Index n, double ratio) {
    std::vector<double> y(static_cast<std::size_t>(n));
    for (Index i = 0; i < n; ++i) y[static_cast<std::size_t>(i)] = ds.values(i, target);
    const double theta = censoring_limit(y, ratio);
    const Index d = ds.cols() - 1;
    std::vector<Index> vis, hid;
    for (Index i = 0; i < n; ++i) (y[static_cast<std::size_t>(i)] >= theta ? vis : hid).push_back(i);
    RegressionData reg;
    reg.theta = theta;
    reg.x_visible.resize(d, static_cast<Index>(vis.size()));
    reg.x_hidden.resize(d, static_cast<Index>(hid.size()));
    reg.y_visible.resize(static_cast<Index>(vis.size()));
    auto fill = [&](Eigen::MatrixXd& x, const std::vector<Index>& rows) {
        for (std::size_t k = 0; k < rows.size(); ++k) {
            Index f = 0;
            for (Index c = 0; c < ds.cols(); ++c) {
                if (c != target) x(f++, static_cast<Index>(k)) = ds.values(rows[k], c);
            }
        }
    };
    fill(reg.x_visible, vis);
    fill(reg.x_hidden, hid);
    for (std::size_t k = 0; k < vis.size(); ++k) reg.y_visible[static_cast<Index>(k)] = y[static_cast<std::size_t>(vis[k])];
    return reg;
}

inline BenchTiming mean_std(const std::vector<double>& xs) {
    BenchTiming t;
    t.mean = std::accumulate(xs.begin(), xs.end(), 0.0) / static_cast<double>(xs.size());
    double ss = 0.0;
    for (double x : xs) ss += (x - t.mean) * (x - t.mean);
    t.std = std::sqrt(ss / static_cast<double>(xs.size()));
    return t;
}

}  // namespace detail

// Wall-clock seconds per fit of `iters` EM iterations for the asymmetric
// (every feature known positive) and symmetric priors. Grid sizes beyond the
// dataset are served by synthetic data with the same column count.
inline std::vector<BenchRow> benchmark_runtime(const Dataset& ds, const BenchConfig& cfg) {
    ds.validate();
    if (cfg.iters < 1 || cfg.repeats < 1) throw InvalidArgument("benchmark: iters and repeats must be positive");
    const Index target = cfg.target.empty() ? 0 : ds.column(cfg.target);
    const Index d_raw = ds.cols() - 1;

    EMConfig em;
    em.max_iters = cfg.iters;
    em.loglik_tol = 0.0;
    const PriorSpec sym = PriorSpec::symmetric(cfg.lambda, d_raw);
    std::vector<Index> all(static_cast<std::size_t>(d_raw));
    std::iota(all.begin(), all.end(), Index{0});
    auto [lp, ln] = build_lambda_vectors(all, {}, cfg.lambda, d_raw);
    const PriorSpec asym = PriorSpec::asymmetric(cfg.lambda, lp, ln);

    std::vector<BenchRow> rows;
    for (Index n : cfg.n_values) {
        if (n < 3) throw InvalidArgument("benchmark: n must be at least 3");
        const Dataset source =
            n <= ds.rows() ? ds : synth_generate(ds.cols(), n, 0.5, cfg.seed + static_cast<std::uint64_t>(n));
        const RegressionData reg = detail::bench_regression(source, n <= ds.rows() ? target : 0, n,
                                                            cfg.negative_ratio);
        auto run = [&](const PriorSpec& prior, int count) {
            const auto t0 = std::chrono::steady_clock::now();
            for (int k = 0; k < count; ++k) {
                const TobitFit fit = fit_tobit(reg, prior, em);
                if (!std::isfinite(fit.model.beta)) throw Error("benchmark: fit diverged");
            }
            return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        };
        // warm-up and batch calibration
        const double once = std::max(run(sym, 1), run(asym, 1));
        const int batch = std::max(1, static_cast<int>(std::ceil(cfg.min_seconds / std::max(once, 1e-9))));

        std::vector<double> ta, ts;
        for (int r = 0; r < cfg.repeats; ++r) {
            ta.push_back(run(asym, batch) / batch);
            ts.push_back(run(sym, batch) / batch);
        }
        BenchRow row;
        row.n = n;
        row.d = d_raw + 1;
        row.asym = detail::mean_std(ta);
        row.sym = detail::mean_std(ts);
        row.batch = batch;
        rows.push_back(row);
    }
    return rows;
}

}  // namespace censcorr
