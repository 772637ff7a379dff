#pragma once

// Nonnegative least squares, min_{x >= 0} || A^T x - b ||, by the
// Lawson-Hanson active-set method.
//
// The matrix is stored in the transposed layout used by the EM M-step:
// A is m x n, x has length m and the residual lives in R^n. The same active-set
// driver also runs on the normal-equations form (G = A A^T, c = A b), which the
// Tobit M-step builds without materializing A.

#include <Eigen/Cholesky>
#include <Eigen/Dense>
#include <Eigen/QR>

#include <algorithm>
#include <cmath>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "censcorr/error.hpp"

namespace censcorr {

using Eigen::Index;

struct NnlsProblem {
    Eigen::MatrixXd a;  // m x n
    Eigen::VectorXd b;  // n

    Index num_variables() const { return a.rows(); }

    void validate() const {
        if (a.rows() < 1 || a.cols() < 1) {
            throw InvalidArgument("nnls: matrix must be at least 1x1");
        }
        if (a.cols() != b.size()) {
            throw DimensionMismatch("nnls: A has " + std::to_string(a.cols()) +
                                    " columns but b has length " + std::to_string(b.size()));
        }
        if (!a.allFinite() || !b.allFinite()) {
            throw InvalidArgument("nnls: non-finite entry in A or b");
        }
    }
};

// Normal-equations form: objective x^T G x - 2 c^T x + ||b||^2.
struct NnlsGramProblem {
    Eigen::MatrixXd gram;       // m x m, A A^T
    Eigen::VectorXd c;          // m, A b
    double b_squared_norm = 0;  // ||b||^2, only shifts the reported residual
    double b_inf_norm = 0;      // ||b||_inf, only used for the default tolerance

    Index num_variables() const { return gram.rows(); }

    void validate() const {
        if (gram.rows() < 1 || gram.rows() != gram.cols() || gram.rows() != c.size()) {
            throw DimensionMismatch("nnls: Gram matrix must be square and match c");
        }
        if (!gram.allFinite() || !c.allFinite()) {
            throw InvalidArgument("nnls: non-finite entry in Gram matrix or c");
        }
    }
};

struct NnlsOptions {
    // Stationarity tolerance on the gradient A (A^T x - b). Non-positive means
    // the default 1e-10 * (1 + ||b||_inf).
    double tol = 0.0;
    // Cap on outer (variable-entering) iterations. Non-positive means 3 m.
    int max_iterations = 0;
    // Feasible starting point; its support seeds the passive set.
    std::optional<Eigen::VectorXd> warm_start;
    // Called after every outer iteration with (iteration, ||A^T x - b||^2).
    std::function<void(int, double)> on_iteration;
};

struct NnlsSolution {
    Eigen::VectorXd x;
    double residual_norm = 0.0;
    int iterations = 0;
    double kkt_violation = 0.0;
};

class NnlsFailure : public Error {
public:
    NnlsFailure(const std::string& what, NnlsSolution best)
        : Error(what), best_(std::move(best)) {}
    const char* kind() const noexcept override { return "nnls_failure"; }
    const NnlsSolution& best() const noexcept { return best_; }

private:
    NnlsSolution best_;
};

namespace detail {

inline double kkt_from_gradient(const Eigen::VectorXd& x, const Eigen::VectorXd& g) {
    double worst = 0.0;
    for (Index i = 0; i < x.size(); ++i) {
        const double v = x[i] > 0.0 ? std::abs(g[i]) : std::max(0.0, -g[i]);
        worst = std::max(worst, v);
    }
    return worst;
}

// Least squares over the columns of E = A^T, one Householder QR per passive set.
class DesignBackend {
public:
    explicit DesignBackend(const NnlsProblem& p) : e_(p.a.transpose()), b_(p.b) {}

    Index size() const { return e_.cols(); }

    void gradient(const Eigen::VectorXd& x, Eigen::VectorXd& g) const { g = e_.transpose() * (e_ * x - b_); }

    double objective(const Eigen::VectorXd& x) const { return (e_ * x - b_).squaredNorm(); }
    double objective(const Eigen::VectorXd& x, const Eigen::VectorXd&) const { return objective(x); }

    void solve_passive(const std::vector<Index>& passive, Eigen::VectorXd& z) const {
        z.setZero(size());
        if (passive.empty()) return;
        Eigen::MatrixXd sub(e_.rows(), static_cast<Index>(passive.size()));
        for (std::size_t k = 0; k < passive.size(); ++k) sub.col(k) = e_.col(passive[k]);
        const Eigen::VectorXd zp = sub.colPivHouseholderQr().solve(b_);
        for (std::size_t k = 0; k < passive.size(); ++k) z[passive[k]] = zp[k];
    }

private:
    Eigen::MatrixXd e_;
    Eigen::VectorXd b_;
};

// Cholesky of the passive block of G per passive set.
class GramBackend {
public:
    explicit GramBackend(const NnlsGramProblem& p) : p_(p) {}

    Index size() const { return p_.gram.rows(); }

    void gradient(const Eigen::VectorXd& x, Eigen::VectorXd& g) const {
        g.noalias() = p_.gram * x;
        g -= p_.c;
    }

    double objective(const Eigen::VectorXd& x) const {
        return std::max(0.0, x.dot(p_.gram * x) - 2.0 * p_.c.dot(x) + p_.b_squared_norm);
    }

    // G x = g + c, so ||Ex - b||^2 = x.g - c.x + ||b||^2
    double objective(const Eigen::VectorXd& x, const Eigen::VectorXd& g) const {
        return std::max(0.0, x.dot(g) - p_.c.dot(x) + p_.b_squared_norm);
    }

    void solve_passive(const std::vector<Index>& passive, Eigen::VectorXd& z) const {
        z.setZero(size());
        if (passive.empty()) return;
        const auto k = static_cast<Index>(passive.size());
        sub_.resize(k, k);
        rhs_.resize(k);
        for (Index s = 0; s < k; ++s) {
            rhs_[s] = p_.c[passive[s]];
            for (Index r = 0; r < k; ++r) sub_(r, s) = p_.gram(passive[r], passive[s]);
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
    const NnlsGramProblem& p_;
    // scratch reused across passive-set solves
    mutable Eigen::MatrixXd sub_;
    mutable Eigen::VectorXd rhs_;
    mutable Eigen::LLT<Eigen::MatrixXd> llt_;
};

template <class Backend>
NnlsSolution active_set_solve(const Backend& be, double tol, int max_iterations,
                              const NnlsOptions& opts) {
    const Index m = be.size();
    Eigen::VectorXd x = Eigen::VectorXd::Zero(m);
    std::vector<char> passive(static_cast<std::size_t>(m), 0);
    std::vector<Index> pidx;
    pidx.reserve(static_cast<std::size_t>(m));
    Eigen::VectorXd z(m);

    auto collect = [&] {
        pidx.clear();
        for (Index j = 0; j < m; ++j)
            if (passive[static_cast<std::size_t>(j)]) pidx.push_back(j);
    };

    auto finish = [&](int iterations, const Eigen::VectorXd& g) {
        NnlsSolution s;
        s.x = x;
        s.residual_norm = std::sqrt(be.objective(x, g));
        s.iterations = iterations;
        s.kkt_violation = kkt_from_gradient(x, g);
        return s;
    };

    // Inner loop: move from the feasible x towards the unconstrained optimum on
    // the passive set, dropping variables that hit zero. Returns false when the
    // freshly entered variable is rejected outright (numerical degeneracy).
    auto inner = [&](std::optional<Index> entered) {
        bool first = true;
        for (;;) {
            collect();
            be.solve_passive(pidx, z);
            if (first && entered && z[*entered] <= 0.0) {
                passive[static_cast<std::size_t>(*entered)] = 0;
                return false;
            }
            first = false;
            bool feasible = true;
            for (Index j : pidx) feasible = feasible && z[j] > 0.0;
            if (feasible) {
                x = z;
                return true;
            }
            double alpha = 1.0;
            Index blocking = -1;
            for (Index j : pidx) {
                if (z[j] <= 0.0) {
                    const double step = x[j] / (x[j] - z[j]);
                    if (step < alpha || blocking < 0) {
                        alpha = step;
                        blocking = j;
                    }
                }
            }
            x += alpha * (z - x);
            for (Index j : pidx) {
                if (j == blocking || x[j] <= 0.0) {
                    x[j] = 0.0;
                    passive[static_cast<std::size_t>(j)] = 0;
                }
            }
        }
    };

    if (opts.warm_start) {
        if (opts.warm_start->size() != m) {
            throw DimensionMismatch("nnls: warm start has wrong length");
        }
        for (Index j = 0; j < m; ++j) {
            const double v = (*opts.warm_start)[j];
            if (v > 0.0 && std::isfinite(v)) {
                x[j] = v;
                passive[static_cast<std::size_t>(j)] = 1;
            }
        }
        inner(std::nullopt);
    }

    std::vector<char> rejected(static_cast<std::size_t>(m), 0);
    int iterations = 0;
    Eigen::VectorXd g(m);
    for (;;) {
        be.gradient(x, g);
        Index enter = -1;
        double best = tol;
        for (Index j = 0; j < m; ++j) {
            const auto ju = static_cast<std::size_t>(j);
            if (passive[ju] || rejected[ju]) continue;
            // strict comparison keeps the smallest index on ties
            if (-g[j] > best) {
                best = -g[j];
                enter = j;
            }
        }
        if (enter < 0) break;
        if (iterations >= max_iterations) {
            NnlsSolution s = finish(iterations, g);
            throw NnlsFailure("nnls: iteration cap of " + std::to_string(max_iterations) +
                                  " reached with KKT violation " + std::to_string(s.kkt_violation),
                              std::move(s));
        }
        ++iterations;
        passive[static_cast<std::size_t>(enter)] = 1;
        if (!inner(enter)) {
            rejected[static_cast<std::size_t>(enter)] = 1;
            continue;
        }
        std::fill(rejected.begin(), rejected.end(), 0);
        if (opts.on_iteration) opts.on_iteration(iterations, be.objective(x));
    }
    return finish(iterations, g);
}

inline int resolve_cap(const NnlsOptions& opts, Index m) {
    return opts.max_iterations > 0 ? opts.max_iterations : static_cast<int>(3 * m);
}

inline double resolve_tol(const NnlsOptions& opts, double b_inf) {
    return opts.tol > 0.0 ? opts.tol : 1e-10 * (1.0 + b_inf);
}

}  // namespace detail

// max over x_i = 0 of (-g_i)_+ and over x_i > 0 of |g_i|, g = A (A^T x - b).
inline double kkt_violation(const NnlsProblem& problem, const Eigen::VectorXd& x) {
    problem.validate();
    if (x.size() != problem.num_variables()) {
        throw DimensionMismatch("kkt_violation: x has length " + std::to_string(x.size()) +
                                ", expected " + std::to_string(problem.num_variables()));
    }
    if ((x.array() < 0.0).any()) {
        throw InvalidArgument("kkt_violation: x must be nonnegative");
    }
    const Eigen::VectorXd g = problem.a * (problem.a.transpose() * x - problem.b);
    return detail::kkt_from_gradient(x, g);
}

inline double nnls_objective(const NnlsProblem& problem, const Eigen::VectorXd& x) {
    return (problem.a.transpose() * x - problem.b).squaredNorm();
}

inline NnlsSolution solve_nnls(const NnlsProblem& problem, const NnlsOptions& opts = {}) {
    problem.validate();
    const double b_inf = problem.b.size() ? problem.b.lpNorm<Eigen::Infinity>() : 0.0;
    detail::DesignBackend be(problem);
    return detail::active_set_solve(be, detail::resolve_tol(opts, b_inf),
                                    detail::resolve_cap(opts, problem.num_variables()), opts);
}

inline NnlsSolution solve_nnls(const NnlsGramProblem& problem, const NnlsOptions& opts = {}) {
    problem.validate();
    detail::GramBackend be(problem);
    return detail::active_set_solve(be, detail::resolve_tol(opts, problem.b_inf_norm),
                                    detail::resolve_cap(opts, problem.num_variables()), opts);
}

}  // namespace censcorr
