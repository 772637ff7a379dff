#pragma once

// Reference computations used by the unit and acceptance tests. None of these
// share code with the library beyond plain data types.

#include <Eigen/Dense>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/multiprecision/cpp_bin_float.hpp>

#include <cmath>
#include <limits>
#include <random>
#include <vector>

#include "censcorr/tobit.hpp"

namespace oracle {

using Eigen::Index;
using Eigen::MatrixXd;
using Eigen::VectorXd;
using hp = boost::multiprecision::cpp_bin_float_50;

inline hp hp_pdf(const hp& x) {
    return exp(-x * x / 2) / sqrt(2 * boost::math::constants::pi<hp>());
}

inline hp hp_cdf(const hp& x) { return erfc(-x / sqrt(hp(2))) / 2; }

inline double imr_hp(double x) {
    const hp v(x);
    return static_cast<double>(hp_pdf(v) / hp_cdf(v));
}

inline double cdf_hp(double x) { return static_cast<double>(hp_cdf(hp(x))); }

// Adaptive Gauss-Kronrod integral of y^k times the truncated density over
// (min(theta, mu) - 12 sd, theta).
inline double truncated_moment(int k, double mu, double beta, double theta) {
    const double sd = 1.0 / std::sqrt(beta);
    const double lo = std::min(theta, mu) - 12.0 * sd;
    // normalizer by quadrature as well, so the oracle never touches Phi
    auto density = [&](double y) { return std::exp(-0.5 * beta * (y - mu) * (y - mu)); };
    using GK = boost::math::quadrature::gauss_kronrod<double, 61>;
    const double z = GK::integrate(density, lo, theta, 15, 1e-13);
    const double m = GK::integrate([&](double y) { return std::pow(y, k) * density(y); }, lo, theta, 15, 1e-13);
    return m / z;
}

inline double integrate(const std::function<double(double)>& f, double lo, double hi) {
    using GK = boost::math::quadrature::gauss_kronrod<double, 61>;
    return GK::integrate(f, lo, hi, 15, 1e-12);
}

// min_{x >= 0} ||A^T x - b||^2 by trying every support set.
inline double nnls_enumerate(const MatrixXd& a, const VectorXd& b, VectorXd* best_x = nullptr) {
    const Index m = a.rows();
    const MatrixXd e = a.transpose();
    double best = b.squaredNorm();
    if (best_x) *best_x = VectorXd::Zero(m);
    for (unsigned mask = 1; mask < (1u << m); ++mask) {
        std::vector<Index> s;
        for (Index j = 0; j < m; ++j)
            if (mask & (1u << j)) s.push_back(j);
        MatrixXd sub(e.rows(), static_cast<Index>(s.size()));
        for (std::size_t k = 0; k < s.size(); ++k) sub.col(static_cast<Index>(k)) = e.col(s[k]);
        const VectorXd z = sub.completeOrthogonalDecomposition().solve(b);
        if ((z.array() < -1e-14).any()) continue;
        VectorXd x = VectorXd::Zero(m);
        for (std::size_t k = 0; k < s.size(); ++k) x[s[k]] = std::max(0.0, z[static_cast<Index>(k)]);
        const double obj = (e * x - b).squaredNorm();
        if (obj < best) {
            best = obj;
            if (best_x) *best_x = x;
        }
    }
    return best;
}

// argmax_w of -beta/2 ||X^T w - ybar||^2 - sum_h (lp_h w+^2 + ln_h w-^2)/2 by
// enumerating the sign of every coordinate (+, -, 0): on each orthant face the
// objective is an unconstrained quadratic.
inline VectorXd qmax_enumerate(const MatrixXd& x, const VectorXd& ybar, double beta, const VectorXd& lp,
                               const VectorXd& ln) {
    const Index d = x.rows();
    const MatrixXd s = x * x.transpose();
    const VectorXd xy = x * ybar;
    auto value = [&](const VectorXd& w) {
        double pen = 0.0;
        for (Index h = 0; h < d; ++h) {
            const double p = std::max(w[h], 0.0), n = std::max(-w[h], 0.0);
            pen += lp[h] * p * p + ln[h] * n * n;
        }
        return -0.5 * beta * (x.transpose() * w - ybar).squaredNorm() - 0.5 * pen;
    };
    VectorXd best_w = VectorXd::Zero(d);
    double best = value(best_w);
    long patterns = 1;
    for (Index h = 0; h < d; ++h) patterns *= 3;
    for (long code = 0; code < patterns; ++code) {
        std::vector<int> sign(static_cast<std::size_t>(d));
        long c = code;
        std::vector<Index> free;
        for (Index h = 0; h < d; ++h) {
            sign[static_cast<std::size_t>(h)] = static_cast<int>(c % 3) - 1;  // -1, 0, +1
            c /= 3;
            if (sign[static_cast<std::size_t>(h)] != 0) free.push_back(h);
        }
        if (free.empty()) continue;
        const auto k = static_cast<Index>(free.size());
        MatrixXd h(k, k);
        VectorXd g(k);
        for (Index r = 0; r < k; ++r) {
            g[r] = beta * xy[free[r]];
            for (Index q = 0; q < k; ++q) h(r, q) = beta * s(free[r], free[q]);
            const int sg = sign[static_cast<std::size_t>(free[r])];
            h(r, r) += sg > 0 ? lp[free[r]] : ln[free[r]];
        }
        const VectorXd z = h.ldlt().solve(g);
        VectorXd w = VectorXd::Zero(d);
        bool ok = true;
        for (Index r = 0; r < k; ++r) {
            const int sg = sign[static_cast<std::size_t>(free[r])];
            if (z[r] * sg <= 0.0) ok = false;
            w[free[r]] = z[r];
        }
        if (!ok) continue;
        const double v = value(w);
        if (v > best) {
            best = v;
            best_w = w;
        }
    }
    return best_w;
}

// Censored linear-model instance: features ~ N(0,1), y = <w*, x> + noise,
// the lowest `ratio` fraction censored.
struct Instance {
    censcorr::RegressionData data;
    VectorXd w_true;
};

inline Instance random_instance(std::mt19937_64& rng, Index d, Index n, double ratio, double noise = 0.5) {
    std::normal_distribution<double> normal;
    Instance inst;
    inst.w_true = VectorXd::NullaryExpr(d, [&] { return normal(rng); });
    MatrixXd x = MatrixXd::NullaryExpr(d, n, [&] { return normal(rng); });
    VectorXd y = x.transpose() * inst.w_true;
    for (Index i = 0; i < n; ++i) y[i] += noise * normal(rng);
    std::vector<double> sorted(y.data(), y.data() + n);
    std::sort(sorted.begin(), sorted.end());
    const auto k = std::clamp<Index>(static_cast<Index>(std::llround(ratio * static_cast<double>(n))), 0, n - 1);
    const double theta = k == 0 ? sorted[0] - 1.0 : 0.5 * (sorted[static_cast<std::size_t>(k - 1)] + sorted[static_cast<std::size_t>(k)]);
    std::vector<Index> vis, hid;
    for (Index i = 0; i < n; ++i) (y[i] >= theta ? vis : hid).push_back(i);
    auto& dt = inst.data;
    dt.theta = theta;
    dt.x_visible.resize(d, static_cast<Index>(vis.size()));
    dt.y_visible.resize(static_cast<Index>(vis.size()));
    dt.x_hidden.resize(d, static_cast<Index>(hid.size()));
    for (std::size_t j = 0; j < vis.size(); ++j) {
        dt.x_visible.col(static_cast<Index>(j)) = x.col(vis[j]);
        dt.y_visible[static_cast<Index>(j)] = y[vis[j]];
    }
    for (std::size_t j = 0; j < hid.size(); ++j) dt.x_hidden.col(static_cast<Index>(j)) = x.col(hid[j]);
    return inst;
}

}  // namespace oracle
