#pragma once

// Standard normal and upper-truncated normal machinery used by the E-step.
//
// The truncated distribution is N(mu, 1/beta) conditioned on y < theta. All
// moment formulas are expressed through the standardized truncation point
// xi = (theta - mu) * sqrt(beta) and the inverse Mills ratio phi(xi)/Phi(xi).

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "censcorr/error.hpp"

namespace censcorr {

struct TruncParams {
    double mu = 0.0;     // location
    double beta = 1.0;   // precision, 1/variance
    double theta = 0.0;  // upper truncation point

    void validate() const {
        if (!(beta > 0.0) || !std::isfinite(beta)) {
            throw InvalidArgument("truncated normal: precision must be positive and finite, got " +
                                  std::to_string(beta));
        }
        if (!std::isfinite(theta) || !std::isfinite(mu)) {
            throw InvalidArgument("truncated normal: mu and theta must be finite");
        }
    }

    // (theta - mu) * sqrt(beta)
    double standardized_limit() const { return (theta - mu) * std::sqrt(beta); }
};

namespace detail {

inline constexpr double kInvSqrt2Pi = 0.398942280401432677939946059934;  // 1/sqrt(2 pi)
inline constexpr double kLogSqrt2Pi = 0.918938533204672741780329736406;  // log sqrt(2 pi)
inline constexpr double kSqrt2OverPi = 0.797884560802865355879892119869;  // sqrt(2/pi)

// Below this standardized argument the Mills ratio and log-CDF switch to the
// scaled complementary error function.
inline constexpr double kDeepTail = -5.0;

}  // namespace detail

// exp(z^2) * erfc(z) for z >= 0. Large arguments use the Laplace continued
// fraction evaluated with the modified Lentz recurrence.
inline double erfcx(double z) {
    if (z < 3.5) {
        return std::exp(z * z) * std::erfc(z);
    }
    constexpr double tiny = 1e-300;
    double f = z;
    double c = f;
    double d = 0.0;
    for (int k = 1; k < 500; ++k) {
        const double a = 0.5 * k;
        d = z + a * d;
        if (d == 0.0) d = tiny;
        c = z + a / c;
        if (c == 0.0) c = tiny;
        d = 1.0 / d;
        const double delta = c * d;
        f *= delta;
        if (std::abs(delta - 1.0) < 1e-16) break;
    }
    return 1.0 / (std::sqrt(std::numbers::pi) * f);
}

inline double std_normal_pdf(double x) { return detail::kInvSqrt2Pi * std::exp(-0.5 * x * x); }

inline double log_std_normal_pdf(double x) { return -0.5 * x * x - detail::kLogSqrt2Pi; }

// erfc keeps full relative accuracy in the lower tail, so Phi(-8) ~ 6.2e-16
// is returned as a normal double rather than 1 - 1.
inline double std_normal_cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

inline double log_std_normal_cdf(double x) {
    if (x < detail::kDeepTail) {
        const double z = -x / std::numbers::sqrt2;
        return std::log(0.5 * erfcx(z)) - z * z;
    }
    if (x > 0.0) {
        return std::log1p(-0.5 * std::erfc(x / std::numbers::sqrt2));
    }
    return std::log(std_normal_cdf(x));
}

// phi(x) / Phi(x). In the deep lower tail both factors underflow together;
// there the ratio is sqrt(2/pi) / erfcx(-x/sqrt 2), which is exact algebra.
inline double inverse_mills_ratio(double x) {
    if (x < detail::kDeepTail) {
        return detail::kSqrt2OverPi / erfcx(-x / std::numbers::sqrt2);
    }
    return std_normal_pdf(x) / std_normal_cdf(x);
}

// Density of N(mu, 1/beta) restricted to (-inf, theta); zero on [theta, inf).
inline double truncated_density(double y, const TruncParams& p) {
    p.validate();
    if (y >= p.theta) return 0.0;
    const double sb = std::sqrt(p.beta);
    return std::exp(std::log(sb) + log_std_normal_pdf(sb * (y - p.mu)) -
                    log_std_normal_cdf(p.standardized_limit()));
}

// E[y | y < theta]
inline double upper_truncated_mean(const TruncParams& p) {
    p.validate();
    const double mean = p.mu - inverse_mills_ratio(p.standardized_limit()) / std::sqrt(p.beta);
    // rounding can land on the bound when xi is far in the lower tail
    return std::min(mean, std::nextafter(std::min(p.mu, p.theta), -INFINITY));
}

// E[y^2 | y < theta]
inline double upper_truncated_second_moment(const TruncParams& p) {
    p.validate();
    const double xi = p.standardized_limit();
    const double imr = inverse_mills_ratio(xi);
    return (1.0 - xi * imr) / p.beta + p.mu * p.mu - 2.0 * imr * p.mu / std::sqrt(p.beta);
}

// Var[y | y < theta] = (1 - xi*imr - imr^2) / beta. Algebraically equal to
// second moment minus squared mean, without the mu^2 cancellation.
inline double upper_truncated_variance(const TruncParams& p) {
    p.validate();
    const double xi = p.standardized_limit();
    const double imr = inverse_mills_ratio(xi);
    const double scaled = 1.0 - imr * (xi + imr);
    return scaled > 0.0 ? scaled / p.beta : 0.0;
}

}  // namespace censcorr
