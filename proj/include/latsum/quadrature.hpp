#pragma once

#include <cmath>
#include <string>

#include "latsum/errors.hpp"
#include "latsum/grid.hpp"

namespace latsum {

// Exponential-sum approximation of the Newton kernel,
//   1/r ~= sum_q w_q exp(-tau_q^2 r^2)  for a_min <= r <= a_max,
// from a trapezoidal (sinc-type) rule with 2M+1 uniform nodes s_j on a
// substitution axis. The substitution t = log(1 + e^{sinh s}) maps the
// half-line integral 1/r = (2/sqrt(pi)) \int_0^inf e^{-t^2 r^2} dt onto a
// doubly exponentially decaying integrand, so the uniform rule converges
// exponentially in M and the window [s1, s2] depends only on eps and the
// radius ratio a_min/a_max. C0 widens the window by extra decades
// (working tolerance eps * 10^-C0) and is tuned by calibration.
struct QuadratureRule {
    int M = 0;          // half node count; 2M+1 nodes total
    double C0 = 1.0;    // window-depth factor
    double step = 0.0;  // uniform spacing of the substitution nodes
    Vector nodes;       // substitution points s_j, ascending
    Vector exponents;   // Gaussian exponents tau_q >= 0, ascending
    Vector weights;     // positive weights w_q

    Index node_count() const { return static_cast<Index>(2 * M + 1); }
};

namespace detail {

// Smallest t in (0, inf) with f(t) <= target, for f eventually decreasing.
template <typename F>
double solve_decreasing(F f, double target, double hi) {
    double lo = 1e-3;
    while (f(hi) > target) hi *= 1.5;
    for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (f(mid) <= target)
            hi = mid;
        else
            lo = mid;
    }
    return hi;
}

} // namespace detail

inline QuadratureRule sinc_quadrature(double eps, double a_min, double a_max, int M, double C0) {
    if (M < 1) throw validation_error("quadrature: M must be >= 1, got " + std::to_string(M));
    if (!(eps > 0.0) || !(eps < 1.0))
        throw validation_error("quadrature: eps must lie in (0, 1)");
    if (!(a_min > 0.0) || !(a_min < a_max))
        throw validation_error("quadrature: need 0 < a_min < a_max");

    // The window ends where the integrand has decayed below the working
    // tolerance: like 2 t e^{-t} as s -> -inf and sqrt(t) e^{-t} (relative to
    // the smallest radius) as s -> +inf.
    const double eps_w = eps * std::pow(10.0, -C0);
    const double r0 = a_min / a_max;
    const double t1 =
        detail::solve_decreasing([](double t) { return 2.0 * t * std::exp(-t); }, eps_w, 5.0);
    const double t2 = detail::solve_decreasing(
        [](double t) { return std::sqrt(t) * std::exp(-t); }, eps_w * r0, 5.0);
    const double s1 = -std::log(2.0 * t1);
    const double s2 = 0.5 * std::log(t2 / (r0 * r0));

    QuadratureRule rule;
    rule.M = M;
    rule.C0 = C0;
    const Index count = rule.node_count();
    rule.step = (s2 - s1) / static_cast<double>(count - 1);
    rule.nodes.resize(count);
    rule.exponents.resize(count);
    rule.weights.resize(count);
    const double four_over_sqrt_pi = 4.0 / std::sqrt(M_PI);
    for (Index j = 0; j < count; ++j) {
        const double s = s1 + rule.step * static_cast<double>(j);
        const double sh = std::sinh(s);
        // G = log(1 + e^sh) without overflow; for large sh it is sh itself.
        const double G = sh > 30.0 ? sh : std::log1p(std::exp(sh));
        rule.nodes[j] = s;
        rule.exponents[j] = 2.0 * G / a_max;
        rule.weights[j] = rule.step * four_over_sqrt_pi * std::cosh(s) /
                          (1.0 + std::exp(-std::min(sh, 700.0))) / a_max;
    }
    return rule;
}

// Value of the exponential sum at radius r; approximates 1/r on the rule's
// calibrated interval. Sequential accumulation keeps results bit-stable.
inline double quadrature_value(const QuadratureRule& rule, double r) {
    double sum = 0.0;
    for (Index j = 0; j < rule.node_count(); ++j) {
        const double tr = rule.exponents[j] * r;
        sum += rule.weights[j] * std::exp(-tr * tr);
    }
    return sum;
}

} // namespace latsum
