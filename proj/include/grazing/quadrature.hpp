#pragma once

#include <functional>

namespace grazing::quad {

struct Result {
    double value = 0.0;
    double error = 0.0;  // absolute error estimate
    bool converged = false;
};

using Integrand = std::function<double(double)>;

inline constexpr double kDefaultRelTol = 1e-9;

/// Globally adaptive 15-point Gauss-Kronrod on a finite interval.
Result integrate(const Integrand& f, double a, double b, double rel_tol = kDefaultRelTol);

/// Integral over [a, b], 0 <= a < b, of h(theta) * theta^exponent with h
/// bounded near the origin and exponent > -1. The substitution
/// theta = b * t^p with p = 2 / (1 + exponent) makes the transformed
/// integrand linear in t, and passing h separately keeps it free of
/// overflow even when theta underflows. h is evaluated at theta = 0 when the
/// power of t underflows.
Result integrate_origin_power(const Integrand& h, double a, double b, double exponent,
                              double rel_tol = kDefaultRelTol);

/// Integral over [0, inf) of an integrand bounded near 0 and decaying like
/// z^-decay (decay > 1) at infinity. Integrates in s = log z around `scale`
/// (where the integrand changes regime) and adds the two power-law end
/// corrections.
Result integrate_half_line(const Integrand& f, double decay, double scale = 1.0,
                           double rel_tol = kDefaultRelTol);

/// Periodic trapezoid rule over [0, 2 pi) with n nodes. Exact for
/// trigonometric polynomials of degree < n.
double periodic_trapezoid(const Integrand& f, int n);

}  // namespace grazing::quad
