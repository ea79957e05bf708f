#include "grazing/quadrature.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <queue>

namespace grazing::quad {

namespace {

constexpr std::size_t kMaxIntervals = 4000;

struct Piece {
    double a, b, value, error, l1;
    bool operator<(const Piece& o) const { return error < o.error; }
};

Piece rule(const Integrand& f, double a, double b) {
    double error = 0.0, l1 = 0.0;
    const double value = boost::math::quadrature::gauss_kronrod<double, 15>::integrate(f, a, b, 0, 0.0, &error, &l1);
    return {a, b, value, error, l1};
}

}  // namespace

// Globally adaptive bisection: always split the interval with the largest
// error estimate until the summed error meets the tolerance on the summed L1.
Result integrate(const Integrand& f, double a, double b, double rel_tol) {
    if (a == b) return {0.0, 0.0, true};
    std::priority_queue<Piece> heap;
    const Piece first = rule(f, a, b);
    double value = first.value, error = first.error, l1 = first.l1;
    heap.push(first);
    auto done = [&] { return error <= rel_tol * l1 || error <= 1e-300; };
    while (!done() && heap.size() < kMaxIntervals && std::isfinite(value)) {
        const Piece worst = heap.top();
        const double mid = 0.5 * (worst.a + worst.b);
        if (!(mid > std::min(worst.a, worst.b) && mid < std::max(worst.a, worst.b))) break;
        heap.pop();
        const Piece left = rule(f, worst.a, mid);
        const Piece right = rule(f, mid, worst.b);
        value += left.value + right.value - worst.value;
        error += left.error + right.error - worst.error;
        l1 += left.l1 + right.l1 - worst.l1;
        heap.push(left);
        heap.push(right);
    }
    // Re-sum to shed the drift of the running updates.
    value = error = l1 = 0.0;
    while (!heap.empty()) {
        value += heap.top().value;
        error += heap.top().error;
        l1 += heap.top().l1;
        heap.pop();
    }
    return {value, error, std::isfinite(value) && done()};
}

Result integrate_origin_power(const Integrand& h, double a, double b, double exponent,
                              double rel_tol) {
    const double p = 2.0 / (1.0 + exponent);
    const double t0 = a > 0.0 ? std::pow(a / b, 1.0 / p) : 0.0;
    // theta^e d theta = b^(1+e) p t^(p(1+e)-1) dt = b^(1+e) p t dt
    const double scale = std::pow(b, 1.0 + exponent) * p;
    auto g = [&](double t) { return t > 0.0 ? scale * t * h(b * std::pow(t, p)) : 0.0; };
    return integrate(g, t0, 1.0, rel_tol);
}

Result integrate_half_line(const Integrand& f, double decay, double scale, double rel_tol) {
    // Lower end: f bounded, so the mass below z_lo is ~ f(z_lo) z_lo.
    // Upper end: f ~ z^-decay, so the mass above z_hi is f(z_hi) z_hi / (decay - 1).
    const double log_scale = std::log(scale);
    const double s_lo = log_scale - 46.0;
    const double s_hi = std::min(log_scale + 15.0 * std::numbers::ln10 / std::max(decay - 1.0, 1e-3), 700.0);
    auto g = [&](double s) {
        const double z = std::exp(s);
        return f(z) * z;
    };
    Result body = integrate(g, s_lo, s_hi, rel_tol);
    const double z_lo = std::exp(s_lo);
    const double z_hi = std::exp(s_hi);
    const double lower = f(z_lo) * z_lo;
    const double upper = f(z_hi) * z_hi / (decay - 1.0);
    body.value += lower + upper;
    body.error += 0.5 * (std::abs(lower) + std::abs(upper));
    return body;
}

double periodic_trapezoid(const Integrand& f, int n) {
    const double h = 2.0 * std::numbers::pi / n;
    double sum = 0.0;
    for (int i = 0; i < n; ++i) sum += f(i * h);
    return sum * h;
}

}  // namespace grazing::quad
