#include "grazing/geometry.hpp"

#include "grazing/errors.hpp"

#include <cmath>
#include <numbers>

namespace grazing {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

}  // namespace

Frame frame(const Vec3& x) {
    const double n = norm(x);
    if (!(n > 0.0)) throw DomainError("frame: degenerate input X = 0");
    // Canonical representative: first nonzero component positive.
    const double s = x.x != 0.0 ? (x.x > 0.0 ? 1.0 : -1.0)
                     : x.y != 0.0 ? (x.y > 0.0 ? 1.0 : -1.0)
                                  : (x.z > 0.0 ? 1.0 : -1.0);
    const Vec3 u = (s / n) * x;
    const double ax = std::abs(u.x), ay = std::abs(u.y), az = std::abs(u.z);
    const int k = (ax >= ay && ax >= az) ? 0 : (ay >= az ? 1 : 2);
    const Vec3 helper = k == 0 ? Vec3{0, 1, 0} : (k == 1 ? Vec3{0, 0, 1} : Vec3{1, 0, 0});
    Vec3 i = helper - dot(helper, u) * u;
    i *= 1.0 / norm(i);
    const Vec3 e1 = (s * n) * i;
    const Vec3 e2 = (1.0 / n) * cross(x, e1);
    return {e1, e2};
}

Vec3 gamma_vec(const Vec3& x, double phi) {
    if (x == Vec3{}) return {};
    const Frame f = frame(x);
    return std::cos(phi) * f.e1 + std::sin(phi) * f.e2;
}

Vec3 collision_shift(const Vec3& v, const Vec3& vstar, double theta, double phi) {
    if (!(theta >= 0.0 && theta <= std::numbers::pi))
        throw DomainError("post_collision: theta outside [0, pi]");
    const Vec3 rel = v - vstar;
    if (rel == Vec3{}) return {};
    const double half_sin = std::sin(0.5 * theta);
    const double one_minus_cos = 2.0 * half_sin * half_sin;
    return (-0.5 * one_minus_cos) * rel + (0.5 * std::sin(theta)) * gamma_vec(rel, phi);
}

Collision post_collision(const Vec3& v, const Vec3& vstar, double theta, double phi) {
    const Vec3 a = collision_shift(v, vstar, theta, phi);
    return {v + a, vstar - a, a};
}

double mark_angle(const VelocityKernel& vel, const AngularKernel& ang, double relative_speed, double z) {
    const double p = vel.phi(relative_speed);
    if (p == 0.0) return 0.0;
    return ang.inverse_hazard(z / p);  // p = inf gives z / p = 0, theta = pi
}

Vec3 deflection_c(const VelocityKernel& vel, const AngularKernel& ang, const Vec3& v, const Vec3& vstar,
                  double z, double phi) {
    const Vec3 rel = v - vstar;
    if (rel == Vec3{}) return {};
    if (!is_finite(rel)) throw NumericalError("deflection_c: non-finite relative velocity");
    return collision_shift(v, vstar, mark_angle(vel, ang, norm(rel), z), phi);
}

double phi0(const Vec3& x, const Vec3& y) {
    if (x == Vec3{} || y == Vec3{}) return 0.0;
    const Frame fx = frame(x);
    const Frame fy = frame(y);
    // Maximizes the phi-averaged alignment <Gamma(X, phi), Gamma(Y, phi + psi)>.
    const double a = dot(fx.e1, fy.e1) + dot(fx.e2, fy.e2);
    const double b = dot(fx.e1, fy.e2) - dot(fx.e2, fy.e1);
    const double psi = std::atan2(b, a);
    return psi < 0.0 ? psi + kTwoPi : psi;
}

double wrap_angle(double phi) {
    if (phi >= kTwoPi) phi -= kTwoPi;
    if (phi < 0.0) phi += kTwoPi;
    return phi;
}

}  // namespace grazing
