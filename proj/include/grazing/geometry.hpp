#pragma once

#include "grazing/kernel.hpp"
#include "grazing/vec3.hpp"

namespace grazing {

/// I(X), J(X): together with X they form an orthogonal basis with
/// |I| = |J| = |X|. The field is right-handed everywhere (J = X x I / |X|)
/// and I is odd, I(-X) = -I(X); consequently J is even.
struct Frame {
    Vec3 e1;  // I(X)
    Vec3 e2;  // J(X)
};

/// Deterministic frame of a nonzero vector. DomainError for X = 0.
Frame frame(const Vec3& x);

/// Gamma(X, phi) = cos(phi) I(X) + sin(phi) J(X); zero for X = 0.
Vec3 gamma_vec(const Vec3& x, double phi);

struct Collision {
    Vec3 v_post;
    Vec3 vstar_post;
    Vec3 shift;  // a = v' - v = -(v'_* - v_*)
};

/// Spherical parameterization of an elastic collision at deviation angle
/// theta in [0, pi] and azimuth phi. DomainError for theta outside [0, pi].
Collision post_collision(const Vec3& v, const Vec3& vstar, double theta, double phi);

/// The shift a(v, v_*, theta, phi) alone.
Vec3 collision_shift(const Vec3& v, const Vec3& vstar, double theta, double phi);

/// Deviation angle G(z / Phi(|v - v_*|)) attached to a Poisson mark z.
double mark_angle(const VelocityKernel& vel, const AngularKernel& ang, double relative_speed, double z);

/// c(v, v_*, z, phi) = a(v, v_*, G(z / Phi(|v - v_*|)), phi); zero for v = v_*.
/// NumericalError when v - v_* is not finite.
Vec3 deflection_c(const VelocityKernel& vel, const AngularKernel& ang, const Vec3& v, const Vec3& vstar,
                  double z, double phi);

/// Azimuth offset in [0, 2 pi) aligning the rotating frame of Y with that of X:
/// |Gamma(X, phi) - Gamma(Y, phi + phi0(X, Y))| <= 3 |X - Y| for every phi.
/// Zero when X or Y vanishes.
double phi0(const Vec3& x, const Vec3& y);

/// phi + offset reduced to [0, 2 pi).
double wrap_angle(double phi);

}  // namespace grazing
