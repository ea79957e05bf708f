#pragma once

#include "grazing/kernel.hpp"
#include "grazing/vec3.hpp"

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

namespace grazing {

struct JGammaEstimate {
    double value = 0.0;
    double floor_delta = 0.0;
    std::string grid;  // test-point set
};

/// Half the smallest positive pairwise distance over all points, capped at 1e-3.
double default_floor_delta(std::span<const Vec3> a, std::span<const Vec3> b = {});

/// max over particles v of (1/N) sum_{j != v} max(|v - v_j|, floor)^gamma.
/// This bounds the supremum over all velocities from below.
/// gamma = 0 gives exactly 1. DomainError for floor <= 0 or gamma outside (-3, 0].
JGammaEstimate j_gamma_hat(std::span<const Vec3> velocities, double gamma, double floor_delta);

/// Same functional for the sum of the two empirical measures, maximized over
/// the particles of both; gamma = 0 gives exactly 2.
JGammaEstimate j_gamma_hat(std::span<const Vec3> a, std::span<const Vec3> b, double gamma, double floor_delta);

/// Explosion clock for the L^p norm under u' <= C (1 + u^2).
class LpClock {
public:
    LpClock(double f0_norm, double c);
    double t_star() const noexcept { return t_star_; }
    /// tan(arctan(f0_norm) + C t) for 0 <= t < T*, +inf beyond.
    double bound(double t) const;

private:
    double a0_;
    double c_;
    double t_star_;
};

LpClock lp_clock(double f0_norm, double c);

/// a exp(int_0^t v ds) with the integral taken by the trapezoid rule over the
/// samples (times[i], rates[i]) up to t (linear interpolation inside the last
/// interval). DomainError for a < 0, negative rates, or t outside the samples.
double gronwall_bound(double a, std::span<const double> times, std::span<const double> rates, double t);

struct IdentityCheck {
    std::string name;
    double max_rel_error = 0.0;
    double tolerance = 1e-6;
    std::size_t samples = 0;
    std::size_t quadrature_failures = 0;
    bool pass() const { return quadrature_failures == 0 && max_rel_error <= tolerance; }
};

struct InequalityCheck {
    std::string name;
    double c_hat = 0.0;  // max LHS / (RHS without the constant)
    std::size_t samples = 0;
    std::size_t quadrature_failures = 0;
    bool finite() const;
};

struct RatioRow {
    std::size_t sample = 0;
    std::string estimate;
    double lhs = 0.0;
    double rhs = 0.0;
    double ratio = 0.0;
};

struct VerificationReport {
    std::uint64_t seed = 0;
    std::size_t samples = 0;
    std::vector<double> cutoffs;
    KernelConstants constants{};
    std::vector<IdentityCheck> identities;
    std::vector<InequalityCheck> inequalities;
    std::vector<RatioRow> rows;

    bool all_identities_pass() const;
};

struct VerifyOptions {
    std::vector<double> cutoffs{1.0, 10.0, 100.0};
    std::size_t a3_pairs = 2000;
    bool keep_rows = true;
};

/// Checks the exact identities and fits the constants of the estimates on
/// c(v, v_*, z, phi), h_0^k and eps_0^k over `n_samples` low-discrepancy
/// tuples (v, v_*, w, w_*) in the ball of radius 10 plus near-coincident pairs
/// at distances 1e-6 and 1e-3. Also fits the inequality for quadratic test
/// functions phi(v) = v_i v_j.
VerificationReport verify_estimates(const AngularKernel& ang, const VelocityKernel& vel, std::size_t n_samples,
                                    std::uint64_t seed, const VerifyOptions& options = {});

/// Single-sample evaluators, exposed for tests.
/// int_0^inf dz int_0^2pi dphi |c(v, v_*, z, phi)|^2.
double c_square_integral(const AngularKernel& ang, const VelocityKernel& vel, const Vec3& v, const Vec3& vstar);
/// int_0^k dz int_0^2pi dphi c(v, v_*, z, phi) componentwise (k may be +inf).
Vec3 c_drift_integral(const AngularKernel& ang, const VelocityKernel& vel, const Vec3& v, const Vec3& vstar,
                      double k);
/// int_0^inf dz |int_0^2pi dphi c(v, v_*, z, phi)|.
double c_drift_abs_integral(const AngularKernel& ang, const VelocityKernel& vel, const Vec3& v, const Vec3& vstar);
/// Left side of the Tanaka-coupled L2 estimate.
double coupled_c_l2(const AngularKernel& ang, const VelocityKernel& vel, const Vec3& v, const Vec3& vstar,
                    const Vec3& w, const Vec3& wstar);
/// Left side of the uncoupled drift-difference estimate.
double drift_difference_l1(const AngularKernel& ang, const VelocityKernel& vel, const Vec3& v, const Vec3& vstar,
                           const Vec3& w, const Vec3& wstar);
/// int_0^inf G(z/x)^2 dz.
double g_square_integral(const AngularKernel& ang, double x);
/// |int_0^2pi [q(v') + q(v'_*) - q(v) - q(v_*)] dphi| for q(v) = v_i v_j.
double quadratic_test_defect(const Vec3& v, const Vec3& vstar, double theta, int i, int j);

void write_report(std::ostream& os, const VerificationReport& report);
void write_ratio_csv(std::ostream& os, const VerificationReport& report);

}  // namespace grazing
