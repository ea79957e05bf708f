#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <variant>

namespace grazing {

/// Singular angular cross-section beta(theta) = c * theta^(-1-nu) on (0, pi],
/// together with its tail mass H(theta) = int_theta^pi beta and the inverse
/// G = H^-1 that maps a uniform Poisson mark z >= 0 to a deviation angle.
class AngularKernel {
public:
    /// Throws DomainError unless 0 < nu < 2 and c_beta > 0.
    explicit AngularKernel(double nu, double c_beta = 1.0);

    double nu() const noexcept { return nu_; }
    double c_beta() const noexcept { return c_; }

    /// beta(theta); DomainError outside (0, pi].
    double beta(double theta) const;
    /// Tail mass H(theta) = (c / nu) (theta^-nu - pi^-nu); exactly 0 at pi.
    double hazard(double theta) const;
    /// G(z), strictly decreasing from G(0) = pi; G(+inf) = 0.
    double inverse_hazard(double z) const;

private:
    double nu_;
    double c_;
    double pi_pow_;  // pi^-nu
};

struct PowerLaw {
    double gamma;  // Phi(x) = x^gamma, gamma in (-3, 0]
};
struct Truncated {
    double alpha;
    double cap;  // Phi(x) = min(x^alpha, cap)
};
struct Shifted {
    double epsilon;
    double alpha;  // Phi(x) = (epsilon + x)^alpha, alpha < 0
};

using VelocityVariant = std::variant<PowerLaw, Truncated, Shifted>;

/// Relative-speed factor Phi and a dominating function Psi satisfying the
/// four-term inequality
///   min(x,y)^2 (Phi(x)-Phi(y))^2 / (Phi(x)+Phi(y)) + (x-y)^2 (Phi(x)+Phi(y))
///     + min(x,y) |x-y| |Phi(x)-Phi(y)|  <=  (x-y)^2 (Psi(x)+Psi(y))
/// with Psi(x) <= kappa3 x^gamma_eff.
class VelocityKernel {
public:
    /// Validates parameters; throws DomainError.
    explicit VelocityKernel(VelocityVariant variant);

    const VelocityVariant& variant() const noexcept { return variant_; }
    /// Exponent under which Psi dominates: gamma for PowerLaw, 0 otherwise.
    double gamma_eff() const noexcept { return gamma_eff_; }
    double kappa3() const noexcept { return kappa3_; }

    /// Phi(x) for x >= 0. PowerLaw with gamma < 0 gives +inf at x = 0.
    double phi(double x) const;
    /// dPhi/dx where it exists (one-sided at the truncation kink).
    double phi_derivative(double x) const;
    /// Psi(x) for x > 0; DomainError at x = 0 when gamma_eff < 0.
    double psi(double x) const;

    std::string describe() const;

private:
    VelocityVariant variant_;
    double gamma_eff_ = 0.0;
    double kappa3_ = 1.0;
};

/// Left-hand side of the four-term inequality above.
double dominance_lhs(const VelocityKernel& vel, double x, double y);

struct KernelConstants {
    double kappa0;  // pi int_0^pi (1 - cos theta) beta
    double kappa1;  // int_0^pi theta^2 beta
    double kappa2;  // empirical sup of the G-difference ratio
    double kappa3;  // dominator constant
};

/// int_lower^pi (1 - cos theta) beta(theta) d theta by quadrature.
double drift_mass(const AngularKernel& ang, double lower = 0.0);
/// int_0^upper theta^2 beta(theta) d theta by quadrature.
double angular_second_moment(const AngularKernel& ang, double upper);

struct ScanA3Result {
    double kappa2_hat = 0.0;  // max ratio observed
    double arg_x = 0.0;
    double arg_y = 0.0;
    std::size_t pairs = 0;
    std::size_t failed = 0;  // quadrature non-convergence
};

/// Ratio int_0^inf (G(z/x) - G(z/y))^2 dz / ((x-y)^2 / (x+y)) over
/// `n_pairs` uniform random pairs in (0, xmax]^2.
ScanA3Result scan_a3(const AngularKernel& ang, std::size_t n_pairs, std::uint64_t seed,
                     double xmax = 100.0);

/// int_0^inf (G(z/x) - G(z/y))^2 dz by quadrature in z.
double g_difference_l2(const AngularKernel& ang, double x, double y);

struct ScanA4Result {
    double kappa3_hat = 0.0;    // smallest C with LHS <= C (x-y)^2 (x^g + y^g) on the sample
    double max_psi_ratio = 0.0;  // max LHS / ((x-y)^2 (Psi(x)+Psi(y)))
    std::size_t violations = 0;  // samples with ratio > 1 + 1e-12, or Phi > Psi
    std::size_t pairs = 0;
};

ScanA4Result scan_a4(const VelocityKernel& vel, std::size_t n_pairs, std::uint64_t seed,
                     double xmax = 100.0);

/// kappa0 and kappa1 by quadrature (rel. 1e-9), kappa2 by scan_a3,
/// kappa3 from the dominator construction. NumericalError on failure.
KernelConstants kappa_constants(const AngularKernel& ang, const VelocityKernel& vel,
                                std::size_t a3_pairs = 10000, std::uint64_t a3_seed = 1);

/// Compensated drift coefficient h_0^k(x) = pi int_0^k [1 - cos G(z/Phi(x))] dz,
/// evaluated as pi Phi(x) int_{G(k/Phi(x))}^pi (1 - cos theta) beta.
double h0k(const AngularKernel& ang, const VelocityKernel& vel, double k, double x);

/// Cutoff remainder eps_0^k(x) = int_0^{G(k/Phi(x))} theta^2 beta.
double eps0k(const AngularKernel& ang, const VelocityKernel& vel, double k, double x);

/// Inverse-power potential r^-s: returns (gamma, nu) = ((s-5)/(s-1), 2/(s-1)).
std::pair<double, double> map_inverse_power(double s);

}  // namespace grazing
