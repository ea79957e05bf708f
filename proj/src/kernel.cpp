#include "grazing/kernel.hpp"

#include "grazing/errors.hpp"
#include "grazing/quadrature.hpp"
#include "grazing/random.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>
#include <vector>

namespace grazing {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kInf = std::numeric_limits<double>::infinity();

template <class... Ts>
struct overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

std::string fmt(double v) {
    std::ostringstream os;
    os.precision(15);
    os << v;
    return os.str();
}

// 1 - cos(theta) without cancellation near 0.
inline double one_minus_cos(double theta) {
    const double s = std::sin(0.5 * theta);
    return 2.0 * s * s;
}

quad::Result checked(quad::Result r, const char* what) {
    if (!r.converged) {
        throw NumericalError(std::string(what) + ": quadrature did not converge, error estimate " +
                             fmt(r.error) + " for value " + fmt(r.value));
    }
    return r;
}

// Smallest constant C such that dominance_lhs(x, y) <= 2 C (x-y)^2 on a log
// grid, including the diagonal limit x = y.
double scan_constant_dominator(const VelocityKernel& vel, double kink) {
    std::vector<double> grid;
    for (int i = -120; i <= 120; ++i) grid.push_back(std::pow(10.0, i / 20.0));
    if (kink > 0.0 && std::isfinite(kink)) {
        for (double f : {1.0 - 1e-6, 1.0, 1.0 + 1e-6}) grid.push_back(kink * f);
    }
    std::sort(grid.begin(), grid.end());
    double c = 0.0;
    for (std::size_t i = 0; i < grid.size(); ++i) {
        const double x = grid[i];
        const double p = vel.phi(x);
        const double dp = vel.phi_derivative(x);
        // (x-y)^-2 * lhs as y -> x
        const double diag = (p > 0.0 ? x * x * dp * dp / (2.0 * p) : 0.0) + 2.0 * p + x * std::abs(dp);
        c = std::max(c, 0.5 * diag);
        for (std::size_t j = 0; j < i; ++j) {
            const double y = grid[j];
            const double d = x - y;
            c = std::max(c, dominance_lhs(vel, x, y) / (2.0 * d * d));
        }
    }
    return c;
}

}  // namespace

// ---------------------------------------------------------------------------
// AngularKernel

AngularKernel::AngularKernel(double nu, double c_beta) : nu_(nu), c_(c_beta) {
    if (!(nu > 0.0 && nu < 2.0)) throw DomainError("AngularKernel: nu must lie in (0, 2), got " + fmt(nu));
    if (!(c_beta > 0.0) || !std::isfinite(c_beta))
        throw DomainError("AngularKernel: c_beta must be positive, got " + fmt(c_beta));
    pi_pow_ = std::pow(kPi, -nu_);
}

double AngularKernel::beta(double theta) const {
    if (!(theta > 0.0 && theta <= kPi)) throw DomainError("beta: theta outside (0, pi]: " + fmt(theta));
    return c_ * std::pow(theta, -1.0 - nu_);
}

double AngularKernel::hazard(double theta) const {
    if (!(theta > 0.0 && theta <= kPi)) throw DomainError("hazard: theta outside (0, pi]: " + fmt(theta));
    // (c/nu) pi^-nu ((theta/pi)^-nu - 1), accurate near theta = pi
    return (c_ / nu_) * pi_pow_ * std::expm1(-nu_ * std::log(theta / kPi));
}

double AngularKernel::inverse_hazard(double z) const {
    if (!(z >= 0.0)) throw DomainError("inverse_hazard: z must be >= 0, got " + fmt(z));
    if (z == kInf) return 0.0;
    const double w = nu_ * z / (c_ * pi_pow_);
    return kPi * std::exp(-std::log1p(w) / nu_);
}

// ---------------------------------------------------------------------------
// VelocityKernel

VelocityKernel::VelocityKernel(VelocityVariant variant) : variant_(variant) {
    std::visit(overloaded{
                   [&](const PowerLaw& p) {
                       if (!(p.gamma > -3.0 && p.gamma <= 0.0))
                           throw DomainError("PowerLaw: gamma must lie in (-3, 0], got " + fmt(p.gamma));
                       gamma_eff_ = p.gamma;
                       kappa3_ = 1.0 + std::abs(p.gamma) + p.gamma * p.gamma;
                   },
                   [&](const Truncated& t) {
                       if (!(t.cap > 0.0) || !std::isfinite(t.cap))
                           throw DomainError("Truncated: cap A must be positive, got " + fmt(t.cap));
                       if (!std::isfinite(t.alpha)) throw DomainError("Truncated: alpha must be finite");
                       gamma_eff_ = 0.0;
                   },
                   [&](const Shifted& s) {
                       if (!(s.epsilon > 0.0) || !std::isfinite(s.epsilon))
                           throw DomainError("Shifted: epsilon must be positive, got " + fmt(s.epsilon));
                       if (!(s.alpha < 0.0)) throw DomainError("Shifted: alpha must be negative, got " + fmt(s.alpha));
                       gamma_eff_ = 0.0;
                   },
               },
               variant_);
    if (!std::holds_alternative<PowerLaw>(variant_)) {
        double kink = 0.0;
        if (const auto* t = std::get_if<Truncated>(&variant_); t && t->alpha != 0.0)
            kink = std::pow(t->cap, 1.0 / t->alpha);
        kappa3_ = scan_constant_dominator(*this, kink);
    }
}

double VelocityKernel::phi(double x) const {
    if (!(x >= 0.0)) throw DomainError("phi: relative speed must be >= 0, got " + fmt(x));
    return std::visit(overloaded{
                          [&](const PowerLaw& p) { return p.gamma == 0.0 ? 1.0 : std::pow(x, p.gamma); },
                          [&](const Truncated& t) { return std::min(std::pow(x, t.alpha), t.cap); },
                          [&](const Shifted& s) { return std::pow(s.epsilon + x, s.alpha); },
                      },
                      variant_);
}

double VelocityKernel::phi_derivative(double x) const {
    return std::visit(overloaded{
                          [&](const PowerLaw& p) {
                              return p.gamma == 0.0 ? 0.0 : p.gamma * std::pow(x, p.gamma - 1.0);
                          },
                          [&](const Truncated& t) {
                              return std::pow(x, t.alpha) < t.cap ? t.alpha * std::pow(x, t.alpha - 1.0) : 0.0;
                          },
                          [&](const Shifted& s) { return s.alpha * std::pow(s.epsilon + x, s.alpha - 1.0); },
                      },
                      variant_);
}

double VelocityKernel::psi(double x) const {
    if (gamma_eff_ < 0.0 && !(x > 0.0))
        throw DomainError("psi: relative speed must be > 0 for gamma < 0, got " + fmt(x));
    if (!(x >= 0.0)) throw DomainError("psi: relative speed must be >= 0, got " + fmt(x));
    if (gamma_eff_ == 0.0) return kappa3_;
    return kappa3_ * std::pow(x, gamma_eff_);
}

std::string VelocityKernel::describe() const {
    return std::visit(overloaded{
                          [](const PowerLaw& p) { return "power_law(gamma=" + fmt(p.gamma) + ")"; },
                          [](const Truncated& t) {
                              return "truncated(alpha=" + fmt(t.alpha) + ", A=" + fmt(t.cap) + ")";
                          },
                          [](const Shifted& s) {
                              return "shifted(epsilon=" + fmt(s.epsilon) + ", alpha=" + fmt(s.alpha) + ")";
                          },
                      },
                      variant_);
}

double dominance_lhs(const VelocityKernel& vel, double x, double y) {
    const double px = vel.phi(x);
    const double py = vel.phi(y);
    const double m = std::min(x, y);
    const double d = x - y;
    const double dp = px - py;
    const double sum = px + py;
    const double t1 = sum > 0.0 ? m * m * dp * dp / sum : 0.0;
    return t1 + d * d * sum + m * std::abs(d) * std::abs(dp);
}

// ---------------------------------------------------------------------------
// Constants and remainders

double drift_mass(const AngularKernel& ang, double lower) {
    if (lower >= kPi) return 0.0;
    // (1 - cos theta) beta = c theta^(1-nu) * (1 - cos theta) / theta^2
    auto h = [&](double theta) {
        if (!(theta > 0.0)) return 0.5 * ang.c_beta();
        const double r = std::sin(0.5 * theta) / theta;
        return 2.0 * ang.c_beta() * r * r;
    };
    return checked(quad::integrate_origin_power(h, lower, kPi, 1.0 - ang.nu()), "drift_mass").value;
}

double angular_second_moment(const AngularKernel& ang, double upper) {
    if (upper <= 0.0) return 0.0;
    auto h = [&](double) { return ang.c_beta(); };
    return checked(quad::integrate_origin_power(h, 0.0, std::min(upper, kPi), 1.0 - ang.nu()),
                   "angular_second_moment")
        .value;
}

double g_difference_l2(const AngularKernel& ang, double x, double y) {
    if (!(x > 0.0 && y > 0.0)) throw DomainError("g_difference_l2: x and y must be positive");
    if (x == y) return 0.0;
    auto f = [&](double z) {
        const double d = ang.inverse_hazard(z / x) - ang.inverse_hazard(z / y);
        return d * d;
    };
    return checked(quad::integrate_half_line(f, 2.0 / ang.nu(), std::max(x, y)), "g_difference_l2").value;
}

ScanA3Result scan_a3(const AngularKernel& ang, std::size_t n_pairs, std::uint64_t seed, double xmax) {
    rng::Substream rs(seed, rng::Tag::scan, 3);
    ScanA3Result out;
    for (std::size_t i = 0; i < n_pairs; ++i) {
        const double x = xmax * rs.uniform_pos();
        const double y = xmax * rs.uniform_pos();
        if (x == y) continue;
        double l2;
        try {
            l2 = g_difference_l2(ang, x, y);
        } catch (const NumericalError&) {
            ++out.failed;
            continue;
        }
        const double ratio = l2 * (x + y) / ((x - y) * (x - y));
        ++out.pairs;
        if (ratio > out.kappa2_hat) {
            out.kappa2_hat = ratio;
            out.arg_x = x;
            out.arg_y = y;
        }
    }
    return out;
}

ScanA4Result scan_a4(const VelocityKernel& vel, std::size_t n_pairs, std::uint64_t seed, double xmax) {
    rng::Substream rs(seed, rng::Tag::scan, 4);
    ScanA4Result out;
    const double g = vel.gamma_eff();
    for (std::size_t i = 0; i < n_pairs; ++i) {
        const double x = xmax * rs.uniform_pos();
        const double y = xmax * rs.uniform_pos();
        if (x == y) continue;
        ++out.pairs;
        const double d2 = (x - y) * (x - y);
        const double lhs = dominance_lhs(vel, x, y);
        out.kappa3_hat = std::max(out.kappa3_hat, lhs / (d2 * (std::pow(x, g) + std::pow(y, g))));
        const double ratio = lhs / (d2 * (vel.psi(x) + vel.psi(y)));
        out.max_psi_ratio = std::max(out.max_psi_ratio, ratio);
        if (ratio > 1.0 + 1e-12 || vel.phi(x) > vel.psi(x) * (1.0 + 1e-12)) ++out.violations;
    }
    return out;
}

KernelConstants kappa_constants(const AngularKernel& ang, const VelocityKernel& vel, std::size_t a3_pairs,
                                std::uint64_t a3_seed) {
    KernelConstants k{};
    k.kappa0 = kPi * drift_mass(ang, 0.0);
    k.kappa1 = angular_second_moment(ang, kPi);
    const ScanA3Result a3 = scan_a3(ang, a3_pairs, a3_seed);
    if (a3.pairs == 0) throw NumericalError("kappa_constants: A3 scan produced no converged pair");
    k.kappa2 = a3.kappa2_hat;
    k.kappa3 = vel.kappa3();
    return k;
}

double h0k(const AngularKernel& ang, const VelocityKernel& vel, double k, double x) {
    if (!(k >= 0.0)) throw DomainError("h0k: cutoff k must be >= 0");
    const double p = vel.phi(x);
    if (k == 0.0 || p == 0.0) return 0.0;
    // Phi = inf: every mark maps to theta = pi, so 1 - cos = 2 on all of [0, k].
    if (std::isinf(p)) return 2.0 * kPi * k;
    const double lower = ang.inverse_hazard(k / p);
    if (lower >= 0.5 * kPi) {
        // Marks stay in the wide-angle range, where the z-form is smooth and
        // the theta-interval [lower, pi] would be too short to resolve.
        auto f = [&](double z) { return one_minus_cos(ang.inverse_hazard(z / p)); };
        return kPi * checked(quad::integrate(f, 0.0, k), "h0k").value;
    }
    return kPi * p * drift_mass(ang, lower);
}

double eps0k(const AngularKernel& ang, const VelocityKernel& vel, double k, double x) {
    if (!(k >= 0.0)) throw DomainError("eps0k: cutoff k must be >= 0");
    const double p = vel.phi(x);
    const double upper =
        (k == 0.0 || std::isinf(p)) ? kPi : (p == 0.0 ? 0.0 : ang.inverse_hazard(k / p));
    return angular_second_moment(ang, upper);
}

std::pair<double, double> map_inverse_power(double s) {
    if (!(s > 2.0) || !std::isfinite(s)) throw DomainError("map_inverse_power: s must exceed 2, got " + fmt(s));
    return {(s - 5.0) / (s - 1.0), 2.0 / (s - 1.0)};
}

}  // namespace grazing
