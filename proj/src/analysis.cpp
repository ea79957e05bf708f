#include "grazing/analysis.hpp"

#include "grazing/errors.hpp"
#include "grazing/geometry.hpp"
#include "grazing/parallel.hpp"
#include "grazing/quadrature.hpp"
#include "grazing/random.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <iomanip>
#include <limits>
#include <numbers>
#include <ostream>

namespace grazing {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr int kPhiNodes = 16;

void check_gamma(double gamma, double floor_delta) {
    if (!(floor_delta > 0.0)) throw DomainError("j_gamma_hat: floor_delta must be positive");
    if (!(gamma > -3.0 && gamma <= 0.0)) throw DomainError("j_gamma_hat: gamma outside (-3, 0]");
}

// sum_j max(|v - p_j|, floor)^gamma over a cloud, skipping index `skip`.
double gamma_sum(const Vec3& v, std::span<const Vec3> cloud, std::size_t skip, double gamma, double floor_delta) {
    double s = 0.0;
    const double f2 = floor_delta * floor_delta;
    for (std::size_t j = 0; j < cloud.size(); ++j) {
        if (j == skip) continue;
        const double r2 = std::max(norm2(v - cloud[j]), f2);
        s += gamma == -1.0 ? 1.0 / std::sqrt(r2) : (gamma == -2.0 ? 1.0 / r2 : std::pow(r2, 0.5 * gamma));
    }
    return s;
}

struct QuadError : NumericalError {
    using NumericalError::NumericalError;
};

double value_or_throw(const quad::Result& r, const char* what) {
    if (!r.converged) throw QuadError(std::string(what) + ": quadrature did not converge");
    return r.value;
}

double finite_scale(double a, double b) {
    double s = 0.0;
    if (std::isfinite(a)) s = std::max(s, a);
    if (std::isfinite(b)) s = std::max(s, b);
    return s > 0.0 ? s : 1.0;
}

// phi-integral of c(v, v_*, z, phi) by the periodic trapezoid rule (exact:
// c is a first-degree trigonometric polynomial in phi).
Vec3 c_phi_mean_integral(const AngularKernel& ang, const VelocityKernel& vel, const Vec3& v, const Vec3& vstar,
                         double z) {
    Vec3 acc;
    const double h = 2.0 * kPi / kPhiNodes;
    for (int m = 0; m < kPhiNodes; ++m) acc += deflection_c(vel, ang, v, vstar, z, m * h);
    return h * acc;
}

// Closed form of the same phi-integral, -pi (1 - cos theta) (v - v_*). The
// trapezoid sum carries rounding of order 1e-16 theta from the Gamma terms,
// which swamps the theta^2 signal deep in the grazing tail of a half-line
// integral.
Vec3 c_phi_mean_closed(const AngularKernel& ang, const VelocityKernel& vel, const Vec3& v, const Vec3& vstar,
                       double z) {
    const Vec3 rel = v - vstar;
    if (rel == Vec3{}) return {};
    const double s = std::sin(0.5 * mark_angle(vel, ang, norm(rel), z));
    return (-2.0 * kPi * s * s) * rel;
}

// Integral over [0, k] of a smooth function of z whose variation is
// concentrated near z ~ scale: split at geometric breakpoints.
std::array<double, 3> integrate_vector(const std::function<Vec3(double)>& f, double k, double scale) {
    std::vector<double> br{0.0};
    double b = std::min(k, 1e-2 * scale);
    while (b < k) {
        br.push_back(b);
        b *= 10.0;
    }
    br.push_back(k);
    std::array<double, 3> out{0, 0, 0};
    double err = 0.0, mag = 0.0;
    for (std::size_t p = 0; p + 1 < br.size(); ++p) {
        for (int c = 0; c < 3; ++c) {
            const auto r = quad::integrate([&](double z) { return f(z)[c]; }, br[p], br[p + 1]);
            if (!std::isfinite(r.value)) throw QuadError("c_drift_integral: non-finite value");
            out[c] += r.value;
            err += r.error;
            mag += std::abs(r.value);
        }
    }
    if (err > 1e-8 * mag && err > 1e-300) throw QuadError("c_drift_integral: quadrature did not converge");
    return out;
}

// pi int_0^upper (1 - cos theta) beta(theta) d theta.
double small_angle_drift(const AngularKernel& ang, double upper) {
    if (upper <= 0.0) return 0.0;
    auto h = [&](double t) {
        if (t <= 0.0) return 0.5 * ang.c_beta();
        const double r = std::sin(0.5 * t) / t;
        return 2.0 * ang.c_beta() * r * r;
    };
    return kPi * value_or_throw(quad::integrate_origin_power(h, 0.0, std::min(upper, kPi), 1.0 - ang.nu()),
                                "small_angle_drift");
}

double radical_inverse(std::uint64_t index, std::uint64_t base) {
    double inv = 1.0 / static_cast<double>(base), f = inv, r = 0.0;
    while (index > 0) {
        r += f * static_cast<double>(index % base);
        index /= base;
        f *= inv;
    }
    return r;
}

constexpr std::array<std::uint64_t, 13> kPrimes{2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41};

Vec3 ball_point(double u1, double u2, double u3, double radius) {
    const double r = radius * std::cbrt(u1);
    const double ct = 2.0 * u2 - 1.0;
    const double st = std::sqrt(std::max(0.0, 1.0 - ct * ct));
    const double ph = 2.0 * kPi * u3;
    return {r * st * std::cos(ph), r * st * std::sin(ph), r * ct};
}

Vec3 unit_vector(double u2, double u3) { return ball_point(1.0, u2, u3, 1.0); }

struct Tuple {
    Vec3 v, vs, w, ws;
    double theta_u = 0.5;
};

std::vector<Tuple> sample_tuples(std::size_t n, std::uint64_t seed) {
    rng::Substream shift_stream(seed, rng::Tag::verification, 0);
    std::array<double, kPrimes.size()> shift{};
    for (auto& s : shift) s = shift_stream.uniform();
    auto coord = [&](std::uint64_t idx, std::size_t dim) {
        const double u = radical_inverse(idx, kPrimes[dim]) + shift[dim];
        return u >= 1.0 ? u - 1.0 : u;
    };
    std::vector<Tuple> out;
    for (std::size_t i = 0; i < n; ++i) {
        const std::uint64_t idx = i + 1;
        Tuple t;
        t.v = ball_point(coord(idx, 0), coord(idx, 1), coord(idx, 2), 10.0);
        t.vs = ball_point(coord(idx, 3), coord(idx, 4), coord(idx, 5), 10.0);
        t.w = ball_point(coord(idx, 6), coord(idx, 7), coord(idx, 8), 10.0);
        t.ws = ball_point(coord(idx, 9), coord(idx, 10), coord(idx, 11), 10.0);
        t.theta_u = coord(idx, 12);
        out.push_back(t);
    }
    // Near-coincident pairs probe the singular regime of Phi and Psi.
    const std::size_t n_adv = std::max<std::size_t>(2, n / 10);
    rng::Substream adv(seed, rng::Tag::verification, 1);
    for (double delta : {1e-6, 1e-3}) {
        for (std::size_t i = 0; i < n_adv; ++i) {
            Tuple t;
            t.v = ball_point(adv.uniform(), adv.uniform(), adv.uniform(), 10.0);
            t.vs = t.v + delta * unit_vector(adv.uniform(), adv.uniform());
            t.w = t.v + ball_point(adv.uniform(), adv.uniform(), adv.uniform(), 1.0);
            t.ws = t.w + delta * unit_vector(adv.uniform(), adv.uniform());
            t.theta_u = adv.uniform();
            out.push_back(t);
        }
    }
    return out;
}

}  // namespace

// ---------------------------------------------------------------------------
// J_gamma

double default_floor_delta(std::span<const Vec3> a, std::span<const Vec3> b) {
    double best = kInf;
    auto scan = [&](std::span<const Vec3> p, std::span<const Vec3> q, bool same) {
        for (std::size_t i = 0; i < p.size(); ++i) {
            for (std::size_t j = same ? i + 1 : 0; j < q.size(); ++j) {
                const double r2 = norm2(p[i] - q[j]);
                if (r2 > 0.0) best = std::min(best, r2);
            }
        }
    };
    scan(a, a, true);
    scan(b, b, true);
    scan(a, b, false);
    if (!std::isfinite(best)) return 1e-3;
    return std::min(0.5 * std::sqrt(best), 1e-3);
}

JGammaEstimate j_gamma_hat(std::span<const Vec3> velocities, double gamma, double floor_delta) {
    check_gamma(gamma, floor_delta);
    JGammaEstimate est{1.0, floor_delta, "particles"};
    if (gamma == 0.0 || velocities.empty()) return est;
    const std::size_t n = velocities.size();
    std::vector<double> vals(n);
    parallel_for(n, [&](std::size_t lo, std::size_t hi) {
        for (std::size_t i = lo; i < hi; ++i) vals[i] = gamma_sum(velocities[i], velocities, i, gamma, floor_delta);
    });
    est.value = *std::max_element(vals.begin(), vals.end()) / static_cast<double>(n);
    return est;
}

JGammaEstimate j_gamma_hat(std::span<const Vec3> a, std::span<const Vec3> b, double gamma, double floor_delta) {
    check_gamma(gamma, floor_delta);
    JGammaEstimate est{2.0, floor_delta, "particles of both ensembles"};
    if (gamma == 0.0 || a.empty() || b.empty()) return est;
    const std::size_t na = a.size(), nb = b.size();
    std::vector<double> vals(na + nb);
    constexpr std::size_t none = std::numeric_limits<std::size_t>::max();
    parallel_for(na + nb, [&](std::size_t lo, std::size_t hi) {
        for (std::size_t q = lo; q < hi; ++q) {
            const bool in_a = q < na;
            const Vec3& v = in_a ? a[q] : b[q - na];
            vals[q] = gamma_sum(v, a, in_a ? q : none, gamma, floor_delta) / static_cast<double>(na) +
                      gamma_sum(v, b, in_a ? none : q - na, gamma, floor_delta) / static_cast<double>(nb);
        }
    });
    est.value = *std::max_element(vals.begin(), vals.end());
    return est;
}

// ---------------------------------------------------------------------------
// Clocks

LpClock::LpClock(double f0_norm, double c) : a0_(0.0), c_(c), t_star_(0.0) {
    if (!(f0_norm >= 0.0)) throw DomainError("lp_clock: f0_norm must be >= 0");
    if (!(c > 0.0)) throw DomainError("lp_clock: C must be positive");
    a0_ = std::atan(f0_norm);
    t_star_ = (0.5 * kPi - a0_) / c;
}

double LpClock::bound(double t) const {
    if (t >= t_star_) return kInf;
    return std::tan(a0_ + c_ * t);
}

LpClock lp_clock(double f0_norm, double c) { return LpClock(f0_norm, c); }

double gronwall_bound(double a, std::span<const double> times, std::span<const double> rates, double t) {
    if (!(a >= 0.0)) throw DomainError("gronwall_bound: a must be >= 0");
    if (times.size() != rates.size() || times.empty()) throw DomainError("gronwall_bound: bad samples");
    for (double r : rates)
        if (!(r >= 0.0)) throw DomainError("gronwall_bound: negative rate sample");
    if (t < times.front() || t > times.back()) throw DomainError("gronwall_bound: t outside sampled range");
    double integral = 0.0;
    for (std::size_t i = 1; i < times.size() && times[i - 1] < t; ++i) {
        const double hi = std::min(times[i], t);
        const double h = times[i] - times[i - 1];
        const double r_hi = h > 0.0 ? rates[i - 1] + (rates[i] - rates[i - 1]) * (hi - times[i - 1]) / h : rates[i];
        integral += 0.5 * (rates[i - 1] + r_hi) * (hi - times[i - 1]);
    }
    return a * std::exp(integral);
}

// ---------------------------------------------------------------------------
// Single-sample integrals

double c_square_integral(const AngularKernel& ang, const VelocityKernel& vel, const Vec3& v, const Vec3& vstar) {
    const double x = norm(v - vstar);
    if (x == 0.0) return 0.0;
    auto f = [&](double z) {
        return quad::periodic_trapezoid([&](double ph) { return norm2(deflection_c(vel, ang, v, vstar, z, ph)); },
                                        kPhiNodes);
    };
    return value_or_throw(quad::integrate_half_line(f, 2.0 / ang.nu(), finite_scale(vel.phi(x), 0.0)),
                          "c_square_integral");
}

Vec3 c_drift_integral(const AngularKernel& ang, const VelocityKernel& vel, const Vec3& v, const Vec3& vstar,
                      double k) {
    const double x = norm(v - vstar);
    if (x == 0.0 || k == 0.0) return {};
    auto f = [&](double z) { return c_phi_mean_integral(ang, vel, v, vstar, z); };
    const auto r = integrate_vector(f, k, finite_scale(vel.phi(x), 0.0));
    return {r[0], r[1], r[2]};
}

double c_drift_abs_integral(const AngularKernel& ang, const VelocityKernel& vel, const Vec3& v, const Vec3& vstar) {
    const double x = norm(v - vstar);
    if (x == 0.0) return 0.0;
    auto f = [&](double z) { return norm(c_phi_mean_closed(ang, vel, v, vstar, z)); };
    return value_or_throw(quad::integrate_half_line(f, 2.0 / ang.nu(), finite_scale(vel.phi(x), 0.0)),
                          "c_drift_abs_integral");
}

double coupled_c_l2(const AngularKernel& ang, const VelocityKernel& vel, const Vec3& v, const Vec3& vstar,
                    const Vec3& w, const Vec3& wstar) {
    const double shift = phi0(v - vstar, w - wstar);
    auto f = [&](double z) {
        return quad::periodic_trapezoid(
            [&](double ph) {
                return norm2(deflection_c(vel, ang, v, vstar, z, ph) -
                             deflection_c(vel, ang, w, wstar, z, wrap_angle(ph + shift)));
            },
            kPhiNodes);
    };
    const double scale = finite_scale(vel.phi(norm(v - vstar)), vel.phi(norm(w - wstar)));
    return value_or_throw(quad::integrate_half_line(f, 2.0 / ang.nu(), scale), "coupled_c_l2");
}

double drift_difference_l1(const AngularKernel& ang, const VelocityKernel& vel, const Vec3& v, const Vec3& vstar,
                           const Vec3& w, const Vec3& wstar) {
    auto f = [&](double z) {
        return norm(c_phi_mean_closed(ang, vel, v, vstar, z) - c_phi_mean_closed(ang, vel, w, wstar, z));
    };
    const double scale = finite_scale(vel.phi(norm(v - vstar)), vel.phi(norm(w - wstar)));
    return value_or_throw(quad::integrate_half_line(f, 2.0 / ang.nu(), scale), "drift_difference_l1");
}

double g_square_integral(const AngularKernel& ang, double x) {
    if (!(x > 0.0)) throw DomainError("g_square_integral: x must be positive");
    auto f = [&](double z) {
        const double g = ang.inverse_hazard(z / x);
        return g * g;
    };
    return value_or_throw(quad::integrate_half_line(f, 2.0 / ang.nu(), x), "g_square_integral");
}

double quadratic_test_defect(const Vec3& v, const Vec3& vstar, double theta, int i, int j) {
    auto q = [&](const Vec3& u) { return u[i] * u[j]; };
    const double val = quad::periodic_trapezoid(
        [&](double ph) {
            const Collision c = post_collision(v, vstar, theta, ph);
            return q(c.v_post) + q(c.vstar_post) - q(v) - q(vstar);
        },
        kPhiNodes);
    return std::abs(val);
}

// ---------------------------------------------------------------------------
// Report

bool InequalityCheck::finite() const { return std::isfinite(c_hat) && samples > 0; }

bool VerificationReport::all_identities_pass() const {
    return std::all_of(identities.begin(), identities.end(), [](const IdentityCheck& c) { return c.pass(); });
}

VerificationReport verify_estimates(const AngularKernel& ang, const VelocityKernel& vel, std::size_t n_samples,
                                    std::uint64_t seed, const VerifyOptions& options) {
    VerificationReport rep;
    rep.seed = seed;
    rep.cutoffs = options.cutoffs;
    rep.constants = kappa_constants(ang, vel, options.a3_pairs, seed);
    const std::vector<Tuple> tuples = sample_tuples(n_samples, seed);
    rep.samples = tuples.size();
    const double kappa0 = rep.constants.kappa0;
    const double kappa1 = rep.constants.kappa1;

    enum Slot { kSq, kAbs, kG2, kDriftK, kCoupled, kDiff, kTail, kLip, kRem, kQuad, kSlots };
    const char* names[kSlots] = {"c_square_identity",       "drift_abs_identity",      "g_square_identity",
                                 "drift_cutoff_identity",   "coupled_c_l2",            "drift_difference_l1",
                                 "cutoff_tail_l2",          "h0k_lipschitz",           "h0k_remainder",
                                 "quadratic_test_function"};
    const bool is_identity[kSlots] = {true, true, true, true, false, false, false, false, false, false};

    struct SampleOut {
        std::array<double, kSlots> worst{};
        std::array<int, kSlots> failures{};
        std::array<int, kSlots> counted{};
        std::vector<RatioRow> rows;
    };
    std::vector<SampleOut> per(tuples.size());

    parallel_for(tuples.size(), [&](std::size_t lo, std::size_t hi) {
        for (std::size_t s = lo; s < hi; ++s) {
            const Tuple& t = tuples[s];
            SampleOut& o = per[s];
            const double x = norm(t.v - t.vs);
            const double y = norm(t.w - t.ws);
            const double px = vel.phi(x);
            auto push = [&](Slot slot, double lhs, double rhs, double q, const std::string& label) {
                o.worst[slot] = std::max(o.worst[slot], q);
                ++o.counted[slot];
                if (options.keep_rows) o.rows.push_back({s, label, lhs, rhs, q});
            };
            // Identities record the relative error, inequalities the ratio.
            auto record = [&](Slot slot, double lhs, double rhs, const std::string& label) {
                if (is_identity[slot]) {
                    push(slot, lhs, rhs, rhs != 0.0 ? std::abs(lhs - rhs) / std::abs(rhs) : std::abs(lhs), label);
                } else if (rhs > 0.0) {
                    push(slot, lhs, rhs, lhs / rhs, label);
                }
            };
            auto guarded = [&](Slot slot, auto&& body) {
                try {
                    body();
                } catch (const NumericalError&) {
                    ++o.failures[slot];
                }
            };
            if (x == 0.0 || y == 0.0) continue;

            guarded(kSq, [&] { record(kSq, c_square_integral(ang, vel, t.v, t.vs), kappa0 * x * x * px, names[kSq]); });
            guarded(kAbs, [&] { record(kAbs, c_drift_abs_integral(ang, vel, t.v, t.vs), kappa0 * x * px, names[kAbs]); });
            guarded(kG2, [&] { record(kG2, g_square_integral(ang, x), kappa1 * x, names[kG2]); });
            guarded(kCoupled, [&] {
                const double rhs = (norm2(t.v - t.w) + norm2(t.vs - t.ws)) * (vel.psi(x) + vel.psi(y));
                record(kCoupled, coupled_c_l2(ang, vel, t.v, t.vs, t.w, t.ws), rhs, names[kCoupled]);
            });
            guarded(kDiff, [&] {
                const double rhs = (norm(t.v - t.w) + norm(t.vs - t.ws)) * (vel.psi(x) + vel.psi(y));
                record(kDiff, drift_difference_l1(ang, vel, t.v, t.vs, t.w, t.ws), rhs, names[kDiff]);
            });
            for (double k : options.cutoffs) {
                const std::string tag = "_k=" + std::to_string(k);
                guarded(kDriftK, [&] {
                    const Vec3 lhs = c_drift_integral(ang, vel, t.v, t.vs, k);
                    const Vec3 rhs = -h0k(ang, vel, k, x) * (t.v - t.vs);
                    const double ref = norm(rhs);
                    push(kDriftK, norm(lhs), ref, ref > 0.0 ? norm(lhs - rhs) / ref : norm(lhs), names[kDriftK] + tag);
                });
                const double g_cut = std::isinf(px) ? kPi : ang.inverse_hazard(k / px);
                guarded(kTail, [&] {
                    const double lhs = x * x * px * small_angle_drift(ang, g_cut);
                    record(kTail, lhs, x * x * px * eps0k(ang, vel, k, x), names[kTail] + tag);
                });
                guarded(kLip, [&] {
                    const double lhs = std::abs(x * h0k(ang, vel, k, x) - y * h0k(ang, vel, k, y));
                    record(kLip, lhs, std::abs(x - y) * (vel.psi(x) + vel.psi(y)), names[kLip] + tag);
                });
                guarded(kRem, [&] {
                    // kappa0 x Phi - x h0k = x Phi pi int_0^G (1 - cos) beta, evaluated without cancellation.
                    const double lhs = x * px * small_angle_drift(ang, g_cut);
                    record(kRem, lhs, x * px * eps0k(ang, vel, k, x), names[kRem] + tag);
                });
            }
            guarded(kQuad, [&] {
                const double theta = kPi * std::max(t.theta_u, 1e-3);
                for (int i = 0; i < 3; ++i) {
                    for (int j = i; j < 3; ++j) {
                        const double hess_norm = i == j ? 2.0 : 1.0;
                        record(kQuad, quadratic_test_defect(t.v, t.vs, theta, i, j),
                               hess_norm * theta * theta * x * x,
                               std::string(names[kQuad]) + "_" + std::to_string(i) + std::to_string(j));
                    }
                }
            });
        }
    });

    for (int slot = 0; slot < kSlots; ++slot) {
        double worst = 0.0;
        std::size_t fails = 0, counted = 0;
        for (const auto& o : per) {
            worst = std::max(worst, o.worst[slot]);
            fails += o.failures[slot];
            counted += o.counted[slot];
        }
        if (is_identity[slot]) {
            IdentityCheck c;
            c.name = names[slot];
            c.max_rel_error = worst;
            c.samples = counted;
            c.quadrature_failures = fails;
            rep.identities.push_back(c);
        } else {
            InequalityCheck c;
            c.name = names[slot];
            c.c_hat = worst;
            c.samples = counted;
            c.quadrature_failures = fails;
            rep.inequalities.push_back(c);
        }
    }
    if (options.keep_rows) {
        for (auto& o : per)
            for (auto& r : o.rows) rep.rows.push_back(std::move(r));
    }
    return rep;
}

void write_report(std::ostream& os, const VerificationReport& r) {
    os << std::setprecision(15);
    os << "seed: " << r.seed << '\n';
    os << "samples: " << r.samples << '\n';
    os << "cutoffs:";
    for (double k : r.cutoffs) os << ' ' << k;
    os << '\n';
    os << "kappa0: " << r.constants.kappa0 << '\n';
    os << "kappa1: " << r.constants.kappa1 << '\n';
    os << "kappa2_hat: " << r.constants.kappa2 << '\n';
    os << "kappa3: " << r.constants.kappa3 << '\n';
    os << "j_gamma_normalization: 1/N with the self term excluded\n";
    for (const auto& c : r.identities) {
        os << c.name << ".max_rel_error: " << c.max_rel_error << '\n';
        os << c.name << ".samples: " << c.samples << '\n';
        os << c.name << ".quadrature_failures: " << c.quadrature_failures << '\n';
        os << c.name << ".status: " << (c.pass() ? "pass" : "fail") << '\n';
    }
    for (const auto& c : r.inequalities) {
        os << c.name << ".c_hat: " << c.c_hat << '\n';
        os << c.name << ".samples: " << c.samples << '\n';
        os << c.name << ".quadrature_failures: " << c.quadrature_failures << '\n';
    }
    os << "identities: " << (r.all_identities_pass() ? "pass" : "fail") << '\n';
}

void write_ratio_csv(std::ostream& os, const VerificationReport& r) {
    os << "sample,estimate,lhs,rhs,ratio\n" << std::setprecision(17);
    for (const auto& row : r.rows)
        os << row.sample << ',' << row.estimate << ',' << row.lhs << ',' << row.rhs << ',' << row.ratio << '\n';
}

}  // namespace grazing
