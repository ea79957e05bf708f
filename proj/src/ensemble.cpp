#include "grazing/ensemble.hpp"

#include "grazing/errors.hpp"
#include "grazing/geometry.hpp"
#include "grazing/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <numbers>
#include <ostream>
#include <sstream>

namespace grazing {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

template <class... Ts>
struct overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

Vec3 gaussian(rng::Substream& s, const Vec3& mean, double temperature) {
    const double sd = std::sqrt(temperature);
    const double a = s.normal();
    const double b = s.normal();
    const double c = s.normal();
    return mean + sd * Vec3{a, b, c};
}

Vec3 draw_one(const InitialLaw& law, rng::Substream& s, std::size_t i, std::size_t n) {
    return std::visit(
        overloaded{
            [&](const GaussianIso& g) { return gaussian(s, g.mean, g.temperature); },
            [&](const GaussianMixture& m) {
                double total = 0.0;
                for (const auto& c : m.components) total += c.weight;
                double u = s.uniform() * total;
                for (const auto& c : m.components) {
                    if (u < c.weight) return gaussian(s, c.mean, c.temperature);
                    u -= c.weight;
                }
                const auto& last = m.components.back();
                return gaussian(s, last.mean, last.temperature);
            },
            [&](const UniformBall& b) {
                for (;;) {
                    const Vec3 p{2.0 * s.uniform() - 1.0, 2.0 * s.uniform() - 1.0, 2.0 * s.uniform() - 1.0};
                    if (norm2(p) <= 1.0) return b.center + b.radius * p;
                }
            },
            [&](const PointCloud& c) {
                if (c.velocities.size() == n) return c.velocities[i];
                return c.velocities[s.below(c.velocities.size())];
            },
        },
        law);
}

}  // namespace

void validate(const InitialLaw& law) {
    std::visit(overloaded{
                   [](const GaussianIso& g) {
                       if (!(g.temperature >= 0.0) || !is_finite(g.mean))
                           throw DomainError("GaussianIso: temperature must be >= 0 and mean finite");
                   },
                   [](const GaussianMixture& m) {
                       if (m.components.empty()) throw DomainError("GaussianMixture: no components");
                       double total = 0.0;
                       for (const auto& c : m.components) {
                           if (!(c.weight >= 0.0) || !(c.temperature >= 0.0) || !is_finite(c.mean))
                               throw DomainError("GaussianMixture: negative weight or temperature");
                           total += c.weight;
                       }
                       if (!(total > 0.0)) throw DomainError("GaussianMixture: total weight must be positive");
                   },
                   [](const UniformBall& b) {
                       if (!(b.radius >= 0.0) || !is_finite(b.center))
                           throw DomainError("UniformBall: radius must be >= 0");
                   },
                   [](const PointCloud& c) {
                       if (c.velocities.empty()) throw DomainError("PointCloud: empty");
                       for (const auto& v : c.velocities)
                           if (!is_finite(v)) throw DomainError("PointCloud: non-finite velocity");
                   },
               },
               law);
}

Ensemble sample_initial(const InitialLaw& law, std::size_t n, std::uint64_t seed, double k) {
    if (n < 2) throw DomainError("sample_initial: need at least 2 particles");
    if (!(k >= 0.0) || !std::isfinite(k)) throw DomainError("sample_initial: cutoff k must be finite and >= 0");
    validate(law);
    Ensemble ens;
    ens.velocities.resize(n);
    ens.k = k;
    ens.seed = seed;
    for (std::size_t i = 0; i < n; ++i) {
        rng::Substream s(seed, rng::Tag::initial, i);
        ens.velocities[i] = draw_one(law, s, i, n);
    }
    return ens;
}

double max_step(double k) { return k > 0.0 ? 10.0 / (kTwoPi * k) : std::numeric_limits<double>::infinity(); }

void draw_events(rng::Substream& stream, double intensity, double k, std::size_t n, std::size_t self,
                 std::vector<JumpEvent>& out) {
    out.clear();
    if (!(k > 0.0) || !(intensity > 0.0)) return;
    double z = 0.0;
    for (;;) {
        z += stream.exponential() / intensity;
        if (z > k) break;
        JumpEvent e;
        e.z = z;
        e.when = stream.uniform();
        std::uint64_t j = stream.below(n - 1);
        if (j >= self) ++j;
        e.partner = static_cast<std::uint32_t>(j);
        e.phi = kTwoPi * stream.uniform();
        out.push_back(e);
    }
    std::sort(out.begin(), out.end(), [](const JumpEvent& a, const JumpEvent& b) { return a.when < b.when; });
}

Vec3 apply_jump(const Model& model, const Vec3& v, const Vec3& vstar, double z, double phi) {
    return v + deflection_c(model.velocity, model.angular, v, vstar, z, phi);
}

void check_finite(std::span<const Vec3> velocities, double time) {
    for (std::size_t i = 0; i < velocities.size(); ++i) {
        if (!is_finite(velocities[i])) {
            std::ostringstream os;
            os << "non-finite velocity " << velocities[i] << " for particle " << i << " at t = " << time;
            throw NumericalError(os.str());
        }
    }
}

Ensemble step(const Ensemble& ens, const Model& model, double dt) {
    if (!(dt > 0.0)) throw DomainError("step: dt must be positive");
    if (kTwoPi * ens.k * dt > 10.0) throw DomainError("step: 2 pi k dt exceeds 10");
    Ensemble out = ens;
    out.time = ens.time + dt;
    out.steps = ens.steps + 1;
    const std::size_t n = ens.size();
    if (ens.k == 0.0) return out;

    if (model.rule == UpdateRule::one_sided) {
        const std::vector<Vec3>& snap = ens.velocities;
        parallel_for(n, [&](std::size_t lo, std::size_t hi) {
            std::vector<JumpEvent> events;
            for (std::size_t i = lo; i < hi; ++i) {
                rng::Substream s(ens.seed, rng::Tag::dynamics, ens.steps, i);
                draw_events(s, kTwoPi * dt, ens.k, n, i, events);
                Vec3 v = snap[i];
                for (const auto& e : events) v = apply_jump(model, v, snap[e.partner], e.z, e.phi);
                out.velocities[i] = v;
            }
        });
    } else {
        std::vector<Vec3>& w = out.velocities;
        std::vector<JumpEvent> events;
        for (std::size_t i = 0; i < n; ++i) {
            rng::Substream s(ens.seed, rng::Tag::dynamics, ens.steps, i);
            draw_events(s, std::numbers::pi * dt, ens.k, n, i, events);
            for (const auto& e : events) {
                const Vec3 a = deflection_c(model.velocity, model.angular, w[i], w[e.partner], e.z, e.phi);
                w[i] += a;
                w[e.partner] -= a;
            }
        }
    }
    check_finite(out.velocities, out.time);
    return out;
}

Moments moments(std::span<const Vec3> velocities) {
    long double px = 0, py = 0, pz = 0, e = 0;
    for (const auto& v : velocities) {
        px += v.x;
        py += v.y;
        pz += v.z;
        e += static_cast<long double>(norm2(v));
    }
    const long double n = static_cast<long double>(velocities.size());
    Moments m;
    if (velocities.empty()) return m;
    m.momentum = {static_cast<double>(px / n), static_cast<double>(py / n), static_cast<double>(pz / n)};
    m.energy = static_cast<double>(e / n);
    m.m2 = m.energy;
    return m;
}

Moments moments(const Ensemble& ens) { return moments(std::span<const Vec3>(ens.velocities)); }

void write_trajectory_header(std::ostream& os) { os << "t,particle_id,vx,vy,vz\n"; }

void write_trajectory(std::ostream& os, const Ensemble& ens) {
    os << std::setprecision(17);
    for (std::size_t i = 0; i < ens.size(); ++i) {
        const Vec3& v = ens.velocities[i];
        os << ens.time << ',' << i << ',' << v.x << ',' << v.y << ',' << v.z << '\n';
    }
}

void write_moments_header(std::ostream& os) { os << "t,px,py,pz,energy,m2\n"; }

void write_moments(std::ostream& os, double t, const Moments& m) {
    os << std::setprecision(17) << t << ',' << m.momentum.x << ',' << m.momentum.y << ',' << m.momentum.z << ',' << m.energy << ','
       << m.m2 << '\n';
}

}  // namespace grazing
