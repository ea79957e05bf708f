#include "grazing/coupling.hpp"

#include "grazing/errors.hpp"
#include "grazing/geometry.hpp"
#include "grazing/parallel.hpp"

#include <cmath>
#include <iomanip>
#include <limits>
#include <numbers>
#include <ostream>

namespace grazing {

std::size_t default_refresh_period(std::size_t n) { return n <= 512 ? 1 : 10; }

CoupledState init_coupled(const InitialLaw& law_a, const InitialLaw& law_b, std::size_t n, double k,
                          std::uint64_t seed, const CouplingOptions& options,
                          std::optional<std::uint64_t> mirror_seed) {
    CoupledState st;
    st.primary = sample_initial(law_a, n, seed, k);
    st.mirror = sample_initial(law_b, n, mirror_seed.value_or(seed), k);
    st.refresh_period = options.refresh_period ? options.refresh_period : default_refresh_period(n);
    st.repair_on_refresh = options.repair_on_refresh.value_or(st.refresh_period > 1);
    st.solver_cap = options.solver_cap;
    refresh_plan(st);
    st.pairing = st.plan.assignment;
    return st;
}

void refresh_plan(CoupledState& st) {
    st.plan = st.plan.potentials.empty()
                  ? w2_exact(st.primary, st.mirror, st.solver_cap)
                  : w2_exact_warm(st.primary.velocities, st.mirror.velocities, st.plan, st.solver_cap);
    st.plan_step = st.steps();
}

CoupledState coupled_step(const CoupledState& st, const Model& model, double dt) {
    if (model.rule != UpdateRule::one_sided) throw DomainError("coupled_step: only the one-sided rule is coupled");
    if (!(dt > 0.0)) throw DomainError("coupled_step: dt must be positive");
    const double k = st.primary.k;
    if (2.0 * std::numbers::pi * k * dt > 10.0) throw DomainError("coupled_step: 2 pi k dt exceeds 10");

    CoupledState out = st;
    if (st.steps() % st.refresh_period == 0 && st.plan_step != st.steps()) {
        refresh_plan(out);
        if (out.repair_on_refresh) out.pairing = out.plan.assignment;
    }
    out.primary.time += dt;
    out.mirror.time += dt;
    ++out.primary.steps;
    ++out.mirror.steps;
    if (k == 0.0) return out;

    const std::size_t n = st.primary.size();
    const std::vector<Vec3>& snap = st.primary.velocities;
    const std::vector<Vec3>& msnap = st.mirror.velocities;
    const std::vector<std::uint32_t>& sigma = out.plan.assignment;
    const std::vector<std::uint32_t>& pairing = out.pairing;
    const double intensity = 2.0 * std::numbers::pi * dt;

    parallel_for(n, [&](std::size_t lo, std::size_t hi) {
        std::vector<JumpEvent> events;
        for (std::size_t i = lo; i < hi; ++i) {
            rng::Substream s(st.primary.seed, rng::Tag::dynamics, st.primary.steps, i);
            draw_events(s, intensity, k, n, i, events);
            Vec3 v = snap[i];
            Vec3 w = msnap[pairing[i]];
            for (const auto& e : events) {
                const Vec3& vs = snap[e.partner];
                const Vec3& ws = msnap[sigma[e.partner]];
                const double shift = phi0(v - vs, w - ws);
                v = apply_jump(model, v, vs, e.z, e.phi);
                w = apply_jump(model, w, ws, e.z, wrap_angle(e.phi + shift));
            }
            out.primary.velocities[i] = v;
            out.mirror.velocities[pairing[i]] = w;
        }
    });
    check_finite(out.primary.velocities, out.time());
    check_finite(out.mirror.velocities, out.time());
    return out;
}

double pairing_cost(const CoupledState& st) {
    return plan_cost(st.primary.velocities, st.mirror.velocities, st.pairing);
}

CoupledDistance coupled_distance(const CoupledState& st) {
    CoupledDistance out;
    out.d = pairing_cost(st);
    out.w2sq = st.plan_step == st.steps()
                   ? st.plan.cost
                   : w2_exact_warm(st.primary.velocities, st.mirror.velocities, st.plan, st.solver_cap).cost;
    return out;
}

ContractionFit contraction_fit(std::span<const double> t, std::span<const double> d,
                               std::span<const double> j_hat) {
    if (t.empty() || t.size() != d.size() || t.size() != j_hat.size())
        throw DomainError("contraction_fit: series empty or of unequal length");
    ContractionFit fit;
    fit.clock.assign(t.size(), 0.0);
    for (std::size_t r = 1; r < t.size(); ++r) {
        if (t[r] < t[r - 1]) throw DomainError("contraction_fit: times must be nondecreasing");
        fit.clock[r] = fit.clock[r - 1] + 0.5 * (j_hat[r] + j_hat[r - 1]) * (t[r] - t[r - 1]);
    }
    const double d0 = d[0];
    if (!(d0 > 0.0)) {
        fit.identically_coupled = true;
        fit.k_hat = std::numeric_limits<double>::quiet_NaN();
        fit.bound.assign(t.size(), 0.0);
        return fit;
    }
    double best = -std::numeric_limits<double>::infinity();
    bool any = false;
    for (std::size_t r = 0; r < t.size(); ++r) {
        if (!(fit.clock[r] > 0.0)) continue;
        any = true;
        const double rate = d[r] > 0.0 ? std::log(d[r] / d0) / (2.0 * fit.clock[r])
                                       : -std::numeric_limits<double>::infinity();
        best = std::max(best, rate);
    }
    fit.k_hat = any ? best : 0.0;
    fit.bound.resize(t.size());
    for (std::size_t r = 0; r < t.size(); ++r)
        fit.bound[r] = fit.clock[r] > 0.0 ? d0 * std::exp(2.0 * fit.k_hat * fit.clock[r]) : d0;
    return fit;
}

void write_coupling_header(std::ostream& os) { os << "t,d,w2sq,jgamma_hat,bound\n"; }

void write_coupling_row(std::ostream& os, double t, double d, double w2sq, double j_hat, double bound) {
    os << std::setprecision(17) << t << ',' << d << ',' << w2sq << ',' << j_hat << ',' << bound << '\n';
}

}  // namespace grazing
