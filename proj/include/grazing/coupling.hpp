#pragma once

#include "grazing/ensemble.hpp"
#include "grazing/transport.hpp"

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <optional>
#include <vector>

namespace grazing {

struct CouplingOptions {
    /// Steps between plan recomputations; 0 selects 1 for N <= 512 and 10 above.
    std::size_t refresh_period = 0;
    /// Re-pair focal particles with the refreshed plan instead of keeping the
    /// initial pairing. Unset: re-pair exactly when the period exceeds 1.
    /// With a stale plan the partner pairs (v_j, w_sigma(j)) are not driven
    /// together, so under fixed pairing they drift apart between refreshes.
    std::optional<bool> repair_on_refresh;
    std::size_t solver_cap = kDefaultSolverCap;
};

std::size_t default_refresh_period(std::size_t n);

/// Two ensembles driven by the Poisson points of the primary one. Focal
/// particle i of the primary is coupled with particle pairing[i] of the
/// mirror; a partner j drawn by the primary is matched with mirror partner
/// plan.assignment[j].
struct CoupledState {
    Ensemble primary;
    Ensemble mirror;
    TransportPlan plan;
    std::vector<std::uint32_t> pairing;
    std::size_t refresh_period = 1;
    bool repair_on_refresh = false;
    std::size_t solver_cap = kDefaultSolverCap;
    std::uint64_t plan_step = 0;  // value of `steps` when plan was computed

    double time() const noexcept { return primary.time; }
    std::uint64_t steps() const noexcept { return primary.steps; }
};

/// Samples both ensembles (the mirror from mirror_seed, defaulting to seed)
/// and pairs them by their optimal plan.
CoupledState init_coupled(const InitialLaw& law_a, const InitialLaw& law_b, std::size_t n, double k,
                          std::uint64_t seed, const CouplingOptions& options = {},
                          std::optional<std::uint64_t> mirror_seed = std::nullopt);

/// Recomputes the partner plan for the current velocities.
void refresh_plan(CoupledState& st);

/// One shared-noise step. The mirror jump uses the azimuth
/// phi + phi0(V_i - v_j, W_pi(i) - w_sigma(j)) evaluated before the jump.
/// The plan is refreshed first when `steps` is a multiple of the period.
/// Only the one-sided rule is supported.
CoupledState coupled_step(const CoupledState& st, const Model& model, double dt);

struct CoupledDistance {
    double d = 0.0;     // (1/N) sum |V_i - W_pi(i)|^2
    double w2sq = 0.0;  // squared W2 of the two empirical measures
};

/// Reuses the stored plan when it is current, otherwise solves afresh.
CoupledDistance coupled_distance(const CoupledState& st);
double pairing_cost(const CoupledState& st);

struct ContractionFit {
    bool identically_coupled = false;  // d(0) = 0: rate undefined
    double k_hat = 0.0;
    std::vector<double> clock;  // int_0^t J ds at each record
    std::vector<double> bound;  // d(0) exp(2 k_hat clock)
};

/// K_hat = max over records with positive clock of log(d / d(0)) / (2 clock),
/// with the clock integrated by the trapezoid rule from the sampled J.
/// Throws DomainError on empty or mismatched series, or decreasing times.
ContractionFit contraction_fit(std::span<const double> t, std::span<const double> d,
                               std::span<const double> j_hat);

void write_coupling_header(std::ostream& os);
void write_coupling_row(std::ostream& os, double t, double d, double w2sq, double j_hat, double bound);

}  // namespace grazing
