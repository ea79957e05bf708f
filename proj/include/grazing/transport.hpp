#pragma once

#include "grazing/vec3.hpp"

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <vector>

namespace grazing {

struct Ensemble;

/// Pairing of point i of the first cloud with point assignment[i] of the
/// second, with mean squared displacement `cost`.
struct TransportPlan {
    std::vector<std::uint32_t> assignment;
    double cost = 0.0;
    /// Primal cost minus the dual objective of a feasible dual built from the
    /// solver's column potentials (both divided by N). Nonnegative; zero up to
    /// rounding at an optimum.
    double dual_gap = 0.0;
    /// Column potentials of the final dual, kept so a later solve on nearby
    /// points can start from them.
    std::vector<double> potentials;

    double w2() const;
};

inline constexpr std::size_t kDefaultSolverCap = 4096;

/// Optimal assignment for the squared Euclidean cost by the Jonker-Volgenant
/// shortest augmenting path method. Throws DomainError on size mismatch, empty
/// input, or N > cap.
TransportPlan w2_exact(std::span<const Vec3> a, std::span<const Vec3> b, std::size_t cap = kDefaultSolverCap);
TransportPlan w2_exact(const Ensemble& a, const Ensemble& b, std::size_t cap = kDefaultSolverCap);

/// Same optimum, started from the assignment and potentials of `previous`
/// (a plan for clouds of the same size). Rows whose previous column is still
/// a reduced-cost minimizer keep it; the others are re-inserted by shortest
/// augmenting paths. Much faster when the points moved little. Falls back to
/// a cold start when `previous` has no potentials.
TransportPlan w2_exact_warm(std::span<const Vec3> a, std::span<const Vec3> b, const TransportPlan& previous,
                            std::size_t cap = kDefaultSolverCap);

/// Exhaustive minimum over all N! permutations; the first minimizer in
/// lexicographic order wins. N <= 8.
TransportPlan w2_bruteforce(std::span<const Vec3> a, std::span<const Vec3> b);

/// (1/N) sum_i |a_i - b_{sigma(i)}|^2 by compensated summation.
double plan_cost(std::span<const Vec3> a, std::span<const Vec3> b, std::span<const std::uint32_t> sigma);

bool is_permutation(std::span<const std::uint32_t> sigma);

/// CSV `i,sigma_i,pair_cost`.
void write_plan(std::ostream& os, std::span<const Vec3> a, std::span<const Vec3> b, const TransportPlan& plan);

/// Neumaier compensated accumulator.
class CompensatedSum {
public:
    void add(double x);
    double value() const { return sum_ + comp_; }

private:
    double sum_ = 0.0;
    double comp_ = 0.0;
};

}  // namespace grazing
