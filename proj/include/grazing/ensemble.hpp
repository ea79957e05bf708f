#pragma once

#include "grazing/kernel.hpp"
#include "grazing/random.hpp"
#include "grazing/vec3.hpp"

#include <cstdint>
#include <iosfwd>
#include <span>
#include <variant>
#include <vector>

namespace grazing {

struct GaussianIso {
    Vec3 mean;
    double temperature = 1.0;  // per-component variance
};

struct GaussianComponent {
    double weight = 1.0;
    Vec3 mean;
    double temperature = 1.0;
};

struct GaussianMixture {
    std::vector<GaussianComponent> components;
};

struct UniformBall {
    Vec3 center;
    double radius = 1.0;
};

/// Empirical law of a fixed list. Sampling n == size() points returns the
/// list itself; other sizes draw with replacement.
struct PointCloud {
    std::vector<Vec3> velocities;
};

using InitialLaw = std::variant<GaussianIso, GaussianMixture, UniformBall, PointCloud>;

/// Throws DomainError on negative temperature or radius, empty mixtures or
/// clouds, or nonpositive total mixture weight.
void validate(const InitialLaw& law);

/// N-particle approximation of f_t for the cutoff jump process at level k.
/// The random state is the pair (seed, steps): the noise for particle i
/// during step s comes from Substream(seed, dynamics, s, i).
struct Ensemble {
    std::vector<Vec3> velocities;
    double time = 0.0;
    double k = 0.0;
    std::uint64_t seed = 0;
    std::uint64_t steps = 0;

    std::size_t size() const noexcept { return velocities.size(); }
};

/// N i.i.d. draws from `law`; particle i uses Substream(seed, initial, i).
Ensemble sample_initial(const InitialLaw& law, std::size_t n, std::uint64_t seed, double k);

enum class UpdateRule {
    one_sided,  // only the focal particle jumps (Nanbu)
    symmetric,  // both collision partners jump at half the focal rate (Bird)
};

struct Model {
    AngularKernel angular;
    VelocityKernel velocity;
    UpdateRule rule = UpdateRule::one_sided;
};

/// One Poisson point of the focal-particle measure on [t, t + dt] x {1..N} x [0, k] x [0, 2 pi).
struct JumpEvent {
    double when = 0.0;  // fraction of the step in [0, 1)
    double z = 0.0;
    double phi = 0.0;
    std::uint32_t partner = 0;
};

/// Largest admissible step for a given k: 2 pi k dt <= 10.
double max_step(double k);

/// Draws the points of one (particle, step) substream in increasing z up to k,
/// at intensity `intensity` per unit z, then sorts them by time. Points with
/// z <= k' are the same for every k >= k', so runs at different cutoffs
/// sharing a seed are nested.
void draw_events(rng::Substream& stream, double intensity, double k, std::size_t n, std::size_t self,
                 std::vector<JumpEvent>& out);

/// v + c(v, v_*, z, phi).
Vec3 apply_jump(const Model& model, const Vec3& v, const Vec3& vstar, double z, double phi);

/// Advances by dt. One-sided: every particle jumps against the frozen pre-step
/// snapshot, in parallel. Symmetric: particles are processed serially in index
/// order and each event updates both partners with the current velocities.
/// Throws DomainError when dt <= 0 or 2 pi k dt > 10, NumericalError on a
/// non-finite velocity.
Ensemble step(const Ensemble& ens, const Model& model, double dt);

struct Moments {
    Vec3 momentum;
    double energy = 0.0;
    double m2 = 0.0;
};

Moments moments(const Ensemble& ens);
Moments moments(std::span<const Vec3> velocities);

/// Throws NumericalError naming the first non-finite particle.
void check_finite(std::span<const Vec3> velocities, double time);

void write_trajectory_header(std::ostream& os);
void write_trajectory(std::ostream& os, const Ensemble& ens);
void write_moments_header(std::ostream& os);
void write_moments(std::ostream& os, double t, const Moments& m);

}  // namespace grazing
