#include "doctest.h"

#include "grazing/ensemble.hpp"
#include "grazing/errors.hpp"
#include "grazing/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <numbers>
#include <numeric>
#include <sstream>

using namespace grazing;
using std::numbers::pi;

namespace {

Model maxwell_model(UpdateRule rule = UpdateRule::one_sided) {
    return Model{AngularKernel(1.0), VelocityKernel(PowerLaw{0.0}), rule};
}

Ensemble run_to(Ensemble e, const Model& m, double dt, int steps) {
    for (int i = 0; i < steps; ++i) e = step(e, m, dt);
    return e;
}

struct ThreadEnv {
    explicit ThreadEnv(const char* n) { setenv("GRAZING_THREADS", n, 1); }
    ~ThreadEnv() { unsetenv("GRAZING_THREADS"); }
};

}  // namespace

TEST_CASE("initial sampling") {
    const Vec3 u{1, 2, 3}, w{-4, 5, 0.5};
    const Ensemble pc = sample_initial(PointCloud{{u, w}}, 2, 9, 1.0);
    CHECK(pc.velocities == std::vector<Vec3>{u, w});

    const Ensemble g = sample_initial(GaussianIso{}, 10000, 1, 10.0);
    const double m2g = moments(g).m2;
    CHECK(m2g >= 2.9);
    CHECK(m2g <= 3.1);

    const Ensemble b = sample_initial(UniformBall{{0, 0, 0}, 1.0}, 10000, 1, 10.0);
    const double m2b = moments(b).m2;
    CHECK(m2b >= 0.58);
    CHECK(m2b <= 0.62);
    for (const auto& v : b.velocities) REQUIRE(norm(v) <= 1.0);

    GaussianMixture mix{{{1.0, {2, 0, 0}, 0.5}, {3.0, {-2, 0, 0}, 0.5}}};
    const Ensemble m = sample_initial(mix, 20000, 3, 10.0);
    CHECK(moments(m).momentum.x == doctest::Approx(0.25 * 2 - 0.75 * 2).epsilon(0.03));

    const Ensemble again = sample_initial(GaussianIso{}, 10000, 1, 10.0);
    CHECK(again.velocities == g.velocities);
    CHECK(sample_initial(GaussianIso{}, 10, 2, 1.0).velocities != sample_initial(GaussianIso{}, 10, 1, 1.0).velocities);

    // resampling a cloud of a different size stays on the cloud
    const Ensemble re = sample_initial(PointCloud{{u, w}}, 50, 4, 1.0);
    for (const auto& v : re.velocities) REQUIRE((v == u || v == w));

    CHECK_THROWS_AS(sample_initial(GaussianIso{}, 1, 1, 1.0), DomainError);
    CHECK_THROWS_AS(sample_initial(GaussianIso{{0, 0, 0}, -1.0}, 5, 1, 1.0), DomainError);
    CHECK_THROWS_AS(sample_initial(GaussianMixture{}, 5, 1, 1.0), DomainError);
    CHECK_THROWS_AS(sample_initial(PointCloud{}, 5, 1, 1.0), DomainError);
    CHECK_THROWS_AS(sample_initial(GaussianIso{}, 5, 1, -1.0), DomainError);
}

TEST_CASE("moments of a symmetric pair") {
    const Moments m = moments(std::vector<Vec3>{{1, 0, 0}, {-1, 0, 0}});
    CHECK(m.momentum == Vec3{0, 0, 0});
    CHECK(m.energy == 1.0);
    CHECK(m.m2 == 1.0);
}

TEST_CASE("steps that cannot move anything") {
    const Model m = maxwell_model();
    Ensemble equal = sample_initial(PointCloud{{{0.5, 0.5, 0.5}}}, 30, 1, 20.0);
    const Ensemble after = run_to(equal, m, 0.01, 10);
    CHECK(after.velocities == equal.velocities);
    CHECK(after.steps == 10);

    Ensemble frozen = sample_initial(GaussianIso{}, 40, 2, 0.0);
    const Ensemble f2 = run_to(frozen, m, 0.1, 5);
    CHECK(f2.velocities == frozen.velocities);
    CHECK(f2.time == doctest::Approx(0.5));
}

TEST_CASE("a jump at mark zero swaps a head-on pair") {
    const Model m = maxwell_model();
    const Vec3 v1{1, 0, 0}, v2{-1, 0, 0};
    for (double phi : {0.0, 1.0, 4.0}) {
        const Vec3 out = apply_jump(m, v1, v2, 0.0, phi);
        CHECK(norm(out - v2) <= 1e-15);
    }
}

TEST_CASE("step preconditions") {
    const Model m = maxwell_model();
    Ensemble e = sample_initial(GaussianIso{}, 10, 1, 50.0);
    CHECK_THROWS_AS(step(e, m, 0.0), DomainError);
    CHECK_THROWS_AS(step(e, m, 1.01 * max_step(50.0)), DomainError);
    CHECK_NOTHROW(step(e, m, max_step(50.0)));

    Ensemble bad = sample_initial(PointCloud{{{1e308, 0, 0}, {-1e308, 0, 0}}}, 2, 1, 50.0);
    CHECK_THROWS_AS(run_to(bad, m, 0.01, 5), NumericalError);
}

TEST_CASE("event draws") {
    std::vector<JumpEvent> small, large;
    for (std::uint64_t i = 0; i < 200; ++i) {
        rng::Substream a(3, rng::Tag::dynamics, 0, i), b(3, rng::Tag::dynamics, 0, i);
        draw_events(a, 2 * pi * 0.01, 20.0, 100, 7, small);
        draw_events(b, 2 * pi * 0.01, 80.0, 100, 7, large);
        for (const auto& e : small) {
            REQUIRE(e.partner != 7);
            REQUIRE(e.partner < 100);
            REQUIRE(e.z <= 20.0);
            REQUIRE(e.when >= 0.0);
            REQUIRE(e.when < 1.0);
            REQUIRE(e.phi < 2 * pi);
        }
        REQUIRE(std::is_sorted(small.begin(), small.end(),
                               [](const JumpEvent& x, const JumpEvent& y) { return x.when < y.when; }));
        // the k = 20 events are exactly the k = 80 events with z <= 20
        std::vector<JumpEvent> filtered;
        for (const auto& e : large)
            if (e.z <= 20.0) filtered.push_back(e);
        REQUIRE(filtered.size() == small.size());
        for (std::size_t j = 0; j < small.size(); ++j) {
            REQUIRE(filtered[j].z == small[j].z);
            REQUIRE(filtered[j].partner == small[j].partner);
            REQUIRE(filtered[j].phi == small[j].phi);
        }
    }
    // mean count = intensity * k
    std::size_t total = 0;
    const int reps = 20000;
    for (int i = 0; i < reps; ++i) {
        rng::Substream s(4, rng::Tag::dynamics, 1, static_cast<std::uint64_t>(i));
        draw_events(s, 2 * pi * 0.01, 50.0, 10, 0, small);
        total += small.size();
    }
    CHECK(static_cast<double>(total) / reps == doctest::Approx(pi).epsilon(0.02));
}

TEST_CASE("one-sided step matches a serial replay and is thread-count independent") {
    const Model m{AngularKernel(1.0), VelocityKernel(PowerLaw{-1.0}), UpdateRule::one_sided};
    const Ensemble e0 = sample_initial(GaussianIso{}, 300, 5, 50.0);
    Ensemble a, b;
    {
        ThreadEnv env("1");
        a = run_to(e0, m, 0.01, 5);
    }
    {
        ThreadEnv env("7");
        b = run_to(e0, m, 0.01, 5);
    }
    CHECK(a.velocities == b.velocities);

    // replay the first step by hand
    std::vector<Vec3> replay(e0.size());
    std::vector<JumpEvent> ev;
    for (std::size_t i = 0; i < e0.size(); ++i) {
        rng::Substream s(e0.seed, rng::Tag::dynamics, 0, i);
        draw_events(s, 2 * pi * 0.01, 50.0, e0.size(), i, ev);
        Vec3 v = e0.velocities[i];
        for (const auto& e : ev) v = apply_jump(m, v, e0.velocities[e.partner], e.z, e.phi);
        replay[i] = v;
    }
    CHECK(step(e0, m, 0.01).velocities == replay);
}

TEST_CASE("relabeling particles commutes with a step when substreams follow the particles") {
    const Model m = maxwell_model();
    const Ensemble e0 = sample_initial(GaussianIso{}, 60, 8, 30.0);
    const std::size_t n = e0.size();
    std::vector<std::size_t> perm(n);
    std::iota(perm.begin(), perm.end(), 0);
    std::reverse(perm.begin(), perm.end());
    std::rotate(perm.begin(), perm.begin() + 17, perm.end());

    // particle i of the original ensemble lives at slot perm[i] and keeps its own noise
    std::vector<Vec3> relabeled(n), expect(n);
    for (std::size_t i = 0; i < n; ++i) relabeled[perm[i]] = e0.velocities[i];
    std::vector<JumpEvent> ev;
    for (std::size_t i = 0; i < n; ++i) {
        rng::Substream s(e0.seed, rng::Tag::dynamics, 0, i);
        draw_events(s, 2 * pi * 0.01, e0.k, n, i, ev);
        Vec3 v = relabeled[perm[i]];
        for (const auto& e : ev) v = apply_jump(m, v, relabeled[perm[e.partner]], e.z, e.phi);
        expect[perm[i]] = v;
    }
    const Ensemble stepped = step(e0, m, 0.01);
    for (std::size_t i = 0; i < n; ++i) REQUIRE(expect[perm[i]] == stepped.velocities[i]);
}

TEST_CASE("symmetric rule conserves momentum and energy") {
    const Model m{AngularKernel(0.5), VelocityKernel(PowerLaw{-1.0}), UpdateRule::symmetric};
    const Ensemble e0 = sample_initial(GaussianIso{{0.3, -0.2, 1.0}, 1.0}, 500, 2, 50.0);
    const Ensemble e1 = run_to(e0, m, 0.01, 50);
    const Moments a = moments(e0), b = moments(e1);
    CHECK(norm(a.momentum - b.momentum) <= 1e-13);
    CHECK(b.energy == doctest::Approx(a.energy).epsilon(1e-12));
    CHECK(e1.velocities != e0.velocities);
}

TEST_CASE("one-sided momentum drift vanishes on average") {
    const Model m = maxwell_model();
    const int runs = 100;
    std::vector<double> drift;
    for (int r = 0; r < runs; ++r) {
        const Ensemble e0 = sample_initial(GaussianIso{}, 100, 1000 + r, 20.0);
        const Ensemble e1 = run_to(e0, m, 0.02, 50);
        drift.push_back((moments(e1).momentum - moments(e0).momentum).x);
    }
    const double mean = std::accumulate(drift.begin(), drift.end(), 0.0) / runs;
    double var = 0;
    for (double d : drift) var += (d - mean) * (d - mean);
    const double se = std::sqrt(var / (runs - 1) / runs);
    CHECK(std::abs(mean) <= 3 * se);
    CHECK(se > 0.0);
}

TEST_CASE("second moment stays within a common multiple of its initial value across N") {
    const Model m{AngularKernel(1.0), VelocityKernel(PowerLaw{-1.0}), UpdateRule::one_sided};
    for (std::size_t n : {100, 1000, 10000}) {
        Ensemble e = sample_initial(GaussianIso{}, n, 3, 50.0);
        const double m20 = moments(e).m2;
        double sup = m20;
        for (int s = 0; s < 100; ++s) {
            e = step(e, m, 0.01);
            sup = std::max(sup, moments(e).m2);
        }
        CAPTURE(n);
        CHECK(sup <= 5.0 * (1 + m20));
    }
}

TEST_CASE("csv schemas") {
    Ensemble e = sample_initial(PointCloud{{{1, 0, 0}, {0, 0.5, 0}}}, 2, 1, 1.0);
    std::ostringstream t, mo;
    write_trajectory_header(t);
    write_trajectory(t, e);
    CHECK(t.str() == "t,particle_id,vx,vy,vz\n0,0,1,0,0\n0,1,0,0.5,0\n");
    write_moments_header(mo);
    write_moments(mo, 0.5, moments(e));
    CHECK(mo.str() == "t,px,py,pz,energy,m2\n0.5,0.5,0.25,0,0.625,0.625\n");
}
