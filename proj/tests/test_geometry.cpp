#include "doctest.h"

#include "grazing/errors.hpp"
#include "grazing/geometry.hpp"
#include "grazing/quadrature.hpp"
#include "grazing/random.hpp"

#include <cmath>
#include <limits>
#include <numbers>

using namespace grazing;
using std::numbers::pi;

namespace {

Vec3 random_vec(rng::Substream& s, double scale) { return scale * Vec3{s.normal(), s.normal(), s.normal()}; }

bool same(const Vec3& a, const Vec3& b) { return a.x == b.x && a.y == b.y && a.z == b.z; }

double max_deviation(const Vec3& x, const Vec3& y, double shift, int grid) {
    double worst = 0;
    for (int i = 0; i < grid; ++i) {
        const double phi = 2 * pi * i / grid;
        worst = std::max(worst, norm(gamma_vec(x, phi) - gamma_vec(y, wrap_angle(phi + shift))));
    }
    return worst;
}

}  // namespace

TEST_CASE("frame of the coordinate axes") {
    const Frame f = frame({1, 0, 0});
    CHECK(same(f.e1, {0, 1, 0}));
    CHECK(same(f.e2, {0, 0, 1}));

    // I is odd; with J = X x I / |X| the second vector is even.
    const Frame g = frame({-1, 0, 0});
    CHECK(same(g.e1, {0, -1, 0}));
    CHECK(same(g.e2, {0, 0, 1}));

    const Frame h = frame({0, 0, 2});
    CHECK(norm(h.e1) == doctest::Approx(2.0));
    CHECK(norm(h.e2) == doctest::Approx(2.0));
    CHECK(dot(h.e1, h.e2) == 0.0);
    CHECK(dot(h.e1, Vec3{0, 0, 2}) == 0.0);
    CHECK(dot(h.e2, Vec3{0, 0, 2}) == 0.0);

    CHECK_THROWS_AS(frame({0, 0, 0}), DomainError);
}

TEST_CASE("frames are orthogonal, isometric, right-handed and I is odd") {
    rng::Substream s(21, rng::Tag::verification, 1);
    for (int i = 0; i < 20000; ++i) {
        const double scale = std::pow(10.0, -6.0 + 12.0 * s.uniform());
        Vec3 x = random_vec(s, scale);
        if (i % 7 == 0) x.y = 0.0;
        if (i % 11 == 0) x.x = 0.0;
        const Frame f = frame(x);
        const double n2 = norm2(x);
        REQUIRE(std::abs(dot(x, f.e1)) <= 1e-12 * n2);
        REQUIRE(std::abs(dot(x, f.e2)) <= 1e-12 * n2);
        REQUIRE(std::abs(dot(f.e1, f.e2)) <= 1e-12 * n2);
        REQUIRE(std::abs(norm(f.e1) - norm(x)) <= 1e-12 * norm(x));
        REQUIRE(std::abs(norm(f.e2) - norm(x)) <= 1e-12 * norm(x));
        REQUIRE(dot(cross(x, f.e1), f.e2) > 0.0);
        const Frame g = frame(-x);
        REQUIRE(same(g.e1, -f.e1));
        REQUIRE(same(g.e2, f.e2));
    }
}

TEST_CASE("rotating vector") {
    const Vec3 x{1, 0, 0};
    CHECK(same(gamma_vec(x, 0.0), frame(x).e1));
    CHECK(same(gamma_vec({0, 0, 0}, 1.234), {0, 0, 0}));
    const Vec3 y{0.3, -2.0, 0.7};
    const Vec3 j = gamma_vec(y, pi / 2);
    CHECK(norm(j - frame(y).e2) <= 1e-15 * norm(y));
}

TEST_CASE("collision parameterization examples") {
    const Vec3 v{0.4, -1.2, 2.0}, vs{-0.7, 0.1, 0.3};
    const Collision c0 = post_collision(v, vs, 0.0, 1.0);
    CHECK(same(c0.v_post, v));
    CHECK(same(c0.vstar_post, vs));
    CHECK(same(c0.shift, {0, 0, 0}));

    const Collision same_v = post_collision(v, v, 1.1, 2.2);
    CHECK(same(same_v.v_post, v));
    CHECK(same(same_v.vstar_post, v));

    const Collision head_on = post_collision({1, 0, 0}, {-1, 0, 0}, pi, 0.7);
    CHECK(norm(head_on.v_post - Vec3{-1, 0, 0}) <= 1e-15);
    CHECK(norm(head_on.vstar_post - Vec3{1, 0, 0}) <= 1e-15);

    CHECK_THROWS_AS(post_collision(v, vs, -0.1, 0.0), DomainError);
    CHECK_THROWS_AS(post_collision(v, vs, 3.2, 0.0), DomainError);
}

TEST_CASE("deflection at zero and large marks") {
    const AngularKernel ang(1.0);
    const VelocityKernel vel(PowerLaw{-1.0});
    const Vec3 v{1, 2, 3}, vs{-1, 0.5, 2};
    CHECK(same(deflection_c(vel, ang, v, v, 0.3, 1.0), {0, 0, 0}));
    const Vec3 full = deflection_c(vel, ang, v, vs, 0.0, 2.0);
    CHECK(norm(full + (v - vs)) <= 1e-14 * norm(v - vs));
    double prev = norm(deflection_c(vel, ang, v, vs, 1.0, 0.5));
    for (double z = 10.0; z < 1e12; z *= 10.0) {
        const double m = norm(deflection_c(vel, ang, v, vs, z, 0.5));
        CHECK(m < prev);
        prev = m;
    }
    CHECK(prev < 1e-10);
    // Phi(0) = inf maps every mark to theta = pi and the zero relative velocity to a zero jump
    CHECK(mark_angle(vel, ang, 0.0, 5.0) == pi);
}

TEST_CASE("azimuthal average of the shift") {
    rng::Substream s(4, rng::Tag::verification, 2);
    for (int i = 0; i < 200; ++i) {
        const Vec3 v = random_vec(s, 3.0), vs = random_vec(s, 3.0);
        const double theta = pi * s.uniform();
        const Vec3 x = v - vs;
        for (int comp = 0; comp < 3; ++comp) {
            const double avg = quad::periodic_trapezoid(
                                   [&](double phi) { return collision_shift(v, vs, theta, phi)[comp]; }, 720) /
                               (2 * pi);
            const double expect = -0.5 * (1 - std::cos(theta)) * x[comp];
            REQUIRE(std::abs(avg - expect) <= 1e-10 * (1 + norm(x)));
        }
    }
}

TEST_CASE("collisions conserve momentum and energy") {
    rng::Substream s(5, rng::Tag::verification, 3);
    constexpr double eps = std::numeric_limits<double>::epsilon();
    for (int i = 0; i < 100000; ++i) {
        const double scale = std::pow(10.0, -3.0 + 6.0 * s.uniform());
        const Vec3 v = random_vec(s, scale), vs = random_vec(s, scale);
        const double theta = pi * s.uniform(), phi = 2 * pi * s.uniform();
        const Collision c = post_collision(v, vs, theta, phi);
        const Vec3 before = v + vs, after = c.v_post + c.vstar_post;
        for (int k = 0; k < 3; ++k) {
            const double mag = std::max({std::abs(v[k]), std::abs(vs[k]), std::abs(c.v_post[k]),
                                         std::abs(c.vstar_post[k])});
            REQUIRE(std::abs(after[k] - before[k]) <= 4 * eps * mag);
        }
        const double e0 = norm2(v) + norm2(vs), e1 = norm2(c.v_post) + norm2(c.vstar_post);
        REQUIRE(std::abs(e1 - e0) <= 1e-12 * e0);
    }
}

TEST_CASE("alignment angle") {
    rng::Substream s(6, rng::Tag::verification, 4);
    for (int i = 0; i < 100; ++i) {
        const Vec3 x = random_vec(s, 2.0);
        CHECK(phi0(x, x) == 0.0);
        const double a = phi0(x, -x);
        CHECK(a >= 0.0);
        CHECK(a < 2 * pi);
        CHECK(max_deviation(x, -x, a, 360) <= 3 * norm(2.0 * x) * (1 + 1e-12));
    }
    CHECK(phi0({0, 0, 0}, {1, 2, 3}) == 0.0);
    CHECK(phi0({1, 2, 3}, {0, 0, 0}) == 0.0);
    CHECK(wrap_angle(2 * pi) == 0.0);
    CHECK(wrap_angle(-0.5) == doctest::Approx(2 * pi - 0.5));
    CHECK(wrap_angle(7.0) == doctest::Approx(7.0 - 2 * pi));
}

TEST_CASE("Tanaka bound on random triples") {
    rng::Substream s(7, rng::Tag::verification, 5);
    std::size_t violations = 0;
    double worst = 0;
    for (int i = 0; i < 20000; ++i) {
        const Vec3 x = random_vec(s, 1.0);
        const Vec3 y = i % 3 == 0 ? x + random_vec(s, 1e-4) : random_vec(s, 1.0);
        const double phi = 2 * pi * s.uniform();
        const double lhs = norm(gamma_vec(x, phi) - gamma_vec(y, wrap_angle(phi + phi0(x, y))));
        const double rhs = 3 * norm(x - y);
        worst = std::max(worst, lhs / rhs);
        if (lhs > rhs) ++violations;
    }
    CHECK(violations == 0);
    CHECK(worst < 1.0);
}

TEST_CASE("closed-form alignment is as good as a grid minimizer") {
    rng::Substream s(8, rng::Tag::verification, 6);
    for (int i = 0; i < 100; ++i) {
        const Vec3 x = random_vec(s, 1.0), y = random_vec(s, 1.0);
        const double ours = max_deviation(x, y, phi0(x, y), 360);
        double grid_best = 1e300;
        for (int j = 0; j < 720; ++j) grid_best = std::min(grid_best, max_deviation(x, y, 2 * pi * j / 720, 360));
        REQUIRE(ours <= 1.01 * grid_best);
    }
}
