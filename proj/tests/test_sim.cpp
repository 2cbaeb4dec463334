#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "zapfield/rng.hpp"
#include "zapfield/sim.hpp"

using namespace zapfield;
using sim::SimConfig;
using sim::Vec2;
using sim::VectorField;

namespace {

// independent double-loop oracle for the printed distance formula
double brute_force_d_avg(const std::vector<Vec2>& pos) {
    double sum = 0.0;
    const size_t n = pos.size();
    for (size_t i = 0; i < n; ++i)
        for (size_t j = 0; j < n; ++j)
            if (j > i) sum += std::hypot(pos[i].x - pos[j].x, pos[i].y - pos[j].y);
    return sum / (static_cast<double>(n) * (n - 1));
}

// field pointing from every node toward the arena center
VectorField inward_field(int n, const SimConfig& cfg, double strength) {
    VectorField f = VectorField::constant(n, {0, 0});
    for (int iy = 0; iy < n; ++iy) {
        for (int ix = 0; ix < n; ++ix) {
            const double cx = (ix + 0.5) * cfg.width / n;
            const double cy = (iy + 0.5) * cfg.height / n;
            const double dx = cfg.width / 2 - cx;
            const double dy = cfg.height / 2 - cy;
            const double norm = std::hypot(dx, dy);
            if (norm > 0) f.at(ix, iy) = {strength * dx / norm, strength * dy / norm};
        }
    }
    return f;
}

}  // namespace

TEST_CASE("init_world places cells in the interior margin, deterministically") {
    SimConfig cfg;
    const sim::WorldState w1 = sim::init_world(42, cfg);
    REQUIRE(w1.positions.size() == 100);
    for (const Vec2& p : w1.positions) {
        CHECK(p.x >= 5.0);
        CHECK(p.x <= 495.0);
        CHECK(p.y >= 5.0);
        CHECK(p.y <= 495.0);
    }
    for (const Vec2& v : w1.velocities) CHECK(v.norm() <= cfg.max_speed + 1e-12);

    const sim::WorldState w2 = sim::init_world(42, cfg);
    for (size_t i = 0; i < w1.positions.size(); ++i) {
        CHECK(w1.positions[i].x == w2.positions[i].x);
        CHECK(w1.positions[i].y == w2.positions[i].y);
        CHECK(w1.velocities[i].x == w2.velocities[i].x);
    }

    const sim::WorldState w3 = sim::init_world(43, cfg);
    bool any_diff = false;
    for (size_t i = 0; i < w1.positions.size(); ++i)
        if (w1.positions[i].x != w3.positions[i].x || w1.positions[i].y != w3.positions[i].y)
            any_diff = true;
    CHECK(any_diff);
}

TEST_CASE("init_world rejects invalid config") {
    SimConfig cfg;
    cfg.n_cells = 1;
    CHECK_THROWS_AS(sim::init_world(1, cfg), std::invalid_argument);
    cfg = SimConfig{};
    cfg.dt = 0.0;
    CHECK_THROWS_AS(sim::init_world(1, cfg), std::invalid_argument);
    cfg = SimConfig{};
    cfg.radius = 300.0;
    CHECK_THROWS_AS(sim::init_world(1, cfg), std::invalid_argument);
}

TEST_CASE("sample_field: constant field everywhere") {
    SimConfig cfg;
    const VectorField f = VectorField::constant(3, {1, 0});
    for (double x : {0.0, 12.3, 250.0, 499.0})
        for (double y : {0.5, 250.0, 490.0}) {
            const Vec2 v = sim::sample_field(f, {x, y}, cfg);
            CHECK(v.x == doctest::Approx(1.0).epsilon(1e-12));
            CHECK(v.y == doctest::Approx(0.0).epsilon(1e-12));
        }
}

TEST_CASE("sample_field: arena center of a 2x2 field is the mean of the four nodes") {
    SimConfig cfg;
    VectorField f = VectorField::constant(2, {0, 0});
    f.at(0, 0) = {1, 2};
    f.at(1, 0) = {3, -4};
    f.at(0, 1) = {-5, 6};
    f.at(1, 1) = {7, 8};
    const Vec2 v = sim::sample_field(f, {250, 250}, cfg);
    CHECK(v.x == doctest::Approx((1 + 3 - 5 + 7) / 4.0).epsilon(1e-12));
    CHECK(v.y == doctest::Approx((2 - 4 + 6 + 8) / 4.0).epsilon(1e-12));
}

TEST_CASE("sample_field: node-exactness at every node center") {
    SimConfig cfg;
    rng::Prng prng(9);
    for (int n : {2, 3, 5, 10}) {
        VectorField f = VectorField::constant(n, {0, 0});
        for (auto& v : f.vectors) v = {prng.uniform(-3, 3), prng.uniform(-3, 3)};
        for (int iy = 0; iy < n; ++iy)
            for (int ix = 0; ix < n; ++ix) {
                const Vec2 node{(ix + 0.5) * cfg.width / n, (iy + 0.5) * cfg.height / n};
                const Vec2 got = sim::sample_field(f, node, cfg);
                const Vec2 want = f.at(ix, iy);
                CHECK(got.x == doctest::Approx(want.x).epsilon(1e-12));
                CHECK(got.y == doctest::Approx(want.y).epsilon(1e-12));
            }
    }
}

TEST_CASE("sample_field: hull property and domain error") {
    SimConfig cfg;
    rng::Prng prng(17);
    VectorField f = VectorField::constant(5, {0, 0});
    for (auto& v : f.vectors) v = {prng.uniform(-2, 2), prng.uniform(-2, 2)};
    for (int trial = 0; trial < 200; ++trial) {
        const Vec2 pos{prng.uniform(0, cfg.width), prng.uniform(0, cfg.height)};
        const Vec2 got = sim::sample_field(f, pos, cfg);
        double lo_x = 1e9, hi_x = -1e9, lo_y = 1e9, hi_y = -1e9;
        for (const auto& v : f.vectors) {
            lo_x = std::min(lo_x, v.x);
            hi_x = std::max(hi_x, v.x);
            lo_y = std::min(lo_y, v.y);
            hi_y = std::max(hi_y, v.y);
        }
        CHECK(got.x >= lo_x - 1e-12);
        CHECK(got.x <= hi_x + 1e-12);
        CHECK(got.y >= lo_y - 1e-12);
        CHECK(got.y <= hi_y + 1e-12);
    }
    CHECK_THROWS_AS(sim::sample_field(f, {-1, 10}, cfg), std::domain_error);
    CHECK_THROWS_AS(sim::sample_field(f, {10, 501}, cfg), std::domain_error);
}

TEST_CASE("apply_reflective_boundary mirrors about the wall at offset radius") {
    SimConfig cfg;
    Vec2 pos{498, 250}, vel{2, 0};
    sim::apply_reflective_boundary(pos, vel, cfg);
    CHECK(pos.x == doctest::Approx(492.0));
    CHECK(pos.y == doctest::Approx(250.0));
    CHECK(vel.x == doctest::Approx(-2.0));

    pos = {-3, 250};
    vel = {-1, 0};
    sim::apply_reflective_boundary(pos, vel, cfg);
    CHECK(pos.x == doctest::Approx(13.0));
    CHECK(vel.x == doctest::Approx(1.0));

    // identity inside
    pos = {100, 100};
    vel = {1, 1};
    sim::apply_reflective_boundary(pos, vel, cfg);
    CHECK(pos.x == doctest::Approx(100.0));
    CHECK(vel.x == doctest::Approx(1.0));
}

TEST_CASE("resolve_repulsion: separated cells get zero increments") {
    SimConfig cfg;
    sim::WorldState world;
    world.positions = {{50, 50}, {100, 100}, {400, 400}};
    world.velocities.assign(3, {0, 0});
    const auto inc = sim::resolve_repulsion(world, cfg);
    for (const Vec2& v : inc) {
        CHECK(v.x == 0.0);
        CHECK(v.y == 0.0);
    }
}

TEST_CASE("resolve_repulsion: half overlap gives magnitude 0.5 each, opposed") {
    SimConfig cfg;
    sim::WorldState world;
    world.positions = {{100, 100}, {105, 100}};  // distance r = 5, overlap half of 2r
    world.velocities.assign(2, {0, 0});
    const auto inc = sim::resolve_repulsion(world, cfg);
    CHECK(inc[0].norm() == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(inc[1].norm() == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(inc[0].x == doctest::Approx(-inc[1].x));
    CHECK(inc[0].y == doctest::Approx(-inc[1].y));
    CHECK(inc[0].x < 0.0);  // pushed away from the right neighbor
}

TEST_CASE("resolve_repulsion: middle of three collinear overlapping cells cancels") {
    SimConfig cfg;
    sim::WorldState world;
    world.positions = {{95, 100}, {100, 100}, {105, 100}};
    world.velocities.assign(3, {0, 0});
    const auto inc = sim::resolve_repulsion(world, cfg);
    CHECK(inc[1].x == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(inc[1].y == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("resolve_repulsion: coincident centers use the deterministic tie-break") {
    SimConfig cfg;
    sim::WorldState world;
    world.positions = {{100, 100}, {100, 100}};
    world.velocities.assign(2, {0, 0});
    const auto inc = sim::resolve_repulsion(world, cfg);
    CHECK(inc[0].norm() == doctest::Approx(1.0).epsilon(1e-12));  // full overlap
    // lower index 0 of 2 cells -> angle 0 -> +x
    CHECK(inc[0].x == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(inc[1].x == doctest::Approx(-1.0).epsilon(1e-12));
}

TEST_CASE("repulsion increments sum to zero (Newton's third law)") {
    SimConfig cfg;
    cfg.n_cells = 40;
    rng::Prng prng(5);
    sim::WorldState world;
    for (int i = 0; i < 40; ++i) {
        world.positions.push_back({prng.uniform(200, 230), prng.uniform(200, 230)});
        world.velocities.push_back({0, 0});
    }
    const auto inc = sim::resolve_repulsion(world, cfg);
    double sx = 0, sy = 0;
    for (const Vec2& v : inc) {
        sx += v.x;
        sy += v.y;
    }
    CHECK(std::abs(sx) < 1e-9);
    CHECK(std::abs(sy) < 1e-9);
}

TEST_CASE("step_world: no forces, no motion") {
    SimConfig cfg;
    sim::WorldState world;
    world.positions = {{100, 100}, {300, 300}};
    world.velocities.assign(2, {0, 0});
    const VectorField f = VectorField::constant(2, {0, 0});
    const sim::WorldState next = sim::step_world(world, f, cfg);
    CHECK(next.positions[0].x == 100.0);
    CHECK(next.positions[1].y == 300.0);
    CHECK(next.time_step == 1);
}

TEST_CASE("step_world: one Euler step under a unit field") {
    SimConfig cfg;
    cfg.n_cells = 2;
    sim::WorldState world;
    world.positions = {{250, 250}, {100, 400}};  // far apart, no repulsion
    world.velocities.assign(2, {0, 0});
    const VectorField f = VectorField::constant(2, {1, 0});
    const sim::WorldState next = sim::step_world(world, f, cfg);
    // velocity becomes (1, 0) * dt, then position advances by min(speed, cap) * dt
    CHECK(next.positions[0].x == doctest::Approx(251.0));
    CHECK(next.velocities[0].x == doctest::Approx(1.0));
}

TEST_CASE("step_world: reflection flips the velocity at the right wall") {
    SimConfig cfg;
    sim::WorldState world;
    world.positions = {{493, 250}, {100, 100}};
    world.velocities = {{4, 0}, {0, 0}};
    const VectorField f = VectorField::constant(2, {0, 0});
    const sim::WorldState next = sim::step_world(world, f, cfg);
    CHECK(next.positions[0].x <= 495.0);
    CHECK(next.velocities[0].x < 0.0);
}

TEST_CASE("step_world: speed cap holds") {
    SimConfig cfg;
    const VectorField f = VectorField::constant(2, {10, 10});
    sim::WorldState world = sim::init_world(3, cfg);
    for (int s = 0; s < 20; ++s) {
        world = sim::step_world(world, f, cfg);
        for (const Vec2& v : world.velocities) CHECK(v.norm() <= cfg.max_speed + 1e-9);
    }
}

TEST_CASE("velocity_override mode replaces the velocity with the field") {
    SimConfig cfg;
    cfg.velocity_override = true;
    cfg.repulsion_strength = 0.0;
    sim::WorldState world;
    world.positions = {{250, 250}, {100, 100}};
    world.velocities = {{-3, 2}, {0, 0}};
    const VectorField f = VectorField::constant(2, {2, 0});
    const sim::WorldState next = sim::step_world(world, f, cfg);
    CHECK(next.velocities[0].x == doctest::Approx(2.0));
    CHECK(next.velocities[0].y == doctest::Approx(0.0));
}

TEST_CASE("avg_pairwise_distance matches the printed formula") {
    CHECK(sim::avg_pairwise_distance({{0, 0}, {10, 0}}) == doctest::Approx(5.0));
    CHECK(sim::avg_pairwise_distance({{7, 7}, {7, 7}, {7, 7}}) == doctest::Approx(0.0));
    CHECK(sim::avg_pairwise_distance({{0, 0}, {3, 0}, {0, 4}}) == doctest::Approx(2.0));
    CHECK_THROWS_AS(sim::avg_pairwise_distance({{1, 1}}), std::domain_error);
}

TEST_CASE("avg_pairwise_distance agrees with the brute-force oracle") {
    rng::Prng prng(123);
    for (int trial = 0; trial < 100; ++trial) {
        const int n = 2 + static_cast<int>(prng.next_u64() % 7);  // N <= 8
        std::vector<Vec2> pos;
        for (int i = 0; i < n; ++i) pos.push_back({prng.uniform(0, 500), prng.uniform(0, 500)});
        const double got = sim::avg_pairwise_distance(pos);
        const double want = brute_force_d_avg(pos);
        CHECK(got == doctest::Approx(want).epsilon(1e-12));
    }
}

TEST_CASE("run_episode: degenerate and static runs") {
    SimConfig cfg;
    cfg.steps = 0;
    const VectorField f = VectorField::constant(2, {0, 0});
    const sim::Trajectory t0 = sim::run_episode(11, f, cfg);
    CHECK(t0.d_avg_series.size() == 1);
    const sim::WorldState init = sim::init_world(11, cfg);
    for (size_t i = 0; i < init.positions.size(); ++i) {
        CHECK(t0.final_positions[i].x == init.positions[i].x);
        CHECK(t0.final_positions[i].y == init.positions[i].y);
    }
}

TEST_CASE("run_episode: zero field and zero speeds give a flat series") {
    SimConfig cfg;
    cfg.steps = 20;
    cfg.max_speed = 1e-12;  // forces zero initial speeds up to rounding
    cfg.repulsion_strength = 0.0;
    const VectorField f = VectorField::constant(2, {0, 0});
    const sim::Trajectory t = sim::run_episode(11, f, cfg);
    for (double v : t.d_avg_series) CHECK(v == doctest::Approx(t.d_avg_series[0]).epsilon(1e-9));
}

TEST_CASE("run_episode: a strong inward field contracts the collective") {
    SimConfig cfg;
    cfg.steps = 300;
    const VectorField f = inward_field(3, cfg, 2.0);
    const sim::Trajectory t = sim::run_episode(7, f, cfg);
    CHECK(t.d_avg_series.back() < t.d_avg_series.front());
    CHECK(t.d_avg_series.size() == 301);
}

TEST_CASE("run_episode: containment and determinism over full runs") {
    SimConfig cfg;
    cfg.steps = 100;
    rng::Prng prng(99);
    VectorField f = VectorField::constant(5, {0, 0});
    for (auto& v : f.vectors) v = {prng.uniform(-2, 2), prng.uniform(-2, 2)};

    const sim::Trajectory a = sim::run_episode(21, f, cfg);
    const sim::Trajectory b = sim::run_episode(21, f, cfg);
    REQUIRE(a.d_avg_series.size() == b.d_avg_series.size());
    for (size_t i = 0; i < a.d_avg_series.size(); ++i) CHECK(a.d_avg_series[i] == b.d_avg_series[i]);
    for (const Vec2& p : a.final_positions) {
        CHECK(p.x >= 5.0);
        CHECK(p.x <= 495.0);
        CHECK(p.y >= 5.0);
        CHECK(p.y <= 495.0);
        CHECK(std::isfinite(p.x));
        CHECK(std::isfinite(p.y));
    }
    for (double v : a.d_avg_series) {
        CHECK(v >= 0.0);
        CHECK(std::isfinite(v));
    }
}
