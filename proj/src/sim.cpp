#include "zapfield/sim.hpp"

#include <algorithm>
#include <stdexcept>

#include "zapfield/rng.hpp"

namespace zapfield::sim {

void SimConfig::validate() const {
    if (width <= 0.0 || height <= 0.0) throw std::invalid_argument("arena dimensions must be positive");
    if (n_cells < 2) throw std::invalid_argument("need at least 2 cells");
    if (radius <= 0.0) throw std::invalid_argument("radius must be positive");
    if (2.0 * radius >= width || 2.0 * radius >= height)
        throw std::invalid_argument("radius too large for arena");
    if (steps < 0) throw std::invalid_argument("steps must be >= 0");
    if (dt <= 0.0) throw std::invalid_argument("dt must be positive");
    if (max_speed <= 0.0) throw std::invalid_argument("max_speed must be positive");
}

VectorField VectorField::constant(int n, Vec2 v) {
    VectorField f;
    f.n = n;
    f.vectors.assign(static_cast<size_t>(n) * n, v);
    return f;
}

WorldState init_world(std::uint64_t seed, const SimConfig& config) {
    config.validate();
    rng::Prng prng(seed);
    WorldState world;
    world.positions.reserve(config.n_cells);
    world.velocities.reserve(config.n_cells);
    for (int i = 0; i < config.n_cells; ++i) {
        const double x = prng.uniform(config.radius, config.width - config.radius);
        const double y = prng.uniform(config.radius, config.height - config.radius);
        world.positions.push_back({x, y});
        const double angle = prng.uniform(0.0, 2.0 * M_PI);
        const double speed = prng.uniform(0.0, config.max_speed);
        world.velocities.push_back({speed * std::cos(angle), speed * std::sin(angle)});
    }
    return world;
}

Vec2 sample_field(const VectorField& field, Vec2 pos, const SimConfig& config) {
    if (pos.x < 0.0 || pos.x > config.width || pos.y < 0.0 || pos.y > config.height)
        throw std::domain_error("position outside arena");
    const int n = field.n;
    const double cw = config.width / n;
    const double ch = config.height / n;
    // continuous node coordinates; node ix center is at (ix + 0.5) * cw
    double gx = pos.x / cw - 0.5;
    double gy = pos.y / ch - 0.5;
    gx = std::clamp(gx, 0.0, static_cast<double>(n - 1));
    gy = std::clamp(gy, 0.0, static_cast<double>(n - 1));
    const int ix0 = std::min(static_cast<int>(gx), n - 2 >= 0 ? n - 2 : 0);
    const int iy0 = std::min(static_cast<int>(gy), n - 2 >= 0 ? n - 2 : 0);
    const int ix1 = std::min(ix0 + 1, n - 1);
    const int iy1 = std::min(iy0 + 1, n - 1);
    const double tx = gx - ix0;
    const double ty = gy - iy0;
    const Vec2 v00 = field.at(ix0, iy0);
    const Vec2 v10 = field.at(ix1, iy0);
    const Vec2 v01 = field.at(ix0, iy1);
    const Vec2 v11 = field.at(ix1, iy1);
    const double x = (1 - tx) * (1 - ty) * v00.x + tx * (1 - ty) * v10.x +
                     (1 - tx) * ty * v01.x + tx * ty * v11.x;
    const double y = (1 - tx) * (1 - ty) * v00.y + tx * (1 - ty) * v10.y +
                     (1 - tx) * ty * v01.y + tx * ty * v11.y;
    return {x, y};
}

void apply_reflective_boundary(Vec2& pos, Vec2& vel, const SimConfig& config) {
    const double xlo = config.radius, xhi = config.width - config.radius;
    const double ylo = config.radius, yhi = config.height - config.radius;
    for (int guard = 0; guard < 64; ++guard) {
        if (pos.x < xlo) { pos.x = 2.0 * xlo - pos.x; vel.x = -vel.x; continue; }
        if (pos.x > xhi) { pos.x = 2.0 * xhi - pos.x; vel.x = -vel.x; continue; }
        break;
    }
    for (int guard = 0; guard < 64; ++guard) {
        if (pos.y < ylo) { pos.y = 2.0 * ylo - pos.y; vel.y = -vel.y; continue; }
        if (pos.y > yhi) { pos.y = 2.0 * yhi - pos.y; vel.y = -vel.y; continue; }
        break;
    }
    pos.x = std::clamp(pos.x, xlo, xhi);
    pos.y = std::clamp(pos.y, ylo, yhi);
}

std::vector<Vec2> resolve_repulsion(const WorldState& world, const SimConfig& config) {
    const size_t n = world.positions.size();
    std::vector<Vec2> inc(n, Vec2{});
    const double reach = 2.0 * config.radius;
    for (size_t i = 0; i < n; ++i) {
        for (size_t j = i + 1; j < n; ++j) {
            const Vec2 diff = world.positions[i] - world.positions[j];
            const double d = diff.norm();
            if (d >= reach) continue;
            const double mag = config.repulsion_strength * (reach - d) / reach;
            Vec2 dir;
            if (d > 0.0) {
                dir = diff * (1.0 / d);
            } else {
                const double angle = 2.0 * M_PI * static_cast<double>(i) / static_cast<double>(n);
                dir = {std::cos(angle), std::sin(angle)};
            }
            inc[i] += dir * mag;
            inc[j] += dir * (-mag);
        }
    }
    return inc;
}

WorldState step_world(const WorldState& world, const VectorField& field, const SimConfig& config) {
    WorldState next = world;
    const std::vector<Vec2> repulsion = resolve_repulsion(world, config);
    for (size_t i = 0; i < next.positions.size(); ++i) {
        Vec2 pos = next.positions[i];
        Vec2 vel = next.velocities[i];
        const Vec2 force = sample_field(field, pos, config) * config.field_gain;
        if (config.velocity_override) {
            vel = force;
        } else {
            vel += force * config.dt;
        }
        vel += repulsion[i];
        const double speed = vel.norm();
        if (speed > config.max_speed) vel = vel * (config.max_speed / speed);
        pos += vel * config.dt;
        apply_reflective_boundary(pos, vel, config);
        next.positions[i] = pos;
        next.velocities[i] = vel;
    }
    next.time_step = world.time_step + 1;
    return next;
}

double avg_pairwise_distance(const std::vector<Vec2>& positions) {
    const size_t n = positions.size();
    if (n < 2) throw std::domain_error("need at least 2 positions");
    double sum = 0.0;
    for (size_t i = 0; i < n; ++i)
        for (size_t j = i + 1; j < n; ++j)
            sum += (positions[i] - positions[j]).norm();
    return sum / (static_cast<double>(n) * static_cast<double>(n - 1));
}

Trajectory run_episode(std::uint64_t seed, const VectorField& field, const SimConfig& config) {
    WorldState world = init_world(seed, config);
    Trajectory traj;
    traj.seed = seed;
    traj.d_avg_series.reserve(config.steps + 1);
    traj.d_avg_series.push_back(avg_pairwise_distance(world.positions));
    for (int s = 0; s < config.steps; ++s) {
        world = step_world(world, field, config);
        traj.d_avg_series.push_back(avg_pairwise_distance(world.positions));
    }
    traj.final_positions = world.positions;
    return traj;
}

}  // namespace zapfield::sim
