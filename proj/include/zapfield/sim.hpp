#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

namespace zapfield::sim {

struct Vec2 {
    double x = 0.0;
    double y = 0.0;

    Vec2 operator+(Vec2 o) const { return {x + o.x, y + o.y}; }
    Vec2 operator-(Vec2 o) const { return {x - o.x, y - o.y}; }
    Vec2 operator*(double s) const { return {x * s, y * s}; }
    Vec2& operator+=(Vec2 o) { x += o.x; y += o.y; return *this; }
    double norm() const { return std::hypot(x, y); }
};

struct SimConfig {
    double width = 500.0;
    double height = 500.0;
    int n_cells = 100;
    double radius = 5.0;
    int steps = 500;
    double dt = 1.0;
    double max_speed = 5.0;
    double field_gain = 1.0;
    double repulsion_strength = 1.0;
    // When set, the field replaces the velocity instead of accelerating it.
    bool velocity_override = false;

    void validate() const;  // throws std::invalid_argument
};

// n x n grid of force vectors. Node (ix, iy) sits at
// ((ix + 0.5) * width / n, (iy + 0.5) * height / n); storage is row-major
// with iy as the row: vectors[iy * n + ix].
struct VectorField {
    int n = 2;
    std::vector<Vec2> vectors;

    static VectorField constant(int n, Vec2 v);
    Vec2& at(int ix, int iy) { return vectors[static_cast<size_t>(iy) * n + ix]; }
    Vec2 at(int ix, int iy) const { return vectors[static_cast<size_t>(iy) * n + ix]; }
};

struct WorldState {
    std::vector<Vec2> positions;
    std::vector<Vec2> velocities;
    int time_step = 0;
};

struct Trajectory {
    std::vector<double> d_avg_series;  // length steps + 1, includes t = 0
    std::vector<Vec2> final_positions;
    std::uint64_t seed = 0;
};

WorldState init_world(std::uint64_t seed, const SimConfig& config);

// Bilinear interpolation over node centers; positions outside the node hull
// clamp to the nearest edge cell. Throws std::domain_error outside the arena.
Vec2 sample_field(const VectorField& field, Vec2 pos, const SimConfig& config);

// Mirror about the violated wall at offset radius and negate the
// corresponding velocity component. Identity when already inside.
void apply_reflective_boundary(Vec2& pos, Vec2& vel, const SimConfig& config);

// Per-cell velocity increments from pairwise overlap, equal and opposite
// within each pair. Coincident centers break the tie with a unit vector at
// angle 2*pi*i/N for the lower index i.
std::vector<Vec2> resolve_repulsion(const WorldState& world, const SimConfig& config);

WorldState step_world(const WorldState& world, const VectorField& field, const SimConfig& config);

// Eq. as printed: sum of pair distances over i<j divided by N(N-1).
double avg_pairwise_distance(const std::vector<Vec2>& positions);

Trajectory run_episode(std::uint64_t seed, const VectorField& field, const SimConfig& config);

}  // namespace zapfield::sim
