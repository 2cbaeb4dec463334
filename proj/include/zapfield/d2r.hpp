#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "zapfield/p2i.hpp"
#include "zapfield/sim.hpp"

namespace zapfield::d2r {

enum class BehaviorLabel { Clustering, Scattering };

std::string to_string(BehaviorLabel label);

enum class EvaluatorKind { Oracle, External };

struct EvalConfig {
    int epochs = 30;
    double alpha = 0.5;
    double beta = 0.5;
    // trend threshold, as a fraction of the initial D_avg per step
    double slope_threshold = 1e-4;
    // linkage radius = cluster_link_factor * 2 * radius
    double cluster_link_factor = 3.0;
    EvaluatorKind evaluator = EvaluatorKind::Oracle;
    std::string external_endpoint;

    void validate() const;
};

struct FitnessReport {
    double r_distance = 0.0;
    double r_position = 0.0;
    double r_combined = 0.0;
    std::vector<std::pair<int, int>> per_epoch;  // (r_dist_i, r_pos_i)
};

// Keyword mapping of free-text prompts onto the closed label set; unknown
// prompts throw std::invalid_argument.
BehaviorLabel target_label_for_prompt(std::string_view prompt);

// Least-squares slope of the series against step index, normalized by
// series[0]; below -slope_threshold reads as Clustering, everything else
// (ties, flat) as Scattering.
BehaviorLabel classify_distance_trend(const std::vector<double>& series, const EvalConfig& cfg);

// Single connected component of the linkage graph (boundary inclusive)
// reads as Clustering.
BehaviorLabel classify_final_layout(const std::vector<sim::Vec2>& positions,
                                    const EvalConfig& cfg, const sim::SimConfig& sim_cfg);

std::pair<int, int> epoch_reward(BehaviorLabel target, BehaviorLabel trend, BehaviorLabel layout);

// Full evaluation protocol: E independently seeded episodes under the field
// the genome produces for the prompt, binary rewards per epoch, averaged and
// alpha/beta combined. Epoch seeds derive from (base_seed, epoch index).
FitnessReport evaluate_fitness(const p2i::Genome& genome, std::string_view prompt,
                               const p2i::ArchConfig& arch, const sim::SimConfig& sim_cfg,
                               const EvalConfig& cfg, std::uint64_t base_seed);

}  // namespace zapfield::d2r
