#pragma once

#include <cstdint>
#include <deque>
#include <functional>
#include <string>
#include <vector>

#include "zapfield/p2i.hpp"

namespace zapfield::evolve {

struct EsConfig {
    double sigma0 = 0.1;
    double p_target = 0.2;
    int window = 5;
    int generations = 50;
    double sigma_min = 1e-6;
    double sigma_max = 5.0;
    double shrink = 0.9;
    double grow = 1.1;
    bool reevaluate_parent = false;

    void validate() const;
};

struct GaConfig {
    int pop_size = 20;
    int tournament_k = 8;
    double mutation_sigma = 0.1;
    int generations = 50;
    int elitism = 1;
    double crossover_rate = 1.0;
    double mutation_rate = 1.0;  // per-gene probability

    void validate() const;
};

struct FitnessValue {
    double combined = 0.0;
    double r_distance = 0.0;
    double r_position = 0.0;
};

// Fitness of one genome under a fixed per-individual evaluation seed;
// evaluations are cached, never repeated for the same individual.
using FitnessFn = std::function<FitnessValue(const p2i::Genome&, std::uint64_t eval_seed)>;

struct GenerationRecord {
    int generation = 0;
    double best_fitness = 0.0;
    double mean_fitness = 0.0;
    double best_r_distance = 0.0;
    double best_r_position = 0.0;
    double sigma = 0.0;  // ES step size; the GA records its mutation sigma
};

struct EvolutionLog {
    std::vector<GenerationRecord> records;  // length generations + 1
    p2i::Genome best_genome;
    std::string to_csv() const;
};

p2i::Genome mutate_gaussian(const p2i::Genome& genome, double sigma, std::uint64_t seed);

// Success-window step-size control: shrink when the success rate over the
// last `window` results exceeds p_target, grow otherwise (boundary grows),
// clamped to [sigma_min, sigma_max].
double adapt_step_size(double sigma, const std::deque<int>& window, const EsConfig& cfg);

// (1+1)-ES: mutate, evaluate, accept on >= (ties accept), adapt sigma.
EvolutionLog run_es(const EsConfig& cfg, const p2i::ArchConfig& arch,
                    const FitnessFn& fitness, std::uint64_t seed);

// k distinct entrants drawn without replacement; winner is the entrant with
// maximal fitness, ties to the lowest index.
int tournament_select(const std::vector<double>& fitnesses, int k, std::uint64_t seed);

p2i::Genome arithmetic_crossover(const p2i::Genome& p1, const p2i::Genome& p2, double alpha);

EvolutionLog run_ga(const GaConfig& cfg, const p2i::ArchConfig& arch,
                    const FitnessFn& fitness, std::uint64_t seed);

}  // namespace zapfield::evolve
