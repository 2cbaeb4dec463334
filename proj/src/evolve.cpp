#include "zapfield/evolve.hpp"

#include <algorithm>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "zapfield/io.hpp"
#include "zapfield/rng.hpp"

namespace zapfield::evolve {

namespace {

// Seed streams, so initialization, variation, and evaluation never collide.
enum SeedStream : std::uint64_t { kInit = 1, kMutation = 2, kEval = 3, kVariation = 4 };

std::uint64_t sub_seed(std::uint64_t seed, SeedStream stream, std::uint64_t index) {
    return rng::mix(rng::mix(seed, stream), index);
}

}  // namespace

void EsConfig::validate() const {
    if (!(sigma_min > 0.0 && sigma_min < sigma_max)) throw std::invalid_argument("need 0 < sigma_min < sigma_max");
    if (!(p_target > 0.0 && p_target < 1.0)) throw std::invalid_argument("p_target must be in (0,1)");
    if (window < 1) throw std::invalid_argument("window must be >= 1");
    if (generations < 0) throw std::invalid_argument("generations must be >= 0");
    if (sigma0 <= 0.0) throw std::invalid_argument("sigma0 must be positive");
}

void GaConfig::validate() const {
    if (pop_size < 1) throw std::invalid_argument("pop_size must be >= 1");
    if (tournament_k < 1 || tournament_k > pop_size)
        throw std::invalid_argument("tournament_k must be in [1, pop_size]");
    if (elitism < 0 || elitism >= pop_size) throw std::invalid_argument("elitism must be < pop_size");
    if (mutation_sigma <= 0.0) throw std::invalid_argument("mutation_sigma must be positive");
    if (generations < 0) throw std::invalid_argument("generations must be >= 0");
    if (crossover_rate < 0.0 || crossover_rate > 1.0) throw std::invalid_argument("crossover_rate in [0,1]");
    if (mutation_rate < 0.0 || mutation_rate > 1.0) throw std::invalid_argument("mutation_rate in [0,1]");
}

std::string EvolutionLog::to_csv() const {
    std::ostringstream out;
    out << "generation,best_fitness,mean_fitness,best_r_distance,best_r_position,sigma\n";
    for (const GenerationRecord& r : records) {
        out << r.generation << ',' << io::format_double(r.best_fitness) << ','
            << io::format_double(r.mean_fitness) << ',' << io::format_double(r.best_r_distance)
            << ',' << io::format_double(r.best_r_position) << ',' << io::format_double(r.sigma)
            << '\n';
    }
    return out.str();
}

p2i::Genome mutate_gaussian(const p2i::Genome& genome, double sigma, std::uint64_t seed) {
    if (sigma <= 0.0) throw std::invalid_argument("sigma must be positive");
    rng::Prng prng(seed);
    p2i::Genome offspring = genome;
    for (double& v : offspring.values) v += sigma * prng.gaussian();
    return offspring;
}

double adapt_step_size(double sigma, const std::deque<int>& window, const EsConfig& cfg) {
    if (window.empty()) throw std::invalid_argument("adaptation requires a non-empty window");
    const size_t count = std::min<size_t>(window.size(), cfg.window);
    int successes = 0;
    for (size_t i = window.size() - count; i < window.size(); ++i) successes += window[i];
    const double p_success = static_cast<double>(successes) / static_cast<double>(count);
    const double next = p_success > cfg.p_target ? sigma * cfg.shrink : sigma * cfg.grow;
    return std::clamp(next, cfg.sigma_min, cfg.sigma_max);
}

EvolutionLog run_es(const EsConfig& cfg, const p2i::ArchConfig& arch,
                    const FitnessFn& fitness, std::uint64_t seed) {
    cfg.validate();
    p2i::Genome parent = p2i::flatten_weights(p2i::new_model(arch, sub_seed(seed, kInit, 0)));
    FitnessValue parent_fit = fitness(parent, sub_seed(seed, kEval, 0));

    EvolutionLog log;
    log.records.push_back({0, parent_fit.combined, parent_fit.combined,
                           parent_fit.r_distance, parent_fit.r_position, cfg.sigma0});

    double sigma = cfg.sigma0;
    std::deque<int> window;
    for (int g = 1; g <= cfg.generations; ++g) {
        const p2i::Genome offspring = mutate_gaussian(parent, sigma, sub_seed(seed, kMutation, g));
        const FitnessValue off_fit = fitness(offspring, sub_seed(seed, kEval, g));
        if (cfg.reevaluate_parent)
            parent_fit = fitness(parent, sub_seed(seed, kEval, static_cast<std::uint64_t>(g) + (1ull << 32)));
        const bool success = off_fit.combined >= parent_fit.combined;
        if (success) {
            parent = offspring;
            parent_fit = off_fit;
        }
        window.push_back(success ? 1 : 0);
        while (static_cast<int>(window.size()) > cfg.window) window.pop_front();
        sigma = adapt_step_size(sigma, window, cfg);

        log.records.push_back({g, parent_fit.combined,
                               (parent_fit.combined + off_fit.combined) / 2.0,
                               parent_fit.r_distance, parent_fit.r_position, sigma});
    }
    log.best_genome = parent;
    return log;
}

int tournament_select(const std::vector<double>& fitnesses, int k, std::uint64_t seed) {
    const int n = static_cast<int>(fitnesses.size());
    if (k < 1 || k > n) throw std::invalid_argument("tournament size must be in [1, pop]");
    rng::Prng prng(seed);
    std::vector<int> indices(n);
    std::iota(indices.begin(), indices.end(), 0);
    int best = -1;
    for (int draw = 0; draw < k; ++draw) {
        // partial Fisher-Yates, distinct entrants
        const int pick = draw + static_cast<int>(prng.next_u64() % static_cast<std::uint64_t>(n - draw));
        std::swap(indices[draw], indices[pick]);
        const int idx = indices[draw];
        if (best < 0 || fitnesses[idx] > fitnesses[best] ||
            (fitnesses[idx] == fitnesses[best] && idx < best))
            best = idx;
    }
    return best;
}

p2i::Genome arithmetic_crossover(const p2i::Genome& p1, const p2i::Genome& p2, double alpha) {
    if (p1.values.size() != p2.values.size())
        throw std::invalid_argument("crossover parents must have equal length");
    if (alpha < 0.0 || alpha > 1.0) throw std::invalid_argument("alpha must be in [0,1]");
    p2i::Genome child;
    child.values.resize(p1.values.size());
    for (size_t i = 0; i < child.values.size(); ++i)
        child.values[i] = alpha * p1.values[i] + (1.0 - alpha) * p2.values[i];
    return child;
}

EvolutionLog run_ga(const GaConfig& cfg, const p2i::ArchConfig& arch,
                    const FitnessFn& fitness, std::uint64_t seed) {
    cfg.validate();

    struct Individual {
        p2i::Genome genome;
        FitnessValue fit;
    };

    std::uint64_t eval_counter = 0;
    std::vector<Individual> pop;
    pop.reserve(cfg.pop_size);
    for (int i = 0; i < cfg.pop_size; ++i) {
        Individual ind;
        ind.genome = p2i::flatten_weights(p2i::new_model(arch, sub_seed(seed, kInit, i)));
        ind.fit = fitness(ind.genome, sub_seed(seed, kEval, eval_counter++));
        pop.push_back(std::move(ind));
    }

    EvolutionLog log;
    auto record = [&](int generation) {
        int best = 0;
        double mean = 0.0;
        for (int i = 0; i < cfg.pop_size; ++i) {
            mean += pop[i].fit.combined;
            if (pop[i].fit.combined > pop[best].fit.combined) best = i;
        }
        log.records.push_back({generation, pop[best].fit.combined, mean / cfg.pop_size,
                               pop[best].fit.r_distance, pop[best].fit.r_position,
                               cfg.mutation_sigma});
        return best;
    };
    int best_idx = record(0);

    for (int g = 1; g <= cfg.generations; ++g) {
        std::vector<int> order(cfg.pop_size);
        std::iota(order.begin(), order.end(), 0);
        std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
            return pop[a].fit.combined > pop[b].fit.combined;
        });
        std::vector<double> fitnesses(cfg.pop_size);
        for (int i = 0; i < cfg.pop_size; ++i) fitnesses[i] = pop[i].fit.combined;

        std::vector<Individual> next;
        next.reserve(cfg.pop_size);
        for (int e = 0; e < cfg.elitism; ++e) next.push_back(pop[order[e]]);

        for (int j = cfg.elitism; j < cfg.pop_size; ++j) {
            rng::Prng prng(sub_seed(seed, kVariation,
                                    static_cast<std::uint64_t>(g) * cfg.pop_size + j));
            const int a = tournament_select(fitnesses, cfg.tournament_k, prng.next_u64());
            const int b = tournament_select(fitnesses, cfg.tournament_k, prng.next_u64());
            p2i::Genome child;
            if (prng.uniform() < cfg.crossover_rate) {
                const double alpha = prng.uniform();
                child = arithmetic_crossover(pop[a].genome, pop[b].genome, alpha);
            } else {
                child = pop[a].genome;
            }
            if (cfg.mutation_rate >= 1.0) {
                child = mutate_gaussian(child, cfg.mutation_sigma, prng.next_u64());
            } else {
                rng::Prng mut(prng.next_u64());
                for (double& v : child.values)
                    if (mut.uniform() < cfg.mutation_rate) v += cfg.mutation_sigma * mut.gaussian();
            }
            Individual ind;
            ind.genome = std::move(child);
            ind.fit = fitness(ind.genome, sub_seed(seed, kEval, eval_counter++));
            next.push_back(std::move(ind));
        }
        pop = std::move(next);
        best_idx = record(g);
    }
    log.best_genome = pop[best_idx].genome;
    return log;
}

}  // namespace zapfield::evolve
