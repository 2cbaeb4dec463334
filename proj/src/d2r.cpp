#include "zapfield/d2r.hpp"

#include <iostream>
#include <numeric>
#include <stdexcept>
#include <tuple>

#include "zapfield/embedding.hpp"
#include "zapfield/external_eval.hpp"
#include "zapfield/render.hpp"
#include "zapfield/rng.hpp"
#include "zapfield/stats.hpp"

namespace zapfield::d2r {

std::string to_string(BehaviorLabel label) {
    return label == BehaviorLabel::Clustering ? "clustering" : "scattering";
}

void EvalConfig::validate() const {
    if (epochs < 1) throw std::invalid_argument("epochs must be >= 1");
    if (std::abs(alpha + beta - 1.0) > 1e-12) throw std::invalid_argument("alpha + beta must equal 1");
    if (slope_threshold <= 0.0) throw std::invalid_argument("slope_threshold must be positive");
    if (cluster_link_factor <= 0.0) throw std::invalid_argument("cluster_link_factor must be positive");
}

BehaviorLabel target_label_for_prompt(std::string_view prompt) {
    const std::string key = embedding::normalize_prompt(prompt);
    if (key.find("cluster") != std::string::npos) return BehaviorLabel::Clustering;
    if (key.find("scatter") != std::string::npos || key.find("spread") != std::string::npos)
        return BehaviorLabel::Scattering;
    throw std::invalid_argument("prompt has no known target label: '" + key + "'");
}

BehaviorLabel classify_distance_trend(const std::vector<double>& series, const EvalConfig& cfg) {
    if (series.size() < 2) throw std::invalid_argument("series too short to classify");
    if (!(series[0] > 0.0)) throw std::invalid_argument("series must start positive");
    const double slope = stats::linreg_slope(series) / series[0];
    return slope < -cfg.slope_threshold ? BehaviorLabel::Clustering : BehaviorLabel::Scattering;
}

namespace {

struct UnionFind {
    std::vector<int> parent;
    explicit UnionFind(size_t n) : parent(n) { std::iota(parent.begin(), parent.end(), 0); }
    int find(int a) {
        while (parent[a] != a) a = parent[a] = parent[parent[a]];
        return a;
    }
    void unite(int a, int b) { parent[find(a)] = find(b); }
};

}  // namespace

BehaviorLabel classify_final_layout(const std::vector<sim::Vec2>& positions,
                                    const EvalConfig& cfg, const sim::SimConfig& sim_cfg) {
    const size_t n = positions.size();
    if (n < 2) throw std::invalid_argument("need at least 2 positions");
    const double link = cfg.cluster_link_factor * 2.0 * sim_cfg.radius;
    UnionFind uf(n);
    for (size_t i = 0; i < n; ++i)
        for (size_t j = i + 1; j < n; ++j)
            if ((positions[i] - positions[j]).norm() <= link)
                uf.unite(static_cast<int>(i), static_cast<int>(j));
    const int root = uf.find(0);
    for (size_t i = 1; i < n; ++i)
        if (uf.find(static_cast<int>(i)) != root) return BehaviorLabel::Scattering;
    return BehaviorLabel::Clustering;
}

std::pair<int, int> epoch_reward(BehaviorLabel target, BehaviorLabel trend, BehaviorLabel layout) {
    return {trend == target ? 1 : 0, layout == target ? 1 : 0};
}

FitnessReport evaluate_fitness(const p2i::Genome& genome, std::string_view prompt,
                               const p2i::ArchConfig& arch, const sim::SimConfig& sim_cfg,
                               const EvalConfig& cfg, std::uint64_t base_seed) {
    cfg.validate();
    const BehaviorLabel target = target_label_for_prompt(prompt);
    const p2i::P2IModel model = p2i::load_weights(arch, genome);
    const sim::VectorField field = p2i::forward(model, embedding::embed(prompt));

    FitnessReport report;
    report.per_epoch.reserve(cfg.epochs);
    int dist_sum = 0, pos_sum = 0;
    for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
        const std::uint64_t epoch_seed = rng::mix(base_seed, static_cast<std::uint64_t>(epoch));
        const sim::Trajectory traj = sim::run_episode(epoch_seed, field, sim_cfg);
        int r_dist = 0, r_pos = 0;
        if (cfg.evaluator == EvaluatorKind::Oracle) {
            const BehaviorLabel trend = classify_distance_trend(traj.d_avg_series, cfg);
            const BehaviorLabel layout = classify_final_layout(traj.final_positions, cfg, sim_cfg);
            std::tie(r_dist, r_pos) = epoch_reward(target, trend, layout);
        } else {
            // failed queries score the epoch criterion 0 and are logged
            try {
                const auto png = render::encode_png(render::plot_distance_series(traj.d_avg_series));
                const BehaviorLabel trend = external_eval::query_external_evaluator(
                    png, "Based on the trend of the plot, answer with one word: clustering or scattering.",
                    cfg.external_endpoint);
                r_dist = trend == target ? 1 : 0;
            } catch (const external_eval::EvaluatorError& err) {
                std::cerr << "external evaluator (distance, epoch " << epoch << "): " << err.what() << '\n';
            }
            try {
                const auto png = render::encode_png(
                    render::plot_final_layout(traj.final_positions, field, sim_cfg));
                const BehaviorLabel layout = external_eval::query_external_evaluator(
                    png, "Do the cells exhibit clustering or scattering? Answer with one word.",
                    cfg.external_endpoint);
                r_pos = layout == target ? 1 : 0;
            } catch (const external_eval::EvaluatorError& err) {
                std::cerr << "external evaluator (position, epoch " << epoch << "): " << err.what() << '\n';
            }
        }
        report.per_epoch.emplace_back(r_dist, r_pos);
        dist_sum += r_dist;
        pos_sum += r_pos;
    }
    report.r_distance = static_cast<double>(dist_sum) / cfg.epochs;
    report.r_position = static_cast<double>(pos_sum) / cfg.epochs;
    report.r_combined = cfg.alpha * report.r_distance + cfg.beta * report.r_position;
    return report;
}

}  // namespace zapfield::d2r
