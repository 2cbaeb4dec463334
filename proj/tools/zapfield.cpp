#include <atomic>
#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <mutex>
#include <sstream>
#include <thread>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "zapfield/d2r.hpp"
#include "zapfield/embedding.hpp"
#include "zapfield/evolve.hpp"
#include "zapfield/io.hpp"
#include "zapfield/p2i.hpp"
#include "zapfield/render.hpp"
#include "zapfield/rng.hpp"
#include "zapfield/sim.hpp"
#include "zapfield/stats.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace zapfield;

namespace {

std::string csv_escape(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += "\"\"";
        else out += c;
    }
    out += "\"";
    return out;
}

json sim_config_to_json(const sim::SimConfig& c) {
    return json{{"width", c.width},
                {"height", c.height},
                {"n_cells", c.n_cells},
                {"radius", c.radius},
                {"steps", c.steps},
                {"dt", c.dt},
                {"max_speed", c.max_speed},
                {"field_gain", c.field_gain},
                {"repulsion_strength", c.repulsion_strength},
                {"velocity_override", c.velocity_override}};
}

void sim_config_from_json(const json& j, sim::SimConfig& c) {
    if (j.contains("width")) c.width = j["width"].get<double>();
    if (j.contains("height")) c.height = j["height"].get<double>();
    if (j.contains("n_cells")) c.n_cells = j["n_cells"].get<int>();
    if (j.contains("radius")) c.radius = j["radius"].get<double>();
    if (j.contains("steps")) c.steps = j["steps"].get<int>();
    if (j.contains("dt")) c.dt = j["dt"].get<double>();
    if (j.contains("max_speed")) c.max_speed = j["max_speed"].get<double>();
    if (j.contains("field_gain")) c.field_gain = j["field_gain"].get<double>();
    if (j.contains("repulsion_strength")) c.repulsion_strength = j["repulsion_strength"].get<double>();
    if (j.contains("velocity_override")) c.velocity_override = j["velocity_override"].get<bool>();
}

void write_trajectory(const std::string& prefix, const sim::Trajectory& traj,
                      const sim::SimConfig& config) {
    std::ostringstream csv;
    csv << "step,d_avg\n";
    for (size_t i = 0; i < traj.d_avg_series.size(); ++i)
        csv << i << ',' << io::format_double(traj.d_avg_series[i]) << '\n';
    io::atomic_write(prefix + ".csv", csv.str());

    json doc;
    doc["seed"] = traj.seed;
    doc["config"] = sim_config_to_json(config);
    json positions = json::array();
    for (const sim::Vec2& p : traj.final_positions) positions.push_back({p.x, p.y});
    doc["final_positions"] = positions;
    io::atomic_write(prefix + ".json", doc.dump(2));
}

json report_to_json(const d2r::FitnessReport& report) {
    json per_epoch = json::array();
    for (auto [d, p] : report.per_epoch) per_epoch.push_back({d, p});
    return json{{"r_distance", report.r_distance},
                {"r_position", report.r_position},
                {"r_combined", report.r_combined},
                {"per_epoch", per_epoch}};
}

struct Experiment {
    std::string prompt = "cluster";
    std::vector<int> grid_sizes = {2, 3, 5, 10};
    int seeds = 10;
    std::string optimizer = "es";
    std::uint64_t base_seed = 1;
    int jobs = static_cast<int>(std::thread::hardware_concurrency());
    std::string output_dir = "runs";
    std::vector<int> hidden_dims = {64};
    sim::SimConfig sim_cfg;
    d2r::EvalConfig eval_cfg;
    evolve::EsConfig es_cfg;
    evolve::GaConfig ga_cfg;
};

void experiment_from_json(const json& j, Experiment& exp) {
    if (j.contains("prompt")) exp.prompt = j["prompt"].get<std::string>();
    if (j.contains("grid_sizes")) exp.grid_sizes = j["grid_sizes"].get<std::vector<int>>();
    if (j.contains("seeds")) exp.seeds = j["seeds"].get<int>();
    if (j.contains("optimizer")) exp.optimizer = j["optimizer"].get<std::string>();
    if (j.contains("base_seed")) exp.base_seed = j["base_seed"].get<std::uint64_t>();
    if (j.contains("output_dir")) exp.output_dir = j["output_dir"].get<std::string>();
    if (j.contains("hidden_dims")) exp.hidden_dims = j["hidden_dims"].get<std::vector<int>>();
    if (j.contains("sim")) sim_config_from_json(j["sim"], exp.sim_cfg);
    if (j.contains("eval")) {
        const json& e = j["eval"];
        if (e.contains("epochs")) exp.eval_cfg.epochs = e["epochs"].get<int>();
        if (e.contains("alpha")) exp.eval_cfg.alpha = e["alpha"].get<double>();
        if (e.contains("beta")) exp.eval_cfg.beta = e["beta"].get<double>();
        if (e.contains("slope_threshold")) exp.eval_cfg.slope_threshold = e["slope_threshold"].get<double>();
        if (e.contains("cluster_link_factor"))
            exp.eval_cfg.cluster_link_factor = e["cluster_link_factor"].get<double>();
    }
    if (j.contains("es")) {
        const json& e = j["es"];
        if (e.contains("sigma0")) exp.es_cfg.sigma0 = e["sigma0"].get<double>();
        if (e.contains("generations")) exp.es_cfg.generations = e["generations"].get<int>();
        if (e.contains("p_target")) exp.es_cfg.p_target = e["p_target"].get<double>();
        if (e.contains("window")) exp.es_cfg.window = e["window"].get<int>();
    }
    if (j.contains("ga")) {
        const json& g = j["ga"];
        if (g.contains("pop_size")) exp.ga_cfg.pop_size = g["pop_size"].get<int>();
        if (g.contains("tournament_k")) exp.ga_cfg.tournament_k = g["tournament_k"].get<int>();
        if (g.contains("mutation_sigma")) exp.ga_cfg.mutation_sigma = g["mutation_sigma"].get<double>();
        if (g.contains("generations")) exp.ga_cfg.generations = g["generations"].get<int>();
        if (g.contains("elitism")) exp.ga_cfg.elitism = g["elitism"].get<int>();
        if (g.contains("crossover_rate")) exp.ga_cfg.crossover_rate = g["crossover_rate"].get<double>();
    }
}

d2r::EvalConfig resolve_evaluator(d2r::EvalConfig cfg, const std::string& mode) {
    if (mode == "external") {
        const char* url = std::getenv("ZAPFIELD_EVALUATOR_URL");
        if (!url || !*url)
            throw std::runtime_error("external evaluator selected but ZAPFIELD_EVALUATOR_URL is not set");
        cfg.evaluator = d2r::EvaluatorKind::External;
        cfg.external_endpoint = url;
    }
    return cfg;
}

struct RunSpec {
    int grid = 0;
    int seed_index = 0;
    std::uint64_t run_seed = 0;
    fs::path dir;
};

bool run_is_complete(const fs::path& dir) {
    std::ifstream in(dir / "manifest.json");
    if (!in) return false;
    try {
        json m;
        in >> m;
        return m.value("status", "") == "complete";
    } catch (const json::exception&) {
        return false;  // corrupt manifest: redo the run
    }
}

int cmd_evolve_run(const Experiment& exp) {
    fs::create_directories(exp.output_dir);
    std::vector<RunSpec> specs;
    for (int grid : exp.grid_sizes) {
        for (int k = 0; k < exp.seeds; ++k) {
            RunSpec spec;
            spec.grid = grid;
            spec.seed_index = k;
            spec.run_seed = rng::mix(rng::mix(exp.base_seed, static_cast<std::uint64_t>(grid)),
                                     static_cast<std::uint64_t>(k));
            std::ostringstream name;
            name << exp.optimizer << "_g" << grid << "_s" << k;
            spec.dir = fs::path(exp.output_dir) / name.str();
            specs.push_back(std::move(spec));
        }
    }

    std::mutex print_mutex;
    std::atomic<size_t> cursor{0};
    std::atomic<int> failures{0};

    auto worker = [&]() {
        while (true) {
            const size_t i = cursor.fetch_add(1);
            if (i >= specs.size()) return;
            const RunSpec& spec = specs[i];
            try {
                if (run_is_complete(spec.dir)) {
                    std::lock_guard lock(print_mutex);
                    std::cout << spec.dir.string() << ": already complete, skipping\n";
                    continue;
                }
                fs::create_directories(spec.dir);
                p2i::ArchConfig arch;
                arch.hidden_dims = exp.hidden_dims;
                arch.grid_n = spec.grid;
                const evolve::FitnessFn fitness = [&](const p2i::Genome& g, std::uint64_t eval_seed) {
                    const d2r::FitnessReport r =
                        d2r::evaluate_fitness(g, exp.prompt, arch, exp.sim_cfg, exp.eval_cfg, eval_seed);
                    return evolve::FitnessValue{r.r_combined, r.r_distance, r.r_position};
                };
                const auto start = std::chrono::steady_clock::now();
                evolve::EvolutionLog log;
                if (exp.optimizer == "es")
                    log = evolve::run_es(exp.es_cfg, arch, fitness, spec.run_seed);
                else
                    log = evolve::run_ga(exp.ga_cfg, arch, fitness, spec.run_seed);
                const double wall =
                    std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

                io::atomic_write((spec.dir / "log.csv").string(), log.to_csv());
                p2i::save_genome((spec.dir / "best_genome.json").string(), arch, log.best_genome);

                json manifest;
                manifest["status"] = "complete";
                manifest["optimizer"] = exp.optimizer;
                manifest["grid"] = spec.grid;
                manifest["seed_index"] = spec.seed_index;
                manifest["run_seed"] = spec.run_seed;
                manifest["prompt"] = exp.prompt;
                manifest["deterministic"] = exp.eval_cfg.evaluator == d2r::EvaluatorKind::Oracle;
                manifest["wall_time_seconds"] = wall;
                manifest["artifacts"] = {{"log", "log.csv"}, {"best_genome", "best_genome.json"}};
                manifest["config"] = {
                    {"sim", sim_config_to_json(exp.sim_cfg)},
                    {"eval",
                     {{"epochs", exp.eval_cfg.epochs},
                      {"alpha", exp.eval_cfg.alpha},
                      {"beta", exp.eval_cfg.beta},
                      {"slope_threshold", exp.eval_cfg.slope_threshold},
                      {"cluster_link_factor", exp.eval_cfg.cluster_link_factor}}},
                    {"hidden_dims", exp.hidden_dims}};
                if (exp.optimizer == "es") {
                    manifest["config"]["es"] = {{"sigma0", exp.es_cfg.sigma0},
                                                {"p_target", exp.es_cfg.p_target},
                                                {"window", exp.es_cfg.window},
                                                {"generations", exp.es_cfg.generations}};
                } else {
                    manifest["config"]["ga"] = {{"pop_size", exp.ga_cfg.pop_size},
                                                {"tournament_k", exp.ga_cfg.tournament_k},
                                                {"mutation_sigma", exp.ga_cfg.mutation_sigma},
                                                {"generations", exp.ga_cfg.generations},
                                                {"elitism", exp.ga_cfg.elitism},
                                                {"crossover_rate", exp.ga_cfg.crossover_rate}};
                }
                io::atomic_write((spec.dir / "manifest.json").string(), manifest.dump(2));

                std::lock_guard lock(print_mutex);
                std::cout << spec.dir.string() << ": best " << log.records.back().best_fitness
                          << " (" << wall << " s)\n";
            } catch (const std::exception& e) {
                failures.fetch_add(1);
                std::lock_guard lock(print_mutex);
                std::cerr << spec.dir.string() << ": FAILED: " << e.what() << '\n';
            }
        }
    };

    const int jobs = std::max(1, std::min<int>(exp.jobs, static_cast<int>(specs.size())));
    std::vector<std::thread> threads;
    threads.reserve(jobs);
    for (int t = 0; t < jobs; ++t) threads.emplace_back(worker);
    for (auto& t : threads) t.join();
    return failures.load() == 0 ? 0 : 1;
}

// first and last best_fitness column from a run log CSV
std::pair<double, double> read_log_endpoints(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path.string());
    std::string line;
    std::getline(in, line);  // header
    double first = 0.0, last = 0.0;
    bool have_first = false;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const size_t c1 = line.find(',');
        const size_t c2 = line.find(',', c1 + 1);
        const double best = std::stod(line.substr(c1 + 1, c2 - c1 - 1));
        if (!have_first) {
            first = best;
            have_first = true;
        }
        last = best;
    }
    if (!have_first) throw std::runtime_error("empty log: " + path.string());
    return {first, last};
}

int cmd_compare_run(const std::string& dir, const std::string& out_path) {
    stats::PairedSamples samples;
    std::vector<fs::path> logs;
    for (const auto& entry : fs::recursive_directory_iterator(dir))
        if (entry.is_regular_file() && entry.path().filename() == "log.csv")
            logs.push_back(entry.path());
    std::sort(logs.begin(), logs.end());
    if (logs.size() < 5)
        throw std::runtime_error("need at least 5 completed run logs, found " +
                                 std::to_string(logs.size()));
    for (const fs::path& log : logs) {
        const auto [first, last] = read_log_endpoints(log);
        samples.first.push_back(first);
        samples.second.push_back(last);
    }
    const stats::WilcoxonResult w = stats::wilcoxon_signed_rank(samples);
    double mean_initial = 0.0, mean_final = 0.0;
    for (size_t i = 0; i < samples.first.size(); ++i) {
        mean_initial += samples.first[i];
        mean_final += samples.second[i];
    }
    mean_initial /= static_cast<double>(samples.first.size());
    mean_final /= static_cast<double>(samples.first.size());

    json report = {{"n", samples.first.size()},
                   {"W", w.statistic},
                   {"p_value", w.p_value},
                   {"mean_initial", mean_initial},
                   {"mean_final", mean_final}};
    std::cout << report.dump(2) << '\n';
    std::cout << "Wilcoxon signed-rank over " << samples.first.size() << " runs: W = "
              << w.statistic << ", two-sided p = " << w.p_value << "\nmean best fitness "
              << mean_initial << " (generation 0) -> " << mean_final << " (final)\n";
    if (!out_path.empty()) io::atomic_write(out_path, report.dump(2));
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"zapfield: prompt-driven vector-field control of a simulated cellular collective"};
    app.require_subcommand(1);

    // ---- simulate ----
    auto* sim_cmd = app.add_subcommand("simulate", "run one episode and export the trajectory");
    std::uint64_t sim_seed = 1;
    std::string genome_path, constant_field, sim_prompt = "cluster", sim_out = "trajectory";
    bool render_plots = false;
    int sim_grid = 2;
    sim::SimConfig sim_cfg;
    sim_cmd->add_option("--seed", sim_seed, "episode seed");
    sim_cmd->add_option("--genome", genome_path, "genome JSON file driving the field");
    sim_cmd->add_option("--prompt", sim_prompt, "prompt fed to the controller (with --genome)");
    sim_cmd->add_option("--constant-field", constant_field, "uniform field as dx,dy");
    sim_cmd->add_option("--grid", sim_grid, "grid resolution for --constant-field");
    sim_cmd->add_option("--steps", sim_cfg.steps, "simulation steps");
    sim_cmd->add_option("--n", sim_cfg.n_cells, "number of cells");
    sim_cmd->add_option("--dt", sim_cfg.dt, "time step");
    sim_cmd->add_option("--max-speed", sim_cfg.max_speed, "speed cap");
    sim_cmd->add_option("--field-gain", sim_cfg.field_gain, "field force gain");
    sim_cmd->add_option("--repulsion", sim_cfg.repulsion_strength, "repulsion strength");
    sim_cmd->add_flag("--velocity-override", sim_cfg.velocity_override,
                      "field replaces velocity instead of accelerating it");
    sim_cmd->add_option("--out", sim_out, "output prefix");
    sim_cmd->add_flag("--render", render_plots, "also write the evaluator PNG plots");

    // ---- evolve ----
    auto* evolve_cmd = app.add_subcommand("evolve", "run evolution campaigns across grids and seeds");
    Experiment exp;
    std::string config_path, evaluator_mode = "oracle";
    bool paper_scale = false;
    auto* o_prompt = evolve_cmd->add_option("--prompt", exp.prompt, "target prompt");
    auto* o_grids = evolve_cmd->add_option("--grids", exp.grid_sizes, "grid sizes")->delimiter(',');
    auto* o_seeds = evolve_cmd->add_option("--seeds", exp.seeds, "number of seeds per grid");
    auto* o_opt = evolve_cmd->add_option("--optimizer", exp.optimizer, "es or ga")
                      ->check(CLI::IsMember({"es", "ga"}));
    auto* o_base = evolve_cmd->add_option("--base-seed", exp.base_seed, "base seed of the seed ladder");
    auto* o_out = evolve_cmd->add_option("--out", exp.output_dir, "output directory");
    auto* o_jobs = evolve_cmd->add_option("--jobs", exp.jobs, "parallel runs");
    auto* o_gens = evolve_cmd->add_option("--generations", exp.es_cfg.generations,
                                          "generations (applies to the chosen optimizer)");
    auto* o_epochs = evolve_cmd->add_option("--epochs", exp.eval_cfg.epochs, "fitness epochs E");
    auto* o_steps = evolve_cmd->add_option("--steps", exp.sim_cfg.steps, "simulation steps");
    auto* o_pop = evolve_cmd->add_option("--pop", exp.ga_cfg.pop_size, "GA population size");
    auto* o_tourn = evolve_cmd->add_option("--tournament", exp.ga_cfg.tournament_k, "GA tournament size");
    evolve_cmd->add_option("--config", config_path, "JSON experiment config file");
    evolve_cmd->add_option("--evaluator", evaluator_mode, "oracle or external")
        ->check(CLI::IsMember({"oracle", "external"}));
    evolve_cmd->add_flag("--paper-scale", paper_scale, "paper-scale profile: E=30, seeds=30");

    // ---- evaluate ----
    auto* eval_cmd = app.add_subcommand("evaluate", "score one genome against a prompt");
    std::string eval_genome, eval_prompt = "cluster", eval_mode = "oracle";
    std::uint64_t eval_seed = 1;
    int eval_epochs = 5, eval_steps = 500;
    eval_cmd->add_option("--genome", eval_genome, "genome JSON file")->required();
    eval_cmd->add_option("--prompt", eval_prompt, "target prompt");
    eval_cmd->add_option("--seed", eval_seed, "evaluation base seed");
    eval_cmd->add_option("--epochs", eval_epochs, "fitness epochs E");
    eval_cmd->add_option("--steps", eval_steps, "simulation steps");
    eval_cmd->add_option("--evaluator", eval_mode, "oracle or external")
        ->check(CLI::IsMember({"oracle", "external"}));

    // ---- compare ----
    auto* compare_cmd = app.add_subcommand("compare", "Wilcoxon test between generation 0 and final");
    std::string compare_dir, compare_out;
    compare_cmd->add_option("--dir", compare_dir, "directory of run logs")->required();
    compare_cmd->add_option("--out", compare_out, "write the JSON report here too");

    // ---- embed ----
    auto* embed_cmd = app.add_subcommand("embed", "cosine-similarity matrix of prompt embeddings");
    std::vector<std::string> prompts;
    std::string table_path;
    embed_cmd->add_option("prompts", prompts, "prompts to compare")->required();
    embed_cmd->add_option("--table", table_path, "embedding table JSON file");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (*sim_cmd) {
            sim::VectorField field;
            if (!constant_field.empty()) {
                const size_t comma = constant_field.find(',');
                if (comma == std::string::npos) {
                    std::cerr << "--constant-field expects dx,dy\n";
                    return 2;
                }
                const double dx = std::stod(constant_field.substr(0, comma));
                const double dy = std::stod(constant_field.substr(comma + 1));
                field = sim::VectorField::constant(sim_grid, {dx, dy});
            } else if (!genome_path.empty()) {
                const auto [arch, genome] = p2i::load_genome(genome_path);
                const p2i::P2IModel model = p2i::load_weights(arch, genome);
                field = p2i::forward(model, embedding::embed(sim_prompt));
            } else {
                std::cerr << "simulate needs --genome or --constant-field\n";
                return 2;
            }
            const sim::Trajectory traj = sim::run_episode(sim_seed, field, sim_cfg);
            write_trajectory(sim_out, traj, sim_cfg);
            if (render_plots) {
                io::atomic_write(sim_out + "_distance.png",
                                 render::encode_png(render::plot_distance_series(traj.d_avg_series)));
                io::atomic_write(sim_out + "_layout.png",
                                 render::encode_png(
                                     render::plot_final_layout(traj.final_positions, field, sim_cfg)));
            }
            return 0;
        }

        if (*evolve_cmd) {
            // precedence: built-in defaults < config file < explicit flags
            if (!config_path.empty()) {
                Experiment from_file;
                std::ifstream in(config_path);
                if (!in) throw std::runtime_error("cannot open config: " + config_path);
                json doc;
                in >> doc;
                experiment_from_json(doc, from_file);
                std::swap(exp, from_file);
                if (o_prompt->count()) exp.prompt = from_file.prompt;
                if (o_grids->count()) exp.grid_sizes = from_file.grid_sizes;
                if (o_seeds->count()) exp.seeds = from_file.seeds;
                if (o_opt->count()) exp.optimizer = from_file.optimizer;
                if (o_base->count()) exp.base_seed = from_file.base_seed;
                if (o_out->count()) exp.output_dir = from_file.output_dir;
                if (o_jobs->count()) exp.jobs = from_file.jobs;
                if (o_gens->count()) exp.es_cfg.generations = from_file.es_cfg.generations;
                if (o_epochs->count()) exp.eval_cfg.epochs = from_file.eval_cfg.epochs;
                if (o_steps->count()) exp.sim_cfg.steps = from_file.sim_cfg.steps;
                if (o_pop->count()) exp.ga_cfg.pop_size = from_file.ga_cfg.pop_size;
                if (o_tourn->count()) exp.ga_cfg.tournament_k = from_file.ga_cfg.tournament_k;
            }
            if (paper_scale) {
                exp.eval_cfg.epochs = 30;
                exp.seeds = 30;
                if (!o_gens->count()) exp.es_cfg.generations = 100;
            }
            if (o_gens->count() || paper_scale) {
                if (exp.optimizer == "ga" && o_gens->count())
                    exp.ga_cfg.generations = exp.es_cfg.generations;
            }
            exp.eval_cfg = resolve_evaluator(exp.eval_cfg, evaluator_mode);
            return cmd_evolve_run(exp);
        }

        if (*eval_cmd) {
            const auto [arch, genome] = p2i::load_genome(eval_genome);
            d2r::EvalConfig cfg;
            cfg.epochs = eval_epochs;
            cfg = resolve_evaluator(cfg, eval_mode);
            sim::SimConfig scfg;
            scfg.steps = eval_steps;
            const d2r::FitnessReport report =
                d2r::evaluate_fitness(genome, eval_prompt, arch, scfg, cfg, eval_seed);
            std::cout << report_to_json(report).dump(2) << '\n';
            return 0;
        }

        if (*compare_cmd) return cmd_compare_run(compare_dir, compare_out);

        if (*embed_cmd) {
            embedding::Embedder embedder;
            if (!table_path.empty()) embedder.load_table(table_path);
            std::vector<embedding::PromptEmbedding> embs;
            embs.reserve(prompts.size());
            for (const std::string& p : prompts) embs.push_back(embedder.embed(p));
            std::ostringstream out;
            out << "prompt";
            for (const std::string& p : prompts) out << ',' << csv_escape(p);
            out << '\n';
            for (size_t i = 0; i < embs.size(); ++i) {
                out << csv_escape(prompts[i]);
                for (size_t j = 0; j < embs.size(); ++j)
                    out << ',' << io::format_double(embedding::cosine_similarity(embs[i], embs[j]));
                out << '\n';
            }
            std::cout << out.str();
            return 0;
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
