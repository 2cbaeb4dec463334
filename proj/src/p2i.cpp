#include "zapfield/p2i.hpp"

#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "zapfield/io.hpp"
#include "zapfield/rng.hpp"

namespace zapfield::p2i {

std::vector<std::pair<int, int>> ArchConfig::layer_shapes() const {
    std::vector<std::pair<int, int>> shapes;
    int prev = input_dim;
    for (int h : hidden_dims) {
        shapes.emplace_back(prev, h);
        prev = h;
    }
    shapes.emplace_back(prev, output_dim());
    return shapes;
}

void ArchConfig::validate() const {
    if (input_dim < 1) throw std::invalid_argument("input_dim must be >= 1");
    if (grid_n < 1) throw std::invalid_argument("grid_n must be >= 1");
    for (int h : hidden_dims)
        if (h < 1) throw std::invalid_argument("hidden dims must be >= 1");
}

std::size_t param_count(const ArchConfig& arch) {
    arch.validate();
    std::size_t count = 0;
    for (auto [fan_in, fan_out] : arch.layer_shapes())
        count += static_cast<std::size_t>(fan_in) * fan_out + fan_out;
    return count;
}

P2IModel new_model(const ArchConfig& arch, std::uint64_t seed) {
    arch.validate();
    rng::Prng prng(seed);
    P2IModel model;
    model.arch = arch;
    for (auto [fan_in, fan_out] : arch.layer_shapes()) {
        Layer layer;
        layer.fan_in = fan_in;
        layer.fan_out = fan_out;
        layer.weights.resize(static_cast<size_t>(fan_in) * fan_out);
        const double stddev = 1.0 / std::sqrt(static_cast<double>(fan_in));
        for (double& w : layer.weights) w = stddev * prng.gaussian();
        layer.biases.assign(fan_out, 0.0);
        model.layers.push_back(std::move(layer));
    }
    return model;
}

sim::VectorField forward(const P2IModel& model, const embedding::PromptEmbedding& emb) {
    if (static_cast<int>(emb.vector.size()) != model.arch.input_dim)
        throw std::invalid_argument("embedding dimension does not match model input");
    std::vector<double> activation = emb.vector;
    for (size_t l = 0; l < model.layers.size(); ++l) {
        const Layer& layer = model.layers[l];
        std::vector<double> out(layer.fan_out);
        for (int r = 0; r < layer.fan_out; ++r) {
            double acc = layer.biases[r];
            const double* row = &layer.weights[static_cast<size_t>(r) * layer.fan_in];
            for (int c = 0; c < layer.fan_in; ++c) acc += row[c] * activation[c];
            out[r] = acc;
        }
        const bool is_output = (l + 1 == model.layers.size());
        if (!is_output)
            for (double& v : out) v = std::tanh(v);
        activation = std::move(out);
    }
    sim::VectorField field;
    field.n = model.arch.grid_n;
    field.vectors.resize(static_cast<size_t>(field.n) * field.n);
    for (size_t node = 0; node < field.vectors.size(); ++node) {
        field.vectors[node].x = activation[2 * node] * model.arch.output_scale;
        field.vectors[node].y = activation[2 * node + 1] * model.arch.output_scale;
    }
    return field;
}

Genome flatten_weights(const P2IModel& model) {
    Genome genome;
    genome.values.reserve(param_count(model.arch));
    for (const Layer& layer : model.layers) {
        genome.values.insert(genome.values.end(), layer.weights.begin(), layer.weights.end());
        genome.values.insert(genome.values.end(), layer.biases.begin(), layer.biases.end());
    }
    return genome;
}

P2IModel load_weights(const ArchConfig& arch, const Genome& genome) {
    const std::size_t expected = param_count(arch);
    if (genome.values.size() != expected) {
        std::ostringstream msg;
        msg << "genome length mismatch: expected " << expected << ", got " << genome.values.size();
        throw std::invalid_argument(msg.str());
    }
    P2IModel model;
    model.arch = arch;
    size_t offset = 0;
    for (auto [fan_in, fan_out] : arch.layer_shapes()) {
        Layer layer;
        layer.fan_in = fan_in;
        layer.fan_out = fan_out;
        const size_t wn = static_cast<size_t>(fan_in) * fan_out;
        layer.weights.assign(genome.values.begin() + offset, genome.values.begin() + offset + wn);
        offset += wn;
        layer.biases.assign(genome.values.begin() + offset, genome.values.begin() + offset + fan_out);
        offset += fan_out;
        model.layers.push_back(std::move(layer));
    }
    return model;
}

void save_genome(const std::string& path, const ArchConfig& arch, const Genome& genome) {
    nlohmann::json doc;
    doc["arch"] = {{"input_dim", arch.input_dim},
                   {"hidden_dims", arch.hidden_dims},
                   {"grid_n", arch.grid_n},
                   {"output_scale", arch.output_scale}};
    doc["values"] = genome.values;
    io::atomic_write(path, doc.dump());
}

std::pair<ArchConfig, Genome> load_genome(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open genome file: " + path);
    nlohmann::json doc;
    in >> doc;
    ArchConfig arch;
    const auto& a = doc.at("arch");
    arch.input_dim = a.at("input_dim").get<int>();
    arch.hidden_dims = a.at("hidden_dims").get<std::vector<int>>();
    arch.grid_n = a.at("grid_n").get<int>();
    arch.output_scale = a.at("output_scale").get<double>();
    Genome genome;
    genome.values = doc.at("values").get<std::vector<double>>();
    if (genome.values.size() != param_count(arch))
        throw std::runtime_error("genome file values do not match its arch: " + path);
    return {arch, genome};
}

}  // namespace zapfield::p2i
