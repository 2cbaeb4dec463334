#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "zapfield/embedding.hpp"
#include "zapfield/sim.hpp"

namespace zapfield::p2i {

struct ArchConfig {
    int input_dim = embedding::kDim;
    std::vector<int> hidden_dims = {64};
    int grid_n = 2;
    double output_scale = 1.0;

    int output_dim() const { return grid_n * grid_n * 2; }
    // fan_in/fan_out pairs for every affine layer, in order
    std::vector<std::pair<int, int>> layer_shapes() const;
    void validate() const;
};

struct Layer {
    int fan_in = 0;
    int fan_out = 0;
    std::vector<double> weights;  // fan_out x fan_in, row-major
    std::vector<double> biases;   // fan_out
};

struct P2IModel {
    ArchConfig arch;
    std::vector<Layer> layers;
};

struct Genome {
    std::vector<double> values;
};

std::size_t param_count(const ArchConfig& arch);

// Gaussian weights with per-layer std 1/sqrt(fan_in), zero biases.
P2IModel new_model(const ArchConfig& arch, std::uint64_t seed);

// tanh hidden layers, linear output scaled by output_scale, reshaped
// row-major into grid_n x grid_n nodes with the x component first.
sim::VectorField forward(const P2IModel& model, const embedding::PromptEmbedding& emb);

Genome flatten_weights(const P2IModel& model);
P2IModel load_weights(const ArchConfig& arch, const Genome& genome);

// JSON persistence: {"arch": {...}, "values": [...]}
void save_genome(const std::string& path, const ArchConfig& arch, const Genome& genome);
std::pair<ArchConfig, Genome> load_genome(const std::string& path);

}  // namespace zapfield::p2i
