#include "zapfield/embedding.hpp"

#include <cctype>
#include <cmath>
#include <fstream>
#include <stdexcept>

#include <json.hpp>

#include "zapfield/rng.hpp"

namespace zapfield::embedding {

std::string normalize_prompt(std::string_view prompt) {
    size_t begin = 0, end = prompt.size();
    while (begin < end && std::isspace(static_cast<unsigned char>(prompt[begin]))) ++begin;
    while (end > begin && std::isspace(static_cast<unsigned char>(prompt[end - 1]))) --end;
    std::string out;
    out.reserve(end - begin);
    for (size_t i = begin; i < end; ++i)
        out.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(prompt[i]))));
    return out;
}

namespace {

void normalize_vector(std::vector<double>& v) {
    double sq = 0.0;
    for (double x : v) sq += x * x;
    const double norm = std::sqrt(sq);
    if (norm == 0.0 || !std::isfinite(norm))
        throw std::runtime_error("embedding vector has zero or non-finite norm");
    for (double& x : v) x /= norm;
}

}  // namespace

PromptEmbedding Embedder::embed(std::string_view prompt) const {
    const std::string key = normalize_prompt(prompt);
    if (key.empty()) throw std::invalid_argument("empty prompt");
    PromptEmbedding result;
    result.prompt = key;
    if (auto it = table_.find(key); it != table_.end()) {
        result.vector = it->second;
        return result;
    }
    rng::Prng prng(rng::fnv1a(key));
    result.vector.resize(kDim);
    for (double& x : result.vector) x = prng.gaussian();
    normalize_vector(result.vector);
    return result;
}

void Embedder::load_table(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open embedding table: " + path);
    nlohmann::json doc;
    in >> doc;
    if (!doc.is_object()) throw std::runtime_error("embedding table must be a JSON object");
    std::map<std::string, std::vector<double>> table;
    for (auto& [prompt, value] : doc.items()) {
        if (!value.is_array() || value.size() != kDim)
            throw std::runtime_error("embedding table entry '" + prompt + "' is not a 768-d vector");
        std::vector<double> vec = value.get<std::vector<double>>();
        for (double x : vec)
            if (!std::isfinite(x))
                throw std::runtime_error("embedding table entry '" + prompt + "' has non-finite values");
        normalize_vector(vec);
        table.emplace(normalize_prompt(prompt), std::move(vec));
    }
    table_ = std::move(table);
}

PromptEmbedding embed(std::string_view prompt) {
    static const Embedder plain;
    return plain.embed(prompt);
}

double cosine_similarity(const PromptEmbedding& a, const PromptEmbedding& b) {
    double dot = 0.0;
    for (size_t i = 0; i < a.vector.size(); ++i) dot += a.vector[i] * b.vector[i];
    return dot;
}

}  // namespace zapfield::embedding
