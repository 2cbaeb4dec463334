#pragma once

#include <array>
#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace zapfield::embedding {

inline constexpr int kDim = 768;

struct PromptEmbedding {
    std::string prompt;
    std::vector<double> vector;  // length kDim, unit norm
};

// trim + ASCII case-fold; this is the canonical key for hashing and table lookup
std::string normalize_prompt(std::string_view prompt);

class Embedder {
public:
    // Deterministic pseudo-embedding: the normalized prompt is FNV-1a hashed,
    // the hash seeds a splitmix64 Box-Muller stream filling 768 normals, and
    // the result is scaled to unit norm. A loaded table takes precedence.
    PromptEmbedding embed(std::string_view prompt) const;

    // JSON object mapping prompt -> array of 768 numbers. Vectors are
    // re-normalized on load.
    void load_table(const std::string& path);

    size_t table_size() const { return table_.size(); }

private:
    std::map<std::string, std::vector<double>> table_;
};

PromptEmbedding embed(std::string_view prompt);

double cosine_similarity(const PromptEmbedding& a, const PromptEmbedding& b);

}  // namespace zapfield::embedding
