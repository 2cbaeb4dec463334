#pragma once

#include <vector>

namespace zapfield::stats {

struct PairedSamples {
    std::vector<double> first;
    std::vector<double> second;
};

struct WilcoxonResult {
    double statistic = 0.0;  // W = min(W+, W-)
    double p_value = 1.0;
    int n_used = 0;  // pairs remaining after dropping zero differences
};

// Two-sided Wilcoxon signed-rank test. Zero differences are dropped, tied
// absolute differences get average ranks. Exact distribution for n <= 25,
// normal approximation with tie and continuity corrections above that.
// Throws std::invalid_argument when fewer than 5 usable pairs remain.
WilcoxonResult wilcoxon_signed_rank(const PairedSamples& samples, bool one_sided = false);

// OLS slope of the series against indices 0..len-1.
double linreg_slope(const std::vector<double>& series);

struct GenerationSummary {
    double mean = 0.0;
    double std_dev = 0.0;  // population std (divide by count)
    double min = 0.0;
    double max = 0.0;
};

// Per-generation summary over aligned best-fitness curves.
std::vector<GenerationSummary> summarize_runs(const std::vector<std::vector<double>>& curves);

}  // namespace zapfield::stats
