#include "zapfield/stats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace zapfield::stats {

namespace {

// average ranks of |values|, ties sharing the mean rank
std::vector<double> average_ranks(const std::vector<double>& values) {
    const size_t n = values.size();
    std::vector<size_t> order(n);
    for (size_t i = 0; i < n; ++i) order[i] = i;
    std::sort(order.begin(), order.end(),
              [&](size_t a, size_t b) { return values[a] < values[b]; });
    std::vector<double> ranks(n);
    size_t i = 0;
    while (i < n) {
        size_t j = i;
        while (j + 1 < n && values[order[j + 1]] == values[order[i]]) ++j;
        const double avg = (static_cast<double>(i) + static_cast<double>(j)) / 2.0 + 1.0;
        for (size_t k = i; k <= j; ++k) ranks[order[k]] = avg;
        i = j + 1;
    }
    return ranks;
}

// exact P(W+ <= w) via subset-sum DP over doubled ranks (integers even
// with average ranks)
double exact_lower_tail(const std::vector<double>& ranks, double w) {
    int total = 0;
    std::vector<int> doubled;
    doubled.reserve(ranks.size());
    for (double r : ranks) {
        doubled.push_back(static_cast<int>(std::llround(2.0 * r)));
        total += doubled.back();
    }
    std::vector<double> dp(total + 1, 0.0);
    dp[0] = 1.0;
    for (int r : doubled)
        for (int s = total; s >= r; --s) dp[s] += dp[s - r];
    const double denom = std::ldexp(1.0, static_cast<int>(ranks.size()));
    const int w2 = static_cast<int>(std::floor(2.0 * w + 1e-9));
    double tail = 0.0;
    for (int s = 0; s <= std::min(w2, total); ++s) tail += dp[s];
    return tail / denom;
}

double normal_sf(double z) { return 0.5 * std::erfc(z / std::sqrt(2.0)); }

}  // namespace

WilcoxonResult wilcoxon_signed_rank(const PairedSamples& samples, bool one_sided) {
    if (samples.first.size() != samples.second.size())
        throw std::invalid_argument("paired samples must have equal lengths");
    std::vector<double> diffs;
    for (size_t i = 0; i < samples.first.size(); ++i) {
        const double d = samples.second[i] - samples.first[i];
        if (!std::isfinite(d)) throw std::invalid_argument("non-finite difference");
        if (d != 0.0) diffs.push_back(d);
    }
    const int n = static_cast<int>(diffs.size());
    if (n < 5) throw std::invalid_argument("fewer than 5 non-zero differences");

    std::vector<double> abs_diffs(diffs.size());
    for (size_t i = 0; i < diffs.size(); ++i) abs_diffs[i] = std::abs(diffs[i]);
    const std::vector<double> ranks = average_ranks(abs_diffs);

    double w_plus = 0.0, w_minus = 0.0;
    for (size_t i = 0; i < diffs.size(); ++i)
        (diffs[i] > 0.0 ? w_plus : w_minus) += ranks[i];
    const double w = std::min(w_plus, w_minus);

    double p;
    if (n <= 25) {
        p = 2.0 * exact_lower_tail(ranks, w);
    } else {
        // tie correction term sum(t^3 - t) over tie groups
        std::vector<double> sorted = abs_diffs;
        std::sort(sorted.begin(), sorted.end());
        double tie_corr = 0.0;
        size_t i = 0;
        while (i < sorted.size()) {
            size_t j = i;
            while (j + 1 < sorted.size() && sorted[j + 1] == sorted[i]) ++j;
            const double t = static_cast<double>(j - i + 1);
            tie_corr += t * t * t - t;
            i = j + 1;
        }
        const double mean = n * (n + 1) / 4.0;
        const double var = n * (n + 1) * (2.0 * n + 1) / 24.0 - tie_corr / 48.0;
        const double z = (mean - w - 0.5) / std::sqrt(var);
        p = 2.0 * normal_sf(z);
    }
    if (one_sided) p /= 2.0;
    p = std::clamp(p, std::numeric_limits<double>::min(), 1.0);

    WilcoxonResult result;
    result.statistic = w;
    result.p_value = p;
    result.n_used = n;
    return result;
}

double linreg_slope(const std::vector<double>& series) {
    const size_t n = series.size();
    if (n < 2) throw std::invalid_argument("need at least 2 points");
    const double mean_x = (static_cast<double>(n) - 1.0) / 2.0;
    double mean_y = 0.0;
    for (double y : series) mean_y += y;
    mean_y /= static_cast<double>(n);
    double sxy = 0.0, sxx = 0.0;
    for (size_t i = 0; i < n; ++i) {
        const double dx = static_cast<double>(i) - mean_x;
        sxy += dx * (series[i] - mean_y);
        sxx += dx * dx;
    }
    return sxy / sxx;
}

std::vector<GenerationSummary> summarize_runs(const std::vector<std::vector<double>>& curves) {
    if (curves.empty()) throw std::invalid_argument("no curves to summarize");
    const size_t len = curves[0].size();
    for (const auto& c : curves)
        if (c.size() != len) throw std::invalid_argument("curves have mismatched lengths");
    std::vector<GenerationSummary> out(len);
    const double count = static_cast<double>(curves.size());
    for (size_t g = 0; g < len; ++g) {
        GenerationSummary& s = out[g];
        s.min = curves[0][g];
        s.max = curves[0][g];
        double sum = 0.0;
        for (const auto& c : curves) {
            sum += c[g];
            s.min = std::min(s.min, c[g]);
            s.max = std::max(s.max, c[g]);
        }
        s.mean = sum / count;
        double sq = 0.0;
        for (const auto& c : curves) sq += (c[g] - s.mean) * (c[g] - s.mean);
        s.std_dev = std::sqrt(sq / count);
    }
    return out;
}

}  // namespace zapfield::stats
