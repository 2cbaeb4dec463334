#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "zapfield/rng.hpp"
#include "zapfield/stats.hpp"

using namespace zapfield;
using stats::PairedSamples;

TEST_CASE("wilcoxon: all-tie input is insufficient data") {
    PairedSamples s;
    s.first = {1, 2, 3, 4, 5, 6};
    s.second = s.first;
    CHECK_THROWS_AS(stats::wilcoxon_signed_rank(s), std::invalid_argument);
}

TEST_CASE("wilcoxon: exact n=10 uniform improvement") {
    PairedSamples s;
    for (int i = 0; i < 10; ++i) {
        s.first.push_back(static_cast<double>(i));
        s.second.push_back(static_cast<double>(i) + 0.5);
    }
    const auto r = stats::wilcoxon_signed_rank(s);
    CHECK(r.statistic == 0.0);
    CHECK(r.p_value == doctest::Approx(0.001953125).epsilon(1e-9));
    CHECK(r.n_used == 10);
}

TEST_CASE("wilcoxon: 12-pair fixture matches the reference implementation") {
    // frozen from an independent reference statistical package
    PairedSamples s;
    s.first = {-1.603837, 0.0641, 0.740891, 0.152619, 0.863744, 2.913099,
               -1.478823, 0.945473, -1.666135, 0.343745, -0.512444, 1.323759};
    s.second = {-2.164117, 0.883593, -0.224253, -1.70652, 1.598478, 4.946388,
                -0.658689, 0.243307, -1.097789, 1.41092, 0.978828, 0.466348};
    const auto r = stats::wilcoxon_signed_rank(s);
    CHECK(r.statistic == doctest::Approx(30.0));
    CHECK(std::abs(r.p_value - 0.5185546875) < 1e-6);
}

TEST_CASE("wilcoxon: n=30 fixture exercises the normal approximation") {
    PairedSamples s;
    s.first = {0.42777, -0.570838, 2.654461, -1.608545, 0.661716, -0.143426, -0.354506,
               1.066359, -1.817922, -0.984676, -0.11416, 1.741274, 0.089047, 0.895688,
               -1.863306, -1.238888, 0.969529, -0.62818, -0.062995, 0.730869, -2.205018,
               -1.201166, -0.093841, -1.546476, -0.710596, -0.042415, -0.665121, -0.268779,
               0.041064, 1.330196};
    s.second = {2.406423, -0.565407, 2.226709, -0.319201, 1.572272, 0.50565, -0.862745,
                2.11131, -0.545715, -2.369468, 1.303279, 2.068474, -0.254448, -0.281383,
                -1.805085, -0.900034, 0.994738, -1.432561, -0.858332, 1.83627, -1.7573,
                -0.516557, 0.935229, -0.428856, 1.424533, 0.286262, -0.524575, -0.827024,
                0.690499, 1.994667};
    const auto r = stats::wilcoxon_signed_rank(s);
    CHECK(r.statistic == doctest::Approx(126.0));
    CHECK(std::abs(r.p_value - 0.02923938176410581) < 1e-6);
}

TEST_CASE("wilcoxon: symmetric in its arguments") {
    rng::Prng prng(14);
    PairedSamples s;
    for (int i = 0; i < 15; ++i) {
        s.first.push_back(prng.gaussian());
        s.second.push_back(prng.gaussian() + 0.2);
    }
    const auto a = stats::wilcoxon_signed_rank(s);
    std::swap(s.first, s.second);
    const auto b = stats::wilcoxon_signed_rank(s);
    CHECK(a.statistic == b.statistic);
    CHECK(a.p_value == b.p_value);
}

TEST_CASE("wilcoxon: a large shift drives p below 0.01 for n >= 10") {
    rng::Prng prng(15);
    for (int n : {10, 20, 40}) {
        PairedSamples s;
        for (int i = 0; i < n; ++i) {
            const double base = prng.gaussian();
            s.first.push_back(base);
            s.second.push_back(base + 100.0);
        }
        const auto r = stats::wilcoxon_signed_rank(s);
        CHECK(r.p_value < 0.01);
        CHECK(r.p_value > 0.0);
        CHECK(r.p_value <= 1.0);
    }
}

TEST_CASE("wilcoxon: fewer than 5 usable pairs is an error") {
    PairedSamples s;
    s.first = {1, 2, 3, 4, 5, 6};
    s.second = {2, 3, 4, 4, 5, 6};  // only 3 non-zero differences
    CHECK_THROWS_AS(stats::wilcoxon_signed_rank(s), std::invalid_argument);
}

TEST_CASE("wilcoxon: one-sided halves the two-sided p") {
    PairedSamples s;
    for (int i = 0; i < 10; ++i) {
        s.first.push_back(static_cast<double>(i));
        s.second.push_back(static_cast<double>(i) + 1.0);
    }
    const auto two = stats::wilcoxon_signed_rank(s, false);
    const auto one = stats::wilcoxon_signed_rank(s, true);
    CHECK(one.p_value == doctest::Approx(two.p_value / 2.0));
}

TEST_CASE("linreg_slope on exact lines and fixtures") {
    CHECK(stats::linreg_slope({0, 1, 2, 3}) == doctest::Approx(1.0));
    CHECK(stats::linreg_slope({5, 5, 5, 5, 5}) == doctest::Approx(0.0));
    CHECK(stats::linreg_slope({3, 1, 2, 0}) == doctest::Approx(-0.8));
    CHECK_THROWS_AS(stats::linreg_slope({1.0}), std::invalid_argument);
}

TEST_CASE("linreg_slope: translation invariance and linear scaling") {
    rng::Prng prng(8);
    std::vector<double> series;
    for (int i = 0; i < 40; ++i) series.push_back(prng.gaussian());
    const double slope = stats::linreg_slope(series);

    std::vector<double> shifted = series, scaled = series;
    for (double& v : shifted) v += 123.0;
    for (double& v : scaled) v *= -2.5;
    CHECK(stats::linreg_slope(shifted) == doctest::Approx(slope).epsilon(1e-9));
    CHECK(stats::linreg_slope(scaled) == doctest::Approx(-2.5 * slope).epsilon(1e-9));
}

TEST_CASE("summarize_runs: single, pair, and degenerate ensembles") {
    const auto single = stats::summarize_runs({{0.1, 0.2, 0.3}});
    REQUIRE(single.size() == 3);
    for (const auto& s : single) CHECK(s.std_dev == 0.0);

    const auto pair = stats::summarize_runs({{0.4, 0.4}, {0.6, 0.6}});
    CHECK(pair[0].mean == doctest::Approx(0.5));
    CHECK(pair[0].std_dev == doctest::Approx(0.1));
    CHECK(pair[0].min == doctest::Approx(0.4));
    CHECK(pair[0].max == doctest::Approx(0.6));

    std::vector<std::vector<double>> identical(30, {0.2, 0.5, 0.9});
    const auto many = stats::summarize_runs(identical);
    CHECK(many[2].mean == doctest::Approx(0.9));
    CHECK(many[2].std_dev == doctest::Approx(0.0));

    CHECK_THROWS_AS(stats::summarize_runs({{1, 2}, {1, 2, 3}}), std::invalid_argument);
}
