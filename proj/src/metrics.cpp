// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The toposearch Authors

#include "toposearch/metrics.hpp"

#include "toposearch/error.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

namespace toposearch {

namespace {

double percentile(const std::vector<double>& sorted, double q) {
    const double pos = q * static_cast<double>(sorted.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const auto hi = std::min(lo + 1, sorted.size() - 1);
    const double frac = pos - static_cast<double>(lo);
    return sorted[lo] + (sorted[hi] - sorted[lo]) * frac;
}

} // namespace

double recall_at_k(std::span<const std::string> ranked, const std::string& gold, std::size_t k) {
    if (k == 0) throw InvalidArgument("k must be at least 1");
    const auto r = rank_of(ranked, gold);
    return r && *r <= k ? 1.0 : 0.0;
}

std::optional<std::size_t> rank_of(std::span<const std::string> ranked, const std::string& gold) {
    auto it = std::find(ranked.begin(), ranked.end(), gold);
    if (it == ranked.end()) return std::nullopt;
    return static_cast<std::size_t>(it - ranked.begin()) + 1;
}

double reciprocal_rank(std::optional<std::size_t> rank) {
    return rank && *rank > 0 ? 1.0 / static_cast<double>(*rank) : 0.0;
}

double mean(std::span<const double> values) {
    if (values.empty()) return 0.0;
    double s = 0.0;
    for (double v : values) s += v;
    return s / static_cast<double>(values.size());
}

BootstrapCI bootstrap_ci(std::span<const double> values, std::size_t resamples, std::uint64_t seed) {
    if (values.empty()) throw InvalidArgument("bootstrap needs at least one value");
    if (resamples == 0) throw InvalidArgument("bootstrap needs at least one resample");
    BootstrapCI ci;
    ci.point_estimate = mean(values);
    ci.resamples = resamples;
    ci.seed = seed;

    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<std::size_t> pick(0, values.size() - 1);
    std::vector<double> means;
    means.reserve(resamples);
    for (std::size_t r = 0; r < resamples; ++r) {
        double s = 0.0;
        for (std::size_t i = 0; i < values.size(); ++i) s += values[pick(rng)];
        means.push_back(s / static_cast<double>(values.size()));
    }
    std::sort(means.begin(), means.end());
    ci.lower_95 = percentile(means, 0.025);
    ci.upper_95 = percentile(means, 0.975);
    // The reported interval always brackets the point estimate.
    ci.lower_95 = std::min(ci.lower_95, ci.point_estimate);
    ci.upper_95 = std::max(ci.upper_95, ci.point_estimate);
    return ci;
}

} // namespace toposearch
