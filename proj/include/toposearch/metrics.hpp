// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The toposearch Authors

#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>

namespace toposearch {

/// 1 if gold is among the first k entries of ranked, else 0. k >= 1.
double recall_at_k(std::span<const std::string> ranked, const std::string& gold, std::size_t k);

/// 1-based rank of gold in ranked, if present.
std::optional<std::size_t> rank_of(std::span<const std::string> ranked, const std::string& gold);

/// 1 / rank, or 0 when the gold document was not returned.
double reciprocal_rank(std::optional<std::size_t> rank);

double mean(std::span<const double> values);

struct BootstrapCI {
    double point_estimate = 0.0;
    double lower_95 = 0.0;
    double upper_95 = 0.0;
    std::size_t resamples = 0;
    std::uint64_t seed = 0;
};

inline constexpr std::size_t kDefaultResamples = 1000;

/// Percentile bootstrap of the mean: `resamples` resamples of size n with
/// replacement; bounds are the 2.5th / 97.5th percentiles (linear
/// interpolation) of the resample means. Throws InvalidArgument on empty input.
BootstrapCI bootstrap_ci(std::span<const double> values, std::size_t resamples = kDefaultResamples,
                         std::uint64_t seed = 42);

} // namespace toposearch
