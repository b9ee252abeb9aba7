#pragma once

#include "hlc/rng.hpp"

#include <cstddef>
#include <span>
#include <vector>

namespace hlc {

/// Fixed-order pairwise sum; the result does not depend on thread count.
double stable_sum(std::span<const double> values);

struct MeanSummary {
    double mean = 0.0;
    double median_of_means = 0.0;
    double ci_lo = 0.0;
    double ci_hi = 0.0;
    std::size_t used = 0;
    std::size_t excluded = 0;  // non-finite values dropped
};

struct ConfidenceOptions {
    double level = 0.99;
    std::size_t resamples = 1000;
};

/**
 * Mean, median-of-means over ceil(sqrt(R)) contiguous blocks, and a
 * percentile bootstrap interval for the mean. The interval is widened to
 * contain the median-of-means value.
 */
MeanSummary summarize_mean(std::span<const double> values, StreamId bootstrap_stream,
                           const ConfidenceOptions& options = {});

/// One-sided upper Clopper-Pearson limit for k successes in n trials.
double clopper_pearson_upper(std::size_t successes, std::size_t trials, double level = 0.99);

/// One-sided lower Clopper-Pearson limit.
double clopper_pearson_lower(std::size_t successes, std::size_t trials, double level = 0.99);

/// Two-sample Kolmogorov-Smirnov statistic sup |F_a - F_b|.
double ks_statistic(std::vector<double> a, std::vector<double> b);

/// Asymptotic two-sample KS critical value at the given confidence level.
double ks_critical_value(std::size_t n, std::size_t m, double level = 0.99);

} // namespace hlc
