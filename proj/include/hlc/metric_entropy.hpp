#pragma once

#include "hlc/measure_grid.hpp"

#include <cstddef>
#include <vector>

namespace hlc {

enum class ProfileSource { Computed, Analytic };

/**
 * Covering-number profile of an index set over a decreasing radius grid.
 *
 * Radii are expressed in "profile units": normalized distance times `scale`.
 * A computed profile carries the cardinality of T and the count reached below
 * the smallest positive distance, so covering_at() is defined for every eps > 0.
 * An analytic profile is N(eps) = prefactor * eps^{-kappa} for eps < 1.
 */
struct EntropyProfile {
    std::vector<double> eps_grid;
    std::vector<double> cover_upper;
    std::vector<double> pack_lower;
    ProfileSource source = ProfileSource::Computed;

    std::size_t cardinality = 0;
    double floor_count = 1.0;
    double min_positive = 0.0;
    double scale = 1.0;

    double prefactor = 1.0;
    double kappa = 0.0;

    /// Upper bound on N(eps) usable between grid points (step-down lookup).
    double covering_at(double eps) const;

    static EntropyProfile analytic(double prefactor, double kappa);
};

struct EntropyFit {
    double kappa = 0.0;
    double prefactor = 1.0;  // fitted K^Q
    double residual = 0.0;   // sum of squared log residuals
    std::size_t used_points = 0;
};

inline constexpr std::size_t kDefaultExactCap = 24;

// Greedy set cover with closed balls, minimized over the distance levels up to
// eps so the count is monotone; eps in normalized units.
std::size_t covering_number_upper(const IndexSpace& space, double eps);

// Exact minimal cover by branch and bound; throws ComputationError above `cap` points.
std::size_t covering_number_exact(const IndexSpace& space, double eps, std::size_t cap = kDefaultExactCap);

// Size of a greedy maximal set with pairwise distance > 2 eps.
std::size_t packing_number_lower(const IndexSpace& space, double eps);

EntropyProfile entropy_profile(const IndexSpace& space, const std::vector<double>& eps_grid, double scale = 1.0);

/**
 * Profile whose grid is every distinct scaled distance below 1 (plus 1 itself).
 * covering_at() on it reproduces the greedy cover at any radius exactly.
 */
EntropyProfile exact_step_profile(const IndexSpace& space, double scale = 1.0);

EntropyFit entropy_dimension_fit(const EntropyProfile& profile);

/// theta^k for k = 0..K-1 starting from `start`.
std::vector<double> geometric_grid(double start, double ratio, std::size_t count);

} // namespace hlc
