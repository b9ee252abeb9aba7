#pragma once

#include "hlc/measure_grid.hpp"
#include "hlc/random_field.hpp"
#include "hlc/rng.hpp"
#include "hlc/statistics.hpp"

#include <cstddef>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

namespace hlc {

using Functional = std::function<double(const Field&)>;

struct NamedFunctional {
    std::string name;
    Functional f;
};

/// |f|_{p,inf}: sup over T of the L_p(mu) norm over X.
NamedFunctional cl_norm_functional(double p);
/// sup_t tau_p(t) = sup_t int |f(x,t)|^p mu(dx).
NamedFunctional zeta_functional(double p);

struct LabOptions {
    std::size_t jobs = 1;
    ConfidenceOptions confidence{};
};

/// Estimate of E[F(S_n)^order] over R replicates.
struct EmpiricalMoments {
    std::string functional;
    std::size_t n = 1;
    double order = 1.0;
    std::size_t replicates = 0;
    std::size_t excluded = 0;
    double estimate = 0.0;
    double median_of_means = 0.0;
    double ci_lo = 0.0;
    double ci_hi = 0.0;
    std::uint64_t root_seed = 0;

    /// (E F^order)^{1/order} and its interval.
    double norm_estimate() const;
    double norm_lo() const;
    double norm_hi() const;
};

Field sample_field(const RandomFieldModel& model, std::uint64_t seed);
Field normed_sum(const RandomFieldModel& model, std::size_t n, std::uint64_t seed);

/// Replicate r of a normed-sum experiment draws from StreamId{root_seed, tag, r}.
std::uint32_t normed_sum_tag();

EmpiricalMoments empirical_moment(const RandomFieldModel& model, std::size_t n, const NamedFunctional& functional,
                                  double order, std::size_t replicates, std::uint64_t root_seed,
                                  const LabOptions& options = {});

struct MomentRequest {
    NamedFunctional functional;
    double order = 1.0;
};

/**
 * Every request at every rung of the ladder, from one set of paths: replicate
 * r follows a single sequence and reads S_n at each rung. Result is indexed
 * [rung][request]. Rung n agrees exactly with empirical_moment(n) on the same seed.
 */
std::vector<std::vector<EmpiricalMoments>> ladder_moments(const RandomFieldModel& model,
                                                          const std::vector<std::size_t>& ladder,
                                                          const std::vector<MomentRequest>& requests,
                                                          std::size_t replicates, std::uint64_t root_seed,
                                                          const LabOptions& options = {});

struct TailEstimate {
    double z = 0.0;
    std::size_t exceed = 0;
    std::size_t trials = 0;
    double survival = 0.0;
    double cp_upper = 0.0;
};

/// P(F(S_n) > z) per z, with the one-sided 0.99 Clopper-Pearson upper limit.
std::vector<TailEstimate> empirical_tail(const RandomFieldModel& model, std::size_t n,
                                         const NamedFunctional& functional, const std::vector<double>& z_grid,
                                         std::size_t replicates, std::uint64_t root_seed,
                                         const LabOptions& options = {});

/// Same, from already computed functional values.
std::vector<TailEstimate> tail_from_values(const std::vector<double>& values, const std::vector<double>& z_grid,
                                           double level = 0.99);

struct KsRow {
    std::size_t n_a = 0;
    std::size_t n_b = 0;
    double ks = 0.0;
    double critical = 0.0;
};

struct CltDiagnostic {
    std::vector<KsRow> consecutive;  // (n_i, n_{i+1})
    std::vector<KsRow> pairwise;     // every i < j; critical values Bonferroni-adjusted
    bool decreasing = false;         // consecutive KS strictly decreasing
    bool final_below = false;        // last consecutive KS < threshold
    bool all_pairwise_below = false;
    bool converged = false;          // decreasing && final_below
};

/**
 * KS distances between the laws of F(S_n) along the ladder. Each rung is
 * simulated from its own independent streams so the two-sample critical
 * values apply. The pairwise family is held at `level` jointly.
 */
CltDiagnostic clt_diagnostic(const RandomFieldModel& model, const std::vector<std::size_t>& ladder,
                             const NamedFunctional& functional, std::size_t replicates, std::uint64_t root_seed,
                             double threshold = 0.05, double level = 0.99, const LabOptions& options = {});

struct EquicontinuityRow {
    double eps = 0.0;
    double h = 0.0;
    double probability = 0.0;  // max over the ladder
    double cp_upper = 0.0;
    std::size_t worst_n = 0;
};

/// P(sup_{rho(t,s) < eps} |tau_p(t) - tau_p(s)| > h) for S_n, maximized over the ladder.
std::vector<EquicontinuityRow> equicontinuity_diagnostic(const RandomFieldModel& model,
                                                         const std::vector<std::size_t>& ladder, double p,
                                                         const std::vector<double>& eps_grid,
                                                         const std::vector<double>& h_grid, std::size_t replicates,
                                                         std::uint64_t root_seed, const LabOptions& options = {});

enum class ScalarLaw { Rademacher, Uniform, Gaussian };
std::string to_string(ScalarLaw law);

struct RosenthalRatioRow {
    std::size_t n = 1;
    double ratio = 0.0;
    double ci_lo = 0.0;
    double ci_hi = 0.0;
};

struct RosenthalRatio {
    double p = 2.0;
    std::vector<RosenthalRatioRow> rows;
    double max_ratio = 0.0;
    double max_ci_hi = 0.0;
};

/**
 * |n^{-1/2} sum zeta_k|_p / |zeta_1|_p along the ladder. Numerator and
 * denominator come from the same replicates (paired bootstrap), so n = 1
 * gives exactly 1.
 */
RosenthalRatio rosenthal_ratio_experiment(ScalarLaw law, double p, const std::vector<std::size_t>& ladder,
                                          std::size_t replicates, std::uint64_t root_seed,
                                          const LabOptions& options = {});

/// Several exponents from one set of paths.
std::vector<RosenthalRatio> rosenthal_ratio_experiment(ScalarLaw law, const std::vector<double>& p_values,
                                                       const std::vector<std::size_t>& ladder,
                                                       std::size_t replicates, std::uint64_t root_seed,
                                                       const LabOptions& options = {});

struct Prop41Estimate {
    double p = 2.0;
    double Q = 1.0;
    std::size_t replicates = 0;
    std::size_t divergent = 0;
    // (E lambda^Q)^{1/pQ}
    double bound = 0.0;
    double bound_lo = 0.0;
    double bound_hi = 0.0;
    // |xi|_{p,X; inf,T; pQ,Omega}
    double lhs = 0.0;
    double lhs_lo = 0.0;
    double lhs_hi = 0.0;
    bool dominated = false;  // lhs_hi <= bound_lo
};

Prop41Estimate prop41_expectation(const RandomFieldModel& model, double p, double Q, std::size_t replicates,
                                  std::uint64_t root_seed, const LabOptions& options = {});

/// One line of a domination table.
struct DominationRow {
    std::string model;
    std::string check;
    std::size_t n = 1;
    double p = 2.0;
    double Q = 1.0;
    double estimate = 0.0;
    double ci_lo = 0.0;
    double ci_hi = 0.0;
    double bound = 0.0;
    bool dominated = false;
};

} // namespace hlc
