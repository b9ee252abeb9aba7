#pragma once

#include "hlc/measure_grid.hpp"
#include "hlc/metric_entropy.hpp"
#include "hlc/moment_oracle.hpp"

#include <Eigen/Dense>

#include <cstddef>
#include <functional>
#include <string>
#include <vector>

namespace hlc {

// ---------------------------------------------------------------------------
// Rosenthal and mixingale constants
// ---------------------------------------------------------------------------

struct RosenthalParams {
    double c_r = 1.77638;
    bool symmetric = false;

    static RosenthalParams general() { return {1.77638, false}; }
    static RosenthalParams symmetric_laws() { return {1.53572, true}; }
};

/// max(1, C_R p / (e log p)) for p >= 2.
double rosenthal_constant(double p, const RosenthalParams& params = RosenthalParams::general());

/**
 * A moment-comparison constant m -> K(m) used where normed sums are bounded by
 * single summands. Throws ValidationError outside its domain.
 */
using SumConstant = std::function<double(double)>;

SumConstant rosenthal_sum_constant(RosenthalParams params = RosenthalParams::general());

/// Mixing coefficients beta(k), k >= 1.
struct MixingSequence {
    enum class Law { Geometric, Power, Explicit };

    Law law = Law::Explicit;
    double scale = 0.0;     // b in b r^k or b k^{-gamma}
    double ratio = 0.0;     // r
    double exponent = 0.0;  // gamma
    std::vector<double> values;  // beta(1), beta(2), ...; zero afterwards

    static MixingSequence geometric(double b, double r);
    static MixingSequence power(double b, double gamma);
    static MixingSequence explicit_values(std::vector<double> values);

    double at(std::size_t k) const;
};

struct MixingaleCoefficient {
    double value = 0.0;  // m * (partial + tail)^{1/m}; +inf when divergent
    bool converged = true;
    double partial_sum = 0.0;
    double tail_bound = 0.0;
};

/// K_M(m) = m [sum_k beta(k) (k+1)^{(m-2)/2}]^{1/m} with a certified tail.
MixingaleCoefficient mixingale_coefficient(double m, const MixingSequence& beta, std::size_t k_max = 1000);

/// K_M as a sum constant, clamped below by 1 like K_R; throws ComputationError where it diverges.
SumConstant mixingale_sum_constant(MixingSequence beta, std::size_t k_max = 1000);

// ---------------------------------------------------------------------------
// Entropy series
// ---------------------------------------------------------------------------

struct SeriesEvaluation {
    double theta = 0.5;
    std::vector<double> partial_terms;  // theta^{k-1} N^{1/Q}(theta^k)
    double tail_bound = 0.0;            // closed-form remainder
    double total = 0.0;                 // sigma_factor * (sum + tail)
    double sigma_factor = 0.0;
};

/**
 * sigma * sum_{k>=1} theta^{k-1} N^{1/Q}(theta^k), with N read from the
 * profile. Below the profile's smallest positive distance N is constant and
 * the remainder is summed in closed form, so `total` is an upper bound on
 * the full series.
 */
SeriesEvaluation pisier_series(const EntropyProfile& profile, double sigma, double Q, double theta);

struct ThetaOptimum {
    double theta = 0.0;
    double nu = 0.0;
    SeriesEvaluation series;
};

/// Grid over {0.01, ..., 0.99} refined by golden section around the best cell.
ThetaOptimum optimize_theta(const EntropyProfile& profile, double sigma, double Q);

/// K sigma (1 - kappa/Q)^{-1} (kappa/Q)^{-kappa/(Q-kappa)}
double closed_form_bound(double K, double kappa, double Q, double sigma);

// ---------------------------------------------------------------------------
// Tails
// ---------------------------------------------------------------------------

/// exp(-h*(log z)), h(Q) = Q log nu(Q), h* maximized over the grid.
double legendre_tail(const std::vector<double>& q_grid, const std::vector<double>& nu_values, double z);

struct TailBound {
    std::vector<double> q_grid;
    std::vector<double> h_values;
    std::vector<double> z_grid;
    std::vector<double> tail;
};

TailBound tail_bound(const std::vector<double>& q_grid, const std::vector<double>& nu_values,
                     const std::vector<double>& z_grid);

struct PowerGrowthFit {
    double c1 = 0.0;  // envelope: c1 >= value(Q) / Q^m on every grid point
    double m = 0.0;
    double residual = 0.0;
    bool poor_fit = false;
};

/// Fits value(Q) <= c1 Q^m by log-log regression plus an envelope shift.
PowerGrowthFit fit_power_growth(const std::vector<double>& q_grid, const std::vector<double>& values);

/// min(1, exp(-c2 x^{1/m})) with c2 = m / (e c1^{1/m}).
double example21_tail(double c1, double m, double x);

/**
 * The same Chebyshev route with Q restricted to the grid the envelope was
 * fitted on: min(1, min_Q (c1 Q^m / x)^Q). Valid without extrapolating the
 * power law beyond the fitted orders.
 */
double example21_tail_on_grid(const PowerGrowthFit& fit, const std::vector<double>& q_grid, double x);

// ---------------------------------------------------------------------------
// Moment bounds
// ---------------------------------------------------------------------------

enum class BoundKind { Prop11, Prop21, Thm32, Prop41 };

std::string to_string(BoundKind kind);

/// Which reading of the first-norm increment distance to use.
enum class DbarForm {
    // integral of [E| |xi_t|^p - |xi_s|^p |^Q]^{1/Q}
    Derived,
    // integral of |E|xi_t|^p - E|xi_s|^p|^{1/Q}
    Literal,
};

struct MomentBoundReport {
    BoundKind kind = BoundKind::Prop21;
    double p = 2.0;
    double Q = 1.0;
    double sigma_bar = 0.0;      // sigma-bar, Delta, or sigma_Y(Q)
    double sigma_hat = 0.0;      // Rosenthal-inflated sigma (thm32); equals sigma_bar otherwise
    Eigen::MatrixXd distance;    // normalized distance fed to the covering numbers
    Eigen::MatrixXd alpha_star;  // thm32: minimizing Hoelder exponent per pair (0 on diagonal)
    EntropyProfile profile;
    SeriesEvaluation series;
    double theta_star = 0.0;
    double nu_power = 0.0;  // the series bound before the final root
    double nu = 0.0;        // the deliverable bound
};

double sigma_bar(const MomentOracle& oracle, double p, double Q, const MeasureSpace& x_space);

Eigen::MatrixXd dbar_matrix(const MomentOracle& oracle, double p, double Q, const MeasureSpace& x_space,
                            DbarForm form = DbarForm::Derived);

double dbar_distance(const MomentOracle& oracle, double p, double Q, std::size_t t, std::size_t s,
                     const MeasureSpace& x_space, DbarForm form = DbarForm::Derived);

/// First-norm moment bound: nu = psi_p(Q) >= {E |xi|^{pQ}_{p,inf}}^{1/pQ}.
MomentBoundReport prop21_bound(const MomentOracle& oracle, double p, double Q, const MeasureSpace& x_space,
                               DbarForm form = DbarForm::Derived);

std::vector<double> default_alpha_grid();

/**
 * Uniform-in-n moment bound for normed sums:
 * nu = nu_p(Q) >= sup_n {E |S_n|^{pQ}_{p,inf}}^{1/pQ}.
 * `sum_constant` is K_R by default; pass a mixingale constant for dependent sequences.
 */
MomentBoundReport thm32_bound(const MomentOracle& oracle, double p, double Q, const MeasureSpace& x_space,
                              const std::vector<double>& alpha_grid = default_alpha_grid(),
                              const SumConstant& sum_constant = rosenthal_sum_constant());

/// Entropy bound for sup_t Y(., t) in L_Q(mu) for one function Y on X x T.
MomentBoundReport prop11_bound(const Field& y, double Q);

/// Random entropy function lambda_p(Q) of one realization.
MomentBoundReport prop41_bound(const Field& realization, double p, double Q);

} // namespace hlc
