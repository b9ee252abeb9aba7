#pragma once

#include "hlc/entropy_bounds.hpp"
#include "hlc/measure_grid.hpp"
#include "hlc/moment_oracle.hpp"
#include "hlc/rng.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

namespace hlc {

enum class ModelKind { Gaussian, SymmetrizedUniform, HeavyTailT, MartingaleDifference, MixingaleAr };

std::string to_string(ModelKind kind);
ModelKind model_kind_from_string(const std::string& name);

/// Separable exponential kernel over X x T.
struct KernelSpec {
    double variance = 1.0;
    double x_length = 0.0;  // <= 0: independent across X
    double t_length = 0.5;  // on normalized T distance; <= 0: independent across T
};

/// Covariance over cells (x * t_size + t).
Eigen::MatrixXd separable_covariance(const MeasureSpace& x_space, const IndexSpace& t_space, const KernelSpec& kernel);

/**
 * Mean-zero random field law on a fixed grid, plus how to run sequences of it.
 *
 * Every kind is a linear image xi = L zeta of an innovation vector zeta with
 * covariance L L^T equal to the model covariance:
 *  - gaussian: zeta standard normal;
 *  - symmetrized-uniform: zeta uniform on [-sqrt 3, sqrt 3];
 *  - heavy-tail-t: zeta = g * sqrt(dof / chi2_dof), one chi2 per realization;
 *  - martingale-difference: zeta_k = sigma_k g_k, sigma_k in [s_lo, s_hi] a
 *    function of the previous value in cell 0;
 *  - mixingale-ar: zeta_k = a zeta_{k-1} + sqrt(1 - a^2) g_k, stationary start.
 */
class RandomFieldModel {
public:
    static RandomFieldModel gaussian(std::shared_ptr<const MeasureSpace> x, std::shared_ptr<const IndexSpace> t,
                                     Eigen::MatrixXd covariance);
    static RandomFieldModel symmetrized_uniform(std::shared_ptr<const MeasureSpace> x,
                                                std::shared_ptr<const IndexSpace> t, Eigen::MatrixXd covariance);
    static RandomFieldModel heavy_tail_t(std::shared_ptr<const MeasureSpace> x, std::shared_ptr<const IndexSpace> t,
                                         Eigen::MatrixXd covariance, double dof);
    static RandomFieldModel martingale_difference(std::shared_ptr<const MeasureSpace> x,
                                                  std::shared_ptr<const IndexSpace> t, Eigen::MatrixXd covariance,
                                                  double s_lo, double s_hi);
    static RandomFieldModel mixingale_ar(std::shared_ptr<const MeasureSpace> x, std::shared_ptr<const IndexSpace> t,
                                         Eigen::MatrixXd covariance, double ar_coefficient);

    ModelKind kind() const noexcept { return kind_; }
    bool independent_copies() const noexcept {
        return kind_ != ModelKind::MartingaleDifference && kind_ != ModelKind::MixingaleAr;
    }
    std::size_t x_size() const noexcept { return x_->size(); }
    std::size_t t_size() const noexcept { return t_->size(); }
    std::size_t cells() const noexcept { return x_->size() * t_->size(); }
    const std::shared_ptr<const MeasureSpace>& x_space() const noexcept { return x_; }
    const std::shared_ptr<const IndexSpace>& t_space() const noexcept { return t_; }
    const Eigen::MatrixXd& covariance() const noexcept { return covariance_; }
    const Eigen::MatrixXd& factor() const noexcept { return factor_; }

    double dof() const noexcept { return dof_; }
    double s_lo() const noexcept { return s_lo_; }
    double s_hi() const noexcept { return s_hi_; }
    double ar_coefficient() const noexcept { return ar_; }

    /// Same law multiplied by c > 0; draws with equal streams scale exactly.
    RandomFieldModel scaled(double c) const;

    /// beta(n) <= |a|^n for the AR kind; identically zero for independent kinds.
    MixingSequence mixing_sequence() const;

    /// Exact (or, for martingale differences, upper) moments; nullptr if unavailable.
    std::unique_ptr<MomentOracle> analytic_oracle() const;

    /// analytic_oracle() when available, otherwise an empirical upper oracle.
    std::unique_ptr<MomentOracle> moment_oracle(std::size_t bank_draws, std::uint64_t seed) const;

    /// Largest moment order that exists (infinity except for heavy-tail-t).
    double moment_limit() const noexcept;

    /**
     * n^{-1/2} (xi_1 + ... + xi_n) at every rung of an increasing ladder,
     * from one sequence drawn on `stream`.
     */
    std::vector<Field> normed_sum_ladder(const std::vector<std::size_t>& ladder, StreamId stream) const;

    Field normed_sum(std::size_t n, StreamId stream) const;

    /// Stationary single realization.
    Field draw(StreamId stream) const;

private:
    RandomFieldModel(ModelKind kind, std::shared_ptr<const MeasureSpace> x, std::shared_ptr<const IndexSpace> t,
                     Eigen::MatrixXd covariance);

    Field to_field(const Eigen::VectorXd& innovation, double factor) const;

    ModelKind kind_;
    std::shared_ptr<const MeasureSpace> x_;
    std::shared_ptr<const IndexSpace> t_;
    Eigen::MatrixXd covariance_;
    Eigen::MatrixXd factor_;
    double scale_ = 1.0;
    double dof_ = 0.0;
    double s_lo_ = 1.0;
    double s_hi_ = 1.0;
    double ar_ = 0.0;
};

} // namespace hlc
