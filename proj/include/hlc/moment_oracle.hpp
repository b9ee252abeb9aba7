#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <functional>
#include <map>
#include <mutex>
#include <utility>
#include <vector>

namespace hlc {

/// Per-x table of (t, s) values.
using PairTable = std::vector<Eigen::MatrixXd>;

/**
 * Moments of a random field xi(x, t) on a finite grid.
 *
 * Cells are laid out x-major: cell = x * t_size + t. Implementations may
 * return upper bounds instead of exact values; every bound formula that
 * consumes an oracle is monotone in these moments, so an upper oracle keeps
 * the bound valid. A moment that does not exist raises ComputationError.
 */
class MomentOracle {
public:
    virtual ~MomentOracle() = default;

    virtual std::size_t x_size() const = 0;
    virtual std::size_t t_size() const = 0;

    // E|xi(x,t)|^order as an x_size by t_size matrix.
    virtual Eigen::MatrixXd abs_moments(double order) const = 0;

    // E|xi(x,t) - xi(x,s)|^order
    virtual PairTable increment_moments(double order) const = 0;

    // E| |xi(x,t)|^p - |xi(x,s)|^p |^q
    virtual PairTable power_increment_moments(double p, double q) const = 0;
};

/// E|N(0,1)|^gamma = 2^{gamma/2} Gamma((gamma+1)/2) / sqrt(pi)
double gaussian_abs_moment(double gamma);

/**
 * E| |X|^p - |Y|^p |^q for a centered Gaussian pair with the given
 * variances and covariance, by polar decomposition and adaptive quadrature
 * over the angle.
 */
double gaussian_power_increment_moment(double var_x, double var_y, double cov, double p, double q);

/**
 * Scale mixture W * G of a centered Gaussian field G with an independent
 * non-negative scalar W. `scale_moment(m)` returns E W^m (or an upper bound),
 * +inf when the moment does not exist. W = 1 gives the Gaussian field itself.
 */
class GaussianMixtureOracle final : public MomentOracle {
public:
    using ScaleMoment = std::function<double(double)>;

    GaussianMixtureOracle(Eigen::MatrixXd covariance, std::size_t x_size, std::size_t t_size,
                          ScaleMoment scale_moment = {});

    std::size_t x_size() const override { return nx_; }
    std::size_t t_size() const override { return nt_; }
    Eigen::MatrixXd abs_moments(double order) const override;
    PairTable increment_moments(double order) const override;
    PairTable power_increment_moments(double p, double q) const override;

private:
    double scale(double m) const;
    double cov(std::size_t x, std::size_t t, std::size_t x2, std::size_t t2) const {
        return covariance_(static_cast<Eigen::Index>(x * nt_ + t), static_cast<Eigen::Index>(x2 * nt_ + t2));
    }

    Eigen::MatrixXd covariance_;
    std::size_t nx_;
    std::size_t nt_;
    ScaleMoment scale_moment_;
};

/**
 * Moments estimated from a bank of independent draws (rows = draws,
 * columns = cells). Every value returned is the upper confidence limit
 * mean + z * standard error.
 */
class EmpiricalOracle final : public MomentOracle {
public:
    EmpiricalOracle(Eigen::MatrixXd bank, std::size_t x_size, std::size_t t_size, double z_upper = 3.090232306167813);

    std::size_t x_size() const override { return nx_; }
    std::size_t t_size() const override { return nt_; }
    Eigen::MatrixXd abs_moments(double order) const override;
    PairTable increment_moments(double order) const override;
    PairTable power_increment_moments(double p, double q) const override;

    std::size_t draws() const noexcept { return static_cast<std::size_t>(bank_.rows()); }

private:
    template <class F>
    double upper_mean(const F& value_of_row) const;

    Eigen::MatrixXd bank_;
    std::size_t nx_;
    std::size_t nt_;
    double z_;

    mutable std::mutex mutex_;
    mutable std::map<double, Eigen::MatrixXd> abs_cache_;
    mutable std::map<double, PairTable> inc_cache_;
    mutable std::map<std::pair<double, double>, PairTable> pow_cache_;
};

} // namespace hlc
