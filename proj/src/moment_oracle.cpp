#include "hlc/moment_oracle.hpp"

#include "hlc/error.hpp"

#include <boost/math/constants/constants.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <algorithm>
#include <cmath>
#include <string>

namespace hlc {

namespace {

constexpr double kPi = boost::math::constants::pi<double>();

PairTable zero_table(std::size_t nx, std::size_t nt) {
    return PairTable(nx, Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(nt), static_cast<Eigen::Index>(nt)));
}

// Angles in [0, 2pi) where a*cos(phi) + b*sin(phi) vanishes.
void add_zeros(double a, double b, std::vector<double>& out) {
    if (a == 0.0 && b == 0.0) {
        return;
    }
    double phi = std::atan2(-a, b);
    if (phi < 0.0) {
        phi += kPi;
    }
    out.push_back(phi);
    out.push_back(phi + kPi);
}

} // namespace

double gaussian_abs_moment(double gamma) {
    if (!(gamma >= 0.0)) {
        throw ValidationError("gaussian_abs_moment: order must be non-negative");
    }
    return std::exp(0.5 * gamma * std::log(2.0) + std::lgamma(0.5 * (gamma + 1.0)) - 0.5 * std::log(kPi));
}

double gaussian_power_increment_moment(double var_x, double var_y, double cov, double p, double q) {
    if (!(var_x >= 0.0) || !(var_y >= 0.0) || !(p > 0.0) || !(q > 0.0)) {
        throw ValidationError("gaussian_power_increment_moment: invalid arguments");
    }
    // X = a1 Z1, Y = b1 Z1 + b2 Z2 with independent standard normals.
    const double a1 = std::sqrt(var_x);
    const double b1 = a1 > 0.0 ? cov / a1 : 0.0;
    const double b2 = std::sqrt(std::max(var_y - b1 * b1, 0.0));
    if (a1 == 0.0 && b1 == 0.0 && b2 == 0.0) {
        return 0.0;
    }

    auto integrand = [&](double phi) {
        const double c = std::cos(phi);
        const double s = std::sin(phi);
        const double g = std::pow(std::abs(a1 * c), p) - std::pow(std::abs(b1 * c + b2 * s), p);
        return std::pow(std::abs(g), q);
    };

    std::vector<double> cuts{0.0, 2.0 * kPi};
    add_zeros(1.0, 0.0, cuts);
    add_zeros(b1, b2, cuts);
    add_zeros(a1 - b1, -b2, cuts);
    add_zeros(a1 + b1, b2, cuts);
    std::sort(cuts.begin(), cuts.end());

    double angular = 0.0;
    for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
        const double lo = cuts[i];
        const double hi = cuts[i + 1];
        if (hi - lo < 1e-15) {
            continue;
        }
        angular += boost::math::quadrature::gauss_kronrod<double, 31>::integrate(integrand, lo, hi, 12, 1e-13);
    }
    angular /= 2.0 * kPi;

    // r^2 ~ Exp(mean 2): E r^m = 2^{m/2} Gamma(1 + m/2)
    const double m = p * q;
    const double radial = std::exp(0.5 * m * std::log(2.0) + std::lgamma(1.0 + 0.5 * m));
    return radial * angular;
}

GaussianMixtureOracle::GaussianMixtureOracle(Eigen::MatrixXd covariance, std::size_t x_size, std::size_t t_size,
                                             ScaleMoment scale_moment)
    : covariance_(std::move(covariance)), nx_(x_size), nt_(t_size), scale_moment_(std::move(scale_moment)) {
    const auto cells = static_cast<Eigen::Index>(nx_ * nt_);
    if (covariance_.rows() != cells || covariance_.cols() != cells) {
        throw ValidationError("gaussian oracle: covariance must be (x_size*t_size) square");
    }
}

double GaussianMixtureOracle::scale(double m) const {
    if (!scale_moment_) {
        return 1.0;
    }
    const double v = scale_moment_(m);
    if (!std::isfinite(v)) {
        throw ComputationError("moment of order " + std::to_string(m) + " does not exist for this model");
    }
    return v;
}

Eigen::MatrixXd GaussianMixtureOracle::abs_moments(double order) const {
    const double factor = scale(order) * gaussian_abs_moment(order);
    Eigen::MatrixXd out(static_cast<Eigen::Index>(nx_), static_cast<Eigen::Index>(nt_));
    for (std::size_t x = 0; x < nx_; ++x) {
        for (std::size_t t = 0; t < nt_; ++t) {
            const double var = std::max(cov(x, t, x, t), 0.0);
            out(static_cast<Eigen::Index>(x), static_cast<Eigen::Index>(t)) = factor * std::pow(var, 0.5 * order);
        }
    }
    return out;
}

PairTable GaussianMixtureOracle::increment_moments(double order) const {
    const double factor = scale(order) * gaussian_abs_moment(order);
    PairTable out = zero_table(nx_, nt_);
    for (std::size_t x = 0; x < nx_; ++x) {
        for (std::size_t t = 0; t < nt_; ++t) {
            for (std::size_t s = t + 1; s < nt_; ++s) {
                const double var = std::max(cov(x, t, x, t) + cov(x, s, x, s) - 2.0 * cov(x, t, x, s), 0.0);
                const double v = factor * std::pow(var, 0.5 * order);
                out[x](static_cast<Eigen::Index>(t), static_cast<Eigen::Index>(s)) = v;
                out[x](static_cast<Eigen::Index>(s), static_cast<Eigen::Index>(t)) = v;
            }
        }
    }
    return out;
}

PairTable GaussianMixtureOracle::power_increment_moments(double p, double q) const {
    const double factor = scale(p * q);
    PairTable out = zero_table(nx_, nt_);
    for (std::size_t x = 0; x < nx_; ++x) {
        for (std::size_t t = 0; t < nt_; ++t) {
            for (std::size_t s = t + 1; s < nt_; ++s) {
                const double v = factor * gaussian_power_increment_moment(cov(x, t, x, t), cov(x, s, x, s),
                                                                          cov(x, t, x, s), p, q);
                out[x](static_cast<Eigen::Index>(t), static_cast<Eigen::Index>(s)) = v;
                out[x](static_cast<Eigen::Index>(s), static_cast<Eigen::Index>(t)) = v;
            }
        }
    }
    return out;
}

EmpiricalOracle::EmpiricalOracle(Eigen::MatrixXd bank, std::size_t x_size, std::size_t t_size, double z_upper)
    : bank_(std::move(bank)), nx_(x_size), nt_(t_size), z_(z_upper) {
    if (bank_.cols() != static_cast<Eigen::Index>(nx_ * nt_)) {
        throw ValidationError("empirical oracle: bank columns must equal x_size*t_size");
    }
    if (bank_.rows() < 2) {
        throw ValidationError("empirical oracle: need at least two draws");
    }
    if (!bank_.allFinite()) {
        throw ValidationError("empirical oracle: non-finite draw in bank");
    }
}

template <class F>
double EmpiricalOracle::upper_mean(const F& value_of_row) const {
    const Eigen::Index m = bank_.rows();
    long double sum = 0.0L;
    long double sum_sq = 0.0L;
    for (Eigen::Index r = 0; r < m; ++r) {
        const long double v = value_of_row(r);
        sum += v;
        sum_sq += v * v;
    }
    const long double n = static_cast<long double>(m);
    const long double mean = sum / n;
    const long double var = std::max(0.0L, (sum_sq - n * mean * mean) / (n - 1.0L));
    return static_cast<double>(mean + static_cast<long double>(z_) * std::sqrt(var / n));
}

Eigen::MatrixXd EmpiricalOracle::abs_moments(double order) const {
    std::lock_guard lock(mutex_);
    if (auto it = abs_cache_.find(order); it != abs_cache_.end()) {
        return it->second;
    }
    Eigen::MatrixXd out(static_cast<Eigen::Index>(nx_), static_cast<Eigen::Index>(nt_));
    for (std::size_t x = 0; x < nx_; ++x) {
        for (std::size_t t = 0; t < nt_; ++t) {
            const auto c = static_cast<Eigen::Index>(x * nt_ + t);
            out(static_cast<Eigen::Index>(x), static_cast<Eigen::Index>(t)) =
                upper_mean([&](Eigen::Index r) { return std::pow(std::abs(bank_(r, c)), order); });
        }
    }
    abs_cache_.emplace(order, out);
    return out;
}

PairTable EmpiricalOracle::increment_moments(double order) const {
    std::lock_guard lock(mutex_);
    if (auto it = inc_cache_.find(order); it != inc_cache_.end()) {
        return it->second;
    }
    PairTable out = zero_table(nx_, nt_);
    for (std::size_t x = 0; x < nx_; ++x) {
        for (std::size_t t = 0; t < nt_; ++t) {
            for (std::size_t s = t + 1; s < nt_; ++s) {
                const auto ct = static_cast<Eigen::Index>(x * nt_ + t);
                const auto cs = static_cast<Eigen::Index>(x * nt_ + s);
                const double v = upper_mean(
                    [&](Eigen::Index r) { return std::pow(std::abs(bank_(r, ct) - bank_(r, cs)), order); });
                out[x](static_cast<Eigen::Index>(t), static_cast<Eigen::Index>(s)) = v;
                out[x](static_cast<Eigen::Index>(s), static_cast<Eigen::Index>(t)) = v;
            }
        }
    }
    inc_cache_.emplace(order, out);
    return out;
}

PairTable EmpiricalOracle::power_increment_moments(double p, double q) const {
    std::lock_guard lock(mutex_);
    const auto key = std::make_pair(p, q);
    if (auto it = pow_cache_.find(key); it != pow_cache_.end()) {
        return it->second;
    }
    PairTable out = zero_table(nx_, nt_);
    for (std::size_t x = 0; x < nx_; ++x) {
        for (std::size_t t = 0; t < nt_; ++t) {
            for (std::size_t s = t + 1; s < nt_; ++s) {
                const auto ct = static_cast<Eigen::Index>(x * nt_ + t);
                const auto cs = static_cast<Eigen::Index>(x * nt_ + s);
                const double v = upper_mean([&](Eigen::Index r) {
                    const double d = std::pow(std::abs(bank_(r, ct)), p) - std::pow(std::abs(bank_(r, cs)), p);
                    return std::pow(std::abs(d), q);
                });
                out[x](static_cast<Eigen::Index>(t), static_cast<Eigen::Index>(s)) = v;
                out[x](static_cast<Eigen::Index>(s), static_cast<Eigen::Index>(t)) = v;
            }
        }
    }
    pow_cache_.emplace(key, out);
    return out;
}

} // namespace hlc
