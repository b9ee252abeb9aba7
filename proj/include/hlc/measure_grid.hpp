#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <memory>
#include <span>
#include <vector>

namespace hlc {

using Point = std::vector<double>;

/**
 * Finite measure space (X, mu): points with strictly positive weights.
 *
 * Total mass is finite but not normalized; a space of mass 3 is as valid as a
 * probability space.
 */
class MeasureSpace {
public:
    MeasureSpace(std::vector<Point> points, std::vector<double> weights);

    std::size_t size() const noexcept { return weights_.size(); }
    const std::vector<Point>& points() const noexcept { return points_; }
    std::span<const double> weights() const noexcept { return weights_; }
    double weight(std::size_t i) const { return weights_.at(i); }
    double total_mass() const noexcept { return total_mass_; }

private:
    std::vector<Point> points_;
    std::vector<double> weights_;
    double total_mass_ = 0.0;
};

/**
 * Finite semi-metric index set T.
 *
 * Distances are stored normalized so that the 1-center has radius 1; the
 * pre-normalization radius is kept in radius(). Coincident points (distance 0)
 * are allowed.
 */
class IndexSpace {
public:
    std::size_t size() const noexcept { return static_cast<std::size_t>(distance_.rows()); }
    const std::vector<Point>& points() const noexcept { return points_; }

    // Normalized distance.
    double distance(std::size_t i, std::size_t j) const { return distance_(i, j); }
    const Eigen::MatrixXd& distances() const noexcept { return distance_; }

    // Distance in the units the space was built from.
    double raw_distance(std::size_t i, std::size_t j) const { return distance_(i, j) * radius_; }

    std::size_t center_index() const noexcept { return center_; }
    double radius() const noexcept { return radius_; }

    // Smallest strictly positive normalized distance; +inf when every pair coincides.
    double min_positive_distance() const noexcept { return min_positive_; }

    friend IndexSpace build_index_space(const std::vector<Point>& coords, double metric_exponent);
    friend IndexSpace build_index_space_from_matrix(const Eigen::MatrixXd& matrix);

private:
    IndexSpace(std::vector<Point> points, Eigen::MatrixXd raw);

    std::vector<Point> points_;
    Eigen::MatrixXd distance_;
    std::size_t center_ = 0;
    double radius_ = 1.0;
    double min_positive_ = 0.0;
};

/// Realization f(x, t): rows index X, columns index T.
class Field {
public:
    Field(Eigen::MatrixXd values,
          std::shared_ptr<const MeasureSpace> x_space,
          std::shared_ptr<const IndexSpace> t_space);

    const Eigen::MatrixXd& values() const noexcept { return values_; }
    double operator()(std::size_t x, std::size_t t) const { return values_(x, t); }
    std::size_t x_size() const noexcept { return static_cast<std::size_t>(values_.rows()); }
    std::size_t t_size() const noexcept { return static_cast<std::size_t>(values_.cols()); }

    const MeasureSpace& x_space() const noexcept { return *x_space_; }
    const IndexSpace& t_space() const noexcept { return *t_space_; }
    const std::shared_ptr<const MeasureSpace>& x_space_ptr() const noexcept { return x_space_; }
    const std::shared_ptr<const IndexSpace>& t_space_ptr() const noexcept { return t_space_; }

private:
    Eigen::MatrixXd values_;
    std::shared_ptr<const MeasureSpace> x_space_;
    std::shared_ptr<const IndexSpace> t_space_;
};

MeasureSpace build_measure_space(std::vector<Point> coords, std::vector<double> weights);

// rho(t, s) = ||t - s||_2^alpha, alpha in (0, 1], then normalized to radius 1.
IndexSpace build_index_space(const std::vector<Point>& coords, double metric_exponent);

IndexSpace build_index_space_from_matrix(const Eigen::MatrixXd& matrix);

// f(x, t) = g1(x) * g2(t)
Field tensor_field(std::span<const double> g1, std::span<const double> g2,
                   std::shared_ptr<const MeasureSpace> x_space,
                   std::shared_ptr<const IndexSpace> t_space);

/// Unit-weight space on the ordinals 0..n-1.
MeasureSpace unit_measure_space(std::size_t n, double weight = 1.0);

/// Regular grid on [0,1]^dim with `per_axis` points per axis.
std::vector<Point> uniform_grid(std::size_t per_axis, std::size_t dim);

} // namespace hlc
