#include "hlc/measure_grid.hpp"

#include "hlc/error.hpp"

#include <cmath>
#include <limits>
#include <string>

namespace hlc {

MeasureSpace::MeasureSpace(std::vector<Point> points, std::vector<double> weights)
    : points_(std::move(points)), weights_(std::move(weights)) {
    if (weights_.empty()) {
        throw ValidationError("measure space: no points given");
    }
    if (points_.size() != weights_.size()) {
        throw ValidationError("measure space: " + std::to_string(points_.size()) + " points but " +
                              std::to_string(weights_.size()) + " weights");
    }
    for (std::size_t i = 0; i < weights_.size(); ++i) {
        const double w = weights_[i];
        if (!std::isfinite(w) || w <= 0.0) {
            throw ValidationError("measure space: weight at index " + std::to_string(i) +
                                  " must be finite and positive");
        }
        total_mass_ += w;
    }
}

MeasureSpace build_measure_space(std::vector<Point> coords, std::vector<double> weights) {
    return MeasureSpace(std::move(coords), std::move(weights));
}

MeasureSpace unit_measure_space(std::size_t n, double weight) {
    std::vector<Point> pts(n);
    for (std::size_t i = 0; i < n; ++i) {
        pts[i] = {static_cast<double>(i)};
    }
    return MeasureSpace(std::move(pts), std::vector<double>(n, weight));
}

IndexSpace::IndexSpace(std::vector<Point> points, Eigen::MatrixXd raw)
    : points_(std::move(points)), distance_(std::move(raw)) {
    const auto n = static_cast<Eigen::Index>(distance_.rows());
    // Exact 1-center over the point set; ties go to the lowest index.
    double best = std::numeric_limits<double>::infinity();
    for (Eigen::Index i = 0; i < n; ++i) {
        const double ecc = distance_.row(i).maxCoeff();
        if (ecc < best) {
            best = ecc;
            center_ = static_cast<std::size_t>(i);
        }
    }
    radius_ = best > 0.0 ? best : 1.0;
    distance_ /= radius_;

    min_positive_ = std::numeric_limits<double>::infinity();
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = i + 1; j < n; ++j) {
            const double d = distance_(i, j);
            if (d > 0.0 && d < min_positive_) {
                min_positive_ = d;
            }
        }
    }
}

IndexSpace build_index_space(const std::vector<Point>& coords, double metric_exponent) {
    if (coords.empty()) {
        throw ValidationError("index space: no points given");
    }
    if (!(metric_exponent > 0.0 && metric_exponent <= 1.0)) {
        throw ValidationError("index space: metric exponent must lie in (0, 1]");
    }
    const std::size_t dim = coords.front().size();
    for (std::size_t i = 0; i < coords.size(); ++i) {
        if (coords[i].size() != dim) {
            throw ValidationError("index space: point " + std::to_string(i) + " has dimension " +
                                  std::to_string(coords[i].size()) + ", expected " + std::to_string(dim));
        }
        for (double c : coords[i]) {
            if (!std::isfinite(c)) {
                throw ValidationError("index space: non-finite coordinate at point " + std::to_string(i));
            }
        }
    }
    const auto n = static_cast<Eigen::Index>(coords.size());
    Eigen::MatrixXd raw = Eigen::MatrixXd::Zero(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = i + 1; j < n; ++j) {
            double sq = 0.0;
            for (std::size_t k = 0; k < dim; ++k) {
                const double diff = coords[i][k] - coords[j][k];
                sq += diff * diff;
            }
            const double d = std::pow(std::sqrt(sq), metric_exponent);
            raw(i, j) = d;
            raw(j, i) = d;
        }
    }
    return IndexSpace(coords, std::move(raw));
}

IndexSpace build_index_space_from_matrix(const Eigen::MatrixXd& matrix) {
    if (matrix.rows() == 0 || matrix.rows() != matrix.cols()) {
        throw ValidationError("index space: distance matrix must be square and non-empty");
    }
    const auto n = matrix.rows();
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = 0; j < n; ++j) {
            const double d = matrix(i, j);
            if (!std::isfinite(d) || d < 0.0) {
                throw ValidationError("index space: entry (" + std::to_string(i) + "," + std::to_string(j) +
                                      ") must be finite and non-negative");
            }
            if (std::abs(d - matrix(j, i)) > 1e-12) {
                throw ValidationError("index space: matrix is not symmetric at (" + std::to_string(i) + "," +
                                      std::to_string(j) + ")");
            }
        }
        if (matrix(i, i) != 0.0) {
            throw ValidationError("index space: diagonal entry " + std::to_string(i) + " is not zero");
        }
    }
    // Symmetrize exactly so downstream comparisons see identical (i,j) and (j,i).
    Eigen::MatrixXd sym = 0.5 * (matrix + matrix.transpose());
    std::vector<Point> pts(static_cast<std::size_t>(n));
    for (Eigen::Index i = 0; i < n; ++i) {
        pts[static_cast<std::size_t>(i)] = {static_cast<double>(i)};
    }
    return IndexSpace(std::move(pts), std::move(sym));
}

Field::Field(Eigen::MatrixXd values,
             std::shared_ptr<const MeasureSpace> x_space,
             std::shared_ptr<const IndexSpace> t_space)
    : values_(std::move(values)), x_space_(std::move(x_space)), t_space_(std::move(t_space)) {
    if (!x_space_ || !t_space_) {
        throw ValidationError("field: spaces must be provided");
    }
    if (static_cast<std::size_t>(values_.rows()) != x_space_->size() ||
        static_cast<std::size_t>(values_.cols()) != t_space_->size()) {
        throw ValidationError("field: values are " + std::to_string(values_.rows()) + "x" +
                              std::to_string(values_.cols()) + " but spaces are " +
                              std::to_string(x_space_->size()) + "x" + std::to_string(t_space_->size()));
    }
    if (!values_.allFinite()) {
        throw ValidationError("field: non-finite entry");
    }
}

Field tensor_field(std::span<const double> g1, std::span<const double> g2,
                   std::shared_ptr<const MeasureSpace> x_space,
                   std::shared_ptr<const IndexSpace> t_space) {
    if (!x_space || !t_space || g1.size() != x_space->size() || g2.size() != t_space->size()) {
        throw ValidationError("tensor field: factor lengths do not match the spaces");
    }
    const Eigen::Map<const Eigen::VectorXd> a(g1.data(), static_cast<Eigen::Index>(g1.size()));
    const Eigen::Map<const Eigen::VectorXd> b(g2.data(), static_cast<Eigen::Index>(g2.size()));
    return Field(a * b.transpose(), std::move(x_space), std::move(t_space));
}

std::vector<Point> uniform_grid(std::size_t per_axis, std::size_t dim) {
    if (per_axis == 0 || dim == 0) {
        throw ValidationError("uniform grid: need at least one point and one axis");
    }
    std::size_t total = 1;
    for (std::size_t d = 0; d < dim; ++d) {
        total *= per_axis;
    }
    const double step = per_axis > 1 ? 1.0 / static_cast<double>(per_axis - 1) : 0.0;
    std::vector<Point> pts(total, Point(dim));
    for (std::size_t i = 0; i < total; ++i) {
        std::size_t rest = i;
        for (std::size_t d = 0; d < dim; ++d) {
            pts[i][dim - 1 - d] = static_cast<double>(rest % per_axis) * step;
            rest /= per_axis;
        }
    }
    return pts;
}

} // namespace hlc
