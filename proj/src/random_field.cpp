#include "hlc/random_field.hpp"

#include "hlc/error.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

namespace hlc {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr std::size_t kBurnIn = 16;

Eigen::MatrixXd covariance_factor(const Eigen::MatrixXd& cov) {
    if (cov.rows() != cov.cols()) {
        throw ValidationError("covariance must be square");
    }
    if (!cov.allFinite()) {
        throw ValidationError("covariance has non-finite entries");
    }
    if ((cov - cov.transpose()).cwiseAbs().maxCoeff() > 1e-12 * std::max(1.0, cov.cwiseAbs().maxCoeff())) {
        throw ValidationError("covariance is not symmetric");
    }
    Eigen::LLT<Eigen::MatrixXd> llt(cov);
    if (llt.info() == Eigen::Success) {
        return llt.matrixL();
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(cov);
    const Eigen::VectorXd& lambda = eig.eigenvalues();
    const double tol = 1e-10 * std::max(1.0, lambda.cwiseAbs().maxCoeff());
    if (lambda.minCoeff() < -tol) {
        throw ValidationError("covariance is not positive semidefinite (eigenvalue " +
                              std::to_string(lambda.minCoeff()) + ")");
    }
    // Rounding-level eigenvalues are treated as exact zeros of a singular kernel.
    const Eigen::VectorXd kept = (lambda.array() > tol).select(lambda, 0.0);
    return eig.eigenvectors() * kept.cwiseSqrt().asDiagonal();
}

// E W^m for W = sqrt(dof / chi2_dof).
double t_scale_moment(double dof, double m) {
    if (m >= dof) {
        return kInf;
    }
    return std::exp(0.5 * m * std::log(0.5 * dof) + std::lgamma(0.5 * (dof - m)) - std::lgamma(0.5 * dof));
}

} // namespace

std::string to_string(ModelKind kind) {
    switch (kind) {
    case ModelKind::Gaussian: return "gaussian";
    case ModelKind::SymmetrizedUniform: return "symmetrized-uniform";
    case ModelKind::HeavyTailT: return "heavy-tail-t";
    case ModelKind::MartingaleDifference: return "martingale-difference";
    case ModelKind::MixingaleAr: return "mixingale-ar";
    }
    return "unknown";
}

ModelKind model_kind_from_string(const std::string& name) {
    for (ModelKind k : {ModelKind::Gaussian, ModelKind::SymmetrizedUniform, ModelKind::HeavyTailT,
                        ModelKind::MartingaleDifference, ModelKind::MixingaleAr}) {
        if (to_string(k) == name) {
            return k;
        }
    }
    throw ValidationError("unknown model kind '" + name + "'");
}

Eigen::MatrixXd separable_covariance(const MeasureSpace& x_space, const IndexSpace& t_space,
                                     const KernelSpec& kernel) {
    if (!(kernel.variance >= 0.0) || !std::isfinite(kernel.variance)) {
        throw ValidationError("kernel variance must be finite and non-negative");
    }
    const std::size_t nx = x_space.size();
    const std::size_t nt = t_space.size();
    const auto& pts = x_space.points();
    auto x_corr = [&](std::size_t a, std::size_t b) {
        if (a == b) {
            return 1.0;
        }
        if (kernel.x_length <= 0.0) {
            return 0.0;
        }
        double d2 = 0.0;
        const Point& pa = pts[a];
        const Point& pb = pts[b];
        if (pa.size() != pb.size()) {
            throw ValidationError("X points have different dimensions");
        }
        for (std::size_t i = 0; i < pa.size(); ++i) {
            d2 += (pa[i] - pb[i]) * (pa[i] - pb[i]);
        }
        return std::exp(-std::sqrt(d2) / kernel.x_length);
    };
    auto t_corr = [&](std::size_t a, std::size_t b) {
        if (a == b) {
            return 1.0;
        }
        if (kernel.t_length <= 0.0) {
            return 0.0;
        }
        return std::exp(-t_space.distance(a, b) / kernel.t_length);
    };
    const auto n = static_cast<Eigen::Index>(nx * nt);
    Eigen::MatrixXd c(n, n);
    for (std::size_t x1 = 0; x1 < nx; ++x1) {
        for (std::size_t x2 = 0; x2 < nx; ++x2) {
            const double cx = x_corr(x1, x2);
            for (std::size_t t1 = 0; t1 < nt; ++t1) {
                for (std::size_t t2 = 0; t2 < nt; ++t2) {
                    c(static_cast<Eigen::Index>(x1 * nt + t1), static_cast<Eigen::Index>(x2 * nt + t2)) =
                        kernel.variance * cx * t_corr(t1, t2);
                }
            }
        }
    }
    return c;
}

RandomFieldModel::RandomFieldModel(ModelKind kind, std::shared_ptr<const MeasureSpace> x,
                                   std::shared_ptr<const IndexSpace> t, Eigen::MatrixXd covariance)
    : kind_(kind), x_(std::move(x)), t_(std::move(t)), covariance_(std::move(covariance)) {
    if (!x_ || !t_) {
        throw ValidationError("model needs both spaces");
    }
    const auto n = static_cast<Eigen::Index>(cells());
    if (covariance_.rows() != n || covariance_.cols() != n) {
        throw ValidationError("covariance must be " + std::to_string(n) + "x" + std::to_string(n));
    }
    factor_ = covariance_factor(covariance_);
}

RandomFieldModel RandomFieldModel::gaussian(std::shared_ptr<const MeasureSpace> x,
                                            std::shared_ptr<const IndexSpace> t, Eigen::MatrixXd covariance) {
    return {ModelKind::Gaussian, std::move(x), std::move(t), std::move(covariance)};
}

RandomFieldModel RandomFieldModel::symmetrized_uniform(std::shared_ptr<const MeasureSpace> x,
                                                       std::shared_ptr<const IndexSpace> t,
                                                       Eigen::MatrixXd covariance) {
    return {ModelKind::SymmetrizedUniform, std::move(x), std::move(t), std::move(covariance)};
}

RandomFieldModel RandomFieldModel::heavy_tail_t(std::shared_ptr<const MeasureSpace> x,
                                                std::shared_ptr<const IndexSpace> t, Eigen::MatrixXd covariance,
                                                double dof) {
    if (!(dof > 2.0) || !std::isfinite(dof)) {
        throw ValidationError("heavy-tail-t: degrees of freedom must exceed 2");
    }
    RandomFieldModel m{ModelKind::HeavyTailT, std::move(x), std::move(t), std::move(covariance)};
    m.dof_ = dof;
    return m;
}

RandomFieldModel RandomFieldModel::martingale_difference(std::shared_ptr<const MeasureSpace> x,
                                                         std::shared_ptr<const IndexSpace> t,
                                                         Eigen::MatrixXd covariance, double s_lo, double s_hi) {
    if (!(s_lo > 0.0) || !(s_hi >= s_lo) || !std::isfinite(s_hi)) {
        throw ValidationError("martingale-difference: need 0 < s_lo <= s_hi < inf");
    }
    RandomFieldModel m{ModelKind::MartingaleDifference, std::move(x), std::move(t), std::move(covariance)};
    m.s_lo_ = s_lo;
    m.s_hi_ = s_hi;
    return m;
}

RandomFieldModel RandomFieldModel::mixingale_ar(std::shared_ptr<const MeasureSpace> x,
                                                std::shared_ptr<const IndexSpace> t, Eigen::MatrixXd covariance,
                                                double ar_coefficient) {
    if (!(std::abs(ar_coefficient) < 1.0)) {
        throw ValidationError("mixingale-ar: |a| must be < 1");
    }
    RandomFieldModel m{ModelKind::MixingaleAr, std::move(x), std::move(t), std::move(covariance)};
    m.ar_ = ar_coefficient;
    return m;
}

RandomFieldModel RandomFieldModel::scaled(double c) const {
    if (!(c > 0.0) || !std::isfinite(c)) {
        throw ValidationError("scale factor must be positive and finite");
    }
    RandomFieldModel m = *this;
    m.covariance_ *= c * c;
    m.scale_ *= c;
    return m;
}

MixingSequence RandomFieldModel::mixing_sequence() const {
    if (kind_ == ModelKind::MixingaleAr) {
        return MixingSequence::geometric(1.0, std::abs(ar_));
    }
    return MixingSequence::explicit_values({});
}

double RandomFieldModel::moment_limit() const noexcept {
    return kind_ == ModelKind::HeavyTailT ? dof_ : kInf;
}

std::unique_ptr<MomentOracle> RandomFieldModel::analytic_oracle() const {
    switch (kind_) {
    case ModelKind::Gaussian:
    case ModelKind::MixingaleAr:
        return std::make_unique<GaussianMixtureOracle>(covariance_, x_size(), t_size());
    case ModelKind::HeavyTailT: {
        const double dof = dof_;
        return std::make_unique<GaussianMixtureOracle>(covariance_, x_size(), t_size(),
                                                       [dof](double m) { return t_scale_moment(dof, m); });
    }
    case ModelKind::MartingaleDifference: {
        const double hi = s_hi_;
        return std::make_unique<GaussianMixtureOracle>(covariance_, x_size(), t_size(),
                                                       [hi](double m) { return std::pow(hi, m); });
    }
    case ModelKind::SymmetrizedUniform:
        return nullptr;
    }
    return nullptr;
}

std::unique_ptr<MomentOracle> RandomFieldModel::moment_oracle(std::size_t bank_draws, std::uint64_t seed) const {
    if (auto exact = analytic_oracle()) {
        return exact;
    }
    if (bank_draws < 2) {
        throw ValidationError("empirical oracle needs at least 2 draws");
    }
    const auto n = static_cast<Eigen::Index>(cells());
    Eigen::MatrixXd bank(static_cast<Eigen::Index>(bank_draws), n);
    const std::uint32_t tag = experiment_tag("moment-oracle-bank");
    for (std::size_t r = 0; r < bank_draws; ++r) {
        const Field f = draw({seed, tag, static_cast<std::uint32_t>(r)});
        for (std::size_t x = 0; x < x_size(); ++x) {
            for (std::size_t t = 0; t < t_size(); ++t) {
                bank(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(x * t_size() + t)) = f(x, t);
            }
        }
    }
    return std::make_unique<EmpiricalOracle>(std::move(bank), x_size(), t_size());
}

Field RandomFieldModel::to_field(const Eigen::VectorXd& innovation, double factor) const {
    const Eigen::VectorXd cells_v = factor_ * innovation;
    const auto nx = static_cast<Eigen::Index>(x_size());
    const auto nt = static_cast<Eigen::Index>(t_size());
    Eigen::MatrixXd v(nx, nt);
    for (Eigen::Index x = 0; x < nx; ++x) {
        for (Eigen::Index t = 0; t < nt; ++t) {
            v(x, t) = cells_v(x * nt + t) * factor;
        }
    }
    return Field(std::move(v), x_, t_);
}

std::vector<Field> RandomFieldModel::normed_sum_ladder(const std::vector<std::size_t>& ladder,
                                                       StreamId stream) const {
    if (ladder.empty()) {
        return {};
    }
    for (std::size_t i = 0; i < ladder.size(); ++i) {
        if (ladder[i] == 0 || (i > 0 && ladder[i] <= ladder[i - 1])) {
            throw ValidationError("n ladder must be strictly increasing and start at n >= 1");
        }
    }
    CounterRng rng(stream);
    std::normal_distribution<double> normal;
    const auto n = static_cast<Eigen::Index>(cells());
    Eigen::VectorXd acc = Eigen::VectorXd::Zero(n);
    Eigen::VectorXd zeta(n);
    std::vector<Field> out;
    out.reserve(ladder.size());

    // State carried between steps by the dependent kinds.
    Eigen::VectorXd prev(n);
    double prev_cell0 = 0.0;
    const Eigen::RowVectorXd row0 = factor_.row(0);
    const double innov_sd = std::sqrt(1.0 - ar_ * ar_);
    const double sqrt3 = std::sqrt(3.0);

    auto gaussian_vector = [&](Eigen::VectorXd& z) {
        for (Eigen::Index i = 0; i < n; ++i) {
            z(i) = normal(rng);
        }
    };
    auto martingale_step = [&](Eigen::VectorXd& z) {
        const double th = std::tanh(prev_cell0);
        const double sigma = s_lo_ + (s_hi_ - s_lo_) * th * th;
        gaussian_vector(z);
        z *= sigma;
        prev_cell0 = n > 0 ? row0.dot(z) : 0.0;
    };

    if (kind_ == ModelKind::MartingaleDifference) {
        for (std::size_t k = 0; k < kBurnIn; ++k) {
            martingale_step(zeta);
        }
    } else if (kind_ == ModelKind::MixingaleAr) {
        gaussian_vector(prev);
    }

    std::size_t rung = 0;
    for (std::size_t k = 1; rung < ladder.size(); ++k) {
        switch (kind_) {
        case ModelKind::Gaussian:
            gaussian_vector(zeta);
            break;
        case ModelKind::SymmetrizedUniform:
            for (Eigen::Index i = 0; i < n; ++i) {
                zeta(i) = sqrt3 * (2.0 * rng.uniform() - 1.0);
            }
            break;
        case ModelKind::HeavyTailT: {
            std::chi_squared_distribution<double> chi2(dof_);
            gaussian_vector(zeta);
            zeta *= std::sqrt(dof_ / chi2(rng));
            break;
        }
        case ModelKind::MartingaleDifference:
            martingale_step(zeta);
            break;
        case ModelKind::MixingaleAr:
            gaussian_vector(zeta);
            zeta = ar_ * prev + innov_sd * zeta;
            prev = zeta;
            break;
        }
        acc += zeta;
        if (k == ladder[rung]) {
            out.push_back(to_field(acc, scale_ / std::sqrt(static_cast<double>(k))));
            ++rung;
        }
    }
    return out;
}

Field RandomFieldModel::normed_sum(std::size_t n, StreamId stream) const {
    return normed_sum_ladder({n}, stream).front();
}

Field RandomFieldModel::draw(StreamId stream) const {
    return normed_sum(1, stream);
}

} // namespace hlc
