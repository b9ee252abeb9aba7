#include "hlc/entropy_bounds.hpp"

#include "hlc/error.hpp"
#include "hlc/mixed_norms.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

namespace hlc {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void require(bool ok, const std::string& message) {
    if (!ok) {
        throw ValidationError(message);
    }
}

// Shared tail of every entropy bound: normalize, profile, optimize theta.
MomentBoundReport finish_report(BoundKind kind, double p, double Q, double sigma, double sigma_hat,
                                const Eigen::MatrixXd& raw_distance, double series_q, double final_root) {
    MomentBoundReport rep;
    rep.kind = kind;
    rep.p = p;
    rep.Q = Q;
    rep.sigma_bar = sigma;
    rep.sigma_hat = sigma_hat;

    const double lead = kind == BoundKind::Thm32 ? sigma_hat : sigma;
    if (lead == 0.0) {
        if (raw_distance.size() > 0 && raw_distance.maxCoeff() > 0.0) {
            throw ComputationError(to_string(kind) +
                                   ": zero scale with non-zero increments; moments are inconsistent");
        }
        rep.distance = Eigen::MatrixXd::Zero(raw_distance.rows(), raw_distance.cols());
        const IndexSpace space = build_index_space_from_matrix(rep.distance);
        rep.profile = exact_step_profile(space, space.radius());
        rep.series = pisier_series(rep.profile, 0.0, series_q, 0.01);
        rep.theta_star = 0.01;
        return rep;
    }
    rep.distance = raw_distance / lead;
    const IndexSpace space = build_index_space_from_matrix(rep.distance);
    rep.profile = exact_step_profile(space, space.radius());
    const ThetaOptimum opt = optimize_theta(rep.profile, lead, series_q);
    rep.series = opt.series;
    rep.theta_star = opt.theta;
    rep.nu_power = opt.nu;
    rep.nu = final_root == 1.0 ? opt.nu : std::pow(opt.nu, 1.0 / final_root);
    return rep;
}

} // namespace

std::string to_string(BoundKind kind) {
    switch (kind) {
    case BoundKind::Prop11: return "prop11";
    case BoundKind::Prop21: return "prop21";
    case BoundKind::Thm32: return "thm32";
    case BoundKind::Prop41: return "prop41";
    }
    return "unknown";
}

double rosenthal_constant(double p, const RosenthalParams& params) {
    require(p >= 2.0, "rosenthal_constant: p must be >= 2");
    const double v = params.c_r * p / (std::numbers::e * std::log(p));
    return std::max(1.0, v);
}

SumConstant rosenthal_sum_constant(RosenthalParams params) {
    return [params](double m) { return rosenthal_constant(m, params); };
}

MixingSequence MixingSequence::geometric(double b, double r) {
    require(b >= 0.0 && r >= 0.0 && r < 1.0, "mixing sequence: need b >= 0 and ratio in [0, 1)");
    MixingSequence s;
    s.law = Law::Geometric;
    s.scale = b;
    s.ratio = r;
    return s;
}

MixingSequence MixingSequence::power(double b, double gamma) {
    require(b >= 0.0 && gamma >= 0.0, "mixing sequence: need b >= 0 and gamma >= 0");
    MixingSequence s;
    s.law = Law::Power;
    s.scale = b;
    s.exponent = gamma;
    return s;
}

MixingSequence MixingSequence::explicit_values(std::vector<double> values) {
    for (std::size_t i = 0; i < values.size(); ++i) {
        require(values[i] >= 0.0, "mixing sequence: negative beta at k=" + std::to_string(i + 1));
        require(i == 0 || values[i] <= values[i - 1],
                "mixing sequence: beta must be non-increasing (k=" + std::to_string(i + 1) + ")");
    }
    MixingSequence s;
    s.law = Law::Explicit;
    s.values = std::move(values);
    return s;
}

double MixingSequence::at(std::size_t k) const {
    const double kk = static_cast<double>(k);
    switch (law) {
    case Law::Geometric: return scale * std::pow(ratio, kk);
    case Law::Power: return scale * std::pow(kk, -exponent);
    case Law::Explicit: return k >= 1 && k <= values.size() ? values[k - 1] : 0.0;
    }
    return 0.0;
}

MixingaleCoefficient mixingale_coefficient(double m, const MixingSequence& beta, std::size_t k_max) {
    require(m >= 1.0, "mixingale_coefficient: m must be >= 1");
    require(k_max >= 1, "mixingale_coefficient: truncation must be >= 1");
    const double a = (m - 2.0) / 2.0;
    MixingaleCoefficient out;
    const std::size_t upto = beta.law == MixingSequence::Law::Explicit ? std::max(k_max, beta.values.size()) : k_max;
    long double partial = 0.0L;
    for (std::size_t k = 1; k <= upto; ++k) {
        partial += static_cast<long double>(beta.at(k)) * std::pow(static_cast<long double>(k + 1), a);
    }
    out.partial_sum = static_cast<double>(partial);

    const double K = static_cast<double>(upto);
    switch (beta.law) {
    case MixingSequence::Law::Explicit:
        out.tail_bound = 0.0;
        break;
    case MixingSequence::Law::Geometric: {
        if (beta.scale == 0.0 || beta.ratio == 0.0) {
            out.tail_bound = 0.0;
            break;
        }
        // Term ratio for k > K is at most r ((K+2)/(K+1))^{max(a,0)}.
        const double q = beta.ratio * std::pow((K + 2.0) / (K + 1.0), std::max(a, 0.0));
        if (q >= 1.0) {
            out.converged = false;
            break;
        }
        out.tail_bound = beta.at(upto + 1) * std::pow(K + 2.0, a) / (1.0 - q);
        break;
    }
    case MixingSequence::Law::Power: {
        if (beta.scale == 0.0) {
            out.tail_bound = 0.0;
            break;
        }
        // beta(k)(k+1)^a ~ b k^{a - gamma}: summable iff gamma - a > 1.
        const double excess = beta.exponent - a - 1.0;
        if (excess <= 0.0) {
            out.converged = false;
            break;
        }
        const double c = a > 0.0 ? std::pow((K + 2.0) / (K + 1.0), a) : 1.0;
        out.tail_bound = beta.scale * c * std::pow(K, -excess) / excess;
        break;
    }
    }
    if (!out.converged) {
        out.value = kInf;
        return out;
    }
    const double total = out.partial_sum + out.tail_bound;
    out.value = total == 0.0 ? 0.0 : m * std::pow(total, 1.0 / m);
    return out;
}

SumConstant mixingale_sum_constant(MixingSequence beta, std::size_t k_max) {
    return [beta = std::move(beta), k_max](double m) {
        const MixingaleCoefficient c = mixingale_coefficient(m, beta, k_max);
        if (!c.converged) {
            throw ComputationError("mixingale coefficient diverges at order " + std::to_string(m));
        }
        return std::max(1.0, c.value);
    };
}

SeriesEvaluation pisier_series(const EntropyProfile& profile, double sigma, double Q, double theta) {
    require(theta > 0.0 && theta < 1.0, "pisier_series: theta must lie in (0, 1)");
    require(Q >= 1.0, "pisier_series: Q must be >= 1");
    require(sigma >= 0.0, "pisier_series: sigma must be non-negative");

    SeriesEvaluation ev;
    ev.theta = theta;
    ev.sigma_factor = sigma;
    long double sum = 0.0L;

    if (profile.source == ProfileSource::Analytic) {
        const double a = profile.kappa / Q;
        if (a >= 1.0) {
            ev.tail_bound = kInf;
            ev.total = sigma == 0.0 ? 0.0 : kInf;
            return ev;
        }
        constexpr int kTerms = 60;
        for (int k = 1; k <= kTerms; ++k) {
            const double term =
                std::pow(theta, k - 1) * std::pow(profile.covering_at(std::pow(theta, k)), 1.0 / Q);
            ev.partial_terms.push_back(term);
            sum += term;
        }
        const double r = std::pow(theta, 1.0 - a);
        ev.tail_bound = std::pow(profile.prefactor, 1.0 / Q) / theta * std::pow(r, kTerms + 1) / (1.0 - r);
    } else {
        const double floor_eps = profile.min_positive;
        int k = 1;
        constexpr int kMaxTerms = 1 << 20;
        while (k < kMaxTerms) {
            const double eps = std::pow(theta, k);
            if (eps < floor_eps) {
                break;
            }
            const double term = std::pow(theta, k - 1) * std::pow(profile.covering_at(eps), 1.0 / Q);
            ev.partial_terms.push_back(term);
            sum += term;
            ++k;
        }
        ev.tail_bound = std::pow(theta, k - 1) * std::pow(profile.floor_count, 1.0 / Q) / (1.0 - theta);
    }
    ev.total = sigma == 0.0 ? 0.0 : sigma * static_cast<double>(sum + static_cast<long double>(ev.tail_bound));
    return ev;
}

ThetaOptimum optimize_theta(const EntropyProfile& profile, double sigma, double Q) {
    ThetaOptimum best;
    best.nu = kInf;
    auto consider = [&](double theta) {
        SeriesEvaluation ev = pisier_series(profile, sigma, Q, theta);
        const double total = ev.total;
        if (total < best.nu) {
            best.nu = total;
            best.theta = theta;
            best.series = std::move(ev);
        }
        return total;
    };

    std::size_t arg = 0;
    for (std::size_t i = 0; i < 99; ++i) {
        const double before = best.nu;
        consider(static_cast<double>(i + 1) / 100.0);
        if (best.nu < before) {
            arg = i;
        }
    }
    if (!std::isfinite(best.nu) || best.nu == 0.0) {
        if (!std::isfinite(best.nu)) {
            best.theta = 0.5;
            best.series = pisier_series(profile, sigma, Q, 0.5);
        }
        return best;
    }

    // Golden section inside the neighbouring grid cells.
    double lo = static_cast<double>(std::max<std::size_t>(arg, 1)) / 100.0;
    double hi = static_cast<double>(std::min<std::size_t>(arg + 2, 99)) / 100.0;
    const double g = (std::sqrt(5.0) - 1.0) / 2.0;
    double c = hi - g * (hi - lo);
    double d = lo + g * (hi - lo);
    double fc = consider(c);
    double fd = consider(d);
    for (int it = 0; it < 40; ++it) {
        if (fc <= fd) {
            hi = d;
            d = c;
            fd = fc;
            c = hi - g * (hi - lo);
            fc = consider(c);
        } else {
            lo = c;
            c = d;
            fc = fd;
            d = lo + g * (hi - lo);
            fd = consider(d);
        }
    }
    return best;
}

double closed_form_bound(double K, double kappa, double Q, double sigma) {
    require(K > 0.0, "closed_form_bound: K must be positive");
    require(Q >= 1.0, "closed_form_bound: Q must be >= 1");
    require(kappa >= 0.0 && kappa < Q, "closed_form_bound: need 0 <= kappa < Q");
    require(sigma >= 0.0, "closed_form_bound: sigma must be non-negative");
    if (kappa == 0.0) {
        return K * sigma;
    }
    const double a = kappa / Q;
    return K * sigma / (1.0 - a) * std::pow(a, -a / (1.0 - a));
}

double legendre_tail(const std::vector<double>& q_grid, const std::vector<double>& nu_values, double z) {
    require(!q_grid.empty(), "legendre_tail: empty Q grid");
    require(q_grid.size() == nu_values.size(), "legendre_tail: grid and values differ in length");
    require(z > 1.0, "legendre_tail: z must exceed 1");
    const double w = std::log(z);
    double h_star = -kInf;
    for (std::size_t i = 0; i < q_grid.size(); ++i) {
        require(nu_values[i] >= 0.0, "legendre_tail: nu values must be non-negative");
        const double h = nu_values[i] == 0.0 ? -kInf : q_grid[i] * std::log(nu_values[i]);
        h_star = std::max(h_star, w * q_grid[i] - h);
    }
    const double tail = std::exp(-h_star);
    return std::clamp(tail, 0.0, 1.0);
}

TailBound tail_bound(const std::vector<double>& q_grid, const std::vector<double>& nu_values,
                     const std::vector<double>& z_grid) {
    TailBound out;
    out.q_grid = q_grid;
    out.z_grid = z_grid;
    for (std::size_t i = 0; i < q_grid.size(); ++i) {
        out.h_values.push_back(q_grid[i] * std::log(nu_values.at(i)));
    }
    for (double z : z_grid) {
        out.tail.push_back(legendre_tail(q_grid, nu_values, z));
    }
    return out;
}

PowerGrowthFit fit_power_growth(const std::vector<double>& q_grid, const std::vector<double>& values) {
    require(q_grid.size() >= 2 && q_grid.size() == values.size(), "fit_power_growth: need >= 2 matched points");
    const double n = static_cast<double>(q_grid.size());
    double mx = 0.0;
    double my = 0.0;
    for (std::size_t i = 0; i < q_grid.size(); ++i) {
        require(q_grid[i] > 0.0 && values[i] > 0.0, "fit_power_growth: grid and values must be positive");
        mx += std::log(q_grid[i]);
        my += std::log(values[i]);
    }
    mx /= n;
    my /= n;
    double sxx = 0.0;
    double sxy = 0.0;
    for (std::size_t i = 0; i < q_grid.size(); ++i) {
        const double dx = std::log(q_grid[i]) - mx;
        sxx += dx * dx;
        sxy += dx * (std::log(values[i]) - my);
    }
    PowerGrowthFit fit;
    fit.m = sxx > 0.0 ? sxy / sxx : 0.0;
    const double intercept = my - fit.m * mx;
    double shift = 0.0;
    for (std::size_t i = 0; i < q_grid.size(); ++i) {
        const double r = std::log(values[i]) - (intercept + fit.m * std::log(q_grid[i]));
        fit.residual += r * r;
        shift = std::max(shift, r);
    }
    fit.c1 = std::exp(intercept + shift);
    fit.poor_fit = !(fit.m > 0.0) || fit.residual / n > 0.01;
    return fit;
}

double example21_tail(double c1, double m, double x) {
    require(c1 > 0.0 && m > 0.0, "example21_tail: need c1 > 0 and m > 0");
    require(x > 0.0, "example21_tail: x must be positive");
    // sup over Q >= 1 of Q (log x - log c1 - m log Q); the optimum is Q* = (x/c1)^{1/m} / e.
    const double q_star = std::pow(x / c1, 1.0 / m) / std::numbers::e;
    double exponent = 0.0;
    if (q_star >= 1.0) {
        const double c2 = m / (std::numbers::e * std::pow(c1, 1.0 / m));
        exponent = c2 * std::pow(x, 1.0 / m);
    } else {
        exponent = std::log(x / c1);
    }
    return std::clamp(std::exp(-exponent), 0.0, 1.0);
}

double example21_tail_on_grid(const PowerGrowthFit& fit, const std::vector<double>& q_grid, double x) {
    require(fit.c1 > 0.0, "example21_tail_on_grid: need c1 > 0");
    require(x > 0.0, "example21_tail_on_grid: x must be positive");
    require(!q_grid.empty(), "example21_tail_on_grid: empty grid");
    double best = 0.0;
    for (double q : q_grid) {
        require(q >= 1.0, "example21_tail_on_grid: grid values must be >= 1");
        best = std::max(best, q * (std::log(x) - std::log(fit.c1) - fit.m * std::log(q)));
    }
    return std::clamp(std::exp(-best), 0.0, 1.0);
}

double sigma_bar(const MomentOracle& oracle, double p, double Q, const MeasureSpace& x_space) {
    require(p >= 1.0 && Q >= 1.0, "sigma_bar: need p >= 1 and Q >= 1");
    require(oracle.x_size() == x_space.size(), "sigma_bar: oracle and measure space sizes differ");
    const Eigen::MatrixXd m = oracle.abs_moments(p * Q);
    double best = 0.0;
    for (Eigen::Index t = 0; t < m.cols(); ++t) {
        long double s = 0.0L;
        for (Eigen::Index x = 0; x < m.rows(); ++x) {
            s += x_space.weight(static_cast<std::size_t>(x)) * std::pow(m(x, t), 1.0 / Q);
        }
        best = std::max(best, static_cast<double>(s));
    }
    return best;
}

Eigen::MatrixXd dbar_matrix(const MomentOracle& oracle, double p, double Q, const MeasureSpace& x_space,
                            DbarForm form) {
    require(p >= 1.0 && Q >= 1.0, "dbar: need p >= 1 and Q >= 1");
    require(oracle.x_size() == x_space.size(), "dbar: oracle and measure space sizes differ");
    const auto nt = static_cast<Eigen::Index>(oracle.t_size());
    const auto nx = oracle.x_size();
    Eigen::MatrixXd d = Eigen::MatrixXd::Zero(nt, nt);
    if (form == DbarForm::Derived) {
        const PairTable pw = oracle.power_increment_moments(p, Q);
        for (Eigen::Index t = 0; t < nt; ++t) {
            for (Eigen::Index s = t + 1; s < nt; ++s) {
                long double acc = 0.0L;
                for (std::size_t x = 0; x < nx; ++x) {
                    acc += x_space.weight(x) * std::pow(pw[x](t, s), 1.0 / Q);
                }
                d(t, s) = d(s, t) = static_cast<double>(acc);
            }
        }
    } else {
        const Eigen::MatrixXd a = oracle.abs_moments(p);
        for (Eigen::Index t = 0; t < nt; ++t) {
            for (Eigen::Index s = t + 1; s < nt; ++s) {
                long double acc = 0.0L;
                for (std::size_t x = 0; x < nx; ++x) {
                    const auto xi = static_cast<Eigen::Index>(x);
                    acc += x_space.weight(x) * std::pow(std::abs(a(xi, t) - a(xi, s)), 1.0 / Q);
                }
                d(t, s) = d(s, t) = static_cast<double>(acc);
            }
        }
    }
    return d;
}

double dbar_distance(const MomentOracle& oracle, double p, double Q, std::size_t t, std::size_t s,
                     const MeasureSpace& x_space, DbarForm form) {
    require(t < oracle.t_size() && s < oracle.t_size(), "dbar_distance: index out of range");
    return dbar_matrix(oracle, p, Q, x_space, form)(static_cast<Eigen::Index>(t), static_cast<Eigen::Index>(s));
}

MomentBoundReport prop21_bound(const MomentOracle& oracle, double p, double Q, const MeasureSpace& x_space,
                               DbarForm form) {
    require(p >= 2.0 && Q >= 1.0, "prop21_bound: need p >= 2 and Q >= 1");
    const double sb = sigma_bar(oracle, p, Q, x_space);
    const Eigen::MatrixXd d = dbar_matrix(oracle, p, Q, x_space, form);
    return finish_report(BoundKind::Prop21, p, Q, sb, sb, d, Q, p);
}

std::vector<double> default_alpha_grid() {
    return {1.05, 1.1, 1.2, 1.35, 1.5, 1.75, 2.0, 2.5, 3.0, 4.0, 6.0, 10.0, 20.0};
}

MomentBoundReport thm32_bound(const MomentOracle& oracle, double p, double Q, const MeasureSpace& x_space,
                              const std::vector<double>& alpha_grid, const SumConstant& sum_constant) {
    require(p >= 2.0 && Q >= 1.0, "thm32_bound: need p >= 2 and Q >= 1");
    require(!alpha_grid.empty(), "thm32_bound: empty alpha grid");
    const double sb = sigma_bar(oracle, p, Q, x_space);
    const double k_pq = sum_constant(p * Q);
    const double sigma_hat = std::pow(k_pq, p) * sb;

    const auto nt = static_cast<Eigen::Index>(oracle.t_size());
    const std::size_t nx = oracle.x_size();
    Eigen::MatrixXd r = Eigen::MatrixXd::Constant(nt, nt, kInf);
    Eigen::MatrixXd alpha_star = Eigen::MatrixXd::Zero(nt, nt);
    r.diagonal().setZero();
    bool any_pair_order = false;

    for (double alpha : alpha_grid) {
        require(alpha > 1.0, "thm32_bound: alpha values must exceed 1");
        const double beta = alpha / (alpha - 1.0);
        const double inc_order = alpha * Q;
        const double w_order = (p - 1.0) * beta * Q;
        double k1 = 0.0;
        double k2 = 0.0;
        PairTable inc;
        Eigen::MatrixXd w;
        try {
            k1 = sum_constant(inc_order);
            k2 = sum_constant(w_order);
            if (nt > 1) {
                inc = oracle.increment_moments(inc_order);
                w = oracle.abs_moments(w_order);
            }
        } catch (const ValidationError&) {
            continue;  // constant undefined at this order
        } catch (const ComputationError&) {
            continue;  // moment does not exist at this order
        }
        any_pair_order = true;
        if (nt <= 1) {
            continue;
        }
        std::vector<double> w_pow(nx);
        for (std::size_t x = 0; x < nx; ++x) {
            const double wx = std::pow(w.row(static_cast<Eigen::Index>(x)).maxCoeff(), 1.0 / w_order);
            w_pow[x] = std::pow(wx, p - 1.0);
        }
        const double lead = 2.0 * p * k1 * std::pow(k2, p - 1.0);
        for (Eigen::Index t = 0; t < nt; ++t) {
            for (Eigen::Index s = t + 1; s < nt; ++s) {
                long double j = 0.0L;
                for (std::size_t x = 0; x < nx; ++x) {
                    j += x_space.weight(x) * w_pow[x] * std::pow(inc[x](t, s), 1.0 / inc_order);
                }
                const double cand = lead * static_cast<double>(j);
                if (cand < r(t, s)) {
                    r(t, s) = r(s, t) = cand;
                    alpha_star(t, s) = alpha_star(s, t) = alpha;
                }
            }
        }
    }
    if (nt > 1 && !any_pair_order) {
        throw ComputationError("thm32_bound: no alpha in the grid has the required moments and constants");
    }
    MomentBoundReport rep = finish_report(BoundKind::Thm32, p, Q, sb, sigma_hat, r, Q, p);
    rep.alpha_star = alpha_star;
    return rep;
}

namespace {

// sigma_Y(Q) and the raw pair distances |Y_t - Y_s|_Q over (X, mu).
std::pair<double, Eigen::MatrixXd> lq_geometry(const Eigen::MatrixXd& y, std::span<const double> w, double Q) {
    const auto nx = y.rows();
    const auto nt = y.cols();
    double sigma = 0.0;
    std::vector<double> col(static_cast<std::size_t>(nx));
    for (Eigen::Index t = 0; t < nt; ++t) {
        for (Eigen::Index x = 0; x < nx; ++x) {
            col[static_cast<std::size_t>(x)] = y(x, t);
        }
        sigma = std::max(sigma, lp_norm(col, w, Exponent(Q)));
    }
    Eigen::MatrixXd d = Eigen::MatrixXd::Zero(nt, nt);
    for (Eigen::Index t = 0; t < nt; ++t) {
        for (Eigen::Index s = t + 1; s < nt; ++s) {
            for (Eigen::Index x = 0; x < nx; ++x) {
                col[static_cast<std::size_t>(x)] = y(x, t) - y(x, s);
            }
            d(t, s) = d(s, t) = lp_norm(col, w, Exponent(Q));
        }
    }
    return {sigma, d};
}

} // namespace

MomentBoundReport prop11_bound(const Field& y, double Q) {
    require(Q >= 1.0, "prop11_bound: Q must be >= 1");
    auto [sigma, d] = lq_geometry(y.values(), y.x_space().weights(), Q);
    return finish_report(BoundKind::Prop11, 1.0, Q, sigma, sigma, d, Q, 1.0);
}

MomentBoundReport prop41_bound(const Field& realization, double p, double Q) {
    require(p >= 1.0 && Q >= 1.0, "prop41_bound: need p >= 1 and Q >= 1");
    const Eigen::MatrixXd y = realization.values().array().abs().pow(p).matrix();
    auto [delta, d] = lq_geometry(y, realization.x_space().weights(), Q);
    // The random entropy function sums N itself, without the 1/Q root.
    return finish_report(BoundKind::Prop41, p, Q, delta, delta, d, 1.0, 1.0);
}

} // namespace hlc
