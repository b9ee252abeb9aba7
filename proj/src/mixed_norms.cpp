#include "hlc/mixed_norms.hpp"

#include "hlc/error.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

namespace hlc {

namespace {

constexpr double kLargeExponent = 300.0;

// |a|^p with cheap paths for the exponents that dominate Monte Carlo use.
inline double abs_pow(double a, double p) {
    a = std::abs(a);
    if (p == 1.0) {
        return a;
    }
    if (p == 2.0) {
        return a * a;
    }
    return std::pow(a, p);
}

inline double root(long double s, double p) {
    if (p == 1.0) {
        return static_cast<double>(s);
    }
    if (p == 2.0) {
        return static_cast<double>(std::sqrt(s));
    }
    return static_cast<double>(std::pow(s, 1.0L / static_cast<long double>(p)));
}

// Pairwise summation of term(i) over [lo, hi), fixed split points.
template <class Term>
long double pairwise(const Term& term, std::size_t lo, std::size_t hi) {
    if (hi - lo <= 8) {
        long double s = 0.0L;
        for (std::size_t i = lo; i < hi; ++i) {
            s += term(i);
        }
        return s;
    }
    const std::size_t mid = lo + (hi - lo) / 2;
    return pairwise(term, lo, mid) + pairwise(term, mid, hi);
}

void require_exponent(double p, const char* what) {
    if (!(p >= 1.0) || std::isnan(p)) {
        throw ValidationError(std::string(what) + ": exponent must be >= 1");
    }
}

// Weighted p-norm over a strided sequence.
template <class Get, class Weight>
double weighted_norm(std::size_t n, const Get& get, const Weight& weight, double p) {
    if (n == 0) {
        return 0.0;
    }
    if (p > kLargeExponent) {
        double m = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            m = std::max(m, std::abs(get(i)));
        }
        if (m == 0.0) {
            return 0.0;
        }
        const long double s = pairwise(
            [&](std::size_t i) {
                return static_cast<long double>(weight(i)) *
                       std::pow(static_cast<long double>(std::abs(get(i)) / m), static_cast<long double>(p));
            },
            0, n);
        return m * root(s, p);
    }
    const long double s = pairwise(
        [&](std::size_t i) { return static_cast<long double>(weight(i)) * abs_pow(get(i), p); }, 0, n);
    return root(s, p);
}

} // namespace

Exponent::Exponent(double p) : p_(p), infinite_(std::isinf(p) && p > 0) {
    if (!infinite_) {
        require_exponent(p, "exponent");
    }
}

NormSpec::NormSpec(AxisExponent inner, AxisExponent outer) : inner_(inner), outer_(outer) {
    if (inner_.axis == outer_.axis) {
        throw ValidationError("norm spec: each axis must appear exactly once");
    }
}

namespace detail {
long double pairwise_sum(std::span<const long double> terms) {
    return pairwise([&](std::size_t i) { return terms[i]; }, 0, terms.size());
}
} // namespace detail

double lp_norm(std::span<const double> v, std::span<const double> weights, Exponent p) {
    if (p.is_infinite()) {
        double m = 0.0;
        for (double a : v) {
            m = std::max(m, std::abs(a));
        }
        return m;
    }
    if (weights.size() != v.size()) {
        throw ValidationError("lp_norm: weight count does not match vector length");
    }
    return weighted_norm(
        v.size(), [&](std::size_t i) { return v[i]; }, [&](std::size_t i) { return weights[i]; }, p.value());
}

double mixed_norm(const Field& f, const NormSpec& spec, std::span<const double> t_weights) {
    const std::size_t nx = f.x_size();
    const std::size_t nt = f.t_size();
    std::vector<double> t_unit;
    if (t_weights.empty()) {
        t_unit.assign(nt, 1.0);
        t_weights = t_unit;
    }
    if (t_weights.size() != nt) {
        throw ValidationError("mixed_norm: T weights do not match the index space");
    }
    const auto x_weights = f.x_space().weights();
    const Eigen::MatrixXd& m = f.values();

    auto weights_of = [&](Axis a) { return a == Axis::X ? x_weights : t_weights; };

    const AxisExponent& in = spec.inner();
    const AxisExponent& out = spec.outer();
    const std::size_t n_out = out.axis == Axis::X ? nx : nt;
    const std::size_t n_in = in.axis == Axis::X ? nx : nt;

    std::vector<double> reduced(n_out);
    const auto w_in = weights_of(in.axis);
    for (std::size_t o = 0; o < n_out; ++o) {
        auto get = [&](std::size_t i) {
            return in.axis == Axis::X ? m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(o))
                                      : m(static_cast<Eigen::Index>(o), static_cast<Eigen::Index>(i));
        };
        if (in.exponent.is_infinite()) {
            double mx = 0.0;
            for (std::size_t i = 0; i < n_in; ++i) {
                mx = std::max(mx, std::abs(get(i)));
            }
            reduced[o] = mx;
        } else {
            reduced[o] = weighted_norm(n_in, get, [&](std::size_t i) { return w_in[i]; }, in.exponent.value());
        }
    }
    return lp_norm(reduced, weights_of(out.axis), out.exponent);
}

double cl_norm(const Field& f, double p) {
    require_exponent(p, "cl_norm");
    return mixed_norm(f, NormSpec({Axis::X, Exponent(p)}, {Axis::T, Exponent::infinity()}));
}

double lc_norm(const Field& f, double p) {
    require_exponent(p, "lc_norm");
    return mixed_norm(f, NormSpec({Axis::T, Exponent::infinity()}, {Axis::X, Exponent(p)}));
}

double cl_modulus(const Field& f, double p, double eps) {
    require_exponent(p, "cl_modulus");
    if (!(eps > 0.0)) {
        throw ValidationError("cl_modulus: eps must be positive");
    }
    const auto& T = f.t_space();
    const auto w = f.x_space().weights();
    const Eigen::MatrixXd& m = f.values();
    const std::size_t nx = f.x_size();
    double best = 0.0;
    for (std::size_t t = 0; t < f.t_size(); ++t) {
        for (std::size_t s = t + 1; s < f.t_size(); ++s) {
            if (!(T.distance(t, s) < eps)) {
                continue;
            }
            const auto ti = static_cast<Eigen::Index>(t);
            const auto si = static_cast<Eigen::Index>(s);
            const double v = weighted_norm(
                nx, [&](std::size_t x) { return m(static_cast<Eigen::Index>(x), ti) - m(static_cast<Eigen::Index>(x), si); },
                [&](std::size_t x) { return w[x]; }, p);
            best = std::max(best, v);
        }
    }
    return best;
}

double lc_modulus(const Field& f, double p, double eps) {
    require_exponent(p, "lc_modulus");
    if (!(eps > 0.0)) {
        throw ValidationError("lc_modulus: eps must be positive");
    }
    const auto& T = f.t_space();
    const Eigen::MatrixXd& m = f.values();
    const std::size_t nx = f.x_size();
    std::vector<double> sup_diff(nx, 0.0);
    for (std::size_t t = 0; t < f.t_size(); ++t) {
        for (std::size_t s = t + 1; s < f.t_size(); ++s) {
            if (!(T.distance(t, s) < eps)) {
                continue;
            }
            for (std::size_t x = 0; x < nx; ++x) {
                const auto xi = static_cast<Eigen::Index>(x);
                sup_diff[x] = std::max(sup_diff[x], std::abs(m(xi, static_cast<Eigen::Index>(t)) -
                                                             m(xi, static_cast<Eigen::Index>(s))));
            }
        }
    }
    return lp_norm(sup_diff, f.x_space().weights(), Exponent(p));
}

} // namespace hlc
