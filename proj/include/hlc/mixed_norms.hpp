#pragma once

#include "hlc/measure_grid.hpp"

#include <limits>
#include <span>
#include <vector>

namespace hlc {

/// Lebesgue exponent: a finite p >= 1 or the sup marker.
class Exponent {
public:
    explicit Exponent(double p);
    static Exponent infinity() noexcept { return Exponent(); }

    bool is_infinite() const noexcept { return infinite_; }
    double value() const noexcept { return infinite_ ? std::numeric_limits<double>::infinity() : p_; }

private:
    Exponent() noexcept : p_(0.0), infinite_(true) {}
    double p_;
    bool infinite_;
};

enum class Axis { X, T };

struct AxisExponent {
    Axis axis;
    Exponent exponent;
};

/**
 * Nesting order of a mixed Lebesgue norm, innermost axis first.
 *
 * |f|_{p1,X; inf,T} is NormSpec{{Axis::X, p1}, {Axis::T, inf}}.
 */
class NormSpec {
public:
    NormSpec(AxisExponent inner, AxisExponent outer);

    const AxisExponent& inner() const noexcept { return inner_; }
    const AxisExponent& outer() const noexcept { return outer_; }

private:
    AxisExponent inner_;
    AxisExponent outer_;
};

// Weighted p-norm; the sup marker ignores weights.
double lp_norm(std::span<const double> v, std::span<const double> weights, Exponent p);

/**
 * Mixed norm of a field. Finite exponents on the X axis use mu; finite
 * exponents on the T axis use `t_weights` (counting measure when empty).
 */
double mixed_norm(const Field& f, const NormSpec& spec, std::span<const double> t_weights = {});

// sup_t |f(., t)|_p
double cl_norm(const Field& f, double p);

// | sup_t |f(., t)| |_p
double lc_norm(const Field& f, double p);

// sup over pairs with d(t, s) < eps of |f(., t) - f(., s)|_p
double cl_modulus(const Field& f, double p, double eps);

// [ sum_x mu(x) sup_{d(t,s) < eps} |f(x,t) - f(x,s)|^p ]^{1/p}
double lc_modulus(const Field& f, double p, double eps);

namespace detail {
// Fixed-order pairwise sum in long double.
long double pairwise_sum(std::span<const long double> terms);
} // namespace detail

} // namespace hlc
