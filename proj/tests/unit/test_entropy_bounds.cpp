#include "hlc/entropy_bounds.hpp"
#include "hlc/error.hpp"
#include "hlc/mixed_norms.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <numeric>
#include <random>

using namespace hlc;

namespace {

IndexSpace line(std::initializer_list<double> xs) {
    std::vector<Point> pts;
    for (double x : xs) {
        pts.push_back({x});
    }
    return build_index_space(pts, 1.0);
}

// Constant-in-(x,t) unit Gaussian: every cell is the same N(0,1) variable.
GaussianMixtureOracle constant_gaussian(std::size_t nx, std::size_t nt) {
    const auto n = static_cast<Eigen::Index>(nx * nt);
    return GaussianMixtureOracle(Eigen::MatrixXd::Ones(n, n), nx, nt);
}

MeasureSpace mass_space(std::size_t n, double total) { return unit_measure_space(n, total / static_cast<double>(n)); }

Field make_field(const Eigen::MatrixXd& v, std::vector<double> w) {
    std::vector<Point> xs(w.size(), Point{0.0});
    std::vector<Point> ts;
    for (Eigen::Index t = 0; t < v.cols(); ++t) {
        ts.push_back({static_cast<double>(t)});
    }
    return Field(v, std::make_shared<MeasureSpace>(std::move(xs), std::move(w)),
                 std::make_shared<IndexSpace>(build_index_space(ts, 1.0)));
}

} // namespace

TEST(Rosenthal, Examples) {
    EXPECT_NEAR(rosenthal_constant(2.0), 1.77638 * 2.0 / (std::numbers::e * std::log(2.0)), 1e-12);
    EXPECT_NEAR(rosenthal_constant(2.0), 1.8856, 1e-4);
    EXPECT_NEAR(rosenthal_constant(10.0, RosenthalParams::symmetric_laws()), 2.4536, 1e-4);
    EXPECT_NEAR(rosenthal_constant(std::numbers::e), 1.77638, 1e-12);
    EXPECT_THROW(rosenthal_constant(1.5), ValidationError);
}

TEST(Rosenthal, ClampedAndMonotone) {
    const auto sym = RosenthalParams::symmetric_laws();
    EXPECT_EQ(rosenthal_constant(2.9, sym), std::max(1.0, 1.53572 * 2.9 / (std::numbers::e * std::log(2.9))));
    double prev = 0.0;
    for (double p = 2.0; p < 200.0; p += 0.25) {
        for (const auto& params : {RosenthalParams::general(), sym}) {
            ASSERT_GE(rosenthal_constant(p, params), 1.0);
        }
        if (p >= std::numbers::e) {
            const double v = rosenthal_constant(p);
            ASSERT_GE(v, prev);
            prev = v;
        }
    }
}

TEST(Mixingale, Examples) {
    EXPECT_EQ(mixingale_coefficient(3.0, MixingSequence::explicit_values({})).value, 0.0);
    EXPECT_EQ(mixingale_coefficient(3.0, MixingSequence::geometric(0.0, 0.5)).value, 0.0);
    const MixingaleCoefficient g = mixingale_coefficient(2.0, MixingSequence::geometric(1.0, 0.5));
    EXPECT_TRUE(g.converged);
    EXPECT_NEAR(g.value, 2.0, 1e-12);
    const MixingaleCoefficient d = mixingale_coefficient(4.0, MixingSequence::power(1.0, 1.0));
    EXPECT_FALSE(d.converged);
    EXPECT_TRUE(std::isinf(d.value));
    EXPECT_THROW(MixingSequence::explicit_values({0.5, -0.1}), ValidationError);
    EXPECT_THROW(mixingale_sum_constant(MixingSequence::power(1.0, 1.0))(4.0), ComputationError);
}

TEST(Mixingale, TailCertificateBoundsTruncation) {
    const auto beta = MixingSequence::geometric(1.0, 0.9);
    const MixingaleCoefficient small = mixingale_coefficient(6.0, beta, 20);
    const MixingaleCoefficient big = mixingale_coefficient(6.0, beta, 5000);
    EXPECT_GE(small.value, big.value * (1.0 - 1e-12));
    const auto pw = MixingSequence::power(1.0, 4.0);
    EXPECT_GE(mixingale_coefficient(3.0, pw, 10).value, mixingale_coefficient(3.0, pw, 100000).value * (1.0 - 1e-12));
    // the sum constant is clamped like K_R
    EXPECT_EQ(mixingale_sum_constant(MixingSequence::explicit_values({}))(2.0), 1.0);
}

TEST(Series, Examples) {
    const EntropyProfile single = exact_step_profile(line({0.0}));
    for (double theta : {0.1, 0.5, 0.9}) {
        EXPECT_NEAR(pisier_series(single, 3.0, 2.0, theta).total, 3.0 / (1.0 - theta), 1e-12);
    }
    const EntropyProfile two = exact_step_profile(line({0.0, 1.0}));
    EXPECT_NEAR(pisier_series(two, 1.5, 1.0, 0.5).total, 4.0 * 1.5, 1e-12);
    const EntropyProfile only_one = entropy_profile(line({0.0}), {1.0});
    EXPECT_NEAR(pisier_series(only_one, 2.0, 1.0, 0.3).total, pisier_series(single, 2.0, 1.0, 0.3).total, 1e-15);
    EXPECT_THROW(pisier_series(single, 1.0, 1.0, 1.0), ValidationError);
    EXPECT_THROW(pisier_series(single, 1.0, 1.0, 0.0), ValidationError);
}

TEST(Series, TotalDominatesPartialSums) {
    std::mt19937_64 gen(31);
    std::uniform_real_distribution<double> u(0, 1);
    for (int rep = 0; rep < 30; ++rep) {
        std::vector<Point> pts(20, Point(2));
        for (auto& p : pts) {
            p = {u(gen), u(gen)};
        }
        const IndexSpace s = build_index_space(pts, 1.0);
        const SeriesEvaluation ev = pisier_series(exact_step_profile(s), 1.0, 1.0 + 3 * u(gen), 0.05 + 0.9 * u(gen));
        double partial = 0.0;
        for (double t : ev.partial_terms) {
            ASSERT_GE(t, 0.0);
            partial += t;
            ASSERT_LE(partial, ev.total * (1.0 + 1e-12));
        }
        ASSERT_GE(ev.tail_bound, 0.0);
    }
}

TEST(Optimize, Examples) {
    const EntropyProfile single = exact_step_profile(line({0.0}));
    const ThetaOptimum o = optimize_theta(single, 2.0, 1.0);
    EXPECT_NEAR(o.nu, 2.0 / 0.99, 1e-12);
    EXPECT_NEAR(o.theta, 0.01, 1e-12);
    EXPECT_EQ(optimize_theta(single, 0.0, 1.0).nu, 0.0);

    const EntropyProfile power = EntropyProfile::analytic(1.0, 1.0);
    const ThetaOptimum po = optimize_theta(power, 1.0, 2.0);
    const double cf = closed_form_bound(1.0, 1.0, 2.0, 1.0);
    EXPECT_LE(std::abs(po.nu - cf), 0.25 * cf);
}

TEST(ClosedForm, Examples) {
    EXPECT_EQ(closed_form_bound(1.7, 0.0, 3.0, 2.5), 1.7 * 2.5);
    EXPECT_NEAR(closed_form_bound(1.0, 1.0, 2.0, 1.0), 4.0, 1e-12);
    EXPECT_NEAR(closed_form_bound(1.0, 1.0, 1e6, 1.0), 1.0, 1e-4);
    EXPECT_THROW(closed_form_bound(1.0, 2.0, 2.0, 1.0), ValidationError);
}

TEST(Legendre, Examples) {
    std::vector<double> grid;
    for (double q = 1.01; q <= 10.0 + 1e-9; q += 0.01) {
        grid.push_back(q);
    }
    std::vector<double> nu;
    for (double q : grid) {
        nu.push_back(std::exp(0.5 * q));
    }
    EXPECT_NEAR(legendre_tail(grid, nu, std::exp(2.0)), std::exp(-2.0), 1e-6);

    std::vector<double> wide;
    for (double q = 1.5; q <= 1e4; q *= 1.5) {
        wide.push_back(q);
    }
    const std::vector<double> constant(wide.size(), 3.0);
    EXPECT_EQ(legendre_tail(wide, constant, 3.5), 0.0);
    EXPECT_EQ(legendre_tail(wide, constant, 2.0), 1.0);
    EXPECT_THROW(legendre_tail({}, {}, 2.0), ValidationError);
}

TEST(Legendre, MonotoneAndGridSuperset) {
    std::mt19937_64 gen(32);
    std::uniform_real_distribution<double> u(0.5, 5.0);
    for (int rep = 0; rep < 200; ++rep) {
        std::vector<double> grid;
        std::vector<double> nu;
        for (double q = 1.1; q < 12.0; q += 0.37) {
            grid.push_back(q);
            nu.push_back(u(gen));
        }
        std::vector<double> sub_grid;
        std::vector<double> sub_nu;
        for (std::size_t i = 0; i < grid.size(); ++i) {
            if (gen() % 2 == 0) {
                sub_grid.push_back(grid[i]);
                sub_nu.push_back(nu[i]);
            }
        }
        if (sub_grid.empty()) {
            continue;
        }
        double prev = 1.0;
        for (double z = 1.05; z < 50.0; z *= 1.2) {
            const double t = legendre_tail(grid, nu, z);
            ASSERT_GE(t, 0.0);
            ASSERT_LE(t, prev);
            ASSERT_LE(t, legendre_tail(sub_grid, sub_nu, z));
            prev = t;
        }
    }
}

TEST(Example21, Examples) {
    for (double x : {3.0, 5.0, 20.0}) {
        EXPECT_NEAR(example21_tail(1.0, 1.0, x), std::exp(-x / std::numbers::e), 1e-12);
    }
    EXPECT_EQ(example21_tail(2.0, 1.0, 1.5), 1.0);
    EXPECT_THROW(example21_tail(1.0, 0.0, 2.0), ValidationError);

    PowerGrowthFit fit;
    fit.c1 = 1.0;
    fit.m = 1.0;
    const std::vector<double> grid{1, 2, 3, 4, 5, 6, 7, 8};
    // restricting Q to the grid never beats the continuous optimum
    for (double x : {3.0, 8.0, 15.0}) {
        EXPECT_GE(example21_tail_on_grid(fit, grid, x), example21_tail(1.0, 1.0, x) * (1.0 - 1e-12));
    }
    EXPECT_NEAR(example21_tail_on_grid(fit, grid, 2.0 * std::numbers::e), std::exp(-2.0), 1e-12);
}

TEST(Example21, GaussianGrowthIsLinear) {
    const auto oracle = constant_gaussian(1, 1);
    const MeasureSpace x = unit_measure_space(1);
    std::vector<double> grid;
    std::vector<double> vals;
    for (double q : {1.0, 2.0, 3.0, 4.0, 6.0, 8.0, 12.0, 16.0}) {
        grid.push_back(q);
        vals.push_back(prop21_bound(oracle, 2.0, q, x).nu_power);
    }
    const PowerGrowthFit fit = fit_power_growth(grid, vals);
    EXPECT_NEAR(fit.m, 1.0, 0.2);
    for (std::size_t i = 0; i < grid.size(); ++i) {
        EXPECT_GE(fit.c1 * std::pow(grid[i], fit.m), vals[i] * (1.0 - 1e-12));
    }
}

TEST(SigmaBar, Examples) {
    const double mass = 2.5;
    const MeasureSpace x = mass_space(3, mass);
    const auto oracle = constant_gaussian(3, 4);
    EXPECT_NEAR(sigma_bar(oracle, 2.0, 1.0, x), mass, 1e-12);
    EXPECT_NEAR(sigma_bar(oracle, 2.0, 2.0, x), mass * std::sqrt(3.0), 1e-10);
    const GaussianMixtureOracle zero(Eigen::MatrixXd::Zero(12, 12), 3, 4);
    EXPECT_EQ(sigma_bar(zero, 2.0, 1.0, x), 0.0);
}

TEST(Dbar, Examples) {
    const MeasureSpace x1 = unit_measure_space(1);
    const double rho = 0.3;
    Eigen::MatrixXd cov(2, 2);
    cov << 1, rho, rho, 1;
    const GaussianMixtureOracle pair(cov, 1, 2);
    EXPECT_EQ(dbar_distance(pair, 2.0, 1.0, 0, 0, x1), 0.0);
    // X^2 - Y^2 = (X - Y)(X + Y) with independent factors
    EXPECT_NEAR(dbar_distance(pair, 2.0, 1.0, 0, 1, x1), 4.0 / std::numbers::pi * std::sqrt(1.0 - rho * rho), 1e-7);
    // Q = 2: E(X-Y)^2 (X+Y)^2 = 4 (1 - rho^2)
    EXPECT_NEAR(dbar_distance(pair, 2.0, 2.0, 0, 1, x1), std::sqrt(4.0 * (1.0 - rho * rho)), 1e-7);
    const auto flat = constant_gaussian(2, 3);
    const MeasureSpace x2 = unit_measure_space(2);
    EXPECT_LE(dbar_matrix(flat, 2.0, 1.0, x2).cwiseAbs().maxCoeff(), 1e-12);
    // literal form: equal variances give zero distance
    EXPECT_LE(dbar_matrix(pair, 2.0, 1.0, x1, DbarForm::Literal).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(Prop21, Examples) {
    const auto flat = constant_gaussian(2, 4);
    const MeasureSpace x = unit_measure_space(2, 0.5);
    const MomentBoundReport r = prop21_bound(flat, 2.0, 1.0, x);
    EXPECT_NEAR(r.nu_power, 1.0 / 0.99, 1e-9);
    EXPECT_NEAR(r.nu, std::sqrt(1.0 / 0.99), 1e-9);
    const GaussianMixtureOracle zero(Eigen::MatrixXd::Zero(8, 8), 2, 4);
    EXPECT_EQ(prop21_bound(zero, 2.0, 1.0, x).nu, 0.0);
}

TEST(Thm32, DegenerateSingleTIsPureRosenthal) {
    for (double Q : {1.0, 2.0}) {
        for (double p : {2.0, 3.0}) {
            Eigen::MatrixXd cov(3, 3);
            cov << 1.0, 0.2, 0.1, 0.2, 2.0, 0.3, 0.1, 0.3, 0.5;
            const GaussianMixtureOracle oracle(cov, 3, 1);
            const MeasureSpace x = build_measure_space({{0}, {1}, {2}}, {0.2, 0.3, 0.5});
            const MomentBoundReport r = thm32_bound(oracle, p, Q, x);
            const double sh = std::pow(rosenthal_constant(p * Q), p) * sigma_bar(oracle, p, Q, x);
            const double direct = std::pow(sh / (1.0 - r.theta_star), 1.0 / p);
            EXPECT_NEAR(r.nu, direct, 1e-12 * direct);
            EXPECT_NEAR(r.sigma_hat, sh, 1e-12 * sh);
        }
    }
}

TEST(Thm32, ScalarGaussianDominatesSecondMoment) {
    const GaussianMixtureOracle oracle(Eigen::MatrixXd::Constant(1, 1, 2.0), 1, 1);
    const MeasureSpace x = unit_measure_space(1);
    const MomentBoundReport r = thm32_bound(oracle, 2.0, 1.0, x);
    const double k = rosenthal_constant(2.0);
    EXPECT_NEAR(r.nu * r.nu, k * k * 2.0 / (1.0 - r.theta_star), 1e-10);
    EXPECT_GE(r.nu * r.nu, 2.0);
    const GaussianMixtureOracle zero(Eigen::MatrixXd::Zero(4, 4), 2, 2);
    EXPECT_EQ(thm32_bound(zero, 2.0, 1.0, unit_measure_space(2)).nu, 0.0);
}

TEST(Thm32, MixingaleConstantReplacesRosenthal) {
    Eigen::MatrixXd cov(2, 2);
    cov << 1, 0.5, 0.5, 1;
    const GaussianMixtureOracle oracle(cov, 1, 2);
    const MeasureSpace x = unit_measure_space(1);
    const auto km = mixingale_sum_constant(MixingSequence::geometric(1.0, 0.5));
    const MomentBoundReport r = thm32_bound(oracle, 2.0, 1.0, x, default_alpha_grid(), km);
    EXPECT_NEAR(r.sigma_hat, std::pow(km(2.0), 2.0) * sigma_bar(oracle, 2.0, 1.0, x), 1e-12);
    EXPECT_GT(r.nu, 0.0);
    EXPECT_EQ(r.alpha_star(0, 0), 0.0);
    EXPECT_GT(r.alpha_star(0, 1), 1.0);
}

TEST(Prop41, Examples) {
    Eigen::MatrixXd v(2, 2);
    v << 1, 0, 0, 1;
    const MomentBoundReport r = prop41_bound(make_field(v, {1, 1}), 2.0, 1.0);
    EXPECT_DOUBLE_EQ(r.sigma_bar, 1.0);
    EXPECT_DOUBLE_EQ(r.distance(0, 1), 2.0);
    // N = 2 at every radius below the pair distance 2
    EXPECT_NEAR(r.nu, 2.0 / (1.0 - r.theta_star), 1e-12);
    EXPECT_NEAR(r.theta_star, 0.01, 1e-12);

    const Eigen::MatrixXd c = Eigen::MatrixXd::Constant(3, 4, -1.5);
    const MomentBoundReport rc = prop41_bound(make_field(c, {0.5, 0.25, 0.25}), 2.0, 2.0);
    EXPECT_NEAR(rc.nu, rc.sigma_bar / (1.0 - rc.theta_star), 1e-12);
    EXPECT_NEAR(rc.sigma_bar, 2.25, 1e-12);

    EXPECT_EQ(prop41_bound(make_field(Eigen::MatrixXd::Zero(2, 3), {1, 1}), 2.0, 1.0).nu, 0.0);
}

TEST(Prop11, SingletonSeries) {
    const Eigen::MatrixXd c = Eigen::MatrixXd::Constant(2, 3, 2.0);
    const MomentBoundReport r = prop11_bound(make_field(c, {1, 1}), 2.0);
    EXPECT_NEAR(r.sigma_bar, 2.0 * std::sqrt(2.0), 1e-12);
    EXPECT_NEAR(r.nu, r.sigma_bar / 0.99, 1e-12);
}

TEST(BoundProperty, LargerProfileNeverLowersNu) {
    std::mt19937_64 gen(33);
    std::uniform_real_distribution<double> u(0, 1);
    int checked = 0;
    for (int rep = 0; rep < 100; ++rep) {
        std::vector<Point> pts(3 + gen() % 25, Point(2));
        for (auto& p : pts) {
            p = {u(gen), u(gen)};
        }
        const IndexSpace s = build_index_space(pts, 1.0);
        const EntropyProfile base = exact_step_profile(s);
        EntropyProfile bigger = base;
        for (double& n : bigger.cover_upper) {
            n *= 1.0 + 2.0 * u(gen);
        }
        bigger.floor_count *= 1.0 + u(gen);
        const double Q = 1.0 + 3.0 * u(gen);
        for (double theta : {0.05, 0.3, 0.6, 0.9}) {
            ASSERT_GE(pisier_series(bigger, 1.0, Q, theta).total, pisier_series(base, 1.0, Q, theta).total);
        }
        ASSERT_GE(optimize_theta(bigger, 1.0, Q).nu, optimize_theta(base, 1.0, Q).nu * (1.0 - 1e-9));
        ++checked;
    }
    EXPECT_EQ(checked, 100);
}

TEST(ProofProperty, ElementaryInequality) {
    std::mt19937_64 gen(34);
    std::uniform_real_distribution<double> val(-10.0, 10.0);
    std::uniform_real_distribution<double> pp(2.0, 10.0);
    for (int i = 0; i < 20000; ++i) {
        const double x = val(gen);
        const double y = val(gen);
        const double p = pp(gen);
        const double lhs = std::abs(std::pow(std::abs(x), p) - std::pow(std::abs(y), p));
        const double rhs = p * std::abs(x - y) * (std::pow(std::abs(x), p - 1.0) + std::pow(std::abs(y), p - 1.0));
        ASSERT_LE(lhs, rhs * (1.0 + 1e-9) + 1e-300);
    }
}

TEST(ProofProperty, HoelderStep) {
    std::mt19937_64 gen(35);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int i = 0; i < 5000; ++i) {
        const std::size_t k = 1 + gen() % 8;
        std::vector<double> prob(k);
        std::vector<double> a(k);
        std::vector<double> b(k);
        std::vector<double> ab(k);
        for (std::size_t j = 0; j < k; ++j) {
            prob[j] = 0.01 + u(gen);
            a[j] = 4.0 * u(gen) - 2.0;
            b[j] = 4.0 * u(gen) - 2.0;
            ab[j] = a[j] * b[j];
        }
        const double total = std::accumulate(prob.begin(), prob.end(), 0.0);
        for (double& w : prob) {
            w /= total;
        }
        const double alpha = 1.0 + 9.0 * u(gen) + 1e-6;
        const double beta = alpha / (alpha - 1.0);
        const double Q = 1.0 + 4.0 * u(gen);
        const double lhs = lp_norm(ab, prob, Exponent(Q));
        const double rhs = lp_norm(a, prob, Exponent(alpha * Q)) * lp_norm(b, prob, Exponent(beta * Q));
        ASSERT_LE(lhs, rhs * (1.0 + 1e-9));
    }
}
