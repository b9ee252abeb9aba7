#include "hlc/rng.hpp"
#include "hlc/statistics.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>

using namespace hlc;

TEST(Philox, KnownAnswers) {
    using A4 = std::array<std::uint32_t, 4>;
    using A2 = std::array<std::uint32_t, 2>;
    EXPECT_EQ(philox4x32_10(A4{0, 0, 0, 0}, A2{0, 0}), (A4{0x6627e8d5, 0xe169c58d, 0xbc57ac4c, 0x9b00dbd8}));
    EXPECT_EQ(philox4x32_10(A4{0xffffffff, 0xffffffff, 0xffffffff, 0xffffffff}, A2{0xffffffff, 0xffffffff}),
              (A4{0x408f276d, 0x41c83b0e, 0xa20bc7c6, 0x6d5451fd}));
    EXPECT_EQ(philox4x32_10(A4{0x243f6a88, 0x85a308d3, 0x13198a2e, 0x03707344}, A2{0xa4093822, 0x299f31d0}),
              (A4{0xd16cfe09, 0x94fdcceb, 0x5001e420, 0x24126ea1}));
}

TEST(CounterRng, StreamsAreDeterministicAndDistinct) {
    CounterRng a({7, 1, 2});
    CounterRng b({7, 1, 2});
    CounterRng c({7, 1, 3});
    CounterRng d({8, 1, 2});
    int same_c = 0;
    int same_d = 0;
    for (int i = 0; i < 1000; ++i) {
        const auto x = a();
        ASSERT_EQ(x, b());
        same_c += x == c() ? 1 : 0;
        same_d += x == d() ? 1 : 0;
    }
    EXPECT_EQ(same_c, 0);
    EXPECT_EQ(same_d, 0);
    EXPECT_NE(experiment_tag("clt"), experiment_tag("prop41"));
    EXPECT_EQ(experiment_tag("clt"), experiment_tag("clt"));
}

TEST(CounterRng, UniformMoments) {
    CounterRng r({1, 2, 3});
    const int n = 200000;
    double s = 0.0;
    double s2 = 0.0;
    for (int i = 0; i < n; ++i) {
        const double u = r.uniform();
        ASSERT_GE(u, 0.0);
        ASSERT_LT(u, 1.0);
        s += u;
        s2 += u * u;
    }
    EXPECT_NEAR(s / n, 0.5, 4.0 * std::sqrt(1.0 / 12.0 / n));
    EXPECT_NEAR(s2 / n, 1.0 / 3.0, 0.005);
}

TEST(StableSum, OrderIndependentOfChunking) {
    std::vector<double> v;
    for (int i = 0; i < 10001; ++i) {
        v.push_back(1.0 / (1.0 + i));
    }
    EXPECT_EQ(stable_sum(v), stable_sum(v));
    EXPECT_NEAR(stable_sum(v), std::accumulate(v.begin(), v.end(), 0.0L), 1e-12);
    EXPECT_EQ(stable_sum({}), 0.0);
}

TEST(Summary, ConstantValuesGiveZeroWidth) {
    const std::vector<double> ones(500, 1.0);
    const MeanSummary s = summarize_mean(ones, {1, 2, 3});
    EXPECT_EQ(s.mean, 1.0);
    EXPECT_EQ(s.median_of_means, 1.0);
    EXPECT_EQ(s.ci_lo, 1.0);
    EXPECT_EQ(s.ci_hi, 1.0);
    EXPECT_EQ(s.used, 500u);
}

TEST(Summary, ExcludesNonFiniteAndContainsMedianOfMeans) {
    std::mt19937_64 gen(5);
    std::exponential_distribution<double> e(1.0);
    std::vector<double> v;
    for (int i = 0; i < 2000; ++i) {
        v.push_back(e(gen));
    }
    v[10] = std::nan("");
    v[20] = std::numeric_limits<double>::infinity();
    const MeanSummary s = summarize_mean(v, {9, 9, 9});
    EXPECT_EQ(s.excluded, 2u);
    EXPECT_EQ(s.used, 1998u);
    EXPECT_LE(s.ci_lo, s.mean);
    EXPECT_GE(s.ci_hi, s.mean);
    EXPECT_LE(s.ci_lo, s.median_of_means);
    EXPECT_GE(s.ci_hi, s.median_of_means);
    EXPECT_NEAR(s.mean, 1.0, 0.1);
    const MeanSummary again = summarize_mean(v, {9, 9, 9});
    EXPECT_EQ(s.ci_lo, again.ci_lo);
    EXPECT_EQ(s.ci_hi, again.ci_hi);
}

TEST(ClopperPearson, Examples) {
    const std::size_t n = 1000;
    EXPECT_NEAR(clopper_pearson_upper(0, n), 1.0 - std::pow(0.01, 1.0 / n), 1e-12);
    EXPECT_EQ(clopper_pearson_upper(n, n), 1.0);
    EXPECT_EQ(clopper_pearson_lower(0, n), 0.0);
    EXPECT_NEAR(clopper_pearson_lower(n, n), std::pow(0.01, 1.0 / n), 1e-12);
    const double up = clopper_pearson_upper(50, n);
    const double lo = clopper_pearson_lower(50, n);
    EXPECT_GT(up, 0.05);
    EXPECT_LT(lo, 0.05);
    EXPECT_LT(up, 0.08);
}

TEST(KolmogorovSmirnov, Examples) {
    EXPECT_EQ(ks_statistic({1, 2, 3}, {1, 2, 3}), 0.0);
    EXPECT_EQ(ks_statistic({0, 0}, {1, 1}), 1.0);
    EXPECT_NEAR(ks_statistic({1, 2, 3, 4}, {3, 4, 5, 6}), 0.5, 1e-15);
    // c(0.99) = sqrt(-ln(0.005) / 2) = 1.6276
    EXPECT_NEAR(ks_critical_value(100, 100), 1.6276 * std::sqrt(2.0 / 100.0), 1e-3);
}

TEST(KolmogorovSmirnov, SameLawRarelyRejects) {
    std::mt19937_64 gen(6);
    std::normal_distribution<double> g;
    int rejections = 0;
    for (int rep = 0; rep < 200; ++rep) {
        std::vector<double> a(500);
        std::vector<double> b(700);
        for (auto& x : a) {
            x = g(gen);
        }
        for (auto& x : b) {
            x = g(gen);
        }
        rejections += ks_statistic(a, b) > ks_critical_value(500, 700) ? 1 : 0;
    }
    EXPECT_LE(rejections, 8);
}
