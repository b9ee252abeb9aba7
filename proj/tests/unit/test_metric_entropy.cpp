#include "hlc/error.hpp"
#include "hlc/metric_entropy.hpp"

#include <gtest/gtest.h>

#include <cmath>
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

IndexSpace random_space(std::mt19937_64& gen, std::size_t n) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    const std::size_t dim = 1 + gen() % 3;
    std::vector<Point> pts(n, Point(dim));
    for (auto& p : pts) {
        for (auto& c : p) {
            c = u(gen);
        }
    }
    return build_index_space(pts, gen() % 2 == 0 ? 1.0 : 0.5);
}

EntropyProfile table_profile(const std::vector<double>& eps, const std::vector<double>& n) {
    EntropyProfile p;
    p.eps_grid = eps;
    p.cover_upper = n;
    p.pack_lower = n;
    return p;
}

} // namespace

TEST(Covering, RadiusOneIsOneBall) {
    const IndexSpace s = line({0, 0.1, 0.7, 1});
    EXPECT_EQ(covering_number_upper(s, 1.0), 1u);
    EXPECT_EQ(covering_number_upper(s, 3.0), 1u);
    EXPECT_EQ(covering_number_exact(s, 1.0), 1u);
}

TEST(Covering, FivePointInstance) {
    // raw radius 0.3 is 0.6 after normalizing by the radius 0.5
    const IndexSpace s = line({0, 0.25, 0.5, 0.75, 1});
    EXPECT_EQ(covering_number_upper(s, 0.6), 2u);
    EXPECT_EQ(covering_number_exact(s, 0.6), 2u);
}

TEST(Covering, BelowMinimalDistanceEveryPointAlone) {
    const IndexSpace s = line({0, 0.25, 0.5, 0.75, 1});
    EXPECT_EQ(covering_number_upper(s, 0.4), 5u);
    EXPECT_EQ(covering_number_exact(s, 0.4), 5u);
    EXPECT_EQ(packing_number_lower(s, 0.2), 5u);
}

TEST(Covering, ExactSmallCases) {
    const IndexSpace one = line({0.2});
    EXPECT_EQ(covering_number_exact(one, 0.01), 1u);
    const IndexSpace two = line({0, 1});
    EXPECT_EQ(covering_number_exact(two, 0.5), 2u);
    EXPECT_EQ(covering_number_exact(two, 1.0), 1u);
}

TEST(Covering, ExactCapError) {
    std::vector<Point> pts;
    for (int i = 0; i < 30; ++i) {
        pts.push_back({static_cast<double>(i)});
    }
    const IndexSpace s = build_index_space(pts, 1.0);
    try {
        covering_number_exact(s, 0.1);
        FAIL();
    } catch (const ComputationError& e) {
        EXPECT_NE(std::string(e.what()).find("cap"), std::string::npos);
    }
    EXPECT_GT(covering_number_exact(s, 0.1, 40), 0u);
    EXPECT_THROW(covering_number_upper(s, 0.0), ValidationError);
}

TEST(Packing, Examples) {
    EXPECT_EQ(packing_number_lower(line({3.0}), 0.1), 1u);
    EXPECT_EQ(packing_number_lower(line({0, 1}), 0.4), 2u);
    EXPECT_EQ(packing_number_lower(line({0, 0.01, 0.02, 1}), 0.5), 2u);
    // cluster of diameter below 2 eps
    EXPECT_EQ(packing_number_lower(line({0, 0.1, 0.2, 0.3}), 0.8), 1u);
}

TEST(Profile, Examples) {
    const IndexSpace s = line({0, 0.5, 1});
    const EntropyProfile p = entropy_profile(s, {1.0});
    ASSERT_EQ(p.cover_upper.size(), 1u);
    EXPECT_EQ(p.cover_upper[0], 1.0);
    EXPECT_EQ(p.pack_lower[0], 1.0);

    const EntropyProfile single = entropy_profile(line({0.4}), {1.0, 0.5, 0.1, 0.001});
    for (std::size_t i = 0; i < 4; ++i) {
        EXPECT_EQ(single.cover_upper[i], 1.0);
        EXPECT_EQ(single.pack_lower[i], 1.0);
    }
    EXPECT_EQ(single.covering_at(1e-9), 1.0);

    EXPECT_THROW(entropy_profile(s, {0.5, 1.0}), ValidationError);
    EXPECT_THROW(entropy_profile(s, {1.5}), ValidationError);
    EXPECT_THROW(entropy_profile(s, {0.0}), ValidationError);
}

TEST(Profile, SixteenPointGrid) {
    std::vector<Point> pts;
    for (int i = 0; i < 16; ++i) {
        pts.push_back({i / 15.0});
    }
    const IndexSpace s = build_index_space(pts, 1.0);
    const std::vector<double> grid{1.0, 0.5, 0.25, 0.125};
    const EntropyProfile p = entropy_profile(s, grid);
    for (std::size_t i = 0; i < grid.size(); ++i) {
        // a closed ball of normalized radius e covers an interval of length e
        const double interval = std::ceil(1.0 / grid[i] - 1e-12);
        EXPECT_LE(p.cover_upper[i], 2.0 * interval) << grid[i];
        EXPECT_GE(2.0 * p.cover_upper[i], interval) << grid[i];
        const double exact = static_cast<double>(covering_number_exact(s, grid[i]));
        EXPECT_LE(exact, p.cover_upper[i]);
        EXPECT_LE(p.pack_lower[i], exact);
    }
}

TEST(Profile, CoveringAtStepsDown) {
    const IndexSpace s = line({0, 0.25, 0.5, 0.75, 1});
    const EntropyProfile p = exact_step_profile(s);
    for (double e : {1.0, 0.9, 0.6, 0.5, 0.45, 0.3, 0.1, 1e-6}) {
        EXPECT_EQ(p.covering_at(e), static_cast<double>(covering_number_upper(s, e))) << e;
    }
}

TEST(Profile, ScaleConvertsUnits) {
    const IndexSpace s = line({0, 0.25, 0.5, 0.75, 1});
    // profile units = normalized distance times 0.5 (raw units here)
    const EntropyProfile p = entropy_profile(s, {1.0, 0.3, 0.1}, 0.5);
    EXPECT_EQ(p.cover_upper[1], 2.0);
    EXPECT_EQ(p.cover_upper[2], 5.0);
}

TEST(Fit, Examples) {
    const std::vector<double> eps{0.5, 0.25, 0.125, 0.0625};
    std::vector<double> n;
    for (double e : eps) {
        n.push_back(std::pow(e, -2.0));
    }
    const EntropyFit f = entropy_dimension_fit(table_profile(eps, n));
    EXPECT_NEAR(f.kappa, 2.0, 1e-12);
    EXPECT_NEAR(f.prefactor, 1.0, 1e-12);
    EXPECT_NEAR(f.residual, 0.0, 1e-20);
    EXPECT_EQ(f.used_points, 4u);

    const EntropyFit flat = entropy_dimension_fit(table_profile(eps, {1, 1, 1, 1}));
    EXPECT_EQ(flat.kappa, 0.0);

    EXPECT_THROW(entropy_dimension_fit(table_profile({1.0, 0.5, 0.25}, {1, 4, 16})), ValidationError);
}

TEST(Fit, OneDimensionalGridsRecoverDOverAlpha) {
    for (double alpha : {1.0, 0.5}) {
        std::vector<Point> pts;
        for (int i = 0; i < 512; ++i) {
            pts.push_back({i / 511.0});
        }
        const IndexSpace s = build_index_space(pts, alpha);
        const EntropyProfile p = entropy_profile(s, geometric_grid(0.5, 0.7, 12));
        const EntropyFit f = entropy_dimension_fit(p);
        EXPECT_NEAR(f.kappa, 1.0 / alpha, 0.15 / alpha) << alpha;
    }
}

TEST(Fit, GeometricGrid) {
    const auto g = geometric_grid(1.0, 0.5, 4);
    ASSERT_EQ(g.size(), 4u);
    EXPECT_DOUBLE_EQ(g[3], 0.125);
    EXPECT_THROW(geometric_grid(1.0, 1.0, 3), ValidationError);
}

TEST(CoveringProperty, MonotoneAndBounded) {
    std::mt19937_64 gen(21);
    for (int rep = 0; rep < 60; ++rep) {
        const IndexSpace s = random_space(gen, 1 + gen() % 40);
        std::size_t prev = 1;
        for (double e = 1.0; e > 1e-3; e *= 0.8) {
            const std::size_t c = covering_number_upper(s, e);
            ASSERT_GE(c, prev);
            ASSERT_LE(c, s.size());
            prev = c;
        }
        ASSERT_EQ(covering_number_upper(s, 1.0), 1u);
    }
}

TEST(CoveringProperty, Sandwich) {
    std::mt19937_64 gen(22);
    for (int rep = 0; rep < 80; ++rep) {
        const IndexSpace s = random_space(gen, 1 + gen() % 16);
        for (double e : {0.9, 0.5, 0.3, 0.2, 0.1, 0.05}) {
            const std::size_t lo = packing_number_lower(s, e);
            const std::size_t ex = covering_number_exact(s, e);
            const std::size_t up = covering_number_upper(s, e);
            ASSERT_LE(lo, ex);
            ASSERT_LE(ex, up);
            ASSERT_LE(static_cast<double>(up), static_cast<double>(ex) * (1.0 + std::log(static_cast<double>(s.size()))) + 1e-12);
        }
    }
}

TEST(CoveringProperty, Deterministic) {
    std::mt19937_64 gen(23);
    const IndexSpace s = random_space(gen, 200);
    const auto grid = geometric_grid(1.0, 0.75, 15);
    const EntropyProfile a = entropy_profile(s, grid);
    const EntropyProfile b = entropy_profile(s, grid);
    EXPECT_EQ(a.cover_upper, b.cover_upper);
    EXPECT_EQ(a.pack_lower, b.pack_lower);
}
