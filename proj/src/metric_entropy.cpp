#include "hlc/metric_entropy.hpp"

#include "hlc/error.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <string>

namespace hlc {

namespace {

// Greedy cover with the comparison d(i,j) * scale <= eps.
std::size_t greedy_cover(const IndexSpace& space, double eps, double scale) {
    const std::size_t n = space.size();
    const Eigen::MatrixXd& d = space.distances();
    std::vector<std::size_t> count(n, 0);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            if (d(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(i)) * scale <= eps) {
                ++count[i];
            }
        }
    }
    std::vector<char> covered(n, 0);
    std::size_t remaining = n;
    std::size_t balls = 0;
    while (remaining > 0) {
        std::size_t pick = 0;
        for (std::size_t i = 1; i < n; ++i) {
            if (count[i] > count[pick]) {
                pick = i;
            }
        }
        ++balls;
        const auto pi = static_cast<Eigen::Index>(pick);
        for (std::size_t u = 0; u < n; ++u) {
            if (covered[u] || !(d(static_cast<Eigen::Index>(u), pi) * scale <= eps)) {
                continue;
            }
            covered[u] = 1;
            --remaining;
            const auto ui = static_cast<Eigen::Index>(u);
            for (std::size_t v = 0; v < n; ++v) {
                if (d(static_cast<Eigen::Index>(v), ui) * scale <= eps) {
                    --count[v];
                }
            }
        }
    }
    return balls;
}

std::size_t greedy_packing(const IndexSpace& space, double eps, double scale) {
    std::vector<std::size_t> chosen;
    for (std::size_t i = 0; i < space.size(); ++i) {
        bool separated = true;
        for (std::size_t j : chosen) {
            if (!(space.distance(i, j) * scale > 2.0 * eps)) {
                separated = false;
                break;
            }
        }
        if (separated) {
            chosen.push_back(i);
        }
    }
    return chosen.size();
}

// Smallest greedy cover over every distance level <= eps. Balls of a smaller
// radius still cover at eps, so this stays an upper bound and is monotone in eps.
std::size_t monotone_cover(const IndexSpace& space, double eps, double scale) {
    std::size_t best = greedy_cover(space, eps, scale);
    const std::size_t n = space.size();
    std::vector<double> levels;
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            const double d = space.distance(i, j) * scale;
            if (d <= eps) {
                levels.push_back(d);
            }
        }
    }
    levels.push_back(0.0);
    std::sort(levels.begin(), levels.end(), std::greater<>());
    levels.erase(std::unique(levels.begin(), levels.end()), levels.end());
    for (std::size_t k = 1; k < levels.size(); ++k) {
        if (greedy_packing(space, levels[k], scale) >= best) {
            break;
        }
        best = std::min(best, greedy_cover(space, levels[k], scale));
    }
    return best;
}

void require_positive(double eps, const char* what) {
    if (!(eps > 0.0)) {
        throw ValidationError(std::string(what) + ": radius must be positive");
    }
}

} // namespace

double EntropyProfile::covering_at(double eps) const {
    if (source == ProfileSource::Analytic) {
        if (eps >= 1.0) {
            return 1.0;
        }
        return prefactor * std::pow(eps, -kappa);
    }
    // Largest grid radius not exceeding eps; grids are decreasing.
    for (std::size_t i = 0; i < eps_grid.size(); ++i) {
        if (eps_grid[i] <= eps) {
            return cover_upper[i];
        }
    }
    if (eps < min_positive) {
        return floor_count;
    }
    return static_cast<double>(cardinality);
}

EntropyProfile EntropyProfile::analytic(double prefactor, double kappa) {
    if (!(prefactor > 0.0) || !(kappa >= 0.0)) {
        throw ValidationError("analytic profile: need prefactor > 0 and kappa >= 0");
    }
    EntropyProfile p;
    p.source = ProfileSource::Analytic;
    p.prefactor = prefactor;
    p.kappa = kappa;
    p.min_positive = 0.0;
    p.cardinality = 0;
    return p;
}

std::size_t covering_number_upper(const IndexSpace& space, double eps) {
    require_positive(eps, "covering_number_upper");
    return monotone_cover(space, eps, 1.0);
}

std::size_t covering_number_exact(const IndexSpace& space, double eps, std::size_t cap) {
    require_positive(eps, "covering_number_exact");
    const std::size_t n = space.size();
    if (n > cap || n > 63) {
        throw ComputationError("covering_number_exact: " + std::to_string(n) + " points exceed the cap of " +
                               std::to_string(std::min<std::size_t>(cap, 63)) +
                               "; use covering_number_upper instead");
    }
    std::vector<std::uint64_t> ball(n, 0);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            if (space.distance(i, j) <= eps) {
                ball[i] |= std::uint64_t{1} << j;
            }
        }
    }
    const std::uint64_t all = n == 64 ? ~std::uint64_t{0} : (std::uint64_t{1} << n) - 1;
    std::size_t best = greedy_cover(space, eps, 1.0);

    std::function<void(std::uint64_t, std::size_t)> search = [&](std::uint64_t uncovered, std::size_t used) {
        if (uncovered == 0) {
            best = std::min(best, used);
            return;
        }
        int widest = 0;
        for (std::size_t i = 0; i < n; ++i) {
            widest = std::max(widest, std::popcount(ball[i] & uncovered));
        }
        const int left = std::popcount(uncovered);
        const std::size_t lower = used + static_cast<std::size_t>((left + widest - 1) / widest);
        if (lower >= best) {
            return;
        }
        const int e = std::countr_zero(uncovered);
        std::vector<std::size_t> options;
        for (std::size_t i = 0; i < n; ++i) {
            if (ball[i] >> e & 1U) {
                options.push_back(i);
            }
        }
        std::stable_sort(options.begin(), options.end(), [&](std::size_t a, std::size_t b) {
            return std::popcount(ball[a] & uncovered) > std::popcount(ball[b] & uncovered);
        });
        for (std::size_t i : options) {
            search(uncovered & ~ball[i], used + 1);
        }
    };
    search(all, 0);
    return best;
}

std::size_t packing_number_lower(const IndexSpace& space, double eps) {
    require_positive(eps, "packing_number_lower");
    return greedy_packing(space, eps, 1.0);
}

EntropyProfile entropy_profile(const IndexSpace& space, const std::vector<double>& eps_grid, double scale) {
    if (!(scale > 0.0)) {
        throw ValidationError("entropy_profile: scale must be positive");
    }
    for (std::size_t i = 0; i < eps_grid.size(); ++i) {
        const double e = eps_grid[i];
        if (!(e > 0.0 && e <= 1.0)) {
            throw ValidationError("entropy_profile: grid value " + std::to_string(i) + " outside (0, 1]");
        }
        if (i > 0 && !(e < eps_grid[i - 1])) {
            throw ValidationError("entropy_profile: grid must be strictly decreasing");
        }
    }
    EntropyProfile p;
    p.eps_grid = eps_grid;
    p.cardinality = space.size();
    p.scale = scale;
    p.min_positive = space.min_positive_distance() * scale;
    p.floor_count = static_cast<double>(greedy_cover(space, 0.0, scale));
    p.cover_upper.reserve(eps_grid.size());
    p.pack_lower.reserve(eps_grid.size());
    for (double e : eps_grid) {
        p.cover_upper.push_back(static_cast<double>(greedy_cover(space, e, scale)));
        p.pack_lower.push_back(static_cast<double>(greedy_packing(space, e, scale)));
    }
    double running = p.floor_count;
    for (std::size_t i = eps_grid.size(); i-- > 0;) {
        running = std::min(running, p.cover_upper[i]);
        p.cover_upper[i] = running;
    }
    return p;
}

EntropyProfile exact_step_profile(const IndexSpace& space, double scale) {
    std::vector<double> levels;
    const std::size_t n = space.size();
    levels.reserve(n * (n - 1) / 2 + 1);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            const double d = space.distance(i, j) * scale;
            if (d > 0.0 && d < 1.0) {
                levels.push_back(d);
            }
        }
    }
    levels.push_back(1.0);
    std::sort(levels.begin(), levels.end(), std::greater<>());
    levels.erase(std::unique(levels.begin(), levels.end()), levels.end());
    return entropy_profile(space, levels, scale);
}

EntropyFit entropy_dimension_fit(const EntropyProfile& profile) {
    std::vector<double> xs;
    std::vector<double> ys;
    for (std::size_t i = 0; i < profile.eps_grid.size(); ++i) {
        const double e = profile.eps_grid[i];
        const double n = profile.cover_upper[i];
        if (!(e < 1.0) || !(n > 0.0)) {
            continue;
        }
        if (profile.cardinality > 1 && n >= static_cast<double>(profile.cardinality)) {
            continue;  // saturated: every point is its own ball
        }
        xs.push_back(std::log(1.0 / e));
        ys.push_back(std::log(n));
    }
    if (xs.size() < 3) {
        throw ValidationError("entropy_dimension_fit: need at least 3 unsaturated grid points with eps < 1, have " +
                              std::to_string(xs.size()));
    }
    const double m = static_cast<double>(xs.size());
    double mx = 0.0;
    double my = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        mx += xs[i];
        my += ys[i];
    }
    mx /= m;
    my /= m;
    double sxx = 0.0;
    double sxy = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        sxx += (xs[i] - mx) * (xs[i] - mx);
        sxy += (xs[i] - mx) * (ys[i] - my);
    }
    EntropyFit fit;
    fit.used_points = xs.size();
    double slope = sxx > 0.0 ? sxy / sxx : 0.0;
    double intercept = my - slope * mx;
    if (slope < 0.0) {
        slope = 0.0;
        intercept = my;
    }
    fit.kappa = slope;
    fit.prefactor = std::exp(intercept);
    for (std::size_t i = 0; i < xs.size(); ++i) {
        const double r = ys[i] - (intercept + slope * xs[i]);
        fit.residual += r * r;
    }
    return fit;
}

std::vector<double> geometric_grid(double start, double ratio, std::size_t count) {
    if (!(start > 0.0) || !(ratio > 0.0 && ratio < 1.0)) {
        throw ValidationError("geometric_grid: need start > 0 and ratio in (0, 1)");
    }
    std::vector<double> g(count);
    double v = start;
    for (std::size_t i = 0; i < count; ++i) {
        g[i] = v;
        v *= ratio;
    }
    return g;
}

} // namespace hlc
