#include "hlc/statistics.hpp"

#include "hlc/error.hpp"

#include <boost/math/special_functions/beta.hpp>

#include <algorithm>
#include <cmath>

namespace hlc {

namespace {

long double pairwise(std::span<const double> v) {
    if (v.size() <= 16) {
        long double s = 0.0L;
        for (double x : v) {
            s += x;
        }
        return s;
    }
    const std::size_t mid = v.size() / 2;
    return pairwise(v.first(mid)) + pairwise(v.subspan(mid));
}

inline std::size_t bounded(CounterRng& rng, std::size_t n) {
    return static_cast<std::size_t>(rng() % n);
}

} // namespace

double stable_sum(std::span<const double> values) {
    return static_cast<double>(pairwise(values));
}

MeanSummary summarize_mean(std::span<const double> values, StreamId bootstrap_stream,
                           const ConfidenceOptions& options) {
    MeanSummary out;
    std::vector<double> v;
    v.reserve(values.size());
    for (double x : values) {
        if (std::isfinite(x)) {
            v.push_back(x);
        } else {
            ++out.excluded;
        }
    }
    out.used = v.size();
    if (v.empty()) {
        throw ComputationError("summarize_mean: no finite values");
    }
    const std::size_t n = v.size();
    out.mean = stable_sum(v) / static_cast<double>(n);

    const auto blocks = static_cast<std::size_t>(std::ceil(std::sqrt(static_cast<double>(n))));
    std::vector<double> block_means;
    for (std::size_t b = 0; b < blocks; ++b) {
        const std::size_t lo = b * n / blocks;
        const std::size_t hi = (b + 1) * n / blocks;
        if (hi > lo) {
            block_means.push_back(stable_sum(std::span<const double>(v).subspan(lo, hi - lo)) /
                                  static_cast<double>(hi - lo));
        }
    }
    std::sort(block_means.begin(), block_means.end());
    const std::size_t k = block_means.size();
    out.median_of_means = k % 2 == 1 ? block_means[k / 2] : 0.5 * (block_means[k / 2 - 1] + block_means[k / 2]);

    CounterRng rng(bootstrap_stream);
    std::vector<double> boot(options.resamples);
    for (std::size_t r = 0; r < options.resamples; ++r) {
        long double s = 0.0L;
        for (std::size_t i = 0; i < n; ++i) {
            s += v[bounded(rng, n)];
        }
        boot[r] = static_cast<double>(s / static_cast<long double>(n));
    }
    if (boot.empty()) {
        out.ci_lo = out.ci_hi = out.mean;
    } else {
        std::sort(boot.begin(), boot.end());
        const double alpha = 1.0 - options.level;
        const auto last = static_cast<double>(boot.size() - 1);
        out.ci_lo = boot[static_cast<std::size_t>(std::floor(0.5 * alpha * last))];
        out.ci_hi = boot[static_cast<std::size_t>(std::ceil((1.0 - 0.5 * alpha) * last))];
    }
    out.ci_lo = std::min(out.ci_lo, out.median_of_means);
    out.ci_hi = std::max(out.ci_hi, out.median_of_means);
    return out;
}

double clopper_pearson_upper(std::size_t successes, std::size_t trials, double level) {
    if (trials == 0 || successes > trials) {
        throw ValidationError("clopper_pearson_upper: need 0 <= k <= n and n > 0");
    }
    if (successes == trials) {
        return 1.0;
    }
    return boost::math::ibeta_inv(static_cast<double>(successes) + 1.0, static_cast<double>(trials - successes), level);
}

double clopper_pearson_lower(std::size_t successes, std::size_t trials, double level) {
    if (trials == 0 || successes > trials) {
        throw ValidationError("clopper_pearson_lower: need 0 <= k <= n and n > 0");
    }
    if (successes == 0) {
        return 0.0;
    }
    return boost::math::ibeta_inv(static_cast<double>(successes), static_cast<double>(trials - successes) + 1.0,
                                  1.0 - level);
}

double ks_statistic(std::vector<double> a, std::vector<double> b) {
    if (a.empty() || b.empty()) {
        throw ValidationError("ks_statistic: empty sample");
    }
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    const double na = static_cast<double>(a.size());
    const double nb = static_cast<double>(b.size());
    std::size_t i = 0;
    std::size_t j = 0;
    double d = 0.0;
    while (i < a.size() && j < b.size()) {
        const double x = std::min(a[i], b[j]);
        while (i < a.size() && a[i] <= x) {
            ++i;
        }
        while (j < b.size() && b[j] <= x) {
            ++j;
        }
        d = std::max(d, std::abs(static_cast<double>(i) / na - static_cast<double>(j) / nb));
    }
    return d;
}

double ks_critical_value(std::size_t n, std::size_t m, double level) {
    if (n == 0 || m == 0) {
        throw ValidationError("ks_critical_value: empty sample");
    }
    const double alpha = 1.0 - level;
    const double c = std::sqrt(-0.5 * std::log(0.5 * alpha));
    const double dn = static_cast<double>(n);
    const double dm = static_cast<double>(m);
    return c * std::sqrt((dn + dm) / (dn * dm));
}

} // namespace hlc
