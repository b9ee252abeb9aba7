#include "hlc/stochastic_lab.hpp"

#include "hlc/entropy_bounds.hpp"
#include "hlc/error.hpp"
#include "hlc/mixed_norms.hpp"
#include "hlc/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <sstream>
#include <string>

namespace hlc {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

void require(bool ok, const std::string& message) {
    if (!ok) {
        throw ValidationError(message);
    }
}

std::uint32_t u32(std::size_t i) {
    if (i > 0xffffffffULL) {
        throw ValidationError("replicate index exceeds 32 bits");
    }
    return static_cast<std::uint32_t>(i);
}

double root(double v, double order) {
    return std::pow(std::max(v, 0.0), 1.0 / order);
}

EmpiricalMoments summarize(const std::string& name, std::size_t n, double order, std::uint64_t seed,
                           const std::vector<double>& values, const LabOptions& options) {
    // resampling stream keyed by (functional, order, n)
    std::ostringstream key;
    key << "bootstrap:" << name << ':' << order;
    const MeanSummary s = summarize_mean(values, {seed, experiment_tag(key.str().c_str()), u32(n)}, options.confidence);
    EmpiricalMoments m;
    m.functional = name;
    m.n = n;
    m.order = order;
    m.replicates = values.size();
    m.excluded = s.excluded;
    m.estimate = s.mean;
    m.median_of_means = s.median_of_means;
    m.ci_lo = s.ci_lo;
    m.ci_hi = s.ci_hi;
    m.root_seed = seed;
    return m;
}

void check_ladder(const std::vector<std::size_t>& ladder) {
    require(!ladder.empty(), "n ladder is empty");
    for (std::size_t i = 0; i < ladder.size(); ++i) {
        require(ladder[i] >= 1 && (i == 0 || ladder[i] > ladder[i - 1]), "n ladder must be strictly increasing from n >= 1");
    }
}

} // namespace

NamedFunctional cl_norm_functional(double p) {
    require(p >= 1.0, "cl_norm functional: p must be >= 1");
    return {"cl_norm_p" + std::to_string(p), [p](const Field& f) { return cl_norm(f, p); }};
}

NamedFunctional zeta_functional(double p) {
    require(p >= 1.0, "zeta functional: p must be >= 1");
    return {"zeta_p" + std::to_string(p), [p](const Field& f) { return std::pow(cl_norm(f, p), p); }};
}

double EmpiricalMoments::norm_estimate() const { return root(estimate, order); }
double EmpiricalMoments::norm_lo() const { return root(ci_lo, order); }
double EmpiricalMoments::norm_hi() const { return root(ci_hi, order); }

std::uint32_t normed_sum_tag() { return experiment_tag("normed-sum"); }

Field sample_field(const RandomFieldModel& model, std::uint64_t seed) {
    return model.draw({seed, experiment_tag("sample"), 0});
}

Field normed_sum(const RandomFieldModel& model, std::size_t n, std::uint64_t seed) {
    require(n >= 1, "normed_sum: n must be >= 1");
    return model.normed_sum(n, {seed, normed_sum_tag(), 0});
}

std::vector<std::vector<EmpiricalMoments>> ladder_moments(const RandomFieldModel& model,
                                                          const std::vector<std::size_t>& ladder,
                                                          const std::vector<MomentRequest>& requests,
                                                          std::size_t replicates, std::uint64_t root_seed,
                                                          const LabOptions& options) {
    check_ladder(ladder);
    require(replicates >= 100, "empirical moments need at least 100 replicates");
    require(!requests.empty(), "no functionals requested");
    for (const auto& r : requests) {
        require(r.order > 0.0, "moment order must be positive");
    }
    const std::size_t nr = ladder.size();
    const std::size_t nq = requests.size();
    // values[(rung * nq + q) * R + rep]
    std::vector<double> values(nr * nq * replicates);
    const std::uint32_t tag = normed_sum_tag();
    parallel_for(replicates, options.jobs, [&](std::size_t rep) {
        const std::vector<Field> sums = model.normed_sum_ladder(ladder, {root_seed, tag, u32(rep)});
        for (std::size_t i = 0; i < nr; ++i) {
            for (std::size_t q = 0; q < nq; ++q) {
                double v = requests[q].functional.f(sums[i]);
                v = std::isfinite(v) ? std::pow(std::abs(v), requests[q].order) : kNaN;
                values[(i * nq + q) * replicates + rep] = v;
            }
        }
    });
    std::vector<std::vector<EmpiricalMoments>> out(nr, std::vector<EmpiricalMoments>(nq));
    parallel_for(nr * nq, options.jobs, [&](std::size_t k) {
        const std::size_t i = k / nq;
        const std::size_t q = k % nq;
        const std::vector<double> slice(values.begin() + static_cast<std::ptrdiff_t>(k * replicates),
                                        values.begin() + static_cast<std::ptrdiff_t>((k + 1) * replicates));
        out[i][q] = summarize(requests[q].functional.name, ladder[i], requests[q].order, root_seed, slice, options);
    });
    return out;
}

EmpiricalMoments empirical_moment(const RandomFieldModel& model, std::size_t n, const NamedFunctional& functional,
                                  double order, std::size_t replicates, std::uint64_t root_seed,
                                  const LabOptions& options) {
    return ladder_moments(model, {n}, {{functional, order}}, replicates, root_seed, options)[0][0];
}

std::vector<TailEstimate> tail_from_values(const std::vector<double>& values, const std::vector<double>& z_grid,
                                           double level) {
    std::vector<double> v;
    v.reserve(values.size());
    for (double x : values) {
        if (std::isfinite(x)) {
            v.push_back(x);
        }
    }
    require(!v.empty(), "tail estimate: no finite values");
    std::sort(v.begin(), v.end());
    std::vector<TailEstimate> out;
    out.reserve(z_grid.size());
    for (double z : z_grid) {
        TailEstimate e;
        e.z = z;
        e.trials = v.size();
        e.exceed = static_cast<std::size_t>(v.end() - std::upper_bound(v.begin(), v.end(), z));
        e.survival = static_cast<double>(e.exceed) / static_cast<double>(e.trials);
        e.cp_upper = clopper_pearson_upper(e.exceed, e.trials, level);
        out.push_back(e);
    }
    return out;
}

std::vector<TailEstimate> empirical_tail(const RandomFieldModel& model, std::size_t n,
                                         const NamedFunctional& functional, const std::vector<double>& z_grid,
                                         std::size_t replicates, std::uint64_t root_seed,
                                         const LabOptions& options) {
    require(n >= 1, "empirical_tail: n must be >= 1");
    require(replicates >= 1000, "empirical_tail needs at least 1000 replicates");
    require(!z_grid.empty(), "empirical_tail: empty z grid");
    std::vector<double> values(replicates);
    const std::uint32_t tag = normed_sum_tag();
    parallel_for(replicates, options.jobs, [&](std::size_t rep) {
        values[rep] = functional.f(model.normed_sum(n, {root_seed, tag, u32(rep)}));
    });
    return tail_from_values(values, z_grid, options.confidence.level);
}

CltDiagnostic clt_diagnostic(const RandomFieldModel& model, const std::vector<std::size_t>& ladder,
                             const NamedFunctional& functional, std::size_t replicates, std::uint64_t root_seed,
                             double threshold, double level, const LabOptions& options) {
    check_ladder(ladder);
    require(ladder.size() >= 2, "clt_diagnostic needs at least two rungs");
    require(replicates >= 1000, "clt_diagnostic needs at least 1000 replicates");
    const std::size_t nr = ladder.size();
    std::vector<std::vector<double>> samples(nr, std::vector<double>(replicates));
    const std::uint32_t base = experiment_tag("clt");
    parallel_for(nr * replicates, options.jobs, [&](std::size_t k) {
        const std::size_t i = k / replicates;
        const std::size_t rep = k % replicates;
        samples[i][rep] =
            functional.f(model.normed_sum(ladder[i], {root_seed, base + u32(i), u32(rep)}));
    });

    CltDiagnostic out;
    for (std::size_t i = 0; i + 1 < nr; ++i) {
        out.consecutive.push_back({ladder[i], ladder[i + 1], ks_statistic(samples[i], samples[i + 1]),
                                   ks_critical_value(replicates, replicates, level)});
    }
    const double pairs = static_cast<double>(nr * (nr - 1) / 2);
    const double pair_level = 1.0 - (1.0 - level) / pairs;
    out.all_pairwise_below = true;
    for (std::size_t i = 0; i < nr; ++i) {
        for (std::size_t j = i + 1; j < nr; ++j) {
            KsRow row{ladder[i], ladder[j], ks_statistic(samples[i], samples[j]),
                      ks_critical_value(replicates, replicates, pair_level)};
            out.all_pairwise_below = out.all_pairwise_below && row.ks < row.critical;
            out.pairwise.push_back(row);
        }
    }
    out.decreasing = true;
    for (std::size_t i = 1; i < out.consecutive.size(); ++i) {
        out.decreasing = out.decreasing && out.consecutive[i].ks < out.consecutive[i - 1].ks;
    }
    out.final_below = out.consecutive.back().ks < threshold;
    out.converged = out.decreasing && out.final_below;
    return out;
}

std::vector<EquicontinuityRow> equicontinuity_diagnostic(const RandomFieldModel& model,
                                                         const std::vector<std::size_t>& ladder, double p,
                                                         const std::vector<double>& eps_grid,
                                                         const std::vector<double>& h_grid, std::size_t replicates,
                                                         std::uint64_t root_seed, const LabOptions& options) {
    check_ladder(ladder);
    require(p >= 1.0, "equicontinuity_diagnostic: p must be >= 1");
    require(!eps_grid.empty() && !h_grid.empty(), "equicontinuity_diagnostic: empty grid");
    require(replicates >= 1, "equicontinuity_diagnostic: no replicates");
    const std::size_t nr = ladder.size();
    const std::size_t ne = eps_grid.size();
    const std::size_t nh = h_grid.size();
    const IndexSpace& ts = *model.t_space();
    const std::size_t nt = ts.size();
    // exceed[((rep * nr + rung) * ne + e) * nh + h]
    std::vector<unsigned char> exceed(replicates * nr * ne * nh, 0);
    const std::uint32_t tag = experiment_tag("equicontinuity");
    const auto w = model.x_space()->weights();
    parallel_for(replicates, options.jobs, [&](std::size_t rep) {
        const std::vector<Field> sums = model.normed_sum_ladder(ladder, {root_seed, tag, u32(rep)});
        std::vector<double> tau(nt);
        for (std::size_t i = 0; i < nr; ++i) {
            const Eigen::MatrixXd& v = sums[i].values();
            for (std::size_t t = 0; t < nt; ++t) {
                long double acc = 0.0L;
                for (std::size_t x = 0; x < sums[i].x_size(); ++x) {
                    acc += w[x] * std::pow(std::abs(v(static_cast<Eigen::Index>(x), static_cast<Eigen::Index>(t))), p);
                }
                tau[t] = static_cast<double>(acc);
            }
            for (std::size_t e = 0; e < ne; ++e) {
                double sup = 0.0;
                for (std::size_t t = 0; t < nt; ++t) {
                    for (std::size_t s = t + 1; s < nt; ++s) {
                        if (ts.distance(t, s) < eps_grid[e]) {
                            sup = std::max(sup, std::abs(tau[t] - tau[s]));
                        }
                    }
                }
                for (std::size_t h = 0; h < nh; ++h) {
                    exceed[((rep * nr + i) * ne + e) * nh + h] = sup > h_grid[h] ? 1 : 0;
                }
            }
        }
    });
    std::vector<EquicontinuityRow> out;
    for (std::size_t e = 0; e < ne; ++e) {
        for (std::size_t h = 0; h < nh; ++h) {
            std::size_t worst = 0;
            std::size_t worst_rung = 0;
            for (std::size_t i = 0; i < nr; ++i) {
                std::size_t count = 0;
                for (std::size_t rep = 0; rep < replicates; ++rep) {
                    count += exceed[((rep * nr + i) * ne + e) * nh + h];
                }
                if (count > worst) {
                    worst = count;
                    worst_rung = i;
                }
            }
            EquicontinuityRow row;
            row.eps = eps_grid[e];
            row.h = h_grid[h];
            row.probability = static_cast<double>(worst) / static_cast<double>(replicates);
            row.cp_upper = clopper_pearson_upper(worst, replicates, options.confidence.level);
            row.worst_n = ladder[worst_rung];
            out.push_back(row);
        }
    }
    return out;
}

std::string to_string(ScalarLaw law) {
    switch (law) {
    case ScalarLaw::Rademacher: return "rademacher";
    case ScalarLaw::Uniform: return "uniform";
    case ScalarLaw::Gaussian: return "gaussian";
    }
    return "unknown";
}

std::vector<RosenthalRatio> rosenthal_ratio_experiment(ScalarLaw law, const std::vector<double>& p_values,
                                                       const std::vector<std::size_t>& ladder,
                                                       std::size_t replicates, std::uint64_t root_seed,
                                                       const LabOptions& options) {
    check_ladder(ladder);
    require(!p_values.empty(), "rosenthal_ratio_experiment: no exponents");
    for (double p : p_values) {
        require(p >= 2.0, "rosenthal_ratio_experiment: p must be >= 2");
    }
    require(replicates >= 2, "rosenthal_ratio_experiment: need at least 2 replicates");
    const std::size_t np = p_values.size();
    const std::size_t nr = ladder.size();
    // den[rep * np + j] = |zeta_1|^p, num[(rep * nr + i) * np + j] = |S_n|^p
    std::vector<double> den(replicates * np);
    std::vector<double> num(replicates * nr * np);
    const std::uint32_t tag = experiment_tag(("rosenthal:" + to_string(law)).c_str());
    parallel_for(replicates, options.jobs, [&](std::size_t rep) {
        CounterRng rng({root_seed, tag, u32(rep)});
        std::normal_distribution<double> normal;
        auto next = [&]() {
            switch (law) {
            case ScalarLaw::Rademacher: return (rng() >> 63) != 0 ? 1.0 : -1.0;
            case ScalarLaw::Uniform: return std::sqrt(3.0) * (2.0 * rng.uniform() - 1.0);
            case ScalarLaw::Gaussian: return normal(rng);
            }
            return 0.0;
        };
        double sum = 0.0;
        std::size_t rung = 0;
        for (std::size_t k = 1; rung < nr; ++k) {
            const double z = next();
            sum += z;
            if (k == 1) {
                for (std::size_t j = 0; j < np; ++j) {
                    den[rep * np + j] = std::pow(std::abs(z), p_values[j]);
                }
            }
            if (k == ladder[rung]) {
                const double s = std::abs(sum) / std::sqrt(static_cast<double>(k));
                for (std::size_t j = 0; j < np; ++j) {
                    num[(rep * nr + rung) * np + j] = std::pow(s, p_values[j]);
                }
                ++rung;
            }
        }
    });

    auto ratios = [&](const std::vector<std::size_t>* idx, std::vector<double>& out) {
        std::vector<long double> d(np, 0.0L);
        std::vector<long double> u(nr * np, 0.0L);
        for (std::size_t k = 0; k < replicates; ++k) {
            const std::size_t rep = idx ? (*idx)[k] : k;
            for (std::size_t j = 0; j < np; ++j) {
                d[j] += den[rep * np + j];
            }
            for (std::size_t i = 0; i < nr * np; ++i) {
                u[i] += num[rep * nr * np + i];
            }
        }
        out.resize(nr * np);
        for (std::size_t i = 0; i < nr; ++i) {
            for (std::size_t j = 0; j < np; ++j) {
                if (d[j] == 0.0L) {
                    throw ComputationError("rosenthal_ratio_experiment: |zeta_1|_p is zero");
                }
                out[i * np + j] = std::pow(static_cast<double>(u[i * np + j] / d[j]), 1.0 / p_values[j]);
            }
        }
    };

    std::vector<double> point;
    ratios(nullptr, point);
    const std::size_t nb = options.confidence.resamples;
    std::vector<std::vector<double>> boot(nb);
    parallel_for(nb, options.jobs, [&](std::size_t b) {
        CounterRng rng({root_seed, experiment_tag("rosenthal-bootstrap"), u32(b)});
        std::vector<std::size_t> idx(replicates);
        for (auto& i : idx) {
            i = static_cast<std::size_t>(rng() % replicates);
        }
        ratios(&idx, boot[b]);
    });

    const double alpha = 1.0 - options.confidence.level;
    std::vector<RosenthalRatio> out(np);
    for (std::size_t j = 0; j < np; ++j) {
        out[j].p = p_values[j];
        for (std::size_t i = 0; i < nr; ++i) {
            RosenthalRatioRow row;
            row.n = ladder[i];
            row.ratio = point[i * np + j];
            if (nb > 0) {
                std::vector<double> col(nb);
                for (std::size_t b = 0; b < nb; ++b) {
                    col[b] = boot[b][i * np + j];
                }
                std::sort(col.begin(), col.end());
                const auto last = static_cast<double>(nb - 1);
                row.ci_lo = col[static_cast<std::size_t>(std::floor(0.5 * alpha * last))];
                row.ci_hi = col[static_cast<std::size_t>(std::ceil((1.0 - 0.5 * alpha) * last))];
            } else {
                row.ci_lo = row.ci_hi = row.ratio;
            }
            row.ci_lo = std::min(row.ci_lo, row.ratio);
            row.ci_hi = std::max(row.ci_hi, row.ratio);
            out[j].max_ratio = std::max(out[j].max_ratio, row.ratio);
            out[j].max_ci_hi = std::max(out[j].max_ci_hi, row.ci_hi);
            out[j].rows.push_back(row);
        }
    }
    return out;
}

RosenthalRatio rosenthal_ratio_experiment(ScalarLaw law, double p, const std::vector<std::size_t>& ladder,
                                          std::size_t replicates, std::uint64_t root_seed,
                                          const LabOptions& options) {
    return rosenthal_ratio_experiment(law, std::vector<double>{p}, ladder, replicates, root_seed, options).front();
}

Prop41Estimate prop41_expectation(const RandomFieldModel& model, double p, double Q, std::size_t replicates,
                                  std::uint64_t root_seed, const LabOptions& options) {
    require(p >= 1.0 && Q >= 1.0, "prop41_expectation: need p >= 1 and Q >= 1");
    require(replicates >= 100, "prop41_expectation needs at least 100 replicates");
    std::vector<double> lam(replicates);
    std::vector<double> lhs(replicates);
    const std::uint32_t tag = experiment_tag("prop41");
    const double pq = p * Q;
    parallel_for(replicates, options.jobs, [&](std::size_t rep) {
        const Field xi = model.draw({root_seed, tag, u32(rep)});
        lhs[rep] = std::pow(cl_norm(xi, p), pq);
        double v = kNaN;
        try {
            v = std::pow(prop41_bound(xi, p, Q).nu, Q);
        } catch (const ComputationError&) {
        }
        lam[rep] = v;
    });
    Prop41Estimate out;
    out.p = p;
    out.Q = Q;
    out.replicates = replicates;
    const EmpiricalMoments rhs_m = summarize("lambda", 1, Q, root_seed, lam, options);
    const EmpiricalMoments lhs_m = summarize("cl_norm", 1, pq, root_seed, lhs, options);
    out.divergent = rhs_m.excluded;
    out.bound = root(rhs_m.estimate, pq);
    out.bound_lo = root(rhs_m.ci_lo, pq);
    out.bound_hi = root(rhs_m.ci_hi, pq);
    out.lhs = lhs_m.norm_estimate();
    out.lhs_lo = lhs_m.norm_lo();
    out.lhs_hi = lhs_m.norm_hi();
    out.dominated = out.lhs_hi <= out.bound_lo;
    return out;
}

} // namespace hlc
