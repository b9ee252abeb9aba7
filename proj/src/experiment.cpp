#include "hlc/experiment.hpp"

#include "hlc/entropy_bounds.hpp"
#include "hlc/error.hpp"
#include "hlc/metric_entropy.hpp"
#include "hlc/mixed_norms.hpp"
#include "hlc/stochastic_lab.hpp"

#include <nlohmann/json.hpp>
#include <openssl/evp.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

namespace hlc {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

const std::set<std::string> kStages{"norms", "entropy", "bound", "simulate", "validate"};

std::string join(const std::vector<std::string>& v, const std::string& sep) {
    std::string out;
    for (std::size_t i = 0; i < v.size(); ++i) {
        out += (i ? sep : "") + v[i];
    }
    return out;
}

std::string read_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw std::runtime_error("cannot read " + path.string());
    }
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_file(const fs::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw std::runtime_error("cannot write " + path.string());
    }
    out << text;
}

std::string fmt17(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

// Collects problems instead of stopping at the first one.
class Problems {
public:
    template <class F>
    void check(const std::string& where, F&& f) {
        try {
            f();
        } catch (const SpecError& e) {
            for (const auto& p : e.problems()) {
                list.push_back(p);
            }
        } catch (const json::exception& e) {
            list.push_back(where + ": " + e.what());
        } catch (const std::exception& e) {
            list.push_back(where + ": " + e.what());
        }
    }
    void add(const std::string& msg) { list.push_back(msg); }
    std::vector<std::string> list;
};

fs::path resolve(const fs::path& base, const std::string& p) {
    fs::path path(p);
    return path.is_absolute() ? path : base / path;
}

json load_ref(const json& j, const fs::path& base) {
    if (j.contains("file")) {
        const fs::path path = resolve(base, j.at("file").get<std::string>());
        if (!fs::exists(path)) {
            throw std::runtime_error("referenced file does not exist: " + path.string());
        }
        return json::parse(read_file(path));
    }
    return j;
}

std::vector<Point> parse_points(const json& j) {
    std::vector<Point> pts;
    for (const auto& e : j) {
        if (e.is_number()) {
            pts.push_back({e.get<double>()});
        } else {
            pts.push_back(e.get<std::vector<double>>());
        }
    }
    return pts;
}

std::shared_ptr<const MeasureSpace> parse_x_space(const json& raw, const fs::path& base) {
    const json j = load_ref(raw, base);
    if (j.contains("grid")) {
        const auto per_axis = j.at("grid").at("per_axis").get<std::size_t>();
        const auto dim = j.at("grid").value("dim", std::size_t{1});
        const std::vector<Point> pts = uniform_grid(per_axis, dim);
        const double w = j.value("weight", 1.0 / static_cast<double>(pts.size()));
        return std::make_shared<MeasureSpace>(pts, std::vector<double>(pts.size(), w));
    }
    return std::make_shared<MeasureSpace>(parse_points(j.at("points")), j.at("weights").get<std::vector<double>>());
}

std::shared_ptr<const IndexSpace> parse_t_space(const json& raw, const fs::path& base) {
    const json j = load_ref(raw, base);
    if (j.contains("matrix")) {
        const auto rows = j.at("matrix").get<std::vector<std::vector<double>>>();
        Eigen::MatrixXd m(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(rows.size()));
        for (std::size_t i = 0; i < rows.size(); ++i) {
            if (rows[i].size() != rows.size()) {
                throw ValidationError("t_space matrix must be square");
            }
            for (std::size_t k = 0; k < rows.size(); ++k) {
                m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) = rows[i][k];
            }
        }
        return std::make_shared<IndexSpace>(build_index_space_from_matrix(m));
    }
    const double alpha = j.value("alpha", 1.0);
    if (j.contains("grid")) {
        const auto per_axis = j.at("grid").at("per_axis").get<std::size_t>();
        const auto dim = j.at("grid").value("dim", std::size_t{1});
        return std::make_shared<IndexSpace>(build_index_space(uniform_grid(per_axis, dim), alpha));
    }
    return std::make_shared<IndexSpace>(build_index_space(parse_points(j.at("coords")), alpha));
}

std::shared_ptr<const RandomFieldModel> parse_model(const json& j, std::shared_ptr<const MeasureSpace> x,
                                                    std::shared_ptr<const IndexSpace> t) {
    const ModelKind kind = model_kind_from_string(j.at("kind").get<std::string>());
    KernelSpec kernel;
    if (j.contains("kernel")) {
        const json& k = j.at("kernel");
        kernel.variance = k.value("variance", kernel.variance);
        kernel.x_length = k.value("x_length", kernel.x_length);
        kernel.t_length = k.value("t_length", kernel.t_length);
    }
    Eigen::MatrixXd cov = separable_covariance(*x, *t, kernel);
    switch (kind) {
    case ModelKind::Gaussian:
        return std::make_shared<RandomFieldModel>(RandomFieldModel::gaussian(x, t, std::move(cov)));
    case ModelKind::SymmetrizedUniform:
        return std::make_shared<RandomFieldModel>(RandomFieldModel::symmetrized_uniform(x, t, std::move(cov)));
    case ModelKind::HeavyTailT:
        return std::make_shared<RandomFieldModel>(
            RandomFieldModel::heavy_tail_t(x, t, std::move(cov), j.at("dof").get<double>()));
    case ModelKind::MartingaleDifference:
        return std::make_shared<RandomFieldModel>(RandomFieldModel::martingale_difference(
            x, t, std::move(cov), j.value("s_lo", 0.5), j.value("s_hi", 1.5)));
    case ModelKind::MixingaleAr:
        return std::make_shared<RandomFieldModel>(
            RandomFieldModel::mixingale_ar(x, t, std::move(cov), j.at("ar").get<double>()));
    }
    throw ValidationError("unhandled model kind");
}

json report_header(const ExperimentSpec& spec, const std::string& kind) {
    json j;
    j["schema_version"] = kSchemaVersion;
    j["library_version"] = library_version();
    j["spec_sha256"] = sha256_hex(spec.canonical);
    j["experiment"] = spec.name;
    j["seed"] = spec.root_seed;
    j["kind"] = kind;
    return j;
}

json matrix_json(const Eigen::MatrixXd& m) {
    json rows = json::array();
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        json row = json::array();
        for (Eigen::Index k = 0; k < m.cols(); ++k) {
            row.push_back(m(i, k));
        }
        rows.push_back(row);
    }
    return rows;
}

json bound_json(const MomentBoundReport& r) {
    json j;
    j["kind"] = to_string(r.kind);
    j["p"] = r.p;
    j["Q"] = r.Q;
    j["sigma_bar"] = r.sigma_bar;
    j["sigma_hat"] = r.sigma_hat;
    j["theta_star"] = r.theta_star;
    j["nu_power"] = r.nu_power;
    j["nu"] = r.nu;
    j["distance"] = matrix_json(r.distance);
    if (r.alpha_star.size() > 0) {
        j["alpha_star"] = matrix_json(r.alpha_star);
    }
    j["profile"] = {{"eps", r.profile.eps_grid}, {"cover_upper", r.profile.cover_upper},
                    {"cardinality", r.profile.cardinality}, {"floor_count", r.profile.floor_count}};
    j["series"] = {{"theta", r.series.theta},
                   {"partial_terms", r.series.partial_terms},
                   {"tail_bound", r.series.tail_bound},
                   {"total", r.series.total},
                   {"sigma_factor", r.series.sigma_factor}};
    return j;
}

// Everything the bound, simulate and validate stages share.
struct BoundSet {
    MomentBoundReport prop21;
    MomentBoundReport thm32;
    std::vector<double> q_used;
    std::vector<double> psi_power;  // psi_p^p(Q) per q_used
    std::vector<double> nu_power;   // nu_p^p(Q) per q_used
    std::vector<json> q_rows;
};

SumConstant sum_constant_for(const RandomFieldModel& model) {
    if (model.kind() == ModelKind::MixingaleAr) {
        return mixingale_sum_constant(model.mixing_sequence());
    }
    return rosenthal_sum_constant();
}

BoundSet compute_bounds(const ExperimentSpec& spec) {
    const RandomFieldModel& model = *spec.model;
    const auto oracle = model.moment_oracle(spec.replicates.oracle_bank, spec.root_seed);
    const DbarForm form = spec.literal_26_form ? DbarForm::Literal : DbarForm::Derived;
    const SumConstant k = sum_constant_for(model);
    BoundSet b;
    b.prop21 = prop21_bound(*oracle, spec.p, spec.Q, *spec.x_space, form);
    b.thm32 = thm32_bound(*oracle, spec.p, spec.Q, *spec.x_space, spec.alpha_grid, k);
    for (double q : spec.q_grid) {
        if (spec.p * q >= model.moment_limit()) {
            continue;
        }
        const MomentBoundReport a = prop21_bound(*oracle, spec.p, q, *spec.x_space, form);
        const MomentBoundReport c = thm32_bound(*oracle, spec.p, q, *spec.x_space, spec.alpha_grid, k);
        b.q_used.push_back(q);
        b.psi_power.push_back(a.nu_power);
        b.nu_power.push_back(c.nu_power);
        b.q_rows.push_back({{"Q", q},
                            {"sigma_bar", a.sigma_bar},
                            {"theta_star", a.theta_star},
                            {"nu", a.nu},
                            {"bound", "prop21"}});
        b.q_rows.push_back({{"Q", q},
                            {"sigma_bar", c.sigma_bar},
                            {"theta_star", c.theta_star},
                            {"nu", c.nu},
                            {"bound", "thm32"}});
    }
    return b;
}

class Stager {
public:
    Stager(fs::path out, std::string name) : out_(std::move(out)), name_(std::move(name)) {}

    fs::path staging() const { return out_ / (".staging-" + name_); }

    fs::path file(const std::string& suffix) {
        fs::create_directories(staging());
        const fs::path p = staging() / (name_ + "_" + suffix);
        files_.push_back(p.filename());
        return p;
    }

    std::vector<fs::path> commit() {
        std::vector<fs::path> done;
        for (const auto& f : files_) {
            const fs::path dst = out_ / f;
            fs::rename(staging() / f, dst);
            done.push_back(dst);
        }
        fs::remove_all(staging());
        return done;
    }

    void quarantine(const std::string& error) {
        const fs::path q = out_ / "quarantine";
        fs::create_directories(q);
        for (const auto& f : files_) {
            if (fs::exists(staging() / f)) {
                fs::rename(staging() / f, q / f);
            }
        }
        write_file(q / (name_ + "_error.txt"), error + "\n");
        fs::remove_all(staging());
    }

private:
    fs::path out_;
    std::string name_;
    std::vector<fs::path> files_;
};

std::string csv_line(const std::vector<std::string>& cells) {
    return join(cells, ",") + "\n";
}

void stage_norms(const ExperimentSpec& spec, Stager& st) {
    std::string source = "sample";
    std::unique_ptr<Field> field;
    if (spec.field_csv) {
        Eigen::MatrixXd m = read_csv_matrix(*spec.field_csv);
        field = std::make_unique<Field>(std::move(m), spec.x_space, spec.t_space);
        source = "csv";
    } else {
        field = std::make_unique<Field>(sample_field(*spec.model, spec.root_seed));
    }
    const Field& f = *field;
    const double p = spec.p;
    json j = report_header(spec, "norms");
    j["source"] = source;
    j["p"] = p;
    json rows = json::array();
    auto add = [&](const std::string& q, double v) { rows.push_back({{"quantity", q}, {"value", v}}); };
    add("mixed_p_x_p_t", mixed_norm(f, NormSpec({Axis::X, Exponent(p)}, {Axis::T, Exponent(p)})));
    add("cl_norm", cl_norm(f, p));
    add("lc_norm", lc_norm(f, p));
    add("mixed_p_t_p_x", mixed_norm(f, NormSpec({Axis::T, Exponent(p)}, {Axis::X, Exponent(p)})));
    for (double eps : spec.eps_grid) {
        add("cl_modulus@" + fmt17(eps), cl_modulus(f, p, eps));
        add("lc_modulus@" + fmt17(eps), lc_modulus(f, p, eps));
    }
    j["rows"] = rows;
    write_file(st.file("norms.json"), j.dump(2) + "\n");
}

void stage_entropy(const ExperimentSpec& spec, Stager& st) {
    const std::vector<double> grid = spec.eps_grid.empty() ? geometric_grid(1.0, 0.5, 12) : spec.eps_grid;
    const EntropyProfile prof = entropy_profile(*spec.t_space, grid);
    std::string csv = csv_line({"eps", "cover_upper", "pack_lower", "H"});
    json j = report_header(spec, "entropy");
    json rows = json::array();
    for (std::size_t i = 0; i < grid.size(); ++i) {
        const double h = std::log(prof.cover_upper[i]);
        csv += csv_line({fmt17(grid[i]), fmt17(prof.cover_upper[i]), fmt17(prof.pack_lower[i]), fmt17(h)});
        rows.push_back({{"eps", grid[i]}, {"cover_upper", prof.cover_upper[i]}, {"pack_lower", prof.pack_lower[i]},
                        {"H", h}});
    }
    j["rows"] = rows;
    try {
        const EntropyFit fit = entropy_dimension_fit(prof);
        j["fit"] = {{"kappa", fit.kappa}, {"prefactor", fit.prefactor}, {"residual", fit.residual},
                    {"used_points", fit.used_points}};
    } catch (const ValidationError& e) {
        j["fit"] = {{"error", e.what()}};
    }
    write_file(st.file("entropy.csv"), csv);
    write_file(st.file("entropy.json"), j.dump(2) + "\n");
}

json tail_rows(const BoundSet& b, const std::vector<double>& z_grid, const std::vector<TailEstimate>* emp) {
    json rows = json::array();
    if (b.q_used.empty()) {
        return rows;
    }
    const PowerGrowthFit fit = fit_power_growth(b.q_used, b.psi_power);
    for (std::size_t i = 0; i < z_grid.size(); ++i) {
        const double z = z_grid[i];
        json r = {{"z", z},
                  {"legendre", legendre_tail(b.q_used, b.psi_power, z)},
                  {"example21", example21_tail_on_grid(fit, b.q_used, z)}};
        r["theoretical"] = std::min(r["legendre"].get<double>(), r["example21"].get<double>());
        if (emp) {
            r["empirical"] = (*emp)[i].survival;
            r["cp_upper"] = (*emp)[i].cp_upper;
        }
        rows.push_back(r);
    }
    return rows;
}

void stage_bound(const ExperimentSpec& spec, Stager& st, const BoundSet& b) {
    json j = report_header(spec, "bound");
    j["p"] = spec.p;
    j["Q"] = spec.Q;
    j["model"] = to_string(spec.model->kind());
    j["dbar_form"] = spec.literal_26_form ? "literal" : "derived";
    j["prop21"] = bound_json(b.prop21);
    j["thm32"] = bound_json(b.thm32);
    j["rows"] = b.q_rows;
    if (!b.q_used.empty()) {
        const PowerGrowthFit fit = fit_power_growth(b.q_used, b.psi_power);
        j["power_growth"] = {{"c1", fit.c1}, {"m", fit.m}, {"residual", fit.residual}, {"poor_fit", fit.poor_fit}};
    }
    write_file(st.file("bound.json"), j.dump(2) + "\n");

    std::string csv = csv_line({"z", "legendre", "example21"});
    for (const auto& r : tail_rows(b, spec.z_grid, nullptr)) {
        csv += csv_line({fmt17(r["z"].get<double>()), fmt17(r["legendre"].get<double>()),
                         fmt17(r["example21"].get<double>())});
    }
    write_file(st.file("bound_tail.csv"), csv);
}

std::vector<DominationRow> ladder_domination(const ExperimentSpec& spec, const BoundSet& b, std::size_t jobs,
                                             double* slack_out) {
    const RandomFieldModel& model = *spec.model;
    const double pq = spec.p * spec.Q;
    const auto moments = ladder_moments(model, spec.n_ladder, {{cl_norm_functional(spec.p), pq}},
                                        spec.replicates.moments, spec.root_seed, {jobs, {}});
    const bool martingale = model.kind() == ModelKind::MartingaleDifference;
    double slack = 0.0;
    std::vector<DominationRow> rows;
    for (std::size_t i = 0; i < spec.n_ladder.size(); ++i) {
        const EmpiricalMoments& m = moments[i][0];
        DominationRow r;
        r.model = to_string(model.kind());
        r.check = "thm32";
        r.n = spec.n_ladder[i];
        r.p = spec.p;
        r.Q = spec.Q;
        r.estimate = m.norm_estimate();
        r.ci_lo = m.norm_lo();
        r.ci_hi = m.norm_hi();
        r.bound = b.thm32.nu;
        slack = std::max(slack, r.ci_hi / r.bound);
        r.dominated = r.ci_hi <= (martingale ? spec.martingale_slack : 1.0) * r.bound;
        rows.push_back(r);
        if (spec.n_ladder[i] == 1) {
            DominationRow a = r;
            a.check = "prop21";
            a.bound = b.prop21.nu;
            a.dominated = a.ci_hi <= a.bound;
            rows.push_back(a);
        }
    }
    if (slack_out) {
        *slack_out = slack;
    }
    return rows;
}

std::string domination_csv(const std::vector<DominationRow>& rows) {
    std::string csv = csv_line({"n", "functional", "estimate", "ci_lo", "ci_hi", "bound", "dominated"});
    for (const auto& r : rows) {
        csv += csv_line({std::to_string(r.n), r.check, fmt17(r.estimate), fmt17(r.ci_lo), fmt17(r.ci_hi),
                         fmt17(r.bound), r.dominated ? "true" : "false"});
    }
    return csv;
}

json domination_json(const std::vector<DominationRow>& rows) {
    json a = json::array();
    for (const auto& r : rows) {
        a.push_back({{"model", r.model},
                     {"check", r.check},
                     {"n", r.n},
                     {"p", r.p},
                     {"Q", r.Q},
                     {"estimate", r.estimate},
                     {"ci_lo", r.ci_lo},
                     {"ci_hi", r.ci_hi},
                     {"bound", r.bound},
                     {"dominated", r.dominated}});
    }
    return a;
}

void stage_simulate(const ExperimentSpec& spec, Stager& st, const BoundSet& b, std::size_t jobs) {
    double slack = 0.0;
    const auto rows = ladder_domination(spec, b, jobs, &slack);
    write_file(st.file("simulate.csv"), domination_csv(rows));
    json j = report_header(spec, "simulate");
    j["rows"] = domination_json(rows);
    j["slack"] = slack;
    write_file(st.file("simulate.json"), j.dump(2) + "\n");
}

bool stage_validate(const ExperimentSpec& spec, Stager& st, const BoundSet& b, std::size_t jobs) {
    double slack = 0.0;
    std::vector<DominationRow> rows = ladder_domination(spec, b, jobs, &slack);

    const Prop41Estimate e41 =
        prop41_expectation(*spec.model, spec.p, spec.Q, spec.replicates.prop41, spec.root_seed, {jobs, {}});
    DominationRow r41;
    r41.model = to_string(spec.model->kind());
    r41.check = "prop41";
    r41.n = 1;
    r41.p = spec.p;
    r41.Q = spec.Q;
    r41.estimate = e41.lhs;
    r41.ci_lo = e41.lhs_lo;
    r41.ci_hi = e41.lhs_hi;
    r41.bound = e41.bound_lo;
    r41.dominated = e41.dominated;
    rows.push_back(r41);

    json tail = report_header(spec, "tail");
    bool tails_ok = true;
    if (!spec.z_grid.empty() && !b.q_used.empty()) {
        const auto emp = empirical_tail(*spec.model, 1, zeta_functional(spec.p), spec.z_grid,
                                        spec.replicates.tail, spec.root_seed, {jobs, {}});
        tail["rows"] = tail_rows(b, spec.z_grid, &emp);
        for (const auto& r : tail["rows"]) {
            const double cp = r["cp_upper"].get<double>();
            const bool ok = cp <= r["legendre"].get<double>() && cp <= r["example21"].get<double>();
            tails_ok = tails_ok && ok;
            DominationRow d;
            d.model = to_string(spec.model->kind());
            d.check = "tail@" + fmt17(r["z"].get<double>());
            d.p = spec.p;
            d.Q = spec.Q;
            d.estimate = r["empirical"].get<double>();
            d.ci_lo = d.estimate;
            d.ci_hi = cp;
            d.bound = r["theoretical"].get<double>();
            d.dominated = ok;
            rows.push_back(d);
        }
    } else {
        tail["rows"] = json::array();
    }
    write_file(st.file("tail.json"), tail.dump(2) + "\n");

    bool all = tails_ok;
    for (const auto& r : rows) {
        all = all && r.dominated;
    }
    json j = report_header(spec, "validate");
    j["rows"] = domination_json(rows);
    j["slack"] = slack;
    j["verdict"] = all ? "pass" : "fail";
    write_file(st.file("validate.json"), j.dump(2) + "\n");
    write_file(st.file("validate.csv"), domination_csv(rows));
    return all;
}

std::vector<double> numbers(const json& j, const std::string& key, std::vector<double> fallback) {
    return j.contains(key) ? j.at(key).get<std::vector<double>>() : std::move(fallback);
}

} // namespace

std::string library_version() {
#ifdef HLC_VERSION
    return HLC_VERSION;
#else
    return "unknown";
#endif
}

SpecError::SpecError(std::vector<std::string> problems)
    : std::invalid_argument("invalid experiment spec:\n  " + join(problems, "\n  ")), problems_(std::move(problems)) {}

std::string sha256_hex(const std::string& data) {
    unsigned char digest[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    if (EVP_Digest(data.data(), data.size(), digest, &len, EVP_sha256(), nullptr) != 1) {
        throw std::runtime_error("SHA-256 failed");
    }
    static const char* hex = "0123456789abcdef";
    std::string out;
    for (unsigned int i = 0; i < len; ++i) {
        out += hex[digest[i] >> 4];
        out += hex[digest[i] & 15];
    }
    return out;
}

ExperimentSpec parse_experiment_spec(const std::string& json_text, const fs::path& base_dir) {
    json j;
    try {
        j = json::parse(json_text);
    } catch (const json::parse_error& e) {
        throw SpecError({std::string("malformed JSON: ") + e.what()});
    }
    if (!j.is_object()) {
        throw SpecError({"spec must be a JSON object"});
    }
    ExperimentSpec s;
    s.base_dir = base_dir;
    s.canonical = j.dump();
    Problems pr;

    pr.check("name", [&] { s.name = j.value("name", std::string("experiment")); });
    if (!j.contains("seed")) {
        pr.add("seed: required (no default seed is derived from the clock)");
    } else {
        pr.check("seed", [&] { s.root_seed = j.at("seed").get<std::uint64_t>(); });
    }
    pr.check("stages", [&] {
        s.stages = j.value("stages", std::vector<std::string>{});
        for (const auto& st : s.stages) {
            if (!kStages.count(st)) {
                throw ValidationError("unknown stage '" + st + "'");
            }
        }
    });
    pr.check("x_space", [&] { s.x_space = parse_x_space(j.at("x_space"), base_dir); });
    pr.check("t_space", [&] { s.t_space = parse_t_space(j.at("t_space"), base_dir); });
    if (s.x_space && s.t_space) {
        pr.check("model", [&] { s.model = parse_model(j.at("model"), s.x_space, s.t_space); });
    }
    pr.check("p", [&] {
        s.p = j.value("p", 2.0);
        if (!(s.p >= 2.0)) {
            throw ValidationError("must be >= 2");
        }
    });
    pr.check("Q", [&] {
        s.Q = j.value("Q", 1.0);
        if (!(s.Q >= 1.0)) {
            throw ValidationError("must be >= 1");
        }
    });
    pr.check("q_grid", [&] {
        s.q_grid = numbers(j, "q_grid", {1.0, 1.5, 2.0, 3.0, 4.0, 6.0, 8.0});
        if (s.q_grid.empty()) {
            throw ValidationError("must be non-empty");
        }
        for (double q : s.q_grid) {
            if (!(q >= 1.0)) {
                throw ValidationError("values must be >= 1");
            }
        }
    });
    pr.check("z_grid", [&] {
        s.z_grid = numbers(j, "z_grid", {});
        for (double z : s.z_grid) {
            if (!(z > 1.0)) {
                throw ValidationError("values must exceed 1");
            }
        }
    });
    pr.check("n_ladder", [&] {
        s.n_ladder = j.value("n_ladder", std::vector<std::size_t>{1, 2, 4, 8, 16, 32, 64});
        if (s.n_ladder.empty()) {
            throw ValidationError("must be non-empty");
        }
        for (std::size_t i = 0; i < s.n_ladder.size(); ++i) {
            if (s.n_ladder[i] == 0 || (i > 0 && s.n_ladder[i] <= s.n_ladder[i - 1])) {
                throw ValidationError("must be strictly increasing from 1");
            }
        }
    });
    pr.check("alpha_grid", [&] {
        s.alpha_grid = numbers(j, "alpha_grid", default_alpha_grid());
        if (s.alpha_grid.empty()) {
            throw ValidationError("must be non-empty");
        }
        for (double a : s.alpha_grid) {
            if (!(a > 1.0)) {
                throw ValidationError("values must exceed 1");
            }
        }
    });
    pr.check("eps_grid", [&] {
        s.eps_grid = numbers(j, "eps_grid", {});
        for (double e : s.eps_grid) {
            if (!(e > 0.0)) {
                throw ValidationError("values must be positive");
            }
        }
    });
    pr.check("replicates", [&] {
        if (!j.contains("replicates")) {
            return;
        }
        const json& r = j.at("replicates");
        s.replicates.moments = r.value("moments", s.replicates.moments);
        s.replicates.tail = r.value("tail", s.replicates.tail);
        s.replicates.clt = r.value("clt", s.replicates.clt);
        s.replicates.prop41 = r.value("prop41", s.replicates.prop41);
        s.replicates.oracle_bank = r.value("oracle_bank", s.replicates.oracle_bank);
        if (s.replicates.moments < 100 || s.replicates.prop41 < 100) {
            throw ValidationError("moments and prop41 need at least 100 replicates");
        }
        if (s.replicates.tail < 1000 || s.replicates.clt < 1000) {
            throw ValidationError("tail and clt need at least 1000 replicates");
        }
    });
    pr.check("field_csv", [&] {
        if (j.contains("field_csv")) {
            const fs::path p = resolve(base_dir, j.at("field_csv").get<std::string>());
            if (!fs::exists(p)) {
                throw ValidationError("referenced file does not exist: " + p.string());
            }
            s.field_csv = p;
        }
    });
    pr.check("output", [&] {
        if (j.contains("output")) {
            s.out_dir = j.at("output").value("dir", std::string("out"));
        }
    });
    pr.check("flags", [&] {
        if (j.contains("flags")) {
            s.literal_26_form = j.at("flags").value("literal_26_form", false);
            s.martingale_slack = j.at("flags").value("martingale_slack", 2.0);
            if (!(s.martingale_slack >= 1.0)) {
                throw ValidationError("martingale_slack must be >= 1");
            }
        }
    });
    if (s.model && s.p * s.Q >= s.model->moment_limit()) {
        pr.add("model: moment of order pQ = " + fmt17(s.p * s.Q) + " does not exist for this law");
    }
    if (!pr.list.empty()) {
        throw SpecError(pr.list);
    }
    return s;
}

ExperimentSpec load_experiment_spec(const fs::path& path) {
    if (!fs::exists(path)) {
        throw SpecError({"spec file does not exist: " + path.string()});
    }
    return parse_experiment_spec(read_file(path), path.parent_path().empty() ? fs::path(".") : path.parent_path());
}

void override_seed(ExperimentSpec& spec, std::uint64_t seed) {
    json j = json::parse(spec.canonical);
    j["seed"] = seed;
    spec.canonical = j.dump();
    spec.root_seed = seed;
}

Eigen::MatrixXd read_csv_matrix(const fs::path& path) {
    std::istringstream in(read_file(path));
    std::vector<std::vector<double>> rows;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.find_first_not_of(" \t\r") == std::string::npos) {
            continue;
        }
        std::vector<double> row;
        std::istringstream ls(line);
        std::string cell;
        while (std::getline(ls, cell, ',')) {
            try {
                std::size_t used = 0;
                row.push_back(std::stod(cell, &used));
                if (cell.find_first_not_of(" \t\r", used) != std::string::npos) {
                    throw std::invalid_argument(cell);
                }
            } catch (const std::exception&) {
                throw ValidationError(path.string() + ":" + std::to_string(lineno) + ": not a number: '" + cell + "'");
            }
        }
        if (!rows.empty() && row.size() != rows.front().size()) {
            throw ValidationError(path.string() + ":" + std::to_string(lineno) + ": ragged row");
        }
        rows.push_back(std::move(row));
    }
    if (rows.empty()) {
        throw ValidationError(path.string() + ": empty matrix");
    }
    Eigen::MatrixXd m(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(rows.front().size()));
    for (std::size_t i = 0; i < rows.size(); ++i) {
        for (std::size_t k = 0; k < rows[i].size(); ++k) {
            m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) = rows[i][k];
        }
    }
    return m;
}

RunResult run_experiment(const ExperimentSpec& spec, const RunOptions& options) {
    RunResult res;
    const std::vector<std::string> stages = options.stages ? *options.stages : spec.stages;
    for (const auto& st : stages) {
        if (!kStages.count(st)) {
            throw SpecError({"unknown stage '" + st + "'"});
        }
    }
    if (stages.empty()) {
        return res;
    }
    const fs::path out = options.out_dir ? *options.out_dir : spec.out_dir;
    fs::create_directories(out);
    Stager st(out, spec.name);
    bool ok = true;
    try {
        std::optional<BoundSet> bounds;
        auto need_bounds = [&]() -> const BoundSet& {
            if (!bounds) {
                bounds = compute_bounds(spec);
            }
            return *bounds;
        };
        for (const auto& stage : stages) {
            if (stage == "norms") {
                stage_norms(spec, st);
            } else if (stage == "entropy") {
                stage_entropy(spec, st);
            } else if (stage == "bound") {
                stage_bound(spec, st, need_bounds());
            } else if (stage == "simulate") {
                stage_simulate(spec, st, need_bounds(), options.jobs);
            } else if (stage == "validate") {
                const bool pass = stage_validate(spec, st, need_bounds(), options.jobs);
                res.messages.push_back(std::string("validate: ") + (pass ? "pass" : "fail"));
                ok = ok && pass;
            }
        }
    } catch (const std::exception& e) {
        st.quarantine(e.what());
        res.exit_code = 2;
        res.messages.push_back(std::string("error: ") + e.what() + " (partial outputs in " +
                               (out / "quarantine").string() + ")");
        return res;
    }
    res.outputs = st.commit();
    res.exit_code = ok ? 0 : 1;
    return res;
}

std::string render_report(const std::string& report_json) {
    json j;
    try {
        j = json::parse(report_json);
    } catch (const json::parse_error& e) {
        throw std::runtime_error(std::string("report is not JSON: ") + e.what());
    }
    if (!j.is_object() || !j.contains("kind") || !j.contains("schema_version")) {
        throw std::runtime_error("schema mismatch: report needs 'kind' and 'schema_version'");
    }
    if (j.at("schema_version").get<int>() != kSchemaVersion) {
        throw std::runtime_error("schema mismatch: unsupported schema_version " + j.at("schema_version").dump());
    }
    const std::string kind = j.at("kind").get<std::string>();
    std::vector<std::string> cols;
    if (kind == "bound") {
        cols = {"Q", "sigma_bar", "theta_star", "nu", "bound"};
    } else if (kind == "tail") {
        cols = {"z", "theoretical", "empirical", "cp_upper"};
    } else if (kind == "simulate" || kind == "validate") {
        cols = {"n", "check", "estimate", "ci_lo", "ci_hi", "bound", "dominated"};
    } else if (kind == "entropy") {
        cols = {"eps", "cover_upper", "pack_lower", "H"};
    } else if (kind == "norms") {
        cols = {"quantity", "value"};
    } else {
        throw std::runtime_error("schema mismatch: unknown report kind '" + kind + "'");
    }
    std::string csv = csv_line(cols);
    const json rows = j.value("rows", json::array());
    for (const auto& r : rows) {
        std::vector<std::string> cells;
        for (const auto& c : cols) {
            if (!r.contains(c)) {
                throw std::runtime_error("schema mismatch: row lacks column '" + c + "'");
            }
            const json& v = r.at(c);
            if (v.is_number_float()) {
                cells.push_back(fmt17(v.get<double>()));
            } else if (v.is_string()) {
                cells.push_back(v.get<std::string>());
            } else if (v.is_null()) {
                cells.push_back("inf");
            } else {
                cells.push_back(v.dump());
            }
        }
        csv += csv_line(cells);
    }
    return csv;
}

} // namespace hlc
