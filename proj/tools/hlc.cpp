#include "hlc/experiment.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <sstream>

namespace {

struct Common {
    std::string spec;
    std::string out;
    std::string field;
    std::uint64_t seed = 0;
    std::size_t jobs = 1;
    std::vector<std::string> stages;
};

void add_common(CLI::App* app, Common& c) {
    app->add_option("--spec", c.spec, "experiment spec (JSON)")->required()->check(CLI::ExistingFile);
    app->add_option("--out", c.out, "output directory (overrides the spec)");
    app->add_option("--seed", c.seed, "root seed (overrides the spec)");
    app->add_option("--jobs", c.jobs, "worker threads")->check(CLI::PositiveNumber);
}

int execute(const Common& c, const CLI::App* app, std::vector<std::string> stages) {
    hlc::ExperimentSpec spec = hlc::load_experiment_spec(c.spec);
    if (app->count("--seed") > 0) {
        hlc::override_seed(spec, c.seed);
    }
    if (!c.field.empty()) {
        spec.field_csv = c.field;
    }
    hlc::RunOptions opts;
    opts.jobs = c.jobs;
    opts.stages = std::move(stages);
    if (!c.out.empty()) {
        opts.out_dir = c.out;
    }
    const hlc::RunResult res = hlc::run_experiment(spec, opts);
    for (const auto& m : res.messages) {
        std::cerr << m << "\n";
    }
    for (const auto& f : res.outputs) {
        if (f.filename().string().ends_with("_norms.json")) {
            std::ifstream in(f);
            std::cout << in.rdbuf();
        } else {
            std::cout << f.string() << "\n";
        }
    }
    return res.exit_code;
}

std::vector<std::string> split_list(const std::vector<std::string>& items) {
    std::vector<std::string> out;
    for (const auto& item : items) {
        std::stringstream ss(item);
        std::string s;
        while (std::getline(ss, s, ',')) {
            if (!s.empty()) {
                out.push_back(s);
            }
        }
    }
    return out;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Entropy-series moment bounds for random fields in hybrid Lebesgue-continuous spaces"};
    app.require_subcommand(1);
    app.set_version_flag("--version", hlc::library_version());

    Common common;
    std::map<std::string, CLI::App*> stage_cmds;
    for (const char* name : {"norms", "entropy", "bound", "simulate", "validate"}) {
        CLI::App* sub = app.add_subcommand(name, std::string("run the ") + name + " stage");
        add_common(sub, common);
        if (std::string(name) == "norms") {
            sub->add_option("--field", common.field, "field CSV (rows = X, columns = T)")->check(CLI::ExistingFile);
        }
        stage_cmds[name] = sub;
    }
    CLI::App* run = app.add_subcommand("run", "run the stages listed in the spec or in --stage");
    add_common(run, common);
    run->add_option("--stage", common.stages, "comma-separated stage list")->delimiter(',');

    std::string report;
    std::string render_out;
    CLI::App* render = app.add_subcommand("render", "turn a report JSON into a plot-ready CSV");
    render->add_option("--report", report, "report JSON")->required()->check(CLI::ExistingFile);
    render->add_option("--out", render_out, "CSV file (stdout when omitted)");

    CLI11_PARSE(app, argc, argv);

    try {
        if (render->parsed()) {
            std::ifstream in(report, std::ios::binary);
            std::stringstream ss;
            ss << in.rdbuf();
            const std::string csv = hlc::render_report(ss.str());
            if (render_out.empty()) {
                std::cout << csv;
            } else {
                std::ofstream(render_out, std::ios::binary) << csv;
            }
            return 0;
        }
        if (run->parsed()) {
            if (run->count("--stage") > 0) {
                return execute(common, run, split_list(common.stages));
            }
            hlc::ExperimentSpec spec = hlc::load_experiment_spec(common.spec);
            return execute(common, run, spec.stages);
        }
        for (const auto& [name, sub] : stage_cmds) {
            if (sub->parsed()) {
                return execute(common, sub, {name});
            }
        }
    } catch (const hlc::SpecError& e) {
        std::cerr << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 0;
}
