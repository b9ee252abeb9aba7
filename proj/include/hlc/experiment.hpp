#pragma once

#include "hlc/measure_grid.hpp"
#include "hlc/random_field.hpp"

#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace hlc {

inline constexpr int kSchemaVersion = 1;

std::string library_version();

/// Every problem found in a spec, reported together.
class SpecError : public std::invalid_argument {
public:
    explicit SpecError(std::vector<std::string> problems);
    const std::vector<std::string>& problems() const noexcept { return problems_; }

private:
    std::vector<std::string> problems_;
};

struct ReplicateCounts {
    std::size_t moments = 2000;
    std::size_t tail = 20000;
    std::size_t clt = 2000;
    std::size_t prop41 = 500;
    std::size_t oracle_bank = 50000;
};

struct ExperimentSpec {
    std::string name;
    std::filesystem::path base_dir;  // relative paths resolve here
    std::string canonical;           // canonical JSON text, hashed into reports
    std::uint64_t root_seed = 0;
    std::vector<std::string> stages;

    std::shared_ptr<const MeasureSpace> x_space;
    std::shared_ptr<const IndexSpace> t_space;
    std::shared_ptr<const RandomFieldModel> model;

    double p = 2.0;
    double Q = 1.0;
    std::vector<double> q_grid;
    std::vector<double> z_grid;
    std::vector<std::size_t> n_ladder;
    std::vector<double> alpha_grid;
    std::vector<double> eps_grid;
    ReplicateCounts replicates;
    std::optional<std::filesystem::path> field_csv;
    std::filesystem::path out_dir = "out";

    bool literal_26_form = false;
    double martingale_slack = 2.0;
};

/// Parses and validates; throws SpecError listing every problem.
ExperimentSpec parse_experiment_spec(const std::string& json_text, const std::filesystem::path& base_dir = ".");
ExperimentSpec load_experiment_spec(const std::filesystem::path& path);

/// Replaces the seed and refreshes the canonical text.
void override_seed(ExperimentSpec& spec, std::uint64_t seed);

std::string sha256_hex(const std::string& data);

struct RunOptions {
    std::size_t jobs = 1;
    std::optional<std::vector<std::string>> stages;  // overrides spec.stages
    std::optional<std::filesystem::path> out_dir;
};

struct RunResult {
    int exit_code = 0;
    std::vector<std::filesystem::path> outputs;
    std::vector<std::string> messages;
};

/**
 * Runs the requested stages in order. Outputs are staged and moved into the
 * output directory only when every stage succeeds; otherwise they land in
 * <out>/quarantine together with <name>_error.txt and the exit code is 2.
 * `validate` failing a domination check gives exit code 1.
 */
RunResult run_experiment(const ExperimentSpec& spec, const RunOptions& options = {});

/// Reads a Field as a CSV matrix (rows = X, columns = T).
Eigen::MatrixXd read_csv_matrix(const std::filesystem::path& path);

/// Plot-ready CSV from a report JSON; throws std::runtime_error on schema mismatch.
std::string render_report(const std::string& report_json);

} // namespace hlc
