#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <json.hpp>

#include "fkup/energies.hpp"
#include "fkup/functions.hpp"
#include "fkup/potential.hpp"

namespace fkup {

// Config problems (malformed JSON, bad fields, wrong grid shape) -> exit 1.
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
// Failures while running a well-formed experiment -> exit 2.
struct ExperimentError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct ExperimentConfig {
    std::string experiment;
    PairPotentialSpec potential;
    double window_halfwidth = 20.0;
    // Entries are delta values, or (epsilon, delta) pairs for two-scale runs.
    std::vector<std::pair<double, std::optional<double>>> parameter_grid;
    BoundaryData boundary{0, 1};
    std::string output_dir = ".";
    std::uint64_t seed = 0;
    std::optional<StepFunction> target; // required by the recovery experiment
    nlohmann::json raw;                 // parsed config, kept for hashing
};

// Strict parse: unknown keys are config errors. `experiment_from_cli` fills or
// must match the config's own experiment field.
ExperimentConfig experiment_config_from_json(const nlohmann::json& j,
                                             const std::string& experiment_from_cli);

struct SweepRow {
    double param1 = 0.0;
    std::optional<double> param2;
    std::optional<double> energy;
    std::optional<double> target;
    std::optional<double> rel_err;
    std::optional<int> wall_count;
    std::optional<bool> converged;
    nlohmann::json diagnostics = nlohmann::json::object();
};

struct SweepResult {
    std::string experiment;
    std::vector<SweepRow> rows;
    std::optional<double> fitted_order;
    bool passed = true;
    nlohmann::json notes = nlohmann::json::object();
};

std::uint64_t fnv1a64(std::string_view s);
nlohmann::json provenance_json(const ExperimentConfig& cfg);

// Experiment drivers. `sample_dir`, when nonempty, receives x,value CSVs of
// the functions each row produced. `jobs` bounds parallel row evaluation.
SweepResult run_validate_potential(const ExperimentConfig& cfg);
SweepResult run_profile(const ExperimentConfig& cfg, const std::string& sample_dir = "");
SweepResult run_minimize(const ExperimentConfig& cfg, int jobs = 1,
                         const std::string& sample_dir = "");
SweepResult run_gap_order(const ExperimentConfig& cfg);
// Override hook for the degenerate-profile branch: the gap experiment normally
// uses the reference transition as its fixed test profile.
SweepResult run_gap_order(const ExperimentConfig& cfg,
                          const std::function<double(double)>& test_profile);
SweepResult run_sweep_delta(const ExperimentConfig& cfg, int jobs = 1,
                            const std::string& sample_dir = "");
SweepResult run_sweep_epsilon(const ExperimentConfig& cfg, int jobs = 1,
                              const std::string& sample_dir = "");
SweepResult run_recovery(const ExperimentConfig& cfg, const std::string& sample_dir = "");

// Dispatch on cfg.experiment.
SweepResult run_experiment(const ExperimentConfig& cfg, int jobs = 1,
                           const std::string& sample_dir = "");

// Fixed schema: param1,param2,energy,target,rel_err,wall_count,converged.
// One header row, LF endings, %.12g numbers, empty cells for missing fields.
void write_results_csv(const SweepResult& r, std::ostream& os);
nlohmann::json summary_json(const SweepResult& r, const ExperimentConfig& cfg);

int cli_main(int argc, char** argv);

} // namespace fkup
