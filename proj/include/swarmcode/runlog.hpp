#pragma once

#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "swarmcode/evolution.hpp"
#include "swarmcode/scenario.hpp"

namespace swarmcode {

inline constexpr const char* kToolVersion = "0.3.0";

// Run directory layout.
namespace runfiles {
inline constexpr const char* manifest = "manifest.json";
inline constexpr const char* generations = "generations.jsonl";
inline constexpr const char* timings = "timings.jsonl";
inline constexpr const char* checkpoint = "checkpoint.json";
inline constexpr const char* summary = "summary.csv";
inline constexpr const char* best_team = "best_team.json";
inline constexpr const char* traits = "traits.csv";
inline constexpr const char* trajectory = "trajectory.jsonl";
}  // namespace runfiles

class RunError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct RunOptions {
    std::filesystem::path out_dir;
    Parallelism mode = Parallelism::OpenMP;
    bool trajectory = false;  // replay the final best team once and dump every tick
    std::function<void(const GenerationReport&)> progress;
};

struct SummaryRow {
    double budget = 0.0;
    double best_fitness = 0.0;
    double team_cost = 0.0;
    double total_deliveries = 0.0;
    double individual_deliveries = 0.0;
    double collab_deliveries = 0.0;
    double avg_energy_used = 0.0;
    int num_species = 0;
};

inline constexpr const char* kSummaryHeader =
    "budget,best_fitness,team_cost,total_deliveries,individual_deliveries,collab_deliveries,"
    "avg_energy_used,num_species";

SummaryRow summary_row(double budget, const std::optional<BestTeam>& best);

void write_summary_csv(const std::filesystem::path& path, const std::vector<SummaryRow>& rows);
std::vector<SummaryRow> read_summary_csv(const std::filesystem::path& path);

struct RunResult {
    EvolutionState state;
    SummaryRow summary;
};

// Fresh run into options.out_dir (created if needed; existing run files are
// replaced). The master seed is scenario.seed.
RunResult run_experiment(const ScenarioConfig& scenario, const RunOptions& options);

// Continues the run in options.out_dir from its checkpoint. Log records past
// the checkpoint are discarded and regenerated. `generations` extends the
// target when given.
RunResult resume_experiment(const RunOptions& options, std::optional<int> generations = std::nullopt);

// One run per budget under out_dir/budget_<k>; out_dir/summary.csv gets one
// row per budget in the given order.
std::vector<SummaryRow> run_budget_sweep(const ScenarioConfig& scenario, const std::vector<double>& budgets,
                                         const RunOptions& options);

// Reads every generation record of a run directory. Throws RunError when the
// log is missing or malformed.
std::vector<nlohmann::json> read_generation_log(const std::filesystem::path& run_dir);

// Writes `content` to `path` via a temporary file and rename.
void write_file_atomic(const std::filesystem::path& path, const std::string& content);

}  // namespace swarmcode
