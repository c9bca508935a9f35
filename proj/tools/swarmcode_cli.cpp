// swarmcode: run, resume, validate and plot co-evolution experiments.
//
// Flags can also be set through SWARMCODE_<FLAG> environment variables
// (e.g. SWARMCODE_THREADS=4); an explicit flag always wins.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <omp.h>

#include "swarmcode/plot.hpp"
#include "swarmcode/runlog.hpp"
#include "swarmcode/scenario.hpp"

namespace fs = std::filesystem;
using namespace swarmcode;

namespace {

constexpr int kExitRuntime = 1;
constexpr int kExitConfig = 2;

struct Overrides {
    std::optional<std::uint64_t> seed;
    std::optional<int> generations;
    std::string objective;
    std::vector<std::string> budgets;
};

// A bare name resolves against the bundled scenario directory.
fs::path resolve_scenario(const std::string& arg)
{
    fs::path p(arg);
    if (fs::exists(p))
        return p;
    fs::path bundled = fs::path(SWARMCODE_SCENARIO_DIR) / arg;
    if (bundled.extension() != ".json")
        bundled += ".json";
    return fs::exists(bundled) ? bundled : p;
}

double parse_budget(const std::string& s)
{
    if (s == "inf" || s == "none")
        return std::numeric_limits<double>::infinity();
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used != s.size() || !(v > 0.0))
        throw ConfigError("--budget: expected a positive number or 'inf', got '" + s + "'");
    return v;
}

std::vector<double> parse_budgets(const std::vector<std::string>& raw)
{
    std::vector<double> out;
    for (const auto& item : raw) {
        std::stringstream ss(item);
        for (std::string tok; std::getline(ss, tok, ',');)
            if (!tok.empty())
                out.push_back(parse_budget(tok));
    }
    return out;
}

void apply_threads(int threads)
{
    if (threads > 0)
        omp_set_num_threads(threads);
}

void print_progress(const GenerationReport& r)
{
    std::fprintf(stderr, "gen %4d  species %2zu  best %9.3f  mean %9.3f  team species %d  cost %.0f  (%.2fs)\n",
                 r.generation, r.census.size(), r.best.fitness, r.mean_fitness, r.best.team.species_count,
                 r.best.team.cost, r.wall_seconds);
}

ScenarioConfig load_with_overrides(const std::string& scenario_arg, const Overrides& o)
{
    const fs::path path = resolve_scenario(scenario_arg);
    std::ifstream in(path);
    if (!in)
        throw ConfigError("cannot open scenario file " + path.string());
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
        throw ConfigError(path.string() + ": " + e.what());
    }
    std::vector<Diagnostic> diags;
    ScenarioConfig s = scenario_from_json(j, diags);
    if (o.seed)
        s.seed = *o.seed;
    if (o.generations)
        s.generations = *o.generations;
    if (!o.objective.empty())
        s.objective = o.objective == "roi" ? Objective::Roi : Objective::Fitness;
    if (!has_errors(diags)) {
        auto more = validate_scenario(s);
        diags.insert(diags.end(), more.begin(), more.end());
    }
    if (has_errors(diags))
        throw ConfigError(format_diagnostics(diags));
    if (!diags.empty())
        std::cerr << format_diagnostics(diags);
    return s;
}

}  // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Co-evolution of heterogeneous robot swarms"};
    app.require_subcommand(1);

    std::string scenario_arg, out_dir;
    Overrides ov;
    int threads = 0;
    bool quiet = false, trajectory = false;

    auto add_common = [&](CLI::App* cmd) {
        cmd->add_option("--threads", threads, "Worker threads (0 = OpenMP default)")
            ->envname("SWARMCODE_THREADS")
            ->check(CLI::NonNegativeNumber);
        cmd->add_flag("-q,--quiet", quiet, "No per-generation progress on stderr");
    };

    auto* run = app.add_subcommand("run", "Run an experiment (or a budget sweep)");
    run->add_option("--scenario", scenario_arg, "Scenario file or bundled scenario name")
        ->envname("SWARMCODE_SCENARIO")
        ->required();
    run->add_option("--out", out_dir, "Run directory")->envname("SWARMCODE_OUT")->required();
    run->add_option("--seed", ov.seed, "Master seed")->envname("SWARMCODE_SEED");
    run->add_option("--generations", ov.generations, "Number of generations")
        ->envname("SWARMCODE_GENERATIONS")
        ->check(CLI::NonNegativeNumber);
    run->add_option("--objective", ov.objective, "fitness or roi")
        ->envname("SWARMCODE_OBJECTIVE")
        ->check(CLI::IsMember({"fitness", "roi"}));
    run->add_option("--budget", ov.budgets, "Swarm budget; several values run a sweep")
        ->envname("SWARMCODE_BUDGET");
    run->add_flag("--trajectory", trajectory, "Dump a per-tick trajectory of the final best team");
    add_common(run);

    auto* resume = app.add_subcommand("resume", "Continue a run from its latest checkpoint");
    resume->add_option("--out", out_dir, "Run directory")->envname("SWARMCODE_OUT")->required();
    resume->add_option("--generations", ov.generations, "New generation target")
        ->envname("SWARMCODE_GENERATIONS")
        ->check(CLI::NonNegativeNumber);
    add_common(resume);

    auto* validate = app.add_subcommand("validate", "Check a scenario file");
    validate->add_option("--scenario", scenario_arg, "Scenario file or bundled scenario name")
        ->envname("SWARMCODE_SCENARIO")
        ->required();

    std::string kind = "all";
    std::string plot_dir;
    auto* plot_cmd = app.add_subcommand("plot", "Render plots from a run log");
    plot_cmd->add_option("--out", out_dir, "Run directory")->envname("SWARMCODE_OUT")->required();
    plot_cmd->add_option("--kind", kind, "species, team, fitness, traits or all")
        ->check(CLI::IsMember({"species", "team", "fitness", "traits", "all"}));
    plot_cmd->add_option("--plots", plot_dir, "Output directory (default <out>/plots)");

    CLI11_PARSE(app, argc, argv);

    try {
        if (*validate) {
            std::ifstream in(resolve_scenario(scenario_arg));
            if (!in) {
                std::cerr << "error: cannot open " << scenario_arg << "\n";
                return kExitConfig;
            }
            nlohmann::json j;
            try {
                j = nlohmann::json::parse(in);
            } catch (const nlohmann::json::parse_error& e) {
                std::cerr << "error: <root>: " << e.what() << "\n";
                return kExitConfig;
            }
            std::vector<Diagnostic> diags;
            const ScenarioConfig s = scenario_from_json(j, diags);
            if (!has_errors(diags)) {
                auto more = validate_scenario(s);
                diags.insert(diags.end(), more.begin(), more.end());
            }
            std::cout << format_diagnostics(diags);
            if (has_errors(diags))
                return kExitConfig;
            std::cout << "ok: " << s.name << "\n";
            return 0;
        }

        if (*plot_cmd) {
            std::vector<PlotKind> kinds;
            if (kind == "all")
                kinds = all_plot_kinds();
            else
                kinds.push_back(*parse_plot_kind(kind));
            for (auto k : kinds)
                for (const auto& p : plot(out_dir, k, plot_dir))
                    std::cout << p.string() << "\n";
            return 0;
        }

        apply_threads(threads);
        RunOptions opts;
        opts.out_dir = out_dir;
        opts.trajectory = trajectory;
        if (!quiet)
            opts.progress = print_progress;

        if (*resume) {
            resume_experiment(opts, ov.generations);
            return 0;
        }

        const ScenarioConfig s = load_with_overrides(scenario_arg, ov);
        const auto budgets = parse_budgets(ov.budgets);
        if (budgets.size() > 1) {
            run_budget_sweep(s, budgets, opts);
        } else {
            ScenarioConfig one = s;
            if (budgets.size() == 1)
                one.budget.budget = budgets.front();
            run_experiment(one, opts);
        }
        return 0;
    } catch (const ConfigError& e) {
        std::cerr << e.what();
        if (std::string(e.what()).back() != '\n')
            std::cerr << "\n";
        return kExitConfig;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitRuntime;
    }
}
