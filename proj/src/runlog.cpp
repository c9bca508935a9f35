#include "swarmcode/runlog.hpp"

#include <fstream>
#include <sstream>

#include "swarmcode/serialize.hpp"

namespace swarmcode {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string format_number(double x)
{
    if (std::isinf(x))
        return x > 0 ? "inf" : "-inf";
    return json(x).dump();
}

double parse_number(const std::string& s)
{
    if (s == "inf")
        return std::numeric_limits<double>::infinity();
    if (s == "-inf")
        return -std::numeric_limits<double>::infinity();
    return json::parse(s).get<double>();
}

json manifest_json(const ScenarioConfig& s)
{
    return {{"tool", "swarmcode"},
            {"version", kToolVersion},
            {"master_seed", s.seed},
            {"generations", s.generations},
            {"scenario", scenario_to_json(s)}};
}

ScenarioConfig scenario_from_manifest(const fs::path& dir)
{
    std::ifstream in(dir / runfiles::manifest);
    if (!in)
        throw RunError("no manifest in " + dir.string());
    const json m = json::parse(in);
    std::vector<Diagnostic> diags;
    ScenarioConfig s = scenario_from_json(m.at("scenario"), diags);
    if (has_errors(diags))
        throw RunError("manifest scenario is invalid:\n" + format_diagnostics(diags));
    return s;
}

std::string read_text(const fs::path& p)
{
    std::ifstream in(p, std::ios::binary);
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

// Keeps only the lines whose "generation" field is <= last.
void truncate_log(const fs::path& p, int last)
{
    if (!fs::exists(p))
        return;
    std::istringstream in(read_text(p));
    std::string line, kept;
    while (std::getline(in, line)) {
        if (line.empty())
            continue;
        json j;
        try {
            j = json::parse(line);
        } catch (const json::parse_error&) {
            break;  // torn final line
        }
        if (j.at("generation").get<int>() > last)
            break;
        kept += line + "\n";
    }
    write_file_atomic(p, kept);
}

void write_traits_csv(const fs::path& p, const GenerationReport* last)
{
    std::ostringstream os;
    os << "generation,species,size,radius,chassis_tier,battery_tier,motor_tier,pincher_fraction,"
          "torque_setpoint,battery_setpoint,selectivity,dominance,mean_fitness\n";
    if (last) {
        for (const auto& [id, t] : last->traits)
            os << last->generation << ',' << id << ',' << t.size << ',' << format_number(t.radius) << ','
               << format_number(t.chassis_tier) << ',' << format_number(t.battery_tier) << ','
               << format_number(t.motor_tier) << ',' << format_number(t.pincher_fraction) << ','
               << format_number(t.torque_setpoint) << ',' << format_number(t.battery_setpoint) << ','
               << format_number(t.selectivity) << ',' << format_number(t.dominance) << ','
               << format_number(t.mean_fitness) << '\n';
    }
    write_file_atomic(p, os.str());
}

void write_trajectory(const fs::path& p, const ScenarioConfig& s, const BestTeam& best)
{
    std::ofstream out(p, std::ios::trunc);
    const auto robots = best.composition.robots();
    const std::uint64_t seed =
        derive_seed({s.seed, static_cast<std::uint64_t>(s.generations), best.genome_id, 0});
    run_trial(s.arena, s.packages, s.physics, robots, seed,
              [&](const World& w) { out << world_snapshot(w).dump() << '\n'; });
}

RunResult continue_run(const ScenarioConfig& s, EvolutionState state, const RunOptions& o)
{
    const fs::path& dir = o.out_dir;
    std::ofstream log(dir / runfiles::generations, std::ios::app | std::ios::binary);
    std::ofstream timings(dir / runfiles::timings, std::ios::app | std::ios::binary);
    if (!log || !timings)
        throw RunError("cannot open log files in " + dir.string());

    std::optional<GenerationReport> last;
    while (state.generation < s.generations) {
        GenerationReport r = step_generation(state, s, s.seed, o.mode);
        log << report_to_json(r).dump() << '\n';
        log.flush();
        timings << json{{"generation", r.generation}, {"wall_seconds", r.wall_seconds}}.dump() << '\n';
        timings.flush();
        if (state.generation % s.checkpoint_interval == 0 || state.generation == s.generations)
            write_file_atomic(dir / runfiles::checkpoint, state_to_json(state).dump());
        if (o.progress)
            o.progress(r);
        last = std::move(r);
    }

    RunResult result;
    result.summary = summary_row(s.budget.budget, state.best);
    write_summary_csv(dir / runfiles::summary, {result.summary});
    if (state.best)
        write_file_atomic(dir / runfiles::best_team, best_team_to_json(*state.best).dump(2));
    if (last)
        write_traits_csv(dir / runfiles::traits, &*last);
    if (o.trajectory && state.best)
        write_trajectory(dir / runfiles::trajectory, s, *state.best);
    result.state = std::move(state);
    return result;
}

}  // namespace

void write_file_atomic(const fs::path& path, const std::string& content)
{
    const fs::path tmp = path.string() + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out)
            throw RunError("cannot write " + tmp.string());
        out << content;
        if (!out.flush())
            throw RunError("write failed: " + tmp.string());
    }
    fs::rename(tmp, path);
}

SummaryRow summary_row(double budget, const std::optional<BestTeam>& best)
{
    SummaryRow r;
    r.budget = budget;
    if (!best)
        return r;
    r.best_fitness = best->fitness;
    r.team_cost = best->team.cost;
    r.total_deliveries = best->team.deliveries;
    r.individual_deliveries = best->team.individual_deliveries;
    r.collab_deliveries = best->team.collab_deliveries;
    r.avg_energy_used = best->team.energy_used_pct;
    r.num_species = best->team.species_count;
    return r;
}

void write_summary_csv(const fs::path& path, const std::vector<SummaryRow>& rows)
{
    std::ostringstream os;
    os << kSummaryHeader << '\n';
    for (const auto& r : rows)
        os << format_number(r.budget) << ',' << format_number(r.best_fitness) << ','
           << format_number(r.team_cost) << ',' << format_number(r.total_deliveries) << ','
           << format_number(r.individual_deliveries) << ',' << format_number(r.collab_deliveries) << ','
           << format_number(r.avg_energy_used) << ',' << r.num_species << '\n';
    write_file_atomic(path, os.str());
}

std::vector<SummaryRow> read_summary_csv(const fs::path& path)
{
    std::ifstream in(path);
    if (!in)
        throw RunError("cannot read " + path.string());
    std::string line;
    std::getline(in, line);
    if (line != kSummaryHeader)
        throw RunError(path.string() + ": unexpected header");
    std::vector<SummaryRow> rows;
    while (std::getline(in, line)) {
        if (line.empty())
            continue;
        std::vector<std::string> f;
        std::istringstream ls(line);
        for (std::string cell; std::getline(ls, cell, ',');)
            f.push_back(cell);
        if (f.size() != 8)
            throw RunError(path.string() + ": expected 8 columns");
        SummaryRow r;
        r.budget = parse_number(f[0]);
        r.best_fitness = parse_number(f[1]);
        r.team_cost = parse_number(f[2]);
        r.total_deliveries = parse_number(f[3]);
        r.individual_deliveries = parse_number(f[4]);
        r.collab_deliveries = parse_number(f[5]);
        r.avg_energy_used = parse_number(f[6]);
        r.num_species = std::stoi(f[7]);
        rows.push_back(r);
    }
    return rows;
}

RunResult run_experiment(const ScenarioConfig& scenario, const RunOptions& options)
{
    const fs::path& dir = options.out_dir;
    fs::create_directories(dir);
    write_file_atomic(dir / runfiles::manifest, manifest_json(scenario).dump(2));
    for (const char* f : {runfiles::generations, runfiles::timings, runfiles::checkpoint, runfiles::summary,
                          runfiles::best_team, runfiles::traits, runfiles::trajectory})
        fs::remove(dir / f);
    EvolutionState state = initial_state(scenario, scenario.seed);
    write_file_atomic(dir / runfiles::checkpoint, state_to_json(state).dump());
    return continue_run(scenario, std::move(state), options);
}

RunResult resume_experiment(const RunOptions& options, std::optional<int> generations)
{
    const fs::path& dir = options.out_dir;
    ScenarioConfig s = scenario_from_manifest(dir);
    if (generations) {
        s.generations = *generations;
        write_file_atomic(dir / runfiles::manifest, manifest_json(s).dump(2));
    }
    std::ifstream in(dir / runfiles::checkpoint);
    if (!in)
        throw RunError("no checkpoint in " + dir.string());
    EvolutionState state = state_from_json(json::parse(in));
    truncate_log(dir / runfiles::generations, state.generation);
    truncate_log(dir / runfiles::timings, state.generation);
    return continue_run(s, std::move(state), options);
}

std::vector<SummaryRow> run_budget_sweep(const ScenarioConfig& scenario, const std::vector<double>& budgets,
                                         const RunOptions& options)
{
    std::vector<SummaryRow> rows;
    fs::create_directories(options.out_dir);
    for (std::size_t k = 0; k < budgets.size(); ++k) {
        ScenarioConfig s = scenario;
        s.budget.budget = budgets[k];
        RunOptions o = options;
        o.out_dir = options.out_dir / ("budget_" + std::to_string(k));
        rows.push_back(run_experiment(s, o).summary);
    }
    write_summary_csv(options.out_dir / runfiles::summary, rows);
    return rows;
}

std::vector<json> read_generation_log(const fs::path& run_dir)
{
    const fs::path p = run_dir / runfiles::generations;
    std::ifstream in(p);
    if (!in)
        throw RunError("missing generation log: " + p.string());
    std::vector<json> out;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty())
            continue;
        try {
            out.push_back(json::parse(line));
        } catch (const json::parse_error& e) {
            throw RunError(p.string() + ": malformed record: " + e.what());
        }
    }
    return out;
}

}  // namespace swarmcode
