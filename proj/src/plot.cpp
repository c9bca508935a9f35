#include "swarmcode/plot.hpp"

#include <algorithm>
#include <cstdio>
#include <functional>
#include <map>
#include <set>
#include <sstream>

#include "swarmcode/runlog.hpp"

namespace swarmcode {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr double kWidth = 800.0;
constexpr double kHeight = 480.0;
constexpr double kLeft = 70.0;
constexpr double kRight = 150.0;
constexpr double kTop = 40.0;
constexpr double kBottom = 50.0;

const char* kPalette[] = {"#4e79a7", "#f28e2b", "#e15759", "#76b7b2", "#59a14f",
                          "#edc948", "#b07aa1", "#ff9da7", "#9c755f", "#bab0ac"};

std::string color(SpeciesId id) { return kPalette[id % std::size(kPalette)]; }

std::string num(double x)
{
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f", x);
    return buf;
}

class Svg {
public:
    Svg(const std::string& title)
    {
        os_ << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\"" << kHeight
            << "\" font-family=\"sans-serif\" font-size=\"12\">\n"
            << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
        text(kWidth / 2, 22, title, "middle", 15);
    }

    void text(double x, double y, const std::string& s, const char* anchor = "start", int size = 12)
    {
        os_ << "<text x=\"" << num(x) << "\" y=\"" << num(y) << "\" text-anchor=\"" << anchor
            << "\" font-size=\"" << size << "\">" << s << "</text>\n";
    }

    void line(double x1, double y1, double x2, double y2, const std::string& stroke = "#333")
    {
        os_ << "<line x1=\"" << num(x1) << "\" y1=\"" << num(y1) << "\" x2=\"" << num(x2) << "\" y2=\""
            << num(y2) << "\" stroke=\"" << stroke << "\"/>\n";
    }

    void rect(double x, double y, double w, double h, const std::string& fill)
    {
        os_ << "<rect x=\"" << num(x) << "\" y=\"" << num(y) << "\" width=\"" << num(w) << "\" height=\""
            << num(h) << "\" fill=\"" << fill << "\"/>\n";
    }

    void polygon(const std::vector<std::pair<double, double>>& pts, const std::string& fill)
    {
        os_ << "<polygon fill=\"" << fill << "\" stroke=\"none\" points=\"";
        for (auto [x, y] : pts)
            os_ << num(x) << ',' << num(y) << ' ';
        os_ << "\"/>\n";
    }

    void polyline(const std::vector<std::pair<double, double>>& pts, const std::string& stroke)
    {
        os_ << "<polyline fill=\"none\" stroke-width=\"2\" stroke=\"" << stroke << "\" points=\"";
        for (auto [x, y] : pts)
            os_ << num(x) << ',' << num(y) << ' ';
        os_ << "\"/>\n";
    }

    // Axes with five ticks each; callers map data with map_x / map_y.
    void axes(double x_min, double x_max, double y_min, double y_max, const std::string& xlabel,
              const std::string& ylabel, bool x_ticks = true)
    {
        const double x0 = kLeft, x1 = kWidth - kRight, y0 = kHeight - kBottom, y1 = kTop;
        line(x0, y0, x1, y0);
        line(x0, y0, x0, y1);
        for (int i = 0; i <= 4; ++i) {
            const double fx = x_min + (x_max - x_min) * i / 4.0;
            const double px = x0 + (x1 - x0) * i / 4.0;
            if (x_ticks) {
                line(px, y0, px, y0 + 4);
                text(px, y0 + 18, num(fx), "middle");
            }
            const double fy = y_min + (y_max - y_min) * i / 4.0;
            const double py = y0 - (y0 - y1) * i / 4.0;
            line(x0 - 4, py, x0, py);
            text(x0 - 6, py + 4, num(fy), "end");
        }
        text((x0 + x1) / 2, kHeight - 12, xlabel, "middle");
        os_ << "<text transform=\"translate(16," << num((y0 + y1) / 2) << ") rotate(-90)\" text-anchor=\"middle\">"
            << ylabel << "</text>\n";
    }

    void legend(const std::vector<std::pair<std::string, std::string>>& entries)
    {
        double y = kTop + 10;
        const double x = kWidth - kRight + 15;
        for (const auto& [label, fill] : entries) {
            rect(x, y - 10, 12, 12, fill);
            text(x + 18, y, label);
            y += 18;
            if (y > kHeight - kBottom)
                break;
        }
    }

    std::string str() const { return os_.str() + "</svg>\n"; }

private:
    std::ostringstream os_;
};

double map_x(double v, double lo, double hi)
{
    const double span = hi > lo ? hi - lo : 1.0;
    return kLeft + (kWidth - kLeft - kRight) * (v - lo) / span;
}

double map_y(double v, double lo, double hi)
{
    const double span = hi > lo ? hi - lo : 1.0;
    return (kHeight - kBottom) - (kHeight - kBottom - kTop) * (v - lo) / span;
}

std::string stacked_svg(const StackedSeries& s, const std::string& title, const std::string& ylabel)
{
    Svg svg(title);
    const int g0 = s.generations.front(), g1 = s.generations.back();
    double y_max = 0.0;
    for (std::size_t g = 0; g < s.generations.size(); ++g) {
        double total = 0.0;
        for (const auto& v : s.values)
            total += v[g];
        y_max = std::max(y_max, total);
    }
    if (y_max <= 0.0)
        y_max = 1.0;
    svg.axes(g0, g1, 0.0, y_max, "generation", ylabel);
    std::vector<double> base(s.generations.size(), 0.0);
    std::vector<std::pair<std::string, std::string>> legend;
    for (std::size_t k = 0; k < s.species.size(); ++k) {
        std::vector<std::pair<double, double>> pts;
        const auto n = s.generations.size();
        if (n == 1) {
            const double x = map_x(g0, g0, g0);
            const double w = kWidth - kLeft - kRight;
            svg.rect(x, map_y(base[0] + s.values[k][0], 0, y_max), w,
                     map_y(base[0], 0, y_max) - map_y(base[0] + s.values[k][0], 0, y_max), color(s.species[k]));
            base[0] += s.values[k][0];
        } else {
            for (std::size_t g = 0; g < n; ++g)
                pts.emplace_back(map_x(s.generations[g], g0, g1), map_y(base[g] + s.values[k][g], 0, y_max));
            for (std::size_t g = n; g-- > 0;)
                pts.emplace_back(map_x(s.generations[g], g0, g1), map_y(base[g], 0, y_max));
            svg.polygon(pts, color(s.species[k]));
            for (std::size_t g = 0; g < n; ++g)
                base[g] += s.values[k][g];
        }
        legend.emplace_back("species " + std::to_string(s.species[k]), color(s.species[k]));
    }
    svg.legend(legend);
    return svg.str();
}

StackedSeries stack_from(const std::vector<json>& log,
                         const std::function<std::map<SpeciesId, double>(const json&)>& extract)
{
    StackedSeries s;
    std::vector<std::map<SpeciesId, double>> per_gen;
    std::set<SpeciesId> ids;
    for (const auto& rec : log) {
        s.generations.push_back(rec.at("generation").get<int>());
        per_gen.push_back(extract(rec));
        for (const auto& [id, v] : per_gen.back())
            ids.insert(id);
    }
    s.species.assign(ids.begin(), ids.end());
    for (auto id : s.species) {
        std::vector<double> row;
        for (const auto& m : per_gen) {
            auto it = m.find(id);
            row.push_back(it == m.end() ? 0.0 : it->second);
        }
        s.values.push_back(std::move(row));
    }
    return s;
}

SpeciesTraits traits_from(const json& t)
{
    SpeciesTraits x;
    x.size = t.at("size").get<int>();
    x.radius = t.at("radius").get<double>();
    x.chassis_tier = t.at("chassis_tier").get<double>();
    x.battery_tier = t.at("battery_tier").get<double>();
    x.motor_tier = t.at("motor_tier").get<double>();
    x.pincher_fraction = t.at("pincher_fraction").get<double>();
    x.torque_setpoint = t.at("torque_setpoint").get<double>();
    x.battery_setpoint = t.at("battery_setpoint").get<double>();
    x.selectivity = t.at("selectivity").get<double>();
    x.dominance = t.at("dominance").get<double>();
    x.mean_fitness = t.at("mean_fitness").get<double>();
    return x;
}

std::string fmt(double x)
{
    return json(x).dump();
}

void write(const fs::path& p, const std::string& content)
{
    write_file_atomic(p, content);
}

}  // namespace

const std::vector<PlotKind>& all_plot_kinds()
{
    static const std::vector<PlotKind> kinds = {PlotKind::SpeciesComposition, PlotKind::TeamComposition,
                                                PlotKind::BestFitness, PlotKind::Traits};
    return kinds;
}

const char* plot_kind_name(PlotKind k)
{
    switch (k) {
    case PlotKind::SpeciesComposition: return "species";
    case PlotKind::TeamComposition: return "team";
    case PlotKind::BestFitness: return "fitness";
    case PlotKind::Traits: return "traits";
    }
    return "?";
}

std::optional<PlotKind> parse_plot_kind(const std::string& name)
{
    for (auto k : all_plot_kinds())
        if (name == plot_kind_name(k))
            return k;
    return std::nullopt;
}

StackedSeries species_composition(const std::vector<json>& log)
{
    return stack_from(log, [](const json& rec) {
        std::map<SpeciesId, double> m;
        for (const auto& c : rec.at("census"))
            m[c.at("species").get<SpeciesId>()] = c.at("size").get<double>();
        return m;
    });
}

StackedSeries team_composition(const std::vector<json>& log)
{
    return stack_from(log, [](const json& rec) {
        std::map<SpeciesId, double> m;
        const auto& team = rec.at("best").at("team");
        const auto species = team.at("species").get<std::vector<SpeciesId>>();
        const auto counts = team.at("counts").get<std::vector<int>>();
        for (std::size_t i = 0; i < species.size() && i < counts.size(); ++i)
            m[species[i]] += counts[i];
        return m;
    });
}

std::vector<FitnessPoint> fitness_curve(const std::vector<json>& log)
{
    std::vector<FitnessPoint> out;
    for (const auto& rec : log)
        out.push_back({rec.at("generation").get<int>(), rec.at("best").at("fitness").get<double>(),
                       rec.at("mean_fitness").get<double>()});
    return out;
}

std::vector<TraitRow> trait_summary(const std::vector<json>& log)
{
    std::vector<TraitRow> rows;
    if (log.empty())
        return rows;
    const json& last = log.back();
    std::map<SpeciesId, SpeciesTraits> traits;
    for (const auto& t : last.at("traits"))
        traits[t.at("species").get<SpeciesId>()] = traits_from(t);
    const auto& team = last.at("best").at("team");
    const auto species = team.at("species").get<std::vector<SpeciesId>>();
    const auto counts = team.at("counts").get<std::vector<int>>();
    std::map<SpeciesId, int> slots;
    for (std::size_t i = 0; i < species.size() && i < counts.size(); ++i)
        slots[species[i]] += counts[i];
    for (const auto& [id, n] : slots) {
        TraitRow r;
        r.species = id;
        r.team_slots = n;
        if (auto it = traits.find(id); it != traits.end())
            r.traits = it->second;
        rows.push_back(r);
    }
    return rows;
}

std::vector<fs::path> plot(const fs::path& run_dir, PlotKind kind, const fs::path& out_dir)
{
    const auto log = read_generation_log(run_dir);
    if (log.empty())
        throw RunError("generation log in " + run_dir.string() + " has no records");
    const fs::path dir = out_dir.empty() ? run_dir / "plots" : out_dir;
    fs::create_directories(dir);
    std::vector<fs::path> written;

    switch (kind) {
    case PlotKind::SpeciesComposition: {
        const fs::path p = dir / "species_composition.svg";
        write(p, stacked_svg(species_composition(log), "Species composition of the population", "individuals"));
        written.push_back(p);
        break;
    }
    case PlotKind::TeamComposition: {
        const fs::path p = dir / "team_composition.svg";
        write(p, stacked_svg(team_composition(log), "Best-team composition", "robots"));
        written.push_back(p);
        break;
    }
    case PlotKind::BestFitness: {
        const auto curve = fitness_curve(log);
        std::ostringstream csv;
        csv << "generation,best_fitness,mean_fitness\n";
        double y_max = 0.0;
        for (const auto& c : curve) {
            csv << c.generation << ',' << fmt(c.best) << ',' << fmt(c.mean) << '\n';
            y_max = std::max({y_max, c.best, c.mean});
        }
        if (y_max <= 0.0)
            y_max = 1.0;
        Svg svg("Best-team fitness");
        const double g0 = curve.front().generation, g1 = curve.back().generation;
        svg.axes(g0, g1, 0.0, y_max, "generation", "fitness");
        std::vector<std::pair<double, double>> best, mean;
        for (const auto& c : curve) {
            best.emplace_back(map_x(c.generation, g0, g1), map_y(c.best, 0, y_max));
            mean.emplace_back(map_x(c.generation, g0, g1), map_y(c.mean, 0, y_max));
        }
        svg.polyline(best, "#e15759");
        svg.polyline(mean, "#4e79a7");
        svg.legend({{"best", "#e15759"}, {"population mean", "#4e79a7"}});
        const fs::path p = dir / "best_fitness.svg";
        const fs::path c = dir / "best_fitness.csv";
        write(p, svg.str());
        write(c, csv.str());
        written.push_back(p);
        written.push_back(c);
        break;
    }
    case PlotKind::Traits: {
        const auto rows = trait_summary(log);
        std::ostringstream csv;
        csv << "species,team_slots,size,radius,chassis_tier,battery_tier,motor_tier,pincher_fraction,"
               "torque_setpoint,battery_setpoint,selectivity,dominance\n";
        for (const auto& r : rows) {
            const auto& t = r.traits;
            csv << r.species << ',' << r.team_slots << ',' << t.size << ',' << fmt(t.radius) << ','
                << fmt(t.chassis_tier) << ',' << fmt(t.battery_tier) << ',' << fmt(t.motor_tier) << ','
                << fmt(t.pincher_fraction) << ',' << fmt(t.torque_setpoint) << ',' << fmt(t.battery_setpoint)
                << ',' << fmt(t.selectivity) << ',' << fmt(t.dominance) << '\n';
        }
        // Grouped bars, each trait scaled to its own maximum.
        struct Col {
            const char* name;
            double max;
            double SpeciesTraits::*field;
        };
        const Col cols[] = {{"radius", 0.0, &SpeciesTraits::radius},
                            {"chassis", 3.0, &SpeciesTraits::chassis_tier},
                            {"battery", 3.0, &SpeciesTraits::battery_tier},
                            {"motor", 3.0, &SpeciesTraits::motor_tier},
                            {"pincher", 1.0, &SpeciesTraits::pincher_fraction},
                            {"dominance", 1.0, &SpeciesTraits::dominance}};
        double r_max = 0.0;
        for (const auto& r : rows)
            r_max = std::max(r_max, r.traits.radius);
        Svg svg("Traits of best-team species (scaled per trait)");
        svg.axes(0, 1, 0.0, 1.0, "", "fraction of trait maximum", false);
        const double plot_w = kWidth - kLeft - kRight;
        const double group_w = plot_w / std::size(cols);
        const double bar_w = rows.empty() ? 0.0 : group_w * 0.8 / static_cast<double>(rows.size());
        std::vector<std::pair<std::string, std::string>> legend;
        for (std::size_t c = 0; c < std::size(cols); ++c) {
            const double m = cols[c].max > 0.0 ? cols[c].max : (r_max > 0.0 ? r_max : 1.0);
            const double gx = kLeft + group_w * static_cast<double>(c) + group_w * 0.1;
            for (std::size_t i = 0; i < rows.size(); ++i) {
                const double v = (rows[i].traits.*cols[c].field) / m;
                svg.rect(gx + bar_w * static_cast<double>(i), map_y(v, 0, 1), bar_w,
                         map_y(0, 0, 1) - map_y(v, 0, 1), color(rows[i].species));
            }
            svg.text(gx + group_w * 0.4, kHeight - kBottom + 32, cols[c].name, "middle");
        }
        for (const auto& r : rows)
            legend.emplace_back("species " + std::to_string(r.species), color(r.species));
        svg.legend(legend);
        const fs::path p = dir / "traits.svg";
        const fs::path c = dir / "traits_summary.csv";
        write(p, svg.str());
        write(c, csv.str());
        written.push_back(p);
        written.push_back(c);
        break;
    }
    }
    return written;
}

}  // namespace swarmcode
