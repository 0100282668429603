#include "nrrt/bench.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <map>
#include <mutex>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "nrrt/dataset.hpp"
#include "nrrt/errors.hpp"
#include "nrrt/prior.hpp"

namespace nrrt {

using nlohmann::json;

void validate(const ExperimentSpec& spec) {
    if (spec.densities.empty()) throw ConfigurationError("densities must not be empty");
    if (spec.maps_per_density < 1 || spec.runs_per_map < 1) throw ConfigurationError("counts must be >= 1");
    if (spec.planners.empty()) throw ConfigurationError("planner list must not be empty");
    if (spec.map_size < kMinMapSide) throw ConfigurationError("map_size must be >= 32");
    if (!(spec.min_separation >= 0.0)) throw ConfigurationError("min_separation must be >= 0");
    if (spec.prior_source == PriorSource::Directory && spec.prior_dir.empty()) {
        throw ConfigurationError("prior_dir required for directory priors");
    }
    try {
        validate(spec.planner);
    } catch (const std::invalid_argument& e) {
        throw ConfigurationError(e.what());
    }
}

namespace {

template <typename T>
T get_or(const json& doc, const char* key, T fallback) {
    if (!doc.contains(key)) return fallback;
    try {
        return doc.at(key).get<T>();
    } catch (const json::exception&) {
        throw ConfigurationError(std::string("config key '") + key + "' has the wrong type");
    }
}

}  // namespace

ExperimentSpec spec_from_json(std::string_view text) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ConfigurationError(std::string("config is not valid JSON: ") + e.what());
    }
    if (!doc.is_object()) throw ConfigurationError("config must be a JSON object");

    static const char* const kKeys[] = {"densities",    "maps_per_density", "runs_per_map",  "planners",
                                        "master_seed",  "prior_source",     "prior_dir",     "map_size",
                                        "min_separation", "threads",        "iterations",    "step",
                                        "rewire_radius", "alpha",           "goal_tolerance", "max_rejections",
                                        "density_bands"};
    for (const auto& [key, _] : doc.items()) {
        if (std::find_if(std::begin(kKeys), std::end(kKeys), [&](const char* k) { return key == k; }) ==
            std::end(kKeys)) {
            throw ConfigurationError("unknown config key '" + key + "'");
        }
    }

    ExperimentSpec spec;
    try {
        if (doc.contains("densities")) {
            spec.densities.clear();
            for (const auto& d : doc.at("densities")) spec.densities.push_back(parse_density(d.get<std::string>()));
        }
        if (doc.contains("planners")) {
            spec.planners.clear();
            for (const auto& p : doc.at("planners")) spec.planners.push_back(parse_planner(p.get<std::string>()));
        }
        if (doc.contains("density_bands")) {
            for (const auto& [name, band] : doc.at("density_bands").items()) {
                DensityBand b{band.at(0).get<double>(), band.at(1).get<double>()};
                switch (parse_density(name)) {
                    case Density::Sparse: spec.map_gen.sparse = b; break;
                    case Density::Medium: spec.map_gen.medium = b; break;
                    case Density::Dense: spec.map_gen.dense = b; break;
                }
            }
        }
    } catch (const json::exception& e) {
        throw ConfigurationError(std::string("config: ") + e.what());
    } catch (const std::invalid_argument& e) {
        throw ConfigurationError(std::string("config: ") + e.what());
    }
    spec.maps_per_density = get_or(doc, "maps_per_density", spec.maps_per_density);
    spec.runs_per_map = get_or(doc, "runs_per_map", spec.runs_per_map);
    spec.master_seed = get_or(doc, "master_seed", spec.master_seed);
    const auto source = get_or<std::string>(doc, "prior_source", "oracle");
    if (source == "oracle") {
        spec.prior_source = PriorSource::Oracle;
    } else if (source == "dir") {
        spec.prior_source = PriorSource::Directory;
    } else {
        throw ConfigurationError("prior_source must be \"oracle\" or \"dir\"");
    }
    spec.prior_dir = get_or<std::string>(doc, "prior_dir", "");
    spec.map_size = get_or(doc, "map_size", spec.map_size);
    spec.min_separation = get_or(doc, "min_separation", spec.min_separation);
    spec.threads = get_or(doc, "threads", spec.threads);
    spec.planner.iterations = get_or(doc, "iterations", spec.planner.iterations);
    spec.planner.step = get_or(doc, "step", spec.planner.step);
    spec.planner.rewire_radius = get_or(doc, "rewire_radius", spec.planner.rewire_radius);
    spec.planner.alpha = get_or(doc, "alpha", spec.planner.alpha);
    // Goal tolerance follows the step unless set explicitly.
    spec.planner.goal_tolerance = get_or(doc, "goal_tolerance", spec.planner.step);
    spec.planner.max_rejections = get_or(doc, "max_rejections", spec.planner.max_rejections);
    validate(spec);
    return spec;
}

ExperimentSpec load_spec(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigurationError("cannot read config " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return spec_from_json(buf.str());
}

std::uint64_t map_seed(std::uint64_t master_seed, Density density, int map_index) {
    return hash_combine(hash_combine(master_seed, static_cast<std::uint64_t>(density)),
                        static_cast<std::uint64_t>(map_index));
}

std::uint64_t problem_seed(std::uint64_t map_seed) { return hash_combine(map_seed, 0x5052'4f42ULL); }

std::uint64_t run_seed(std::uint64_t map_seed, PlannerKind planner, int run_index) {
    return hash_combine(hash_combine(map_seed, 0x100 + static_cast<std::uint64_t>(planner)),
                        static_cast<std::uint64_t>(run_index));
}

std::string map_id(Density density, int map_index) {
    return std::string(to_string(density)) + "-" + std::to_string(map_index + 1);
}

PlanningProblem experiment_problem(const ExperimentSpec& spec, Density density, int map_index) {
    const std::uint64_t ms = map_seed(spec.master_seed, density, map_index);
    const OccupancyGrid grid = generate_map(ms, density, spec.map_size, spec.map_size, spec.map_gen);
    return sample_problem(grid, problem_seed(ms), spec.min_separation);
}

namespace {

int worker_count(int requested, std::size_t jobs) {
    int n = requested;
    if (n <= 0) {
        n = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
        if (const char* env = std::getenv("SAMPLER_BENCH_THREADS")) {
            const int cap = std::atoi(env);
            if (cap > 0) n = std::min(n, cap);
        }
    }
    return std::max(1, std::min<int>(n, static_cast<int>(jobs)));
}

// Runs job(i) for i in [0, count) on a small pool; the first exception wins.
void parallel_for(std::size_t count, int threads, const std::function<void(std::size_t)>& job) {
    std::atomic<std::size_t> next{0};
    std::exception_ptr error;
    std::mutex error_mutex;
    auto worker = [&] {
        for (std::size_t i = next++; i < count; i = next++) {
            try {
                job(i);
            } catch (...) {
                std::lock_guard lock(error_mutex);
                if (!error) error = std::current_exception();
                next = count;
            }
        }
    };
    const int n = worker_count(threads, count);
    if (n == 1) {
        worker();
    } else {
        std::vector<std::jthread> pool;
        for (int t = 0; t < n; ++t) pool.emplace_back(worker);
    }
    if (error) std::rethrow_exception(error);
}

struct MapSetup {
    Density density;
    int map_index;
    std::uint64_t seed;
    std::optional<PlanningProblem> problem;
    std::optional<ProbabilityMap> prior;
    double prior_time = 0.0;
};

}  // namespace

ResultTable run_experiment(const ExperimentSpec& spec) {
    validate(spec);

    std::vector<MapSetup> maps;
    for (Density d : spec.densities) {
        for (int m = 0; m < spec.maps_per_density; ++m) maps.push_back({d, m, map_seed(spec.master_seed, d, m), {}, {}, 0.0});
    }
    const bool needs_prior = std::any_of(spec.planners.begin(), spec.planners.end(),
                                         [](PlannerKind k) { return k != PlannerKind::RrtStar; });
    if (needs_prior && spec.prior_source == PriorSource::Directory) {
        for (const auto& ms : maps) {
            const auto file = spec.prior_dir / (map_id(ms.density, ms.map_index) + ".npri");
            if (!std::filesystem::exists(file)) {
                throw ConfigurationError("missing prior file for map " + map_id(ms.density, ms.map_index) + ": " +
                                         file.string());
            }
        }
    }

    parallel_for(maps.size(), spec.threads, [&](std::size_t i) {
        MapSetup& ms = maps[i];
        ms.problem = experiment_problem(spec, ms.density, ms.map_index);
        if (!needs_prior) return;
        const auto t0 = std::chrono::steady_clock::now();
        if (spec.prior_source == PriorSource::Oracle) {
            ms.prior = oracle_prior(*ms.problem);
        } else {
            ms.prior = load_prior(spec.prior_dir / (map_id(ms.density, ms.map_index) + ".npri"), ms.problem->grid);
        }
        ms.prior_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    });

    const std::size_t n_planners = spec.planners.size();
    const std::size_t runs = static_cast<std::size_t>(spec.runs_per_map);
    ResultTable table;
    table.records.resize(maps.size() * n_planners * runs);

    parallel_for(table.records.size(), spec.threads, [&](std::size_t i) {
        const std::size_t run = i % runs;
        const std::size_t p = (i / runs) % n_planners;
        const MapSetup& ms = maps[i / (runs * n_planners)];
        const PlannerKind kind = spec.planners[p];

        PlannerConfig cfg = spec.planner;
        cfg.seed = run_seed(ms.seed, kind, static_cast<int>(run));
        const PlanOutcome outcome = plan(kind, *ms.problem, cfg, ms.prior ? &*ms.prior : nullptr);

        RunRecord rec;
        rec.planner = std::string(to_string(kind));
        rec.map = map_id(ms.density, ms.map_index);
        rec.seed = cfg.seed;
        rec.success = outcome.success;
        if (outcome.success) {
            rec.path_length = path_length(outcome.path);
            rec.smoothness = smoothness(outcome.path);
        }
        rec.wall_time = outcome.wall_time;
        rec.prior_time = kind == PlannerKind::RrtStar ? 0.0 : ms.prior_time;
        table.records[i] = std::move(rec);
    });

    for (std::size_t m = 0; m < maps.size(); ++m) {
        for (std::size_t p = 0; p < n_planners; ++p) {
            const std::size_t first = (m * n_planners + p) * runs;
            ResultRow row{maps[m].density, maps[m].map_index, spec.planners[p],
                          aggregate(std::span(table.records).subspan(first, runs)),
                          spec.planners[p] == PlannerKind::RrtStar ? 0.0 : maps[m].prior_time};
            table.rows.push_back(std::move(row));
        }
    }
    return table;
}

double percent_reduction(double baseline, double value) {
    if (baseline == 0.0) return 0.0;
    return 100.0 * (baseline - value) / baseline;
}

ImprovementReport summarize_improvements(const ResultTable& table) {
    ImprovementReport report;
    std::map<std::pair<Density, int>, const ResultRow*> baselines;
    for (const auto& row : table.rows) {
        if (row.planner == PlannerKind::RrtStar) baselines[{row.density, row.map_index}] = &row;
    }
    for (const auto& row : table.rows) {
        if (row.planner == PlannerKind::RrtStar) continue;
        const auto it = baselines.find({row.density, row.map_index});
        if (it == baselines.end()) {
            throw std::invalid_argument("no RRT* baseline row for map " + map_id(row.density, row.map_index));
        }
        const AggregateRow& base = it->second->stats;
        if (!base.path_length || !row.stats.path_length) continue;  // no successful runs to compare
        report.per_map.push_back({row.density, row.map_index, row.planner,
                                  percent_reduction(base.path_length->mean, row.stats.path_length->mean),
                                  percent_reduction(base.smoothness->mean, row.stats.smoothness->mean)});
    }
    if (report.per_map.empty()) throw std::invalid_argument("table has no comparable neural planner rows");

    for (const auto& imp : report.per_map) {
        auto suite = std::find_if(report.suites.begin(), report.suites.end(),
                                  [&](const auto& s) { return s.planner == imp.planner; });
        if (suite == report.suites.end()) {
            report.suites.push_back({imp.planner, {imp.shorter_pct, imp.shorter_pct},
                                     {imp.smoother_pct, imp.smoother_pct}});
            continue;
        }
        suite->shorter.min = std::min(suite->shorter.min, imp.shorter_pct);
        suite->shorter.max = std::max(suite->shorter.max, imp.shorter_pct);
        suite->smoother.min = std::min(suite->smoother.min, imp.smoother_pct);
        suite->smoother.max = std::max(suite->smoother.max, imp.smoother_pct);
    }
    return report;
}

std::string format_report(const ImprovementReport& report) {
    std::ostringstream out;
    char line[256];
    out << "improvement vs rrtstar (positive = better)\n";
    for (const auto& imp : report.per_map) {
        std::snprintf(line, sizeof line, "  %-10s %-16s shorter %6.1f%%  smoother %6.1f%%\n",
                      map_id(imp.density, imp.map_index).c_str(), std::string(to_string(imp.planner)).c_str(),
                      imp.shorter_pct, imp.smoother_pct);
        out << line;
    }
    for (const auto& s : report.suites) {
        std::snprintf(line, sizeof line,
                      "%s: up to %.1f%% shorter (range %.1f%% .. %.1f%%), smoother %.1f%% .. %.1f%%\n",
                      std::string(to_string(s.planner)).c_str(), s.shorter.max, s.shorter.min, s.shorter.max,
                      s.smoother.min, s.smoother.max);
        out << line;
    }
    return out.str();
}

namespace {

std::string fixed2(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.2f", v);
    return buf;
}

std::string fixed2(const std::optional<Stat>& s, bool want_std) {
    if (!s) return "";
    return fixed2(want_std ? s->std : s->mean);
}

json stat_json(const Stat& s) { return {{"mean", s.mean}, {"std", s.std}}; }
json stat_json(const std::optional<Stat>& s) { return s ? stat_json(*s) : json(nullptr); }

Stat stat_from(const json& j) { return {j.at("mean").get<double>(), j.at("std").get<double>()}; }
std::optional<Stat> opt_stat_from(const json& j) {
    if (j.is_null()) return std::nullopt;
    return stat_from(j);
}

json opt_json(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }
std::optional<double> opt_double(const json& j) {
    if (j.is_null()) return std::nullopt;
    return j.get<double>();
}

void write_text(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open " + path.string() + " for writing");
    out << text;
    out.flush();
    if (!out) throw IoError("write failed: " + path.string());
}

}  // namespace

std::string results_to_csv(const ResultTable& table) {
    std::ostringstream out;
    out << kCsvHeader << '\n';
    for (const auto& r : table.rows) {
        out << to_string(r.density) << ',' << (r.map_index + 1) << ',' << to_string(r.planner) << ','
            << r.stats.runs << ',' << fixed2(r.stats.success_rate) << ',' << fixed2(r.stats.path_length, false)
            << ',' << fixed2(r.stats.path_length, true) << ',' << fixed2(r.stats.wall_time.mean) << ','
            << fixed2(r.stats.wall_time.std) << ',' << fixed2(r.stats.smoothness, false) << ','
            << fixed2(r.stats.smoothness, true) << '\n';
    }
    return out.str();
}

std::string results_to_json(const ResultTable& table) {
    json rows = json::array();
    for (const auto& r : table.rows) {
        rows.push_back({{"density", to_string(r.density)},
                        {"map", r.map_index + 1},
                        {"planner", to_string(r.planner)},
                        {"runs", r.stats.runs},
                        {"successes", r.stats.successes},
                        {"success_rate", r.stats.success_rate},
                        {"path_length", stat_json(r.stats.path_length)},
                        {"smoothness", stat_json(r.stats.smoothness)},
                        {"time", stat_json(r.stats.wall_time)},
                        {"time_with_prior", stat_json(r.stats.wall_time_with_prior)},
                        {"prior_time", r.prior_time}});
    }
    json records = json::array();
    for (const auto& rec : table.records) {
        records.push_back({{"planner", rec.planner},
                           {"map", rec.map},
                           {"seed", rec.seed},
                           {"success", rec.success},
                           {"path_length", opt_json(rec.path_length)},
                           {"smoothness", opt_json(rec.smoothness)},
                           {"time", rec.wall_time},
                           {"prior_time", rec.prior_time}});
    }
    return json{{"format", "results/1"}, {"rows", rows}, {"records", records}}.dump(1);
}

ResultTable results_from_json(std::string_view text) {
    ResultTable table;
    try {
        const json doc = json::parse(text);
        if (doc.at("format") != "results/1") throw FormatError("results JSON: unsupported format", 0);
        for (const auto& r : doc.at("rows")) {
            ResultRow row{parse_density(r.at("density").get<std::string>()), r.at("map").get<int>() - 1,
                          parse_planner(r.at("planner").get<std::string>()), {}, r.at("prior_time").get<double>()};
            row.stats.runs = r.at("runs").get<int>();
            row.stats.successes = r.at("successes").get<int>();
            row.stats.success_rate = r.at("success_rate").get<double>();
            row.stats.path_length = opt_stat_from(r.at("path_length"));
            row.stats.smoothness = opt_stat_from(r.at("smoothness"));
            row.stats.wall_time = stat_from(r.at("time"));
            row.stats.wall_time_with_prior = stat_from(r.at("time_with_prior"));
            table.rows.push_back(std::move(row));
        }
        for (const auto& r : doc.at("records")) {
            RunRecord rec;
            rec.planner = r.at("planner").get<std::string>();
            rec.map = r.at("map").get<std::string>();
            rec.seed = r.at("seed").get<std::uint64_t>();
            rec.success = r.at("success").get<bool>();
            rec.path_length = opt_double(r.at("path_length"));
            rec.smoothness = opt_double(r.at("smoothness"));
            rec.wall_time = r.at("time").get<double>();
            rec.prior_time = r.at("prior_time").get<double>();
            table.records.push_back(std::move(rec));
        }
    } catch (const json::parse_error& e) {
        throw FormatError(std::string("results JSON: ") + e.what(), e.byte);
    } catch (const json::exception& e) {
        throw FormatError(std::string("results JSON: ") + e.what(), 0);
    } catch (const std::invalid_argument& e) {
        throw FormatError(std::string("results JSON: ") + e.what(), 0);
    }
    return table;
}

void export_results(const ResultTable& table, ExportFormat format, const std::filesystem::path& path) {
    write_text(path, format == ExportFormat::Csv ? results_to_csv(table) : results_to_json(table) + "\n");
}

void export_problems(const ExperimentSpec& spec, const std::filesystem::path& out_dir) {
    validate(spec);
    std::error_code ec;
    std::filesystem::create_directories(out_dir / "maps", ec);
    std::filesystem::create_directories(out_dir / "labels", ec);
    if (ec) throw IoError("cannot create " + out_dir.string() + ": " + ec.message());
    DatasetManifest manifest;
    for (Density d : spec.densities) {
        for (int m = 0; m < spec.maps_per_density; ++m) {
            const PlanningProblem problem = experiment_problem(spec, d, m);
            const std::string id = map_id(d, m);
            const Cell s = containing_cell(problem.start);
            const Cell g = containing_cell(problem.goal);
            save_map(problem.grid, out_dir / "maps" / (id + ".json"));
            save_mask(dilate_mask(*astar(problem.grid, s, g), problem.grid), out_dir / "labels" / (id + ".npri"));
            manifest.samples.push_back({"maps/" + id + ".json", "labels/" + id + ".npri", s, g, d});
        }
    }
    save_manifest(manifest, out_dir / kManifestName);
}

}  // namespace nrrt
