// nrrt: map generation, planning, benchmarking and dataset export.
//
// Exit codes: 0 success, 1 runtime or validation failure, 2 usage error.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "nrrt/bench.hpp"
#include "nrrt/dataset.hpp"
#include "nrrt/errors.hpp"
#include "nrrt/grid_map.hpp"
#include "nrrt/metrics.hpp"
#include "nrrt/planner.hpp"
#include "nrrt/prior.hpp"
#include "nrrt/render.hpp"

namespace fs = std::filesystem;
using namespace nrrt;

namespace {

constexpr int kUsageError = 2;

struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

Point2 parse_point(const std::string& text, const char* flag) {
    const auto comma = text.find(',');
    if (comma == std::string::npos) throw UsageError(std::string(flag) + " expects x,y");
    try {
        std::size_t used_x = 0, used_y = 0;
        const std::string xs = text.substr(0, comma), ys = text.substr(comma + 1);
        const Point2 p{std::stod(xs, &used_x), std::stod(ys, &used_y)};
        if (used_x != xs.size() || used_y != ys.size() || !is_finite(p)) throw std::invalid_argument("trailing");
        return p;
    } catch (const std::exception&) {
        throw UsageError(std::string(flag) + " expects x,y with numeric coordinates");
    }
}

void write_file(const fs::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open " + path.string() + " for writing");
    out << text;
    if (!out) throw IoError("write failed: " + path.string());
}

const std::vector<std::string> kDensityNames{"sparse", "medium", "dense"};

struct GenMapsArgs {
    std::uint64_t seed = 0;
    std::string density = "sparse";
    int count = 1;
    int size = kDefaultMapSide;
    std::string out = ".";
};

int run_gen_maps(const GenMapsArgs& a) {
    const Density d = parse_density(a.density);
    fs::create_directories(a.out);
    for (int i = 0; i < a.count; ++i) {
        const auto grid = generate_map(hash_combine(a.seed, static_cast<std::uint64_t>(i)), d, a.size, a.size);
        const fs::path file = fs::path(a.out) / (a.density + "-" + std::to_string(a.seed) + "-" + std::to_string(i + 1) + ".json");
        save_map(grid, file);
        std::cout << file.string() << '\n';
    }
    return 0;
}

struct PlanArgs {
    std::string map, start, goal, planner = "rrtstar", prior, svg, json;
    PlannerConfig config;
    std::optional<double> goal_tolerance;
};

int run_plan(PlanArgs a) {
    const PlannerKind kind = parse_planner(a.planner);
    if (kind != PlannerKind::RrtStar && a.prior.empty()) {
        throw UsageError("--planner " + a.planner + " requires --prior (oracle or a prior file)");
    }
    a.config.goal_tolerance = a.goal_tolerance.value_or(a.config.step);
    try {
        validate(a.config);
    } catch (const std::invalid_argument& e) {
        throw UsageError(e.what());
    }

    PlanningProblem problem{load_map(a.map), parse_point(a.start, "--start"), parse_point(a.goal, "--goal")};
    if (!is_free(problem.grid, problem.start) || !is_free(problem.grid, problem.goal)) {
        throw UsageError("--start and --goal must lie in free cells of the map");
    }

    std::optional<ProbabilityMap> prior;
    if (kind != PlannerKind::RrtStar) {
        prior = a.prior == "oracle" ? oracle_prior(problem) : load_prior(a.prior, problem.grid);
    }
    a.config.record_samples = !a.svg.empty() && kind != PlannerKind::RrtStar;
    const PlanOutcome outcome = plan(kind, problem, a.config, prior ? &*prior : nullptr);

    char line[256];
    if (outcome.success) {
        std::snprintf(line, sizeof line, "planner=%s success=true length=%.2f smoothness=%.2f time=%.3fs\n",
                      a.planner.c_str(), path_length(outcome.path), smoothness(outcome.path), outcome.wall_time);
    } else {
        std::snprintf(line, sizeof line, "planner=%s success=false length=nan smoothness=nan time=%.3fs\n",
                      a.planner.c_str(), outcome.wall_time);
    }
    std::cout << line;

    if (!a.json.empty()) write_file(a.json, outcome_to_json(outcome) + "\n");
    if (!a.svg.empty()) {
        SceneSpec scene;
        scene.grid = &problem.grid;
        scene.tree = &outcome.tree;
        if (outcome.success) scene.path = &outcome.path;
        if (prior) scene.prior = &*prior;
        if (outcome.sample_trace) scene.samples = &*outcome.sample_trace;
        if (kind == PlannerKind::NeuralInformed && outcome.success) {
            scene.ellipse.emplace(problem.start, problem.goal, outcome.cost);
        }
        scene.start = problem.start;
        scene.goal = problem.goal;
        render_scene(scene, a.svg);
    }
    return 0;
}

struct BenchArgs {
    std::string config, out_csv, out_json, export_problems;
    int threads = 0;
};

int run_bench(const BenchArgs& a) {
    ExperimentSpec spec;
    if (!a.config.empty()) {
        if (!fs::exists(a.config)) throw UsageError("config file not found: " + a.config);
        spec = load_spec(a.config);
    }
    if (a.threads > 0) spec.threads = a.threads;
    if (!a.export_problems.empty()) {
        export_problems(spec, a.export_problems);
        std::cout << "wrote experiment problems to " << a.export_problems << '\n';
        return 0;
    }
    const ResultTable table = run_experiment(spec);
    if (!a.out_csv.empty()) export_results(table, ExportFormat::Csv, a.out_csv);
    if (!a.out_json.empty()) export_results(table, ExportFormat::Json, a.out_json);
    if (a.out_csv.empty() && a.out_json.empty()) std::cout << results_to_csv(table);
    const bool has_baseline = std::find(spec.planners.begin(), spec.planners.end(), PlannerKind::RrtStar) != spec.planners.end();
    if (has_baseline && spec.planners.size() > 1) std::cout << format_report(summarize_improvements(table));
    return 0;
}

struct DatasetArgs {
    std::uint64_t seed = 0;
    int count = 2000;
    int size = kDefaultMapSide;
    std::vector<std::string> densities{kDensityNames};
    std::string out;
};

int run_gen_dataset(const DatasetArgs& a) {
    DatasetConfig cfg;
    cfg.seed = a.seed;
    cfg.count = a.count;
    cfg.map_size = a.size;
    cfg.min_separation = 100.0 * a.size / kDefaultMapSide;
    cfg.densities.clear();
    for (const auto& d : a.densities) cfg.densities.push_back(parse_density(d));
    const DatasetManifest m = generate_dataset(cfg, a.out);
    std::cout << "wrote " << m.samples.size() << " samples to " << (fs::path(a.out) / kManifestName).string() << '\n';
    return 0;
}

int run_validate_prior(const std::string& prior_path, const std::string& map_path) {
    const OccupancyGrid grid = load_map(map_path);
    try {
        (void)load_prior(prior_path, grid);
    } catch (const FormatError& e) {
        std::cerr << "invalid prior: " << e.what() << '\n';
        return 1;
    }
    std::cout << "ok: " << prior_path << " is a valid prior for " << map_path << '\n';
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Sampling-based planners with learned sampling priors on occupancy grids"};
    app.require_subcommand(1);

    GenMapsArgs gm;
    auto* gen_maps = app.add_subcommand("gen-maps", "Generate procedural occupancy maps");
    gen_maps->add_option("--seed", gm.seed, "Base seed");
    gen_maps->add_option("--density", gm.density, "sparse | medium | dense")->check(CLI::IsMember(kDensityNames));
    gen_maps->add_option("--count", gm.count, "Number of maps")->check(CLI::PositiveNumber);
    gen_maps->add_option("--size", gm.size, "Map side in cells")->check(CLI::Range(kMinMapSide, 1 << 14));
    gen_maps->add_option("--out", gm.out, "Output directory");

    PlanArgs pa;
    auto* plan_cmd = app.add_subcommand("plan", "Plan on a map file");
    plan_cmd->add_option("--map", pa.map, "Map JSON")->required()->check(CLI::ExistingFile);
    plan_cmd->add_option("--start", pa.start, "Start x,y (cells)")->required();
    plan_cmd->add_option("--goal", pa.goal, "Goal x,y (cells)")->required();
    plan_cmd->add_option("--planner", pa.planner, "rrtstar | neural | neural-informed")
        ->check(CLI::IsMember({"rrtstar", "neural", "neural-informed"}));
    plan_cmd->add_option("--prior", pa.prior, "'oracle' or an NPRI prior file");
    plan_cmd->add_option("--seed", pa.config.seed, "Planner seed");
    plan_cmd->add_option("--iterations", pa.config.iterations, "Iterations")->capture_default_str();
    plan_cmd->add_option("--step", pa.config.step, "Steering step (cells)")->capture_default_str();
    plan_cmd->add_option("--radius", pa.config.rewire_radius, "Rewire radius (cells)")->capture_default_str();
    plan_cmd->add_option("--alpha", pa.config.alpha, "Prior mixture weight")->capture_default_str();
    plan_cmd->add_option("--goal-tolerance", pa.goal_tolerance, "Goal tolerance (defaults to --step)");
    plan_cmd->add_option("--svg", pa.svg, "Write an SVG scene");
    plan_cmd->add_option("--json", pa.json, "Write the outcome as JSON");

    BenchArgs ba;
    auto* bench = app.add_subcommand("bench", "Run the benchmark protocol");
    bench->add_option("--config", ba.config, "Experiment config JSON");
    bench->add_option("--out-csv", ba.out_csv, "CSV table output");
    bench->add_option("--out-json", ba.out_json, "JSON table output");
    bench->add_option("--threads", ba.threads, "Worker threads")->check(CLI::NonNegativeNumber);
    bench->add_option("--export-problems", ba.export_problems, "Write the experiment maps and manifest, then exit");

    DatasetArgs da;
    auto* gen_dataset = app.add_subcommand("gen-dataset", "Write a training corpus of maps and path masks");
    gen_dataset->add_option("--seed", da.seed, "Seed");
    gen_dataset->add_option("--count", da.count, "Number of samples")->check(CLI::PositiveNumber);
    gen_dataset->add_option("--size", da.size, "Map side in cells")->check(CLI::Range(kMinMapSide, 1 << 14));
    gen_dataset->add_option("--densities", da.densities, "Densities to cycle through")
        ->check(CLI::IsMember(kDensityNames));
    gen_dataset->add_option("--out", da.out, "Output directory")->required();

    std::string vp_prior, vp_map;
    auto* validate_prior = app.add_subcommand("validate-prior", "Check a prior file against a map");
    validate_prior->add_option("--prior", vp_prior, "NPRI file")->required();
    validate_prior->add_option("--map", vp_map, "Map JSON")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kUsageError;
    }

    try {
        if (*gen_maps) return run_gen_maps(gm);
        if (*plan_cmd) return run_plan(pa);
        if (*bench) return run_bench(ba);
        if (*gen_dataset) return run_gen_dataset(da);
        if (*validate_prior) return run_validate_prior(vp_prior, vp_map);
    } catch (const UsageError& e) {
        std::cerr << "error: " << e.what() << "\n\n" << app.help();
        return kUsageError;
    } catch (const ConfigurationError& e) {
        std::cerr << "configuration error: " << e.what() << '\n';
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return kUsageError;
}
