#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "nrrt/grid_map.hpp"
#include "nrrt/metrics.hpp"
#include "nrrt/planner.hpp"

namespace nrrt {

enum class PriorSource { Oracle, Directory };

struct ExperimentSpec {
    std::vector<Density> densities{std::begin(kAllDensities), std::end(kAllDensities)};
    int maps_per_density = 5;
    int runs_per_map = 10;
    std::vector<PlannerKind> planners{std::begin(kAllPlanners), std::end(kAllPlanners)};
    PlannerConfig planner;  // seed is replaced per run
    std::uint64_t master_seed = 2024;
    PriorSource prior_source = PriorSource::Oracle;
    std::filesystem::path prior_dir;  // Directory source: <density>-<k>.npri per map
    int map_size = kDefaultMapSide;
    double min_separation = 100.0;
    MapGenConfig map_gen;
    int threads = 0;  // 0: SAMPLER_BENCH_THREADS or hardware concurrency
};

void validate(const ExperimentSpec& spec);

/// Reads an experiment config (JSON object, every key optional). Throws
/// ConfigurationError on unknown keys or bad values.
ExperimentSpec spec_from_json(std::string_view text);
ExperimentSpec load_spec(const std::filesystem::path& path);

/// Seed derivation chain; each run is reproducible from its coordinates.
std::uint64_t map_seed(std::uint64_t master_seed, Density density, int map_index);
std::uint64_t problem_seed(std::uint64_t map_seed);
std::uint64_t run_seed(std::uint64_t map_seed, PlannerKind planner, int run_index);

/// Map identifier, 1-based like the published tables: "dense-3".
std::string map_id(Density density, int map_index);

/// The map and problem a given (density, map index) resolves to.
PlanningProblem experiment_problem(const ExperimentSpec& spec, Density density, int map_index);

struct ResultRow {
    Density density;
    int map_index;  // 0-based
    PlannerKind planner;
    AggregateRow stats;
    double prior_time = 0.0;

    friend bool operator==(const ResultRow&, const ResultRow&) = default;
};

struct ResultTable {
    std::vector<ResultRow> rows;      // density-major, then map, then planner
    std::vector<RunRecord> records;   // rows.size() * runs_per_map, grouped per row

    friend bool operator==(const ResultTable&, const ResultTable&) = default;
};

/// Runs the full protocol. Throws ConfigurationError naming the map when a
/// directory prior is missing.
ResultTable run_experiment(const ExperimentSpec& spec);

struct Improvement {
    Density density;
    int map_index;
    PlannerKind planner;
    double shorter_pct;   // 100 * (base - neural) / base, mean path length
    double smoother_pct;  // same for mean smoothness
};

struct ImprovementRange {
    double min = 0.0;
    double max = 0.0;
};

struct ImprovementReport {
    std::vector<Improvement> per_map;
    // Suite-level, per neural planner in order of first appearance.
    struct Suite {
        PlannerKind planner;
        ImprovementRange shorter;
        ImprovementRange smoother;
    };
    std::vector<Suite> suites;
};

/// Percent reduction of `value` relative to `baseline`; 0 when baseline is 0.
double percent_reduction(double baseline, double value);

/// Throws std::invalid_argument when a map lacks an RRT* row or no neural rows exist.
ImprovementReport summarize_improvements(const ResultTable& table);
std::string format_report(const ImprovementReport& report);

inline constexpr const char* kCsvHeader =
    "density,map,planner,runs,success_rate,len_mean,len_std,time_mean,time_std,smooth_mean,smooth_std";

std::string results_to_csv(const ResultTable& table);
std::string results_to_json(const ResultTable& table);
ResultTable results_from_json(std::string_view text);

enum class ExportFormat { Csv, Json };
/// Throws IoError on write failure.
void export_results(const ResultTable& table, ExportFormat format, const std::filesystem::path& path);

/// Writes every experiment map plus a "dataset/1" manifest (oracle labels
/// included) so an external model can produce matching directory priors.
void export_problems(const ExperimentSpec& spec, const std::filesystem::path& out_dir);

}  // namespace nrrt
