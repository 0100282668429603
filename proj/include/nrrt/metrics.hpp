#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>

#include "nrrt/geometry.hpp"

namespace nrrt {

/// Sum of Euclidean segment lengths. Throws std::invalid_argument when empty.
double path_length(std::span<const Point2> path);

/// Total absolute turning angle (radians), each heading change wrapped to
/// [0, pi]. Zero-length segments carry no heading and are skipped. Throws
/// std::invalid_argument for fewer than two points.
double smoothness(std::span<const Point2> path);

struct RunRecord {
    std::string planner;
    std::string map;
    std::uint64_t seed = 0;
    bool success = false;
    std::optional<double> path_length;  // present iff success
    std::optional<double> smoothness;   // present iff success
    double wall_time = 0.0;
    double prior_time = 0.0;            // prior construction for this run's map

    friend bool operator==(const RunRecord&, const RunRecord&) = default;
};

struct Stat {
    double mean = 0.0;
    double std = 0.0;

    friend bool operator==(const Stat&, const Stat&) = default;
};

struct AggregateRow {
    int runs = 0;
    int successes = 0;
    double success_rate = 0.0;           // percent
    std::optional<Stat> path_length;     // over successful runs; absent when none
    std::optional<Stat> smoothness;
    Stat wall_time;                      // over all runs
    Stat wall_time_with_prior;

    friend bool operator==(const AggregateRow&, const AggregateRow&) = default;
};

/// Mean and sample (n-1) standard deviation; std = 0 for a single value.
Stat mean_std(std::span<const double> values);

/// Throws std::invalid_argument for an empty input.
AggregateRow aggregate(std::span<const RunRecord> records);

}  // namespace nrrt
