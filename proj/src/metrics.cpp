#include "nrrt/metrics.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <vector>

namespace nrrt {

double path_length(std::span<const Point2> path) {
    if (path.empty()) throw std::invalid_argument("path_length of an empty path");
    double total = 0.0;
    for (std::size_t i = 1; i < path.size(); ++i) total += distance(path[i - 1], path[i]);
    return total;
}

double smoothness(std::span<const Point2> path) {
    if (path.size() < 2) throw std::invalid_argument("smoothness needs at least two points");
    double total = 0.0;
    std::optional<double> prev;
    for (std::size_t i = 1; i < path.size(); ++i) {
        const Point2 d = path[i] - path[i - 1];
        if (d.x == 0.0 && d.y == 0.0) continue;
        const double heading = std::atan2(d.y, d.x);
        if (prev) {
            double turn = std::abs(heading - *prev);
            if (turn > std::numbers::pi) turn = 2.0 * std::numbers::pi - turn;
            total += turn;
        }
        prev = heading;
    }
    return total;
}

Stat mean_std(std::span<const double> values) {
    if (values.empty()) throw std::invalid_argument("mean_std of no values");
    double sum = 0.0;
    for (double v : values) sum += v;
    const double mean = sum / static_cast<double>(values.size());
    if (values.size() == 1) return {mean, 0.0};
    double ss = 0.0;
    for (double v : values) ss += (v - mean) * (v - mean);
    return {mean, std::sqrt(ss / static_cast<double>(values.size() - 1))};
}

AggregateRow aggregate(std::span<const RunRecord> records) {
    if (records.empty()) throw std::invalid_argument("aggregate of no records");
    AggregateRow row;
    row.runs = static_cast<int>(records.size());
    std::vector<double> lengths, smooth, times, inclusive;
    for (const auto& r : records) {
        times.push_back(r.wall_time);
        inclusive.push_back(r.wall_time + r.prior_time);
        if (!r.success) continue;
        ++row.successes;
        if (!r.path_length || !r.smoothness) throw std::invalid_argument("successful run without metrics");
        lengths.push_back(*r.path_length);
        smooth.push_back(*r.smoothness);
    }
    row.success_rate = 100.0 * row.successes / row.runs;
    row.wall_time = mean_std(times);
    row.wall_time_with_prior = mean_std(inclusive);
    if (!lengths.empty()) {
        row.path_length = mean_std(lengths);
        row.smoothness = mean_std(smooth);
    }
    return row;
}

}  // namespace nrrt
