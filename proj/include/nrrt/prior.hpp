#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "nrrt/geometry.hpp"
#include "nrrt/grid_map.hpp"
#include "nrrt/rng.hpp"
#include "nrrt/search.hpp"

namespace nrrt {

/// Per-cell sampling distribution over a grid. Every instance satisfies:
/// weights >= 0, sum = 1 within 1e-6, zero weight on occupied cells of the
/// grid it was built against.
class ProbabilityMap {
public:
    int width() const noexcept { return width_; }
    int height() const noexcept { return height_; }
    double weight(Cell c) const { return weights_[static_cast<std::size_t>(c.row) * width_ + c.col]; }
    std::span<const double> weights() const noexcept { return weights_; }

    bool matches(const OccupancyGrid& grid) const noexcept {
        return grid.width() == width_ && grid.height() == height_;
    }

private:
    friend ProbabilityMap normalize(std::span<const double>, const OccupancyGrid&);
    ProbabilityMap(int width, int height, std::vector<double> weights)
        : width_(width), height_(height), weights_(std::move(weights)) {}

    int width_;
    int height_;
    std::vector<double> weights_;
};

/// Zeroes occupied cells and rescales to sum 1. Throws EmptyPrior when no
/// positive weight remains, std::invalid_argument on size mismatch or a
/// negative or non-finite weight.
ProbabilityMap normalize(std::span<const double> weights, const OccupancyGrid& grid);
ProbabilityMap normalize(const PathMask& mask, const OccupancyGrid& grid);

/// Normalized, dilated grid-search path mask for a problem. Stands in for a
/// perfect learned prediction. Throws InfeasibleProblem if unreachable.
ProbabilityMap oracle_prior(const PlanningProblem& problem, double dilation_radius = kLabelDilationRadius);

struct SamplerConfig {
    double alpha = 0.5;
    int max_rejections = 100;
};

void validate(const SamplerConfig& cfg);

/// Uniform point sampling over free space: a free cell uniformly, then a point
/// uniform within it. Throws EmptyFreeSpace for grids without free cells.
class FreeSpaceSampler {
public:
    explicit FreeSpaceSampler(const OccupancyGrid& grid);
    Point2 sample(Rng& rng) const;

private:
    std::vector<std::uint32_t> free_cells_;
    int width_;
};

/// Point uniform within a cell, strictly inside [col, col+1) x [row, row+1).
Point2 point_in_cell(Cell c, Rng& rng);

/// Draws from alpha * P + (1 - alpha) * U(free). At alpha == 0 and alpha == 1
/// no selector draw is made, so alpha == 0 consumes the generator exactly like
/// FreeSpaceSampler.
class MixtureSampler {
public:
    MixtureSampler(const ProbabilityMap& prior, const OccupancyGrid& grid, SamplerConfig cfg);

    Point2 sample(Rng& rng) const;
    Point2 sample_prior(Rng& rng) const;
    const SamplerConfig& config() const noexcept { return cfg_; }

private:
    FreeSpaceSampler uniform_;
    std::vector<double> cumulative_;
    int width_;
    SamplerConfig cfg_;
};

Point2 sample_mixture(const ProbabilityMap& prior, const OccupancyGrid& grid, const SamplerConfig& cfg, Rng& rng);

/// Informed set: points admitting a start-to-goal path no longer than c_best.
class InformedEllipse {
public:
    /// Throws std::invalid_argument for non-finite inputs or c_best < c_min
    /// (beyond 1e-9 relative slack, which is clamped).
    InformedEllipse(Point2 start, Point2 goal, double c_best);

    Point2 start() const noexcept { return start_; }
    Point2 goal() const noexcept { return goal_; }
    double c_best() const noexcept { return c_best_; }
    double c_min() const noexcept { return c_min_; }
    Point2 center() const noexcept { return center_; }
    double semi_major() const noexcept { return a_; }
    double semi_minor() const noexcept { return b_; }
    /// Heading of goal - start, radians.
    double rotation() const noexcept { return theta_; }
    bool degenerate() const noexcept { return b_ == 0.0; }

    bool contains(Point2 p) const noexcept;
    /// Uniform draw inside the ellipse via the unit-disk transform.
    Point2 sample_uniform(Rng& rng) const;

private:
    Point2 start_, goal_, center_;
    double c_best_, c_min_, a_, b_, theta_, cos_, sin_;
};

inline bool ellipse_contains(const InformedEllipse& e, Point2 p) { return e.contains(p); }

/// Draws from the mixture restricted to the ellipse: rejection first, then up
/// to max_rejections direct ellipse draws kept only in free space. Returns
/// nullopt when both phases fail (ellipse exhausted).
std::optional<Point2> sample_informed(const MixtureSampler& mixture, const InformedEllipse& e,
                                      const OccupancyGrid& grid, Rng& rng);
std::optional<Point2> sample_informed(const ProbabilityMap& prior, const InformedEllipse& e,
                                      const OccupancyGrid& grid, const SamplerConfig& cfg, Rng& rng);

// Binary interchange: "NPRI", version 0x01, u32 LE width, u32 LE height, then
// width*height f32 LE weights row-major.
inline constexpr char kPriorMagic[4] = {'N', 'P', 'R', 'I'};
inline constexpr std::uint8_t kPriorVersion = 0x01;
// Label masks: "NPRI", version 0x02, flag byte (bit 0 = mask), then the same
// dimension and weight layout with unnormalized 0/1 weights.
inline constexpr std::uint8_t kMaskVersion = 0x02;
inline constexpr std::uint8_t kMaskFlag = 0x01;

std::string encode_prior(const ProbabilityMap& prior);
/// Parses and re-validates against `grid`; renormalizes when |sum - 1| <= 1e-4.
/// Throws FormatError (offset = byte offset) on any violation.
ProbabilityMap decode_prior(std::string_view bytes, const OccupancyGrid& grid);
void save_prior(const ProbabilityMap& prior, const std::filesystem::path& path);
ProbabilityMap load_prior(const std::filesystem::path& path, const OccupancyGrid& grid);

std::string encode_mask(const PathMask& mask);
PathMask decode_mask(std::string_view bytes);
void save_mask(const PathMask& mask, const std::filesystem::path& path);
PathMask load_mask(const std::filesystem::path& path);

}  // namespace nrrt
