#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "nrrt/geometry.hpp"

namespace nrrt {

enum class CellState : std::uint8_t { Free = 0, Occupied = 1 };

/// Binary occupancy raster, row-major, coordinates in cell units.
class OccupancyGrid {
public:
    /// All-free grid. Throws std::invalid_argument for non-positive sizes.
    OccupancyGrid(int width, int height);
    OccupancyGrid(int width, int height, std::vector<CellState> cells);

    int width() const noexcept { return width_; }
    int height() const noexcept { return height_; }
    std::size_t size() const noexcept { return cells_.size(); }

    bool in_bounds(Cell c) const noexcept {
        return c.col >= 0 && c.row >= 0 && c.col < width_ && c.row < height_;
    }
    std::size_t index(Cell c) const noexcept {
        return static_cast<std::size_t>(c.row) * static_cast<std::size_t>(width_) +
               static_cast<std::size_t>(c.col);
    }
    Cell cell_at(std::size_t index) const noexcept {
        return {static_cast<int>(index % static_cast<std::size_t>(width_)),
                static_cast<int>(index / static_cast<std::size_t>(width_))};
    }

    CellState at(Cell c) const { return cells_[index(c)]; }
    bool cell_free(Cell c) const noexcept {
        return in_bounds(c) && cells_[index(c)] == CellState::Free;
    }
    void set(Cell c, CellState s) { cells_[index(c)] = s; }

    const std::vector<CellState>& cells() const noexcept { return cells_; }
    std::size_t occupied_count() const noexcept;
    double occupied_fraction() const noexcept {
        return static_cast<double>(occupied_count()) / static_cast<double>(cells_.size());
    }

    friend bool operator==(const OccupancyGrid&, const OccupancyGrid&) = default;

private:
    int width_;
    int height_;
    std::vector<CellState> cells_;
};

enum class Density { Sparse, Medium, Dense };

std::string_view to_string(Density d);
/// Accepts "sparse", "medium", "dense". Throws std::invalid_argument otherwise.
Density parse_density(std::string_view name);
inline constexpr Density kAllDensities[] = {Density::Sparse, Density::Medium, Density::Dense};

struct DensityBand {
    double min_fraction;
    double max_fraction;
};

/// Occupied-area bands per density. The defaults are 2-8%, 10-18% and 22-32%.
struct MapGenConfig {
    DensityBand sparse{0.02, 0.08};
    DensityBand medium{0.10, 0.18};
    DensityBand dense{0.22, 0.32};

    const DensityBand& band(Density d) const;
};

enum class ObstacleKind { Rectangle, Circle, LShape, UShape };

struct Obstacle {
    ObstacleKind kind;
    std::vector<Cell> cells;  // rasterized footprint, clipped to the grid
};

struct GeneratedMap {
    OccupancyGrid grid;
    std::vector<Obstacle> obstacles;
};

inline constexpr int kMinMapSide = 32;
inline constexpr int kDefaultMapSide = 224;

/// Deterministic procedural map. Medium and dense maps always contain at least
/// one concave (L or U) obstacle. Throws std::invalid_argument below 32x32.
GeneratedMap generate_map_detailed(std::uint64_t seed, Density density, int width, int height,
                                   const MapGenConfig& config = {});
OccupancyGrid generate_map(std::uint64_t seed, Density density, int width = kDefaultMapSide,
                           int height = kDefaultMapSide, const MapGenConfig& config = {});

struct PlanningProblem {
    OccupancyGrid grid;
    Point2 start;
    Point2 goal;
};

inline constexpr int kProblemRetryBudget = 100;

/// Draws a start/goal pair at free cell centers, at least `min_separation`
/// apart and connected under grid search. Throws InfeasibleProblem when the
/// retry budget is exhausted.
PlanningProblem sample_problem(const OccupancyGrid& grid, std::uint64_t seed, double min_separation,
                               int retry_budget = kProblemRetryBudget);

/// True iff `p` lies inside the grid and its containing cell is free.
bool is_free(const OccupancyGrid& grid, Point2 p);

inline constexpr double kCollisionSpacing = 0.25;

/// Supersampled segment check: every point at spacing <= 0.25 cells, endpoints
/// included, must be free. Symmetric in its endpoints.
bool segment_collision_free(const OccupancyGrid& grid, Point2 a, Point2 b);

/// JSON "gridmap/1" document.
std::string map_to_json(const OccupancyGrid& grid);
OccupancyGrid map_from_json(std::string_view text);
void save_map(const OccupancyGrid& grid, const std::filesystem::path& path);
OccupancyGrid load_map(const std::filesystem::path& path);

}  // namespace nrrt
