#pragma once

#include <cstdint>
#include <optional>
#include <unordered_map>
#include <vector>

#include "nrrt/geometry.hpp"
#include "nrrt/grid_map.hpp"

namespace nrrt {

/// Exact 8-connected path cost `straight + diagonal * sqrt(2)`. Keeping the
/// two counts separate makes cost comparison exact, so A* and Dijkstra agree
/// bit-for-bit instead of up to summation order.
struct OctileCost {
    std::int64_t straight = 0;
    std::int64_t diagonal = 0;

    double value() const noexcept;

    friend bool operator==(const OctileCost&, const OctileCost&) = default;
    friend bool operator<(const OctileCost& a, const OctileCost& b) noexcept;
    friend OctileCost operator+(OctileCost a, OctileCost b) noexcept {
        return {a.straight + b.straight, a.diagonal + b.diagonal};
    }
};

/// Octile distance between two cells.
OctileCost octile_distance(Cell a, Cell b) noexcept;

struct CellPath {
    std::vector<Cell> cells;
    OctileCost cost;
};

/// Neighbour rule shared by A* and Dijkstra: 8-connected, diagonal moves only
/// when both orthogonally adjacent cells are free (no corner cutting).
std::vector<std::pair<Cell, OctileCost>> free_neighbors(const OccupancyGrid& grid, Cell c);

/// Minimal-cost path or nullopt when the goal is unreachable. Ties on f are
/// expanded lowest linear index first. Throws std::invalid_argument when an
/// endpoint is out of bounds or occupied.
std::optional<CellPath> astar(const OccupancyGrid& grid, Cell start, Cell goal);

/// Exact single-source costs over the free-cell graph, keyed by linear index.
/// Unreachable cells are absent.
std::unordered_map<std::size_t, OctileCost> dijkstra_oracle(const OccupancyGrid& grid, Cell start);

/// Binary mask sharing the grid's dimensions.
class PathMask {
public:
    PathMask(int width, int height) : width_(width), height_(height), on_(static_cast<std::size_t>(width) * height, 0) {}

    int width() const noexcept { return width_; }
    int height() const noexcept { return height_; }
    bool on(Cell c) const { return on_[static_cast<std::size_t>(c.row) * width_ + c.col] != 0; }
    void set(Cell c) { on_[static_cast<std::size_t>(c.row) * width_ + c.col] = 1; }
    const std::vector<std::uint8_t>& cells() const noexcept { return on_; }
    std::size_t on_count() const noexcept;

    friend bool operator==(const PathMask&, const PathMask&) = default;

private:
    int width_;
    int height_;
    std::vector<std::uint8_t> on_;
};

inline constexpr double kLabelDilationRadius = 3.0;

/// Marks every free cell whose center is within `radius` (Euclidean) of some
/// path cell center. Throws std::invalid_argument for negative radius.
PathMask dilate_mask(const CellPath& path, const OccupancyGrid& grid, double radius = kLabelDilationRadius);

}  // namespace nrrt
