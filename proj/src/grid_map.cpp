#include "nrrt/grid_map.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "nrrt/errors.hpp"
#include "nrrt/rng.hpp"
#include "nrrt/search.hpp"

namespace nrrt {

OccupancyGrid::OccupancyGrid(int width, int height)
    : OccupancyGrid(width, height,
                    std::vector<CellState>(width > 0 && height > 0
                                               ? static_cast<std::size_t>(width) * height
                                               : 0,
                                           CellState::Free)) {}

OccupancyGrid::OccupancyGrid(int width, int height, std::vector<CellState> cells)
    : width_(width), height_(height), cells_(std::move(cells)) {
    if (width <= 0 || height <= 0) {
        throw std::invalid_argument("grid dimensions must be positive");
    }
    if (cells_.size() != static_cast<std::size_t>(width) * static_cast<std::size_t>(height)) {
        throw std::invalid_argument("cell count does not match width x height");
    }
}

std::size_t OccupancyGrid::occupied_count() const noexcept {
    return static_cast<std::size_t>(std::count(cells_.begin(), cells_.end(), CellState::Occupied));
}

std::string_view to_string(Density d) {
    switch (d) {
        case Density::Sparse: return "sparse";
        case Density::Medium: return "medium";
        case Density::Dense: return "dense";
    }
    return "unknown";
}

Density parse_density(std::string_view name) {
    if (name == "sparse") return Density::Sparse;
    if (name == "medium") return Density::Medium;
    if (name == "dense") return Density::Dense;
    throw std::invalid_argument("unknown density '" + std::string(name) + "'");
}

const DensityBand& MapGenConfig::band(Density d) const {
    switch (d) {
        case Density::Sparse: return sparse;
        case Density::Medium: return medium;
        case Density::Dense: return dense;
    }
    throw std::invalid_argument("unknown density");
}

namespace {

int scaled(double base, double scale) { return std::max(2, static_cast<int>(std::lround(base * scale))); }

int draw_int(Rng& rng, int lo, int hi) {
    return lo + static_cast<int>(rng.uniform_index(static_cast<std::uint64_t>(hi - lo + 1)));
}

void push_rect(std::vector<Cell>& out, int col0, int row0, int w, int h) {
    for (int r = row0; r < row0 + h; ++r) {
        for (int c = col0; c < col0 + w; ++c) out.push_back({c, r});
    }
}

// Footprints are built around the origin and then translated; cells outside
// the grid are dropped by the caller.
std::vector<Cell> make_shape(ObstacleKind kind, Rng& rng, double scale) {
    std::vector<Cell> cells;
    switch (kind) {
        case ObstacleKind::Rectangle: {
            const int w = draw_int(rng, scaled(6, scale), scaled(30, scale));
            const int h = draw_int(rng, scaled(6, scale), scaled(30, scale));
            push_rect(cells, 0, 0, w, h);
            break;
        }
        case ObstacleKind::Circle: {
            const int radius = draw_int(rng, scaled(4, scale), scaled(14, scale));
            const double r2 = static_cast<double>(radius) * radius;
            for (int r = -radius; r <= radius; ++r) {
                for (int c = -radius; c <= radius; ++c) {
                    if (static_cast<double>(r) * r + static_cast<double>(c) * c <= r2) {
                        cells.push_back({c + radius, r + radius});
                    }
                }
            }
            break;
        }
        case ObstacleKind::LShape: {
            int arm_a = draw_int(rng, scaled(12, scale), scaled(32, scale));
            int arm_b = draw_int(rng, scaled(12, scale), scaled(32, scale));
            const int t = draw_int(rng, scaled(3, scale), scaled(6, scale));
            arm_a = std::max(arm_a, t + 2);
            arm_b = std::max(arm_b, t + 2);
            push_rect(cells, 0, 0, t, arm_a);           // vertical arm
            push_rect(cells, t, arm_a - t, arm_b - t, t);  // foot
            break;
        }
        case ObstacleKind::UShape: {
            int w = draw_int(rng, scaled(14, scale), scaled(32, scale));
            int depth = draw_int(rng, scaled(12, scale), scaled(26, scale));
            const int t = draw_int(rng, scaled(3, scale), scaled(5, scale));
            w = std::max(w, 2 * t + 2);
            depth = std::max(depth, t + 2);
            push_rect(cells, 0, 0, t, depth);              // left wall
            push_rect(cells, w - t, 0, t, depth);          // right wall
            push_rect(cells, t, depth - t, w - 2 * t, t);  // base
            break;
        }
    }

    // One of four orientations.
    const int turns = static_cast<int>(rng.uniform_index(4));
    for (int k = 0; k < turns; ++k) {
        for (auto& c : cells) c = {-c.row, c.col};
    }
    int min_c = cells.front().col, min_r = cells.front().row;
    for (const auto& c : cells) {
        min_c = std::min(min_c, c.col);
        min_r = std::min(min_r, c.row);
    }
    for (auto& c : cells) c = {c.col - min_c, c.row - min_r};
    return cells;
}

ObstacleKind draw_kind(Rng& rng) {
    const double u = rng.uniform01();
    if (u < 0.35) return ObstacleKind::Rectangle;
    if (u < 0.65) return ObstacleKind::Circle;
    if (u < 0.85) return ObstacleKind::LShape;
    return ObstacleKind::UShape;
}

}  // namespace

GeneratedMap generate_map_detailed(std::uint64_t seed, Density density, int width, int height,
                                   const MapGenConfig& config) {
    if (width < kMinMapSide || height < kMinMapSide) {
        throw std::invalid_argument("map dimensions must be at least 32x32");
    }
    const DensityBand band = config.band(density);
    if (!(band.min_fraction >= 0.0 && band.min_fraction < band.max_fraction && band.max_fraction < 1.0)) {
        throw std::invalid_argument("invalid density band");
    }

    Rng rng(hash_combine(seed, static_cast<std::uint64_t>(density) + 1));
    GeneratedMap out{OccupancyGrid(width, height), {}};
    OccupancyGrid& grid = out.grid;

    const double total = static_cast<double>(grid.size());
    const double target =
        total * (band.min_fraction + (0.15 + 0.7 * rng.uniform01()) * (band.max_fraction - band.min_fraction));
    const double ceiling = total * band.max_fraction;
    const bool need_concave = density != Density::Sparse;

    double scale = std::min(width, height) / static_cast<double>(kDefaultMapSide);
    std::size_t occupied = 0;
    int consecutive_rejects = 0;
    bool have_concave = false;

    for (int attempt = 0; attempt < 20000 && (occupied < target || (need_concave && !have_concave));
         ++attempt) {
        ObstacleKind kind = draw_kind(rng);
        if (need_concave && !have_concave) {
            kind = rng.uniform01() < 0.5 ? ObstacleKind::LShape : ObstacleKind::UShape;
        }
        std::vector<Cell> shape = make_shape(kind, rng, scale);
        const int off_c = static_cast<int>(rng.uniform_index(static_cast<std::uint64_t>(width)));
        const int off_r = static_cast<int>(rng.uniform_index(static_cast<std::uint64_t>(height)));

        std::vector<Cell> placed;
        placed.reserve(shape.size());
        std::size_t added = 0;
        for (const auto& c : shape) {
            const Cell cell{c.col + off_c, c.row + off_r};
            if (!grid.in_bounds(cell)) continue;
            placed.push_back(cell);
            if (grid.at(cell) == CellState::Free) ++added;
        }
        // Concave shapes must survive clipping intact to count as concave.
        const bool concave = kind == ObstacleKind::LShape || kind == ObstacleKind::UShape;
        if (added == 0 || static_cast<double>(occupied + added) > ceiling ||
            (concave && placed.size() != shape.size())) {
            if (++consecutive_rejects > 200) {
                scale = std::max(scale * 0.8, 0.05);
                consecutive_rejects = 0;
            }
            continue;
        }
        consecutive_rejects = 0;
        for (const auto& cell : placed) grid.set(cell, CellState::Occupied);
        occupied += added;
        have_concave = have_concave || concave;
        out.obstacles.push_back({kind, std::move(placed)});
    }
    return out;
}

OccupancyGrid generate_map(std::uint64_t seed, Density density, int width, int height,
                           const MapGenConfig& config) {
    return generate_map_detailed(seed, density, width, height, config).grid;
}

PlanningProblem sample_problem(const OccupancyGrid& grid, std::uint64_t seed, double min_separation,
                               int retry_budget) {
    std::vector<std::size_t> free_cells;
    for (std::size_t i = 0; i < grid.size(); ++i) {
        if (grid.cells()[i] == CellState::Free) free_cells.push_back(i);
    }
    if (free_cells.size() < 2) throw InfeasibleProblem("grid has fewer than two free cells");

    Rng rng(hash_combine(seed, 0x70726f626c656dULL));
    for (int attempt = 0; attempt < retry_budget; ++attempt) {
        const Cell s = grid.cell_at(free_cells[rng.uniform_index(free_cells.size())]);
        const Cell g = grid.cell_at(free_cells[rng.uniform_index(free_cells.size())]);
        const Point2 start = cell_center(s);
        const Point2 goal = cell_center(g);
        if (s == g || distance(start, goal) < min_separation) continue;
        if (!astar(grid, s, g)) continue;
        return {grid, start, goal};
    }
    throw InfeasibleProblem("no feasible start/goal pair within " + std::to_string(retry_budget) +
                            " attempts");
}

bool is_free(const OccupancyGrid& grid, Point2 p) {
    if (!is_finite(p) || p.x < 0.0 || p.y < 0.0 || p.x >= grid.width() || p.y >= grid.height()) {
        return false;
    }
    return grid.cell_free(containing_cell(p));
}

bool segment_collision_free(const OccupancyGrid& grid, Point2 a, Point2 b) {
    // Canonical endpoint order makes the sample set identical for (a,b) and (b,a).
    if (b.x < a.x || (b.x == a.x && b.y < a.y)) std::swap(a, b);
    const double len = distance(a, b);
    const auto steps = static_cast<long>(std::ceil(len / kCollisionSpacing));
    if (!is_free(grid, a) || !is_free(grid, b)) return false;
    const Point2 d = b - a;
    for (long i = 1; i < steps; ++i) {
        const double t = static_cast<double>(i) / static_cast<double>(steps);
        if (!is_free(grid, a + t * d)) return false;
    }
    return true;
}

std::string map_to_json(const OccupancyGrid& grid) {
    nlohmann::json rows = nlohmann::json::array();
    for (int r = 0; r < grid.height(); ++r) {
        std::string row(static_cast<std::size_t>(grid.width()), '0');
        for (int c = 0; c < grid.width(); ++c) {
            if (grid.at({c, r}) == CellState::Occupied) row[static_cast<std::size_t>(c)] = '1';
        }
        rows.push_back(std::move(row));
    }
    nlohmann::json doc = {
        {"format", "gridmap/1"}, {"width", grid.width()}, {"height", grid.height()}, {"rows", std::move(rows)}};
    return doc.dump();
}

OccupancyGrid map_from_json(std::string_view text) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw FormatError(std::string("map JSON: ") + e.what(), e.byte);
    }
    if (!doc.is_object() || doc.value("format", "") != "gridmap/1") {
        throw FormatError("map JSON: missing or unsupported \"format\"", 0);
    }
    const auto& w = doc["width"];
    const auto& h = doc["height"];
    if (!w.is_number_integer() || !h.is_number_integer() || w.get<long long>() <= 0 ||
        h.get<long long>() <= 0 || w.get<long long>() > (1 << 20) || h.get<long long>() > (1 << 20)) {
        throw FormatError("map JSON: width/height must be positive integers", 0);
    }
    const int width = w.get<int>();
    const int height = h.get<int>();
    const auto& rows = doc["rows"];
    if (!rows.is_array() || rows.size() != static_cast<std::size_t>(height)) {
        throw FormatError("map JSON: expected " + std::to_string(height) + " rows", 0);
    }
    std::vector<CellState> cells;
    cells.reserve(static_cast<std::size_t>(width) * height);
    for (std::size_t r = 0; r < rows.size(); ++r) {
        if (!rows[r].is_string()) throw FormatError("map JSON: row is not a string", r + 1);
        const auto& row = rows[r].get_ref<const std::string&>();
        if (row.size() != static_cast<std::size_t>(width)) {
            throw FormatError("map JSON: row length mismatch", r + 1);
        }
        for (char ch : row) {
            if (ch == '0') {
                cells.push_back(CellState::Free);
            } else if (ch == '1') {
                cells.push_back(CellState::Occupied);
            } else {
                throw FormatError("map JSON: invalid cell character", r + 1);
            }
        }
    }
    return OccupancyGrid(width, height, std::move(cells));
}

void save_map(const OccupancyGrid& grid, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open " + path.string() + " for writing");
    out << map_to_json(grid) << '\n';
    if (!out) throw IoError("write failed: " + path.string());
}

OccupancyGrid load_map(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return map_from_json(buf.str());
}

}  // namespace nrrt
