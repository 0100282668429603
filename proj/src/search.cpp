#include "nrrt/search.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <queue>
#include <stdexcept>

namespace nrrt {

double OctileCost::value() const noexcept {
    return static_cast<double>(straight) + static_cast<double>(diagonal) * std::numbers::sqrt2;
}

bool operator<(const OctileCost& a, const OctileCost& b) noexcept {
    // a < b  <=>  A < B*sqrt(2) with A = a.s - b.s, B = b.d - a.d.
    const std::int64_t lhs = a.straight - b.straight;
    const std::int64_t rhs = b.diagonal - a.diagonal;
    if (rhs >= 0) {
        if (lhs < 0) return true;
        return lhs * lhs < 2 * rhs * rhs;
    }
    if (lhs >= 0) return false;
    return lhs * lhs > 2 * rhs * rhs;
}

OctileCost octile_distance(Cell a, Cell b) noexcept {
    const std::int64_t dx = std::abs(a.col - b.col);
    const std::int64_t dy = std::abs(a.row - b.row);
    const std::int64_t diag = std::min(dx, dy);
    return {std::max(dx, dy) - diag, diag};
}

std::vector<std::pair<Cell, OctileCost>> free_neighbors(const OccupancyGrid& grid, Cell c) {
    std::vector<std::pair<Cell, OctileCost>> out;
    out.reserve(8);
    for (int dr = -1; dr <= 1; ++dr) {
        for (int dc = -1; dc <= 1; ++dc) {
            if (dr == 0 && dc == 0) continue;
            const Cell n{c.col + dc, c.row + dr};
            if (!grid.cell_free(n)) continue;
            if (dr != 0 && dc != 0) {
                if (!grid.cell_free({c.col + dc, c.row}) || !grid.cell_free({c.col, c.row + dr})) continue;
                out.push_back({n, {0, 1}});
            } else {
                out.push_back({n, {1, 0}});
            }
        }
    }
    return out;
}

namespace {

struct QueueEntry {
    OctileCost key;
    std::size_t index;
};

// Min-heap on (key, index).
struct LaterFirst {
    bool operator()(const QueueEntry& a, const QueueEntry& b) const noexcept {
        if (a.key == b.key) return a.index > b.index;
        return b.key < a.key;
    }
};

void require_free_endpoint(const OccupancyGrid& grid, Cell c, const char* what) {
    if (!grid.cell_free(c)) {
        throw std::invalid_argument(std::string(what) + " cell is out of bounds or occupied");
    }
}

}  // namespace

std::optional<CellPath> astar(const OccupancyGrid& grid, Cell start, Cell goal) {
    require_free_endpoint(grid, start, "start");
    require_free_endpoint(grid, goal, "goal");

    constexpr std::size_t kNone = static_cast<std::size_t>(-1);
    const std::size_t n = grid.size();
    std::vector<OctileCost> g(n);
    std::vector<bool> seen(n, false), closed(n, false);
    std::vector<std::size_t> parent(n, kNone);
    std::priority_queue<QueueEntry, std::vector<QueueEntry>, LaterFirst> open;

    const std::size_t s = grid.index(start);
    const std::size_t t = grid.index(goal);
    seen[s] = true;
    open.push({octile_distance(start, goal), s});

    while (!open.empty()) {
        const std::size_t cur = open.top().index;
        open.pop();
        if (closed[cur]) continue;
        closed[cur] = true;
        if (cur == t) break;
        const Cell cell = grid.cell_at(cur);
        for (const auto& [next, step] : free_neighbors(grid, cell)) {
            const std::size_t ni = grid.index(next);
            if (closed[ni]) continue;
            const OctileCost cand = g[cur] + step;
            if (!seen[ni] || cand < g[ni]) {
                seen[ni] = true;
                g[ni] = cand;
                parent[ni] = cur;
                open.push({cand + octile_distance(next, goal), ni});
            }
        }
    }
    if (!closed[t]) return std::nullopt;

    CellPath path;
    path.cost = g[t];
    for (std::size_t i = t; i != kNone; i = parent[i]) path.cells.push_back(grid.cell_at(i));
    std::reverse(path.cells.begin(), path.cells.end());
    return path;
}

std::unordered_map<std::size_t, OctileCost> dijkstra_oracle(const OccupancyGrid& grid, Cell start) {
    require_free_endpoint(grid, start, "start");

    std::unordered_map<std::size_t, OctileCost> dist;
    std::vector<bool> closed(grid.size(), false);
    std::priority_queue<QueueEntry, std::vector<QueueEntry>, LaterFirst> open;
    const std::size_t s = grid.index(start);
    dist[s] = {};
    open.push({{}, s});
    while (!open.empty()) {
        const auto [key, cur] = open.top();
        open.pop();
        if (closed[cur]) continue;
        closed[cur] = true;
        for (const auto& [next, step] : free_neighbors(grid, grid.cell_at(cur))) {
            const std::size_t ni = grid.index(next);
            const OctileCost cand = key + step;
            auto it = dist.find(ni);
            if (it == dist.end() || cand < it->second) {
                dist[ni] = cand;
                open.push({cand, ni});
            }
        }
    }
    return dist;
}

std::size_t PathMask::on_count() const noexcept {
    return static_cast<std::size_t>(std::count(on_.begin(), on_.end(), std::uint8_t{1}));
}

PathMask dilate_mask(const CellPath& path, const OccupancyGrid& grid, double radius) {
    if (!(radius >= 0.0)) throw std::invalid_argument("dilation radius must be non-negative");
    PathMask mask(grid.width(), grid.height());
    const int reach = static_cast<int>(std::floor(radius));
    const double r2 = radius * radius;
    for (const Cell& p : path.cells) {
        for (int dr = -reach; dr <= reach; ++dr) {
            for (int dc = -reach; dc <= reach; ++dc) {
                if (static_cast<double>(dr) * dr + static_cast<double>(dc) * dc > r2) continue;
                const Cell c{p.col + dc, p.row + dr};
                if (grid.cell_free(c)) mask.set(c);
            }
        }
    }
    return mask;
}

}  // namespace nrrt
