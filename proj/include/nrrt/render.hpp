#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "nrrt/grid_map.hpp"
#include "nrrt/planner.hpp"
#include "nrrt/prior.hpp"

namespace nrrt {

struct SceneStyle {
    double pixels_per_cell = 4.0;
    double tree_stroke = 0.25;
    double path_stroke = 1.2;
    double sample_radius = 0.6;
    double prior_max_opacity = 0.6;
    double marker_radius = 2.0;
};

/// Everything optional except the grid. Referenced objects must fit the grid.
struct SceneSpec {
    const OccupancyGrid* grid = nullptr;
    const Tree* tree = nullptr;
    const std::vector<Point2>* path = nullptr;
    const ProbabilityMap* prior = nullptr;
    std::optional<InformedEllipse> ellipse;
    const std::vector<Point2>* samples = nullptr;  // drawn as guidance points
    std::optional<Point2> start;
    std::optional<Point2> goal;

    bool show_obstacles = true;
    bool show_prior = true;
    bool show_tree = true;
    bool show_samples = true;
    bool show_ellipse = true;
    bool show_path = true;

    SceneStyle style;
};

/// SVG 1.1 document in cell coordinates (viewBox = grid extent). Output is a
/// pure function of the spec. Throws std::invalid_argument on a missing grid,
/// a prior of different size, or geometry outside the canvas.
std::string render_svg(const SceneSpec& spec);
void render_scene(const SceneSpec& spec, const std::filesystem::path& path);

}  // namespace nrrt
