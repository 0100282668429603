#include "nrrt/render.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <sstream>
#include <stdexcept>

#include "nrrt/errors.hpp"

namespace nrrt {

namespace {

// Shortest fixed-point form with up to six decimals.
std::string num(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.6f", v);
    std::string s(buf);
    while (!s.empty() && s.back() == '0') s.pop_back();
    if (!s.empty() && s.back() == '.') s.pop_back();
    if (s == "-0") s = "0";
    return s;
}

void require_inside(const OccupancyGrid& grid, Point2 p, const char* what) {
    if (!is_finite(p) || p.x < 0.0 || p.y < 0.0 || p.x > grid.width() || p.y > grid.height()) {
        throw std::invalid_argument(std::string(what) + " lies outside the map");
    }
}

}  // namespace

std::string render_svg(const SceneSpec& spec) {
    if (spec.grid == nullptr) throw std::invalid_argument("scene has no grid");
    const OccupancyGrid& grid = *spec.grid;
    if (spec.prior && !spec.prior->matches(grid)) throw std::invalid_argument("prior dimensions differ from grid");
    if (spec.path) {
        for (const auto& p : *spec.path) require_inside(grid, p, "path vertex");
    }
    if (spec.tree) {
        for (const auto& p : spec.tree->nodes()) require_inside(grid, p, "tree node");
    }
    if (spec.samples) {
        for (const auto& p : *spec.samples) require_inside(grid, p, "sample");
    }
    if (spec.start) require_inside(grid, *spec.start, "start");
    if (spec.goal) require_inside(grid, *spec.goal, "goal");

    const SceneStyle& st = spec.style;
    const int w = grid.width();
    const int h = grid.height();
    std::ostringstream out;
    out << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
        << "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"" << num(w * st.pixels_per_cell)
        << "\" height=\"" << num(h * st.pixels_per_cell) << "\" viewBox=\"0 0 " << w << ' ' << h << "\">\n"
        << "<rect id=\"background\" x=\"0\" y=\"0\" width=\"" << w << "\" height=\"" << h << "\" fill=\"#ffffff\"/>\n";

    if (spec.show_obstacles) {
        out << "<g id=\"obstacles\" fill=\"#2b2b2b\">\n";
        for (int r = 0; r < h; ++r) {
            int c = 0;
            while (c < w) {
                if (grid.at({c, r}) != CellState::Occupied) {
                    ++c;
                    continue;
                }
                const int run_start = c;
                while (c < w && grid.at({c, r}) == CellState::Occupied) ++c;
                out << "<rect x=\"" << run_start << "\" y=\"" << r << "\" width=\"" << (c - run_start)
                    << "\" height=\"1\"/>\n";
            }
        }
        out << "</g>\n";
    }

    if (spec.prior && spec.show_prior) {
        const auto weights = spec.prior->weights();
        const double peak = *std::max_element(weights.begin(), weights.end());
        out << "<g id=\"prior\" fill=\"#ff8c00\">\n";
        for (std::size_t i = 0; i < weights.size(); ++i) {
            if (weights[i] <= 0.0) continue;
            out << "<rect x=\"" << (i % static_cast<std::size_t>(w)) << "\" y=\"" << (i / static_cast<std::size_t>(w))
                << "\" width=\"1\" height=\"1\" fill-opacity=\"" << num(st.prior_max_opacity * weights[i] / peak)
                << "\"/>\n";
        }
        out << "</g>\n";
    }

    if (spec.tree && spec.show_tree) {
        out << "<g id=\"tree\" stroke=\"#7f7f7f\" stroke-width=\"" << num(st.tree_stroke) << "\">\n";
        const Tree& t = *spec.tree;
        for (std::size_t i = 1; i < t.size(); ++i) {
            const Point2 a = t.node(t.parent(i));
            const Point2 b = t.node(i);
            out << "<line x1=\"" << num(a.x) << "\" y1=\"" << num(a.y) << "\" x2=\"" << num(b.x) << "\" y2=\""
                << num(b.y) << "\"/>\n";
        }
        out << "</g>\n";
    }

    if (spec.samples && spec.show_samples) {
        out << "<g id=\"samples\" fill=\"#ffa500\">\n";
        for (const auto& p : *spec.samples) {
            out << "<circle cx=\"" << num(p.x) << "\" cy=\"" << num(p.y) << "\" r=\"" << num(st.sample_radius)
                << "\"/>\n";
        }
        out << "</g>\n";
    }

    if (spec.ellipse && spec.show_ellipse) {
        const InformedEllipse& e = *spec.ellipse;
        const double degrees = e.rotation() * 180.0 / std::numbers::pi;
        out << "<ellipse id=\"informed-ellipse\" cx=\"" << num(e.center().x) << "\" cy=\"" << num(e.center().y)
            << "\" rx=\"" << num(e.semi_major()) << "\" ry=\"" << num(e.semi_minor()) << "\" transform=\"rotate("
            << num(degrees) << ' ' << num(e.center().x) << ' ' << num(e.center().y)
            << ")\" fill=\"none\" stroke=\"#ff00ff\" stroke-width=\"0.8\" stroke-dasharray=\"3 2\"/>\n";
    }

    if (spec.path && spec.show_path && !spec.path->empty()) {
        out << "<polyline id=\"path\" fill=\"none\" stroke=\"#1f3fbf\" stroke-width=\"" << num(st.path_stroke)
            << "\" stroke-linejoin=\"round\" points=\"";
        bool first = true;
        for (const auto& p : *spec.path) {
            if (!first) out << ' ';
            first = false;
            out << num(p.x) << ',' << num(p.y);
        }
        out << "\"/>\n";
    }

    if (spec.start) {
        out << "<circle id=\"start\" cx=\"" << num(spec.start->x) << "\" cy=\"" << num(spec.start->y) << "\" r=\""
            << num(st.marker_radius) << "\" fill=\"#e41a1c\"/>\n";
    }
    if (spec.goal) {
        out << "<circle id=\"goal\" cx=\"" << num(spec.goal->x) << "\" cy=\"" << num(spec.goal->y) << "\" r=\""
            << num(st.marker_radius) << "\" fill=\"#2ca02c\"/>\n";
    }
    out << "</svg>\n";
    return out.str();
}

void render_scene(const SceneSpec& spec, const std::filesystem::path& path) {
    const std::string svg = render_svg(spec);
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open " + path.string() + " for writing");
    out << svg;
    if (!out) throw IoError("write failed: " + path.string());
}

}  // namespace nrrt
