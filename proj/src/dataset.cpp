#include "nrrt/dataset.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "nrrt/errors.hpp"
#include "nrrt/prior.hpp"
#include "nrrt/rng.hpp"
#include "nrrt/search.hpp"

namespace nrrt {

using nlohmann::json;

std::string manifest_to_json(const DatasetManifest& manifest) {
    json samples = json::array();
    for (const auto& s : manifest.samples) {
        samples.push_back({{"map", s.map},
                           {"label", s.label},
                           {"start", {s.start.col, s.start.row}},
                           {"goal", {s.goal.col, s.goal.row}},
                           {"density", to_string(s.density)}});
    }
    return json{{"format", "dataset/1"}, {"samples", samples}}.dump(1);
}

DatasetManifest manifest_from_json(std::string_view text) {
    DatasetManifest manifest;
    try {
        const json doc = json::parse(text);
        if (doc.at("format") != "dataset/1") throw FormatError("manifest: unsupported format", 0);
        for (const auto& s : doc.at("samples")) {
            const auto& st = s.at("start");
            const auto& gl = s.at("goal");
            manifest.samples.push_back({s.at("map").get<std::string>(), s.at("label").get<std::string>(),
                                        {st.at(0).get<int>(), st.at(1).get<int>()},
                                        {gl.at(0).get<int>(), gl.at(1).get<int>()},
                                        parse_density(s.at("density").get<std::string>())});
        }
    } catch (const json::parse_error& e) {
        throw FormatError(std::string("manifest: ") + e.what(), e.byte);
    } catch (const json::exception& e) {
        throw FormatError(std::string("manifest: ") + e.what(), 0);
    } catch (const std::invalid_argument& e) {
        throw FormatError(std::string("manifest: ") + e.what(), 0);
    }
    return manifest;
}

void save_manifest(const DatasetManifest& manifest, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open " + path.string() + " for writing");
    out << manifest_to_json(manifest) << '\n';
    if (!out) throw IoError("write failed: " + path.string());
}

DatasetManifest load_manifest(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return manifest_from_json(buf.str());
}

DatasetManifest generate_dataset(const DatasetConfig& config, const std::filesystem::path& out_dir) {
    if (config.count < 1) throw std::invalid_argument("dataset count must be >= 1");
    if (config.densities.empty()) throw std::invalid_argument("dataset needs at least one density");
    std::error_code ec;
    std::filesystem::create_directories(out_dir / "maps", ec);
    std::filesystem::create_directories(out_dir / "labels", ec);
    if (ec) throw IoError("cannot create " + out_dir.string() + ": " + ec.message());

    DatasetManifest manifest;
    for (int i = 0; i < config.count; ++i) {
        const Density density = config.densities[static_cast<std::size_t>(i) % config.densities.size()];
        // A map without a feasible pair is replaced by the next one in its seed chain.
        std::optional<PlanningProblem> problem;
        for (std::uint64_t attempt = 0; !problem; ++attempt) {
            const std::uint64_t seed = hash_combine(hash_combine(config.seed, static_cast<std::uint64_t>(i)), attempt);
            const OccupancyGrid grid =
                generate_map(seed, density, config.map_size, config.map_size, config.map_gen);
            try {
                problem = sample_problem(grid, hash_combine(seed, 1), config.min_separation);
            } catch (const InfeasibleProblem&) {
                if (attempt >= 50) throw;
            }
        }
        const Cell s = containing_cell(problem->start);
        const Cell g = containing_cell(problem->goal);
        const PathMask label = dilate_mask(*astar(problem->grid, s, g), problem->grid);

        char stem[32];
        std::snprintf(stem, sizeof stem, "%05d", i);
        const std::string map_rel = std::string("maps/") + stem + ".json";
        const std::string label_rel = std::string("labels/") + stem + ".npri";
        save_map(problem->grid, out_dir / map_rel);
        save_mask(label, out_dir / label_rel);
        manifest.samples.push_back({map_rel, label_rel, s, g, density});
    }
    save_manifest(manifest, out_dir / kManifestName);
    return manifest;
}

std::string verify_sample(const DatasetSample& sample, const std::filesystem::path& root) {
    try {
        const OccupancyGrid grid = load_map(root / sample.map);
        const PathMask label = load_mask(root / sample.label);
        if (label.width() != grid.width() || label.height() != grid.height()) return "label dimensions differ from map";
        for (int r = 0; r < grid.height(); ++r) {
            for (int c = 0; c < grid.width(); ++c) {
                if (label.on({c, r}) && !grid.cell_free({c, r})) return "label covers an occupied cell";
            }
        }
        const auto path = astar(grid, sample.start, sample.goal);
        if (!path) return "start and goal are disconnected";
        if (dilate_mask(*path, grid) != label) return "label does not match regenerated mask";
    } catch (const std::exception& e) {
        return e.what();
    }
    return {};
}

}  // namespace nrrt
