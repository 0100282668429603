#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "nrrt/geometry.hpp"
#include "nrrt/grid_map.hpp"

namespace nrrt {

struct DatasetSample {
    std::string map;    // path relative to the manifest directory
    std::string label;  // NPRI mask file, relative
    Cell start;
    Cell goal;
    Density density;

    friend bool operator==(const DatasetSample&, const DatasetSample&) = default;
};

struct DatasetManifest {
    std::vector<DatasetSample> samples;

    friend bool operator==(const DatasetManifest&, const DatasetManifest&) = default;
};

std::string manifest_to_json(const DatasetManifest& manifest);
DatasetManifest manifest_from_json(std::string_view text);
void save_manifest(const DatasetManifest& manifest, const std::filesystem::path& path);
DatasetManifest load_manifest(const std::filesystem::path& path);

inline constexpr const char* kManifestName = "manifest.json";

struct DatasetConfig {
    std::uint64_t seed = 0;
    int count = 2000;
    std::vector<Density> densities{std::begin(kAllDensities), std::end(kAllDensities)};
    int map_size = kDefaultMapSide;
    double min_separation = 100.0;
    MapGenConfig map_gen;
};

/// Writes maps/<i>.json, labels/<i>.npri and manifest.json under out_dir.
/// Samples cycle through the densities, so count = 6 over three densities
/// yields two of each. Throws IoError on write failure.
DatasetManifest generate_dataset(const DatasetConfig& config, const std::filesystem::path& out_dir);

/// Re-derives a sample's label from its map and endpoints and compares it to
/// the stored mask. Returns an error description, or empty when consistent.
std::string verify_sample(const DatasetSample& sample, const std::filesystem::path& root);

}  // namespace nrrt
