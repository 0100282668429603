#include "nrrt/prior.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <numbers>
#include <sstream>
#include <stdexcept>

#include "nrrt/errors.hpp"

namespace nrrt {

ProbabilityMap normalize(std::span<const double> weights, const OccupancyGrid& grid) {
    if (weights.size() != grid.size()) throw std::invalid_argument("weight count does not match grid");
    std::vector<double> w(weights.begin(), weights.end());
    double sum = 0.0;
    for (std::size_t i = 0; i < w.size(); ++i) {
        if (!std::isfinite(w[i]) || w[i] < 0.0) throw std::invalid_argument("weights must be finite and non-negative");
        if (grid.cells()[i] == CellState::Occupied) w[i] = 0.0;
        sum += w[i];
    }
    if (!(sum > 0.0)) throw EmptyPrior("no positive weight on a free cell");
    for (double& x : w) x /= sum;
    return ProbabilityMap(grid.width(), grid.height(), std::move(w));
}

ProbabilityMap normalize(const PathMask& mask, const OccupancyGrid& grid) {
    if (mask.width() != grid.width() || mask.height() != grid.height()) {
        throw std::invalid_argument("mask dimensions do not match grid");
    }
    std::vector<double> w(mask.cells().begin(), mask.cells().end());
    return normalize(w, grid);
}

ProbabilityMap oracle_prior(const PlanningProblem& problem, double dilation_radius) {
    const Cell s = containing_cell(problem.start);
    const Cell g = containing_cell(problem.goal);
    if (!problem.grid.cell_free(s) || !problem.grid.cell_free(g)) {
        throw InfeasibleProblem("start or goal is not in free space");
    }
    const auto path = astar(problem.grid, s, g);
    if (!path) throw InfeasibleProblem("goal is unreachable from start");
    return normalize(dilate_mask(*path, problem.grid, dilation_radius), problem.grid);
}

void validate(const SamplerConfig& cfg) {
    if (!(cfg.alpha >= 0.0 && cfg.alpha <= 1.0)) throw std::invalid_argument("alpha must lie in [0, 1]");
    if (cfg.max_rejections <= 0) throw std::invalid_argument("max_rejections must be positive");
}

Point2 point_in_cell(Cell c, Rng& rng) {
    const double x0 = c.col;
    const double y0 = c.row;
    double x = x0 + rng.uniform01();
    double y = y0 + rng.uniform01();
    // Rounding can land exactly on the far edge for large coordinates.
    if (x >= x0 + 1.0) x = std::nextafter(x0 + 1.0, x0);
    if (y >= y0 + 1.0) y = std::nextafter(y0 + 1.0, y0);
    return {x, y};
}

FreeSpaceSampler::FreeSpaceSampler(const OccupancyGrid& grid) : width_(grid.width()) {
    for (std::size_t i = 0; i < grid.size(); ++i) {
        if (grid.cells()[i] == CellState::Free) free_cells_.push_back(static_cast<std::uint32_t>(i));
    }
    if (free_cells_.empty()) throw EmptyFreeSpace("grid has no free cells");
}

Point2 FreeSpaceSampler::sample(Rng& rng) const {
    const std::uint32_t idx = free_cells_[rng.uniform_index(free_cells_.size())];
    return point_in_cell({static_cast<int>(idx % width_), static_cast<int>(idx / width_)}, rng);
}

MixtureSampler::MixtureSampler(const ProbabilityMap& prior, const OccupancyGrid& grid, SamplerConfig cfg)
    : uniform_(grid), width_(grid.width()), cfg_(cfg) {
    validate(cfg_);
    if (!prior.matches(grid)) throw std::invalid_argument("prior dimensions do not match grid");
    cumulative_.resize(prior.weights().size());
    double acc = 0.0;
    for (std::size_t i = 0; i < cumulative_.size(); ++i) {
        acc += prior.weights()[i];
        cumulative_[i] = acc;
    }
}

Point2 MixtureSampler::sample_prior(Rng& rng) const {
    const double total = cumulative_.back();
    const double u = rng.uniform01() * total;
    auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), u);
    if (it == cumulative_.end()) {
        // u rounded up to the total: take the last cell carrying weight.
        it = std::lower_bound(cumulative_.begin(), cumulative_.end(), total);
    }
    const auto idx = static_cast<std::size_t>(it - cumulative_.begin());
    return point_in_cell({static_cast<int>(idx % width_), static_cast<int>(idx / width_)}, rng);
}

Point2 MixtureSampler::sample(Rng& rng) const {
    if (cfg_.alpha <= 0.0) return uniform_.sample(rng);
    if (cfg_.alpha >= 1.0) return sample_prior(rng);
    return rng.uniform01() < cfg_.alpha ? sample_prior(rng) : uniform_.sample(rng);
}

Point2 sample_mixture(const ProbabilityMap& prior, const OccupancyGrid& grid, const SamplerConfig& cfg, Rng& rng) {
    return MixtureSampler(prior, grid, cfg).sample(rng);
}

InformedEllipse::InformedEllipse(Point2 start, Point2 goal, double c_best)
    : start_(start), goal_(goal), c_best_(c_best) {
    if (!is_finite(start) || !is_finite(goal) || !std::isfinite(c_best)) {
        throw std::invalid_argument("ellipse parameters must be finite");
    }
    c_min_ = distance(start, goal);
    if (c_best_ < c_min_) {
        if (c_best_ < c_min_ * (1.0 - 1e-9)) throw std::invalid_argument("c_best below straight-line distance");
        c_best_ = c_min_;
    }
    center_ = 0.5 * (start + goal);
    a_ = c_best_ / 2.0;
    b_ = std::sqrt(std::max(0.0, c_best_ * c_best_ - c_min_ * c_min_)) / 2.0;
    theta_ = std::atan2(goal.y - start.y, goal.x - start.x);
    cos_ = std::cos(theta_);
    sin_ = std::sin(theta_);
}

bool InformedEllipse::contains(Point2 p) const noexcept {
    const double dx = p.x - center_.x;
    const double dy = p.y - center_.y;
    const double u = cos_ * dx + sin_ * dy;
    const double v = -sin_ * dx + cos_ * dy;
    if (b_ == 0.0) return std::abs(v) <= 1e-9 && std::abs(u) <= a_ + 1e-9;
    const double q = (u / a_) * (u / a_) + (v / b_) * (v / b_);
    return q <= 1.0 + 1e-12;
}

Point2 InformedEllipse::sample_uniform(Rng& rng) const {
    const double r = std::sqrt(rng.uniform01());
    const double phi = 2.0 * std::numbers::pi * rng.uniform01();
    const double u = a_ * r * std::cos(phi);
    const double v = b_ * r * std::sin(phi);
    return {center_.x + cos_ * u - sin_ * v, center_.y + sin_ * u + cos_ * v};
}

std::optional<Point2> sample_informed(const MixtureSampler& mixture, const InformedEllipse& e,
                                      const OccupancyGrid& grid, Rng& rng) {
    const int budget = mixture.config().max_rejections;
    for (int i = 0; i < budget; ++i) {
        const Point2 p = mixture.sample(rng);
        if (e.contains(p)) return p;
    }
    for (int i = 0; i < budget; ++i) {
        const Point2 p = e.sample_uniform(rng);
        if (e.contains(p) && is_free(grid, p)) return p;
    }
    return std::nullopt;
}

std::optional<Point2> sample_informed(const ProbabilityMap& prior, const InformedEllipse& e,
                                      const OccupancyGrid& grid, const SamplerConfig& cfg, Rng& rng) {
    return sample_informed(MixtureSampler(prior, grid, cfg), e, grid, rng);
}

namespace {

constexpr std::size_t kPriorHeader = 13;
constexpr std::size_t kMaskHeader = 14;

void put_u32(std::string& out, std::uint32_t v) {
    for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xFFu));
}

std::uint32_t get_u32(std::string_view in, std::size_t at) {
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(static_cast<unsigned char>(in[at + i])) << (8 * i);
    return v;
}

void put_f32(std::string& out, float f) { put_u32(out, std::bit_cast<std::uint32_t>(f)); }
float get_f32(std::string_view in, std::size_t at) { return std::bit_cast<float>(get_u32(in, at)); }

// Checks magic/version and returns the declared dimensions.
std::pair<std::uint32_t, std::uint32_t> read_header(std::string_view bytes, std::uint8_t version,
                                                    std::size_t header) {
    if (bytes.size() < header) throw FormatError("prior file truncated in header", bytes.size());
    if (std::memcmp(bytes.data(), kPriorMagic, 4) != 0) throw FormatError("bad magic, expected NPRI", 0);
    if (static_cast<std::uint8_t>(bytes[4]) != version) {
        throw FormatError("unsupported version byte " + std::to_string(static_cast<unsigned char>(bytes[4])), 4);
    }
    const std::size_t dims = header - 8;
    const std::uint32_t w = get_u32(bytes, dims);
    const std::uint32_t h = get_u32(bytes, dims + 4);
    if (w == 0 || h == 0) throw FormatError("zero width or height", dims);
    const std::uint64_t expected = header + 4ULL * w * h;
    if (bytes.size() < expected) throw FormatError("prior file truncated in weights", bytes.size());
    if (bytes.size() > expected) throw FormatError("trailing bytes after weights", expected);
    return {w, h};
}

std::string slurp(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

void spit(const std::filesystem::path& path, const std::string& bytes) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open " + path.string() + " for writing");
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw IoError("write failed: " + path.string());
}

}  // namespace

std::string encode_prior(const ProbabilityMap& prior) {
    std::string out(kPriorMagic, 4);
    out.push_back(static_cast<char>(kPriorVersion));
    put_u32(out, static_cast<std::uint32_t>(prior.width()));
    put_u32(out, static_cast<std::uint32_t>(prior.height()));
    out.reserve(out.size() + 4 * prior.weights().size());
    for (double w : prior.weights()) put_f32(out, static_cast<float>(w));
    return out;
}

ProbabilityMap decode_prior(std::string_view bytes, const OccupancyGrid& grid) {
    const auto [w, h] = read_header(bytes, kPriorVersion, kPriorHeader);
    if (w != static_cast<std::uint32_t>(grid.width())) {
        throw FormatError("width " + std::to_string(w) + " does not match map width " + std::to_string(grid.width()), 5);
    }
    if (h != static_cast<std::uint32_t>(grid.height())) {
        throw FormatError("height " + std::to_string(h) + " does not match map height " + std::to_string(grid.height()), 9);
    }
    std::vector<double> weights(grid.size());
    double sum = 0.0;
    for (std::size_t i = 0; i < weights.size(); ++i) {
        const std::size_t at = kPriorHeader + 4 * i;
        const float f = get_f32(bytes, at);
        if (!std::isfinite(f) || f < 0.0f) throw FormatError("negative or non-finite weight", at);
        if (f > 0.0f && grid.cells()[i] == CellState::Occupied) {
            throw FormatError("positive weight on occupied cell", at);
        }
        weights[i] = f;
        sum += f;
    }
    if (!(std::abs(sum - 1.0) <= 1e-4)) {
        throw FormatError("weights sum to " + std::to_string(sum) + ", expected 1 +/- 1e-4", kPriorHeader);
    }
    return normalize(weights, grid);
}

void save_prior(const ProbabilityMap& prior, const std::filesystem::path& path) { spit(path, encode_prior(prior)); }

ProbabilityMap load_prior(const std::filesystem::path& path, const OccupancyGrid& grid) {
    return decode_prior(slurp(path), grid);
}

std::string encode_mask(const PathMask& mask) {
    std::string out(kPriorMagic, 4);
    out.push_back(static_cast<char>(kMaskVersion));
    out.push_back(static_cast<char>(kMaskFlag));
    put_u32(out, static_cast<std::uint32_t>(mask.width()));
    put_u32(out, static_cast<std::uint32_t>(mask.height()));
    for (std::uint8_t on : mask.cells()) put_f32(out, on ? 1.0f : 0.0f);
    return out;
}

PathMask decode_mask(std::string_view bytes) {
    const auto [w, h] = read_header(bytes, kMaskVersion, kMaskHeader);
    if ((static_cast<std::uint8_t>(bytes[5]) & kMaskFlag) == 0) throw FormatError("mask flag not set", 5);
    if (w > (1u << 20) || h > (1u << 20)) throw FormatError("mask dimensions too large", 6);
    PathMask mask(static_cast<int>(w), static_cast<int>(h));
    for (std::size_t i = 0; i < static_cast<std::size_t>(w) * h; ++i) {
        const std::size_t at = kMaskHeader + 4 * i;
        const float f = get_f32(bytes, at);
        if (f == 1.0f) {
            mask.set({static_cast<int>(i % w), static_cast<int>(i / w)});
        } else if (f != 0.0f) {
            throw FormatError("mask weight must be 0 or 1", at);
        }
    }
    return mask;
}

void save_mask(const PathMask& mask, const std::filesystem::path& path) { spit(path, encode_mask(mask)); }

PathMask load_mask(const std::filesystem::path& path) { return decode_mask(slurp(path)); }

}  // namespace nrrt
