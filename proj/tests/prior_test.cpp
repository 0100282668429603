#include <doctest.h>

#include <boost/math/distributions/chi_squared.hpp>
#include <cmath>
#include <cstring>

#include "nrrt/errors.hpp"
#include "nrrt/prior.hpp"
#include "test_util.hpp"

using namespace nrrt;

namespace {

ProbabilityMap point_mass(const OccupancyGrid& g, Cell c) {
    std::vector<double> w(g.size(), 0.0);
    w[g.index(c)] = 1.0;
    return normalize(w, g);
}

// 10x10 grid with a few blocks.
OccupancyGrid small_map() {
    auto g = OccupancyGrid(10, 10);
    for (int r = 2; r < 6; ++r) g.set({4, r}, CellState::Occupied);
    for (int c = 6; c < 9; ++c) g.set({c, 7}, CellState::Occupied);
    g.set({0, 9}, CellState::Occupied);
    return g;
}

void check_invariants(const ProbabilityMap& p, const OccupancyGrid& g) {
    double sum = 0.0;
    for (std::size_t i = 0; i < g.size(); ++i) {
        CHECK(p.weights()[i] >= 0.0);
        if (g.cells()[i] == CellState::Occupied) CHECK(p.weights()[i] == 0.0);
        sum += p.weights()[i];
    }
    CHECK(std::abs(sum - 1.0) <= 1e-6);
}

}  // namespace

TEST_SUITE("prior") {

TEST_CASE("normalize") {
    const OccupancyGrid g(2, 1);
    const auto p = normalize(std::vector<double>{3.0, 3.0}, g);
    CHECK(p.weights()[0] == 0.5);
    CHECK(p.weights()[1] == 0.5);

    const auto blocked = test::grid_with(2, 1, {{0, 0}});
    CHECK_THROWS_AS(normalize(std::vector<double>{1.0, 0.0}, blocked), EmptyPrior);
    CHECK_THROWS_AS(normalize(std::vector<double>{-1.0, 2.0}, g), std::invalid_argument);
    CHECK_THROWS_AS(normalize(std::vector<double>{1.0}, g), std::invalid_argument);

    // Dilated mask -> uniform over on-cells.
    const OccupancyGrid empty(40, 40);
    const auto path = *astar(empty, {3, 3}, {30, 20});
    const auto mask = dilate_mask(path, empty);
    const auto pm = normalize(mask, empty);
    const double expected = 1.0 / static_cast<double>(mask.on_count());
    for (int r = 0; r < 40; ++r) {
        for (int c = 0; c < 40; ++c) {
            CHECK(pm.weight({c, r}) == doctest::Approx(mask.on({c, r}) ? expected : 0.0).epsilon(1e-12));
        }
    }
    check_invariants(pm, empty);
}

TEST_CASE("oracle prior on a straight corridor is a 7-wide band") {
    const OccupancyGrid g(64, 32);
    const PlanningProblem problem{g, {5.5, 16.5}, {58.5, 16.5}};
    const auto p = oracle_prior(problem);
    check_invariants(p, g);
    for (int c = 8; c <= 55; ++c) {
        for (int r = 0; r < 32; ++r) {
            CAPTURE(c);
            CAPTURE(r);
            CHECK((p.weight({c, r}) > 0.0) == (r >= 13 && r <= 19));
        }
    }
}

TEST_CASE("oracle prior support is free and errors on infeasible problems") {
    const auto g = generate_map(4, Density::Dense, 224, 224);
    const auto problem = sample_problem(g, 4, 100.0);
    const auto p = oracle_prior(problem);
    check_invariants(p, g);

    OccupancyGrid walled(40, 40);
    for (int r = 0; r < 40; ++r) walled.set({20, r}, CellState::Occupied);
    CHECK_THROWS_AS(oracle_prior({walled, {2.5, 2.5}, {35.5, 2.5}}), InfeasibleProblem);
}

TEST_CASE("alpha = 1 with a point mass stays inside the cell") {
    const auto g = small_map();
    const MixtureSampler s(point_mass(g, {3, 4}), g, {1.0, 100});
    Rng rng(1);
    for (int i = 0; i < 100000; ++i) {
        const Point2 p = s.sample(rng);
        REQUIRE(p.x >= 3.0);
        REQUIRE(p.x < 4.0);
        REQUIRE(p.y >= 4.0);
        REQUIRE(p.y < 5.0);
    }
}

TEST_CASE("alpha = 0 is uniform over free cells (chi-square)") {
    const auto g = small_map();
    const MixtureSampler s(point_mass(g, {3, 4}), g, {0.0, 100});
    Rng rng(2);
    constexpr int kDraws = 100000;
    std::vector<int> counts(g.size(), 0);
    for (int i = 0; i < kDraws; ++i) {
        const Point2 p = s.sample(rng);
        REQUIRE(is_free(g, p));
        ++counts[g.index(containing_cell(p))];
    }
    const auto free_cells = g.size() - g.occupied_count();
    const double expected = static_cast<double>(kDraws) / static_cast<double>(free_cells);
    double chi2 = 0.0;
    for (std::size_t i = 0; i < g.size(); ++i) {
        if (g.cells()[i] == CellState::Occupied) {
            CHECK(counts[i] == 0);
            continue;
        }
        chi2 += (counts[i] - expected) * (counts[i] - expected) / expected;
    }
    const boost::math::chi_squared dist(static_cast<double>(free_cells - 1));
    const double p_value = boost::math::cdf(boost::math::complement(dist, chi2));
    CHECK(p_value > 0.001);
}

TEST_CASE("alpha = 0.5 point mass frequency matches the binomial expectation") {
    const auto g = small_map();
    const Cell target{3, 4};
    const MixtureSampler s(point_mass(g, target), g, {0.5, 100});
    Rng rng(3);
    constexpr int kDraws = 100000;
    int hits = 0;
    for (int i = 0; i < kDraws; ++i) hits += containing_cell(s.sample(rng)) == target;
    const double free_cells = static_cast<double>(g.size() - g.occupied_count());
    const double p = 0.5 + 0.5 / free_cells;
    const double sigma = std::sqrt(p * (1 - p) / kDraws);
    CHECK(std::abs(hits / static_cast<double>(kDraws) - p) <= 3 * sigma);
}

TEST_CASE("alpha = 0 consumes the generator exactly like the uniform sampler") {
    const auto g = small_map();
    const FreeSpaceSampler uniform(g);
    const MixtureSampler mix(point_mass(g, {3, 4}), g, {0.0, 100});
    Rng a(77), b(77);
    for (int i = 0; i < 1000; ++i) CHECK(uniform.sample(a) == mix.sample(b));
}

TEST_CASE("mixture samples are always free and deterministic") {
    const auto g = generate_map(2, Density::Dense, 224, 224);
    const auto problem = sample_problem(g, 2, 100.0);
    const auto prior = oracle_prior(problem);
    const MixtureSampler s(prior, g, {0.5, 100});
    Rng a(9), b(9);
    for (int i = 0; i < 100000; ++i) {
        const Point2 p = s.sample(a);
        REQUIRE(is_free(g, p));
        REQUIRE(p == s.sample(b));
    }
    CHECK(sample_mixture(prior, g, {0.5, 100}, a) == sample_mixture(prior, g, {0.5, 100}, b));
}

TEST_CASE("empty free space and bad configs") {
    OccupancyGrid full(3, 3);
    for (int r = 0; r < 3; ++r)
        for (int c = 0; c < 3; ++c) full.set({c, r}, CellState::Occupied);
    CHECK_THROWS_AS(FreeSpaceSampler{full}, EmptyFreeSpace);

    const OccupancyGrid g(3, 3);
    const auto pm = point_mass(g, {1, 1});
    CHECK_THROWS_AS(MixtureSampler(pm, g, {1.5, 100}), std::invalid_argument);
    CHECK_THROWS_AS(MixtureSampler(pm, g, {0.5, 0}), std::invalid_argument);
    CHECK_THROWS_AS(MixtureSampler(pm, OccupancyGrid(4, 3), {0.5, 100}), std::invalid_argument);
}

TEST_CASE("ellipse_contains examples") {
    const InformedEllipse e({0, 0}, {10, 0}, 12.0);
    CHECK(e.semi_major() == 6.0);
    CHECK(e.semi_minor() == doctest::Approx(std::sqrt(11.0)));
    CHECK(e.center() == Point2{5, 0});
    // Quadratic forms: (5,3) -> 9/11, (5,4) -> 16/11.
    CHECK(9.0 / 11.0 <= 1.0);
    CHECK(ellipse_contains(e, {5, 3}));
    CHECK_FALSE(ellipse_contains(e, {5, 4}));
    CHECK(ellipse_contains(e, {0, 0}));
    CHECK(ellipse_contains(e, {10, 0}));
    CHECK(ellipse_contains(e, {11, 0}));
    CHECK_FALSE(ellipse_contains(e, {11.01, 0}));

    const InformedEllipse flat({0, 0}, {10, 0}, 10.0);
    CHECK(flat.degenerate());
    CHECK(ellipse_contains(flat, {5, 0}));
    CHECK_FALSE(ellipse_contains(flat, {5, 1e-6}));
    CHECK_FALSE(ellipse_contains(flat, {-0.1, 0}));

    CHECK_THROWS_AS(InformedEllipse({0, 0}, {10, 0}, 9.0), std::invalid_argument);
}

TEST_CASE("ellipse endpoints are always contained") {
    Rng rng(31);
    for (int i = 0; i < 10000; ++i) {
        const Point2 s{rng.uniform01() * 200, rng.uniform01() * 200};
        const Point2 g{rng.uniform01() * 200, rng.uniform01() * 200};
        const double c_min = distance(s, g);
        const double c_best = c_min * (1.0 + (i % 3 == 0 ? 0.0 : rng.uniform01()));
        const InformedEllipse e(s, g, c_best);
        CHECK(e.contains(s));
        CHECK(e.contains(g));
        CHECK(e.contains(e.center()));
        CHECK(e.semi_major() >= e.semi_minor());
    }
}

TEST_CASE("rotated ellipse membership matches the focal-distance definition") {
    Rng rng(32);
    for (int i = 0; i < 20000; ++i) {
        const Point2 s{rng.uniform01() * 100, rng.uniform01() * 100};
        const Point2 g{rng.uniform01() * 100, rng.uniform01() * 100};
        const double c_best = distance(s, g) * (1.05 + rng.uniform01());
        const InformedEllipse e(s, g, c_best);
        const Point2 p{rng.uniform01() * 100, rng.uniform01() * 100};
        const double focal_sum = distance(p, s) + distance(p, g);
        if (std::abs(focal_sum - c_best) > 1e-6) CHECK(e.contains(p) == (focal_sum <= c_best));
    }
}

TEST_CASE("sample_informed") {
    const auto g = generate_map(5, Density::Medium, 224, 224);
    const auto problem = sample_problem(g, 5, 100.0);
    const auto prior = oracle_prior(problem);
    const double c_min = distance(problem.start, problem.goal);
    const InformedEllipse e(problem.start, problem.goal, 1.1 * c_min);
    const MixtureSampler mix(prior, g, {0.5, 100});
    Rng rng(6);
    int accepted = 0;
    for (int i = 0; i < 10000; ++i) {
        const auto p = sample_informed(mix, e, g, rng);
        if (!p) continue;
        ++accepted;
        REQUIRE(e.contains(*p));
        REQUIRE(is_free(g, *p));
    }
    CHECK(accepted == 10000);
}

TEST_CASE("sample_informed with a covering ellipse behaves as the mixture") {
    const auto g = small_map();
    const auto pm = point_mass(g, {3, 4});
    const MixtureSampler mix(pm, g, {0.5, 100});
    const InformedEllipse big({0, 0}, {10, 10}, 100.0);
    Rng a(12), b(12);
    for (int i = 0; i < 1000; ++i) {
        const auto p = sample_informed(mix, big, g, a);
        REQUIRE(p);
        CHECK(*p == mix.sample(b));
    }
}

TEST_CASE("sample_informed reports exhaustion inside an obstacle block") {
    OccupancyGrid g(40, 40);
    for (int r = 10; r < 30; ++r)
        for (int c = 10; c < 30; ++c) g.set({c, r}, CellState::Occupied);
    std::vector<double> w(g.size(), 0.0);
    w[g.index({2, 2})] = 1.0;
    const auto pm = normalize(w, g);
    const InformedEllipse inside({15, 20}, {25, 20}, 11.0);
    Rng rng(1);
    CHECK_FALSE(sample_informed(pm, inside, g, {0.5, 100}, rng).has_value());
}

TEST_CASE("prior binary round trip") {
    test::TempDir dir;
    const auto g = generate_map(8, Density::Sparse, 224, 224);
    const auto problem = sample_problem(g, 8, 100.0);
    const auto p = oracle_prior(problem);
    save_prior(p, dir / "p.npri");
    const auto bytes = test::read_file(dir / "p.npri");
    CHECK(bytes.size() == 13 + 4 * g.size());
    CHECK(bytes.substr(0, 4) == "NPRI");
    CHECK(bytes[4] == '\x01');
    CHECK(static_cast<unsigned char>(bytes[5]) == 224);  // little-endian width
    CHECK(bytes[6] == 0);

    const auto q = load_prior(dir / "p.npri", g);
    double max_diff = 0.0;
    for (std::size_t i = 0; i < g.size(); ++i) max_diff = std::max(max_diff, std::abs(p.weights()[i] - q.weights()[i]));
    CHECK(max_diff <= 1e-7);
}

TEST_CASE("prior binary format errors") {
    const OccupancyGrid g(4, 3);
    std::vector<double> w(g.size(), 1.0);
    const std::string good = encode_prior(normalize(w, g));
    CHECK_NOTHROW(decode_prior(good, g));

    CHECK_THROWS_AS(decode_prior(good, OccupancyGrid(5, 3)), FormatError);
    CHECK_THROWS_AS(decode_prior(good, OccupancyGrid(4, 4)), FormatError);
    CHECK_THROWS_AS(decode_prior(good.substr(0, good.size() - 1), g), FormatError);
    CHECK_THROWS_AS(decode_prior(good + "x", g), FormatError);
    CHECK_THROWS_AS(decode_prior(good.substr(0, 7), g), FormatError);

    std::string bad_magic = good;
    bad_magic[0] = 'X';
    CHECK_THROWS_AS(decode_prior(bad_magic, g), FormatError);

    std::string bad_version = good;
    bad_version[4] = 2;
    CHECK_THROWS_AS(decode_prior(bad_version, g), FormatError);

    auto with_weights = [&](std::vector<float> ws) {
        std::string s = good.substr(0, 13);
        for (float f : ws) {
            char b[4];
            std::memcpy(b, &f, 4);
            s.append(b, 4);
        }
        return s;
    };
    // Sum 0.9 is outside the 1e-4 tolerance.
    CHECK_THROWS_AS(decode_prior(with_weights(std::vector<float>(12, 0.9f / 12)), g), FormatError);
    // Sum within tolerance is renormalized.
    const auto near_one = decode_prior(with_weights(std::vector<float>(12, 1.00005f / 12)), g);
    double sum = 0.0;
    for (double x : near_one.weights()) sum += x;
    CHECK(sum == doctest::Approx(1.0).epsilon(1e-12));

    auto negative = std::vector<float>(12, 1.0f / 11);
    negative[3] = -1.0f / 11;
    try {
        decode_prior(with_weights(negative), g);
        FAIL("expected FormatError");
    } catch (const FormatError& e) {
        CHECK(e.offset() == 13 + 4 * 3);
    }

    const auto blocked = test::grid_with(4, 3, {{0, 0}});
    CHECK_THROWS_AS(decode_prior(good, blocked), FormatError);

    std::string zero_width = good;
    zero_width[5] = 0;
    CHECK_THROWS_AS(decode_prior(zero_width, g), FormatError);
}

TEST_CASE("mask files round trip and are distinct from priors") {
    const OccupancyGrid g(30, 20);
    const auto mask = dilate_mask(*astar(g, {1, 1}, {25, 15}), g);
    const auto bytes = encode_mask(mask);
    CHECK(decode_mask(bytes) == mask);
    CHECK_THROWS_AS(decode_prior(bytes, g), FormatError);
    CHECK_THROWS_AS(decode_mask(encode_prior(normalize(mask, g))), FormatError);
}

}
