#include <doctest.h>

#include <cmath>
#include <numbers>

#include "nrrt/errors.hpp"
#include "nrrt/metrics.hpp"
#include "nrrt/planner.hpp"
#include "test_util.hpp"

using namespace nrrt;

namespace {

PlannerConfig defaults(std::uint64_t seed) {
    PlannerConfig cfg;
    cfg.seed = seed;
    return cfg;
}

void check_outcome(const PlanOutcome& o, const PlanningProblem& problem, const PlannerConfig& cfg) {
    CHECK(o.success == !o.path.empty());
    CHECK(o.success == std::isfinite(o.cost));
    CHECK_FALSE(check_tree(o.tree, problem.grid).has_value());
    if (!o.success) return;
    CHECK(o.path.front() == problem.start);
    CHECK(distance(o.path.back(), problem.goal) <= cfg.goal_tolerance);
    for (std::size_t i = 1; i < o.path.size(); ++i) CHECK(segment_collision_free(problem.grid, o.path[i - 1], o.path[i]));
    CHECK(path_length(o.path) == doctest::Approx(o.cost).epsilon(1e-9));
}

}  // namespace

TEST_SUITE("planner_core") {

TEST_CASE("nearest examples") {
    Tree t({0, 0});
    t.add({10, 10}, 0);
    CHECK(nearest(t, {1, 1}) == 0);
    CHECK(nearest(t, {10, 10}) == 1);
    CHECK(nearest(t, {5, 5}) == 0);  // tie -> lowest index
}

TEST_CASE("nearest matches a linear-scan oracle") {
    Rng rng(1);
    Tree t({rng.uniform01() * 200, rng.uniform01() * 200});
    for (int i = 1; i < 500; ++i) t.add({rng.uniform01() * 200, rng.uniform01() * 200}, 0);
    for (int q = 0; q < 100; ++q) {
        const Point2 p{rng.uniform01() * 200, rng.uniform01() * 200};
        std::size_t best = 0;
        for (std::size_t i = 1; i < t.size(); ++i) {
            if (distance(t.node(i), p) < distance(t.node(best), p)) best = i;
        }
        CHECK(nearest(t, p) == best);
    }
}

TEST_CASE("steer examples") {
    CHECK(steer({0, 0}, {3, 4}, 10) == Point2{3, 4});
    const Point2 s = steer({0, 0}, {30, 40}, 10);
    CHECK(s.x == doctest::Approx(6.0).epsilon(1e-15));
    CHECK(s.y == doctest::Approx(8.0).epsilon(1e-15));
    CHECK(steer({2, 2}, {2, 2}, 10) == Point2{2, 2});
}

TEST_CASE("extend_and_rewire chooses the cheapest parent") {
    const OccupancyGrid g(30, 30);
    Tree t({0, 0});
    const auto b = t.add({10, 0}, 0);
    CHECK(t.cost(b) == 10.0);
    const auto id = extend_and_rewire(t, {5, 4}, b, g, 10.0);
    REQUIRE(id);
    CHECK(t.parent(*id) == 0);
    CHECK(t.cost(*id) == doctest::Approx(std::sqrt(41.0)));  // 6.40 vs 16.40 via B
}

TEST_CASE("extend_and_rewire rewires a neighbour through the new node") {
    const OccupancyGrid g(40, 40);
    Tree t({0, 0});
    const auto a = t.add({0, 8}, 0);
    const auto b = t.add({8, 8}, a);   // cost 16 via a
    const auto c = t.add({16, 8}, b);  // subtree of b
    const auto id = extend_and_rewire(t, {5, 3}, 0, g, 10.0);
    REQUIRE(id);
    CHECK(t.parent(*id) == 0);
    CHECK(t.parent(b) == *id);
    CHECK(t.cost(b) == doctest::Approx(distance({0, 0}, {5, 3}) + distance({5, 3}, {8, 8})));
    CHECK(t.cost(c) == doctest::Approx(t.cost(b) + 8.0));
    CHECK_FALSE(check_tree(t, g).has_value());
}

TEST_CASE("extend_and_rewire returns nullopt when every edge is blocked") {
    OccupancyGrid g(30, 30);
    for (int r = 0; r < 30; ++r) g.set({5, r}, CellState::Occupied);
    Tree t({2, 2});
    t.add({2, 8}, 0);
    CHECK_FALSE(extend_and_rewire(t, {8, 5}, 0, g, 10.0).has_value());
    CHECK(t.size() == 2);
}

TEST_CASE("rewiring never raises existing costs") {
    Rng rng(4);
    const auto g = generate_map(4, Density::Medium, 96, 96);
    Tree t({48.5, 48.5});
    for (int i = 0; i < 600; ++i) {
        const Point2 q{rng.uniform01() * 96, rng.uniform01() * 96};
        const std::size_t n = nearest(t, q);
        const Point2 x = steer(t.node(n), q, 10.0);
        if (x == t.node(n) || !segment_collision_free(g, t.node(n), x)) continue;
        const std::vector<double> before = t.costs();
        extend_and_rewire(t, x, n, g, 10.0);
        for (std::size_t k = 0; k < before.size(); ++k) REQUIRE(t.cost(k) <= before[k]);
    }
    CHECK_FALSE(check_tree(t, g).has_value());
}

TEST_CASE("check_tree detects violations") {
    const OccupancyGrid g(20, 20);
    CHECK_FALSE(check_tree(Tree::from_parts({{0, 0}, {3, 4}}, {0, 0}, {0.0, 5.0}), g).has_value());
    CHECK(check_tree(Tree::from_parts({{0, 0}, {3, 4}}, {0, 0}, {0.0, 5.1}), g).has_value());
    auto walled = test::grid_with(20, 20, {{1, 2}});
    CHECK(check_tree(Tree::from_parts({{0.5, 0.5}, {2.5, 4.5}}, {0, 0}, {0.0, std::hypot(2.0, 4.0)}), walled).has_value());
    CHECK_THROWS_AS(Tree::from_parts({{0, 0}, {1, 1}, {2, 2}}, {0, 2, 1}, {0, 1, 1}), std::invalid_argument);
}

TEST_CASE("rrt* on an empty map: success and near-straight cost") {
    const PlanningProblem problem{OccupancyGrid(224, 224), {20, 20}, {200, 200}};
    const double straight = std::sqrt(2.0 * 180.0 * 180.0);
    CHECK(straight == doctest::Approx(254.558).epsilon(1e-5));
    double total = 0.0;
    int successes = 0;
    for (std::uint64_t seed = 0; seed < 50; ++seed) {
        const auto cfg = defaults(seed);
        const auto o = plan_rrt_star(problem, cfg);
        check_outcome(o, problem, cfg);
        successes += o.success;
        total += o.cost;
    }
    CHECK(successes == 50);
    CHECK(total / 50 <= 1.15 * straight);
}

TEST_CASE("walled-off goal fails cleanly") {
    OccupancyGrid g(100, 100);
    for (int r = 0; r < 100; ++r) g.set({50, r}, CellState::Occupied);
    const PlanningProblem problem{g, {10.5, 50.5}, {90.5, 50.5}};
    const auto cfg = defaults(3);
    const auto o = plan_rrt_star(problem, cfg);
    CHECK_FALSE(o.success);
    CHECK(o.path.empty());
    CHECK(std::isinf(o.cost));
    CHECK(o.iterations_used == cfg.iterations);
    check_outcome(o, problem, cfg);
}

TEST_CASE("all planners are reproducible per seed") {
    const auto g = generate_map(6, Density::Medium, 224, 224);
    const auto problem = sample_problem(g, 6, 100.0);
    const auto prior = oracle_prior(problem);
    for (PlannerKind k : kAllPlanners) {
        auto cfg = defaults(12);
        cfg.record_samples = true;
        const auto a = plan(k, problem, cfg, &prior);
        const auto b = plan(k, problem, cfg, &prior);
        CHECK(same_result(a, b));
        check_outcome(a, problem, cfg);
        cfg.seed = 13;
        CHECK_FALSE(same_result(a, plan(k, problem, cfg, &prior)));
    }
}

TEST_CASE("neural planner with alpha = 0 reproduces rrt* exactly") {
    const auto g = generate_map(9, Density::Sparse, 224, 224);
    const auto problem = sample_problem(g, 9, 100.0);
    const auto prior = oracle_prior(problem);
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
        auto cfg = defaults(seed);
        cfg.alpha = 0.0;
        CHECK(same_result(plan_rrt_star(problem, cfg), plan_neural_rrt_star(problem, cfg, prior)));
    }
}

TEST_CASE("oracle prior shortens paths on sparse problems") {
    double base = 0.0, neural = 0.0;
    int base_ok = 0, neural_ok = 0;
    for (std::uint64_t seed = 0; seed < 50; ++seed) {
        const auto g = generate_map(seed, Density::Sparse, 224, 224);
        const auto problem = sample_problem(g, seed, 100.0);
        const auto prior = oracle_prior(problem);
        const auto a = plan_rrt_star(problem, defaults(seed));
        const auto b = plan_neural_rrt_star(problem, defaults(seed), prior);
        if (a.success) base += a.cost, ++base_ok;
        if (b.success) neural += b.cost, ++neural_ok;
    }
    REQUIRE(base_ok > 0);
    REQUIRE(neural_ok > 0);
    CHECK(neural_ok >= base_ok);
    CHECK(neural / neural_ok <= base / base_ok);
}

TEST_CASE("misplaced point-mass prior still succeeds via the uniform component") {
    const OccupancyGrid g(224, 224);
    const PlanningProblem problem{g, {20.5, 200.5}, {200.5, 200.5}};
    std::vector<double> w(g.size(), 0.0);
    w[g.index({110, 10})] = 1.0;
    const auto prior = normalize(w, g);
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
        CHECK(plan_neural_rrt_star(problem, defaults(seed), prior).success);
        CHECK(plan_neural_informed(problem, defaults(seed), prior).success);
    }
}

TEST_CASE("neural informed: samples stay in the current ellipse and c_best never rises") {
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
        const auto g = generate_map(seed, Density::Dense, 224, 224);
        const auto problem = sample_problem(g, seed, 100.0);
        const auto prior = oracle_prior(problem);
        double last = std::numeric_limits<double>::infinity();
        int informed_samples = 0;
        const auto cfg = defaults(seed);
        const auto o = plan_neural_informed(problem, cfg, prior, [&](const IterationEvent& ev) {
            CHECK(ev.c_best <= last);
            CHECK(ev.c_best <= ev.sampling_c_best);
            last = ev.c_best;
            if (std::isfinite(ev.sampling_c_best) && ev.sample) {
                ++informed_samples;
                REQUIRE(ellipse_contains(InformedEllipse(problem.start, problem.goal, ev.sampling_c_best), *ev.sample));
            }
        });
        check_outcome(o, problem, cfg);
        if (o.success) {
            CHECK(informed_samples > 0);
            CHECK(o.cost == last);
        }
    }
}

TEST_CASE("invalid configs are rejected") {
    const PlanningProblem problem{OccupancyGrid(64, 64), {5, 5}, {50, 50}};
    auto bad = [&](auto mutate) {
        PlannerConfig cfg;
        mutate(cfg);
        CHECK_THROWS_AS(plan_rrt_star(problem, cfg), std::invalid_argument);
    };
    bad([](PlannerConfig& c) { c.iterations = 0; });
    bad([](PlannerConfig& c) { c.step = 0; });
    bad([](PlannerConfig& c) { c.rewire_radius = -1; });
    bad([](PlannerConfig& c) { c.alpha = 1.5; });
    bad([](PlannerConfig& c) { c.goal_tolerance = 0; });
    CHECK_THROWS_AS(plan(PlannerKind::NeuralRrtStar, problem, PlannerConfig{}, nullptr), std::invalid_argument);
    const PlanningProblem blocked{test::grid_with(64, 64, {{5, 5}}), {5.5, 5.5}, {50, 50}};
    CHECK_THROWS_AS(plan_rrt_star(blocked, PlannerConfig{}), std::invalid_argument);
}

TEST_CASE("outcome JSON round trip") {
    const auto g = generate_map(1, Density::Medium, 224, 224);
    const auto problem = sample_problem(g, 1, 100.0);
    const auto prior = oracle_prior(problem);
    auto cfg = defaults(1);
    cfg.record_samples = true;
    const auto o = plan_neural_informed(problem, cfg, prior);
    const auto back = outcome_from_json(outcome_to_json(o));
    CHECK(same_result(o, back));
    CHECK(back.wall_time == o.wall_time);

    OccupancyGrid walled(60, 60);
    for (int r = 0; r < 60; ++r) walled.set({30, r}, CellState::Occupied);
    const auto fail = plan_rrt_star({walled, {5, 5}, {55, 5}}, defaults(2));
    CHECK(same_result(fail, outcome_from_json(outcome_to_json(fail))));

    CHECK_THROWS_AS(outcome_from_json("{}"), FormatError);
    CHECK_THROWS_AS(outcome_from_json("not json"), FormatError);
    auto text = outcome_to_json(o);
    text.replace(text.find("\"success\":true"), 14, "\"success\":false");
    CHECK_THROWS_AS(outcome_from_json(text), FormatError);
}

TEST_CASE("planner names") {
    for (PlannerKind k : kAllPlanners) CHECK(parse_planner(to_string(k)) == k);
    CHECK_THROWS_AS(parse_planner("prm"), std::invalid_argument);
}

}
