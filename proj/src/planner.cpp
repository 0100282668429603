#include "nrrt/planner.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <stdexcept>

#include "nrrt/errors.hpp"

namespace nrrt {

Tree::Tree(Point2 root) : nodes_{root}, parent_{0}, cost_{0.0}, children_(1) {}

std::size_t Tree::add(Point2 p, std::size_t parent) {
    const std::size_t id = nodes_.size();
    nodes_.push_back(p);
    parent_.push_back(parent);
    cost_.push_back(cost_[parent] + distance(nodes_[parent], p));
    children_.emplace_back();
    children_[parent].push_back(id);
    return id;
}

void Tree::reparent(std::size_t child, std::size_t new_parent) {
    auto& siblings = children_[parent_[child]];
    std::erase(siblings, child);
    parent_[child] = new_parent;
    children_[new_parent].push_back(child);
    cost_[child] = cost_[new_parent] + distance(nodes_[new_parent], nodes_[child]);
    propagate(child);
}

void Tree::propagate(std::size_t from) {
    std::vector<std::size_t> stack(children_[from].begin(), children_[from].end());
    while (!stack.empty()) {
        const std::size_t n = stack.back();
        stack.pop_back();
        cost_[n] = cost_[parent_[n]] + distance(nodes_[parent_[n]], nodes_[n]);
        stack.insert(stack.end(), children_[n].begin(), children_[n].end());
    }
}

std::vector<Point2> Tree::path_to(std::size_t i) const {
    std::vector<Point2> out;
    for (;;) {
        out.push_back(nodes_[i]);
        if (parent_[i] == i) break;
        i = parent_[i];
    }
    std::reverse(out.begin(), out.end());
    return out;
}

Tree Tree::from_parts(std::vector<Point2> nodes, std::vector<std::size_t> parents, std::vector<double> costs) {
    const std::size_t n = nodes.size();
    if (n == 0 || parents.size() != n || costs.size() != n) throw std::invalid_argument("tree arrays differ in length");
    if (parents[0] != 0) throw std::invalid_argument("root must be its own parent");
    Tree t;
    t.nodes_ = std::move(nodes);
    t.parent_ = std::move(parents);
    t.cost_ = std::move(costs);
    t.children_.assign(n, {});
    for (std::size_t i = 1; i < n; ++i) {
        if (t.parent_[i] >= n || t.parent_[i] == i) throw std::invalid_argument("invalid parent index");
        t.children_[t.parent_[i]].push_back(i);
    }
    std::size_t reached = 0;
    std::vector<std::size_t> stack{0};
    while (!stack.empty()) {
        const std::size_t v = stack.back();
        stack.pop_back();
        ++reached;
        stack.insert(stack.end(), t.children_[v].begin(), t.children_[v].end());
    }
    if (reached != n) throw std::invalid_argument("tree contains a cycle or unreachable node");
    return t;
}

std::optional<std::string> check_tree(const Tree& tree, const OccupancyGrid& grid, double tolerance) {
    const std::size_t n = tree.size();
    if (n == 0) return "tree is empty";
    if (tree.parent(0) != 0) return "root is not its own parent";
    if (tree.cost(0) != 0.0) return "root cost is not zero";

    // 0 = unvisited, 1 = on current walk, 2 = known to reach the root.
    std::vector<std::uint8_t> state(n, 0);
    state[0] = 2;
    std::vector<std::size_t> walk;
    for (std::size_t i = 1; i < n; ++i) {
        walk.clear();
        std::size_t v = i;
        while (state[v] == 0) {
            if (tree.parent(v) >= n || tree.parent(v) == v) return "node " + std::to_string(v) + " has invalid parent";
            state[v] = 1;
            walk.push_back(v);
            v = tree.parent(v);
        }
        if (state[v] == 1) return "cycle through node " + std::to_string(v);
        for (std::size_t w : walk) state[w] = 2;
    }

    for (std::size_t i = 1; i < n; ++i) {
        const std::size_t p = tree.parent(i);
        const double expected = tree.cost(p) + distance(tree.node(p), tree.node(i));
        if (!(std::abs(tree.cost(i) - expected) <= tolerance)) {
            return "cost of node " + std::to_string(i) + " inconsistent with parent";
        }
        if (!segment_collision_free(grid, tree.node(p), tree.node(i))) {
            return "edge " + std::to_string(p) + "->" + std::to_string(i) + " collides";
        }
    }
    return std::nullopt;
}

void validate(const PlannerConfig& cfg) {
    if (cfg.iterations < 1) throw std::invalid_argument("iterations must be >= 1");
    if (!(cfg.step > 0.0) || !std::isfinite(cfg.step)) throw std::invalid_argument("step must be positive");
    if (!(cfg.rewire_radius > 0.0) || !std::isfinite(cfg.rewire_radius)) {
        throw std::invalid_argument("rewire radius must be positive");
    }
    if (!(cfg.alpha >= 0.0 && cfg.alpha <= 1.0)) throw std::invalid_argument("alpha must lie in [0, 1]");
    if (!(cfg.goal_tolerance > 0.0) || !std::isfinite(cfg.goal_tolerance)) {
        throw std::invalid_argument("goal tolerance must be positive");
    }
    if (cfg.max_rejections <= 0) throw std::invalid_argument("max_rejections must be positive");
}

bool same_result(const PlanOutcome& a, const PlanOutcome& b) {
    const bool cost_eq = a.cost == b.cost || (std::isinf(a.cost) && std::isinf(b.cost));
    return a.success == b.success && a.path == b.path && cost_eq && a.iterations_used == b.iterations_used &&
           a.tree == b.tree && a.sample_trace == b.sample_trace;
}

std::string_view to_string(PlannerKind k) {
    switch (k) {
        case PlannerKind::RrtStar: return "rrtstar";
        case PlannerKind::NeuralRrtStar: return "neural";
        case PlannerKind::NeuralInformed: return "neural-informed";
    }
    return "unknown";
}

PlannerKind parse_planner(std::string_view name) {
    if (name == "rrtstar") return PlannerKind::RrtStar;
    if (name == "neural") return PlannerKind::NeuralRrtStar;
    if (name == "neural-informed") return PlannerKind::NeuralInformed;
    throw std::invalid_argument("unknown planner '" + std::string(name) + "'");
}

std::size_t nearest(const Tree& tree, Point2 q) {
    std::size_t best = 0;
    double best_d = squared_distance(tree.node(0), q);
    for (std::size_t i = 1; i < tree.size(); ++i) {
        const double d = squared_distance(tree.node(i), q);
        if (d < best_d) {
            best_d = d;
            best = i;
        }
    }
    return best;
}

std::vector<std::size_t> near(const Tree& tree, Point2 q, double radius) {
    std::vector<std::size_t> out;
    const double r2 = radius * radius;
    for (std::size_t i = 0; i < tree.size(); ++i) {
        if (squared_distance(tree.node(i), q) <= r2) out.push_back(i);
    }
    return out;
}

Point2 steer(Point2 from, Point2 to, double step) {
    const double d = distance(from, to);
    if (d <= step) return to;
    return from + (step / d) * (to - from);
}

std::optional<std::size_t> extend_and_rewire(Tree& tree, Point2 x_new, std::size_t nearest_index,
                                             const OccupancyGrid& grid, double rewire_radius) {
    std::vector<std::size_t> neighbors = near(tree, x_new, rewire_radius);
    if (!std::binary_search(neighbors.begin(), neighbors.end(), nearest_index)) {
        neighbors.insert(std::upper_bound(neighbors.begin(), neighbors.end(), nearest_index), nearest_index);
    }

    std::optional<std::size_t> parent;
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t n : neighbors) {
        const double through = tree.cost(n) + distance(tree.node(n), x_new);
        if (through < best && segment_collision_free(grid, tree.node(n), x_new)) {
            best = through;
            parent = n;
        }
    }
    if (!parent) return std::nullopt;

    const std::size_t id = tree.add(x_new, *parent);
    for (std::size_t n : neighbors) {
        if (n == *parent) continue;
        const double through = tree.cost(id) + distance(x_new, tree.node(n));
        if (through < tree.cost(n) - 1e-9 && segment_collision_free(grid, x_new, tree.node(n))) {
            tree.reparent(n, id);
        }
    }
    return id;
}

namespace {

enum class SamplingMode { Uniform, Mixture, Informed };

PlanOutcome run_planner(const PlanningProblem& problem, const PlannerConfig& config, SamplingMode mode,
                        const ProbabilityMap* prior, const IterationObserver& observer) {
    validate(config);
    const OccupancyGrid& grid = problem.grid;
    if (!is_free(grid, problem.start) || !is_free(grid, problem.goal)) {
        throw std::invalid_argument("start and goal must lie in free space");
    }

    const auto t0 = std::chrono::steady_clock::now();

    const FreeSpaceSampler uniform(grid);
    std::optional<MixtureSampler> mixture;
    if (mode != SamplingMode::Uniform) {
        if (prior == nullptr) throw std::invalid_argument("neural planners require a prior");
        mixture.emplace(*prior, grid, SamplerConfig{config.alpha, config.max_rejections});
    }

    Rng rng(config.seed);
    PlanOutcome out;
    out.tree = Tree(problem.start);
    Tree& tree = out.tree;
    if (config.record_samples) out.sample_trace.emplace();

    std::vector<std::size_t> goal_nodes;
    auto reaches_goal = [&](std::size_t i) {
        return distance(tree.node(i), problem.goal) <= config.goal_tolerance &&
               segment_collision_free(grid, tree.node(i), problem.goal);
    };
    if (reaches_goal(0)) goal_nodes.push_back(0);

    double c_best = std::numeric_limits<double>::infinity();
    std::optional<std::size_t> best_node;
    auto update_best = [&] {
        for (std::size_t g : goal_nodes) {
            const double c = tree.cost(g) + distance(tree.node(g), problem.goal);
            if (c < c_best) {
                c_best = c;
                best_node = g;
            }
        }
    };
    update_best();

    for (int it = 0; it < config.iterations; ++it) {
        const double sampling_c_best = c_best;
        std::optional<Point2> sample;
        switch (mode) {
            case SamplingMode::Uniform: sample = uniform.sample(rng); break;
            case SamplingMode::Mixture: sample = mixture->sample(rng); break;
            case SamplingMode::Informed:
                if (std::isfinite(c_best)) {
                    sample = sample_informed(*mixture, InformedEllipse(problem.start, problem.goal, c_best), grid, rng);
                } else {
                    sample = mixture->sample(rng);
                }
                break;
        }

        if (sample) {
            if (out.sample_trace) out.sample_trace->push_back(*sample);
            const std::size_t n = nearest(tree, *sample);
            const Point2 x_new = steer(tree.node(n), *sample, config.step);
            if (x_new != tree.node(n) && segment_collision_free(grid, tree.node(n), x_new)) {
                if (auto id = extend_and_rewire(tree, x_new, n, grid, config.rewire_radius)) {
                    if (reaches_goal(*id)) goal_nodes.push_back(*id);
                }
            }
        }
        // Rewiring can lower the cost of existing goal connections too.
        update_best();
        out.iterations_used = it + 1;
        if (observer) observer(IterationEvent{it, sample, sampling_c_best, c_best, tree});
    }

    if (best_node) {
        out.success = true;
        out.cost = c_best;
        out.path = tree.path_to(*best_node);
        if (out.path.back() != problem.goal) out.path.push_back(problem.goal);
    }
    out.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return out;
}

}  // namespace

PlanOutcome plan_rrt_star(const PlanningProblem& problem, const PlannerConfig& config,
                          const IterationObserver& observer) {
    return run_planner(problem, config, SamplingMode::Uniform, nullptr, observer);
}

PlanOutcome plan_neural_rrt_star(const PlanningProblem& problem, const PlannerConfig& config,
                                 const ProbabilityMap& prior, const IterationObserver& observer) {
    return run_planner(problem, config, SamplingMode::Mixture, &prior, observer);
}

PlanOutcome plan_neural_informed(const PlanningProblem& problem, const PlannerConfig& config,
                                 const ProbabilityMap& prior, const IterationObserver& observer) {
    return run_planner(problem, config, SamplingMode::Informed, &prior, observer);
}

PlanOutcome plan(PlannerKind kind, const PlanningProblem& problem, const PlannerConfig& config,
                 const ProbabilityMap* prior, const IterationObserver& observer) {
    switch (kind) {
        case PlannerKind::RrtStar: return plan_rrt_star(problem, config, observer);
        case PlannerKind::NeuralRrtStar:
            if (prior == nullptr) throw std::invalid_argument("neural planner requires a prior");
            return plan_neural_rrt_star(problem, config, *prior, observer);
        case PlannerKind::NeuralInformed:
            if (prior == nullptr) throw std::invalid_argument("neural-informed planner requires a prior");
            return plan_neural_informed(problem, config, *prior, observer);
    }
    throw std::invalid_argument("unknown planner kind");
}

}  // namespace nrrt
