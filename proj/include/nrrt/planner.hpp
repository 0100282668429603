#pragma once

#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "nrrt/geometry.hpp"
#include "nrrt/grid_map.hpp"
#include "nrrt/prior.hpp"

namespace nrrt {

/// Search tree rooted at index 0. parent[root] == root.
class Tree {
public:
    Tree() = default;
    explicit Tree(Point2 root);

    std::size_t size() const noexcept { return nodes_.size(); }
    bool empty() const noexcept { return nodes_.empty(); }
    Point2 node(std::size_t i) const { return nodes_[i]; }
    std::size_t parent(std::size_t i) const { return parent_[i]; }
    double cost(std::size_t i) const { return cost_[i]; }
    const std::vector<Point2>& nodes() const noexcept { return nodes_; }
    const std::vector<std::size_t>& parents() const noexcept { return parent_; }
    const std::vector<double>& costs() const noexcept { return cost_; }

    std::size_t add(Point2 p, std::size_t parent);
    /// Re-parents `child` and recomputes cost-to-come over its subtree.
    void reparent(std::size_t child, std::size_t new_parent);

    /// Nodes from the root to `i`, inclusive.
    std::vector<Point2> path_to(std::size_t i) const;

    /// Rebuilds a tree from raw arrays (deserialization). Throws
    /// std::invalid_argument when the arrays are inconsistent.
    static Tree from_parts(std::vector<Point2> nodes, std::vector<std::size_t> parents, std::vector<double> costs);

    friend bool operator==(const Tree& a, const Tree& b) {
        return a.nodes_ == b.nodes_ && a.parent_ == b.parent_ && a.cost_ == b.cost_;
    }

private:
    void propagate(std::size_t from);

    std::vector<Point2> nodes_;
    std::vector<std::size_t> parent_;
    std::vector<double> cost_;
    std::vector<std::vector<std::size_t>> children_;
};

/// Checks acyclicity with a single root, cost consistency (±tolerance) and
/// collision-free edges. Returns a description of the first violation.
std::optional<std::string> check_tree(const Tree& tree, const OccupancyGrid& grid, double tolerance = 1e-9);

struct PlannerConfig {
    int iterations = 1000;
    double step = 10.0;
    double rewire_radius = 10.0;
    double alpha = 0.5;
    double goal_tolerance = 10.0;
    std::uint64_t seed = 0;
    int max_rejections = 100;
    bool record_samples = false;
};

void validate(const PlannerConfig& cfg);

struct PlanOutcome {
    bool success = false;
    std::vector<Point2> path;
    double cost = std::numeric_limits<double>::infinity();
    int iterations_used = 0;
    double wall_time = 0.0;
    Tree tree;
    std::optional<std::vector<Point2>> sample_trace;
};

/// Equality ignoring wall_time.
bool same_result(const PlanOutcome& a, const PlanOutcome& b);

enum class PlannerKind { RrtStar, NeuralRrtStar, NeuralInformed };

std::string_view to_string(PlannerKind k);
/// Accepts "rrtstar", "neural", "neural-informed".
PlannerKind parse_planner(std::string_view name);
inline constexpr PlannerKind kAllPlanners[] = {PlannerKind::RrtStar, PlannerKind::NeuralRrtStar,
                                               PlannerKind::NeuralInformed};

/// Per-iteration view handed to observers after the iteration completes.
struct IterationEvent {
    int iteration;
    std::optional<Point2> sample;  // nullopt when the informed sampler was exhausted
    double sampling_c_best;        // c_best in effect when the sample was drawn
    double c_best;                 // c_best after the iteration
    const Tree& tree;
};

using IterationObserver = std::function<void(const IterationEvent&)>;

/// Linear-scan nearest node; ties go to the lowest index.
std::size_t nearest(const Tree& tree, Point2 q);
/// Indices of nodes within `radius` of q, ascending.
std::vector<std::size_t> near(const Tree& tree, Point2 q, double radius);
Point2 steer(Point2 from, Point2 to, double step);

/// Inserts x_new under the cheapest collision-free neighbour within the radius
/// (the steering node is always a candidate), then rewires neighbours whose
/// cost drops by more than 1e-9. Returns nullopt when no parent is reachable.
std::optional<std::size_t> extend_and_rewire(Tree& tree, Point2 x_new, std::size_t nearest_index,
                                             const OccupancyGrid& grid, double rewire_radius);

PlanOutcome plan_rrt_star(const PlanningProblem& problem, const PlannerConfig& config,
                          const IterationObserver& observer = {});
PlanOutcome plan_neural_rrt_star(const PlanningProblem& problem, const PlannerConfig& config,
                                 const ProbabilityMap& prior, const IterationObserver& observer = {});
PlanOutcome plan_neural_informed(const PlanningProblem& problem, const PlannerConfig& config,
                                 const ProbabilityMap& prior, const IterationObserver& observer = {});

/// Dispatches on kind; `prior` is required for the neural planners.
PlanOutcome plan(PlannerKind kind, const PlanningProblem& problem, const PlannerConfig& config,
                 const ProbabilityMap* prior, const IterationObserver& observer = {});

std::string outcome_to_json(const PlanOutcome& outcome);
/// Parses and validates the PlanOutcome invariants. Throws FormatError.
PlanOutcome outcome_from_json(std::string_view text);

}  // namespace nrrt
