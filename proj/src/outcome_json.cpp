#include <cmath>

#include <json.hpp>

#include "nrrt/errors.hpp"
#include "nrrt/planner.hpp"

namespace nrrt {

namespace {

using nlohmann::json;

json points_to_json(const std::vector<Point2>& pts) {
    json arr = json::array();
    for (const auto& p : pts) arr.push_back({p.x, p.y});
    return arr;
}

std::vector<Point2> points_from_json(const json& arr, const char* field) {
    if (!arr.is_array()) throw FormatError(std::string("outcome JSON: '") + field + "' must be an array", 0);
    std::vector<Point2> out;
    out.reserve(arr.size());
    for (std::size_t i = 0; i < arr.size(); ++i) {
        const auto& p = arr[i];
        if (!p.is_array() || p.size() != 2 || !p[0].is_number() || !p[1].is_number()) {
            throw FormatError(std::string("outcome JSON: bad point in '") + field + "'", i);
        }
        out.push_back({p[0].get<double>(), p[1].get<double>()});
    }
    return out;
}

}  // namespace

std::string outcome_to_json(const PlanOutcome& o) {
    json doc;
    doc["format"] = "plan-outcome/1";
    doc["success"] = o.success;
    doc["cost"] = std::isfinite(o.cost) ? json(o.cost) : json(nullptr);
    doc["iterations_used"] = o.iterations_used;
    doc["wall_time"] = o.wall_time;
    doc["path"] = points_to_json(o.path);
    doc["tree"] = {{"nodes", points_to_json(o.tree.nodes())},
                   {"parents", o.tree.parents()},
                   {"costs", o.tree.costs()}};
    doc["sample_trace"] = o.sample_trace ? points_to_json(*o.sample_trace) : json(nullptr);
    return doc.dump();
}

PlanOutcome outcome_from_json(std::string_view text) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        throw FormatError(std::string("outcome JSON: ") + e.what(), e.byte);
    }
    PlanOutcome o;
    try {
        if (doc.at("format") != "plan-outcome/1") throw FormatError("outcome JSON: unsupported format", 0);
        o.success = doc.at("success").get<bool>();
        o.cost = doc.at("cost").is_null() ? std::numeric_limits<double>::infinity() : doc.at("cost").get<double>();
        o.iterations_used = doc.at("iterations_used").get<int>();
        o.wall_time = doc.at("wall_time").get<double>();
        o.path = points_from_json(doc.at("path"), "path");
        const auto& t = doc.at("tree");
        o.tree = Tree::from_parts(points_from_json(t.at("nodes"), "tree.nodes"),
                                  t.at("parents").get<std::vector<std::size_t>>(),
                                  t.at("costs").get<std::vector<double>>());
        if (!doc.at("sample_trace").is_null()) o.sample_trace = points_from_json(doc.at("sample_trace"), "sample_trace");
    } catch (const json::exception& e) {
        throw FormatError(std::string("outcome JSON: ") + e.what(), 0);
    } catch (const std::invalid_argument& e) {
        throw FormatError(std::string("outcome JSON: ") + e.what(), 0);
    }

    const bool finite = std::isfinite(o.cost);
    if (o.success != !o.path.empty() || o.success != finite) {
        throw FormatError("outcome JSON: success, path and cost disagree", 0);
    }
    if (o.success && o.path.front() != o.tree.node(0)) throw FormatError("outcome JSON: path does not start at the root", 0);
    return o;
}

}  // namespace nrrt
