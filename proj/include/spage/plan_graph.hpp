#pragma once

#include <algorithm>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "spage/plan.hpp"

namespace spage {

// Dependency DAG G = (V, E) over plan steps. An edge (i, j) exists iff step j
// lists Step<i> as a source. Wavefronts are the Kahn layers: every node's
// predecessors lie in strictly earlier wavefronts, so one wavefront is one
// execution cycle under unbounded parallelism.
struct PlanGraph {
    std::vector<int> nodes;
    std::set<std::pair<int, int>> edges;
    std::vector<std::vector<int>> wavefronts;
    int depth = 0;  // = number of wavefronts = longest path length in nodes

    std::vector<int> predecessors(int id) const {
        std::vector<int> out;
        for (const auto& [from, to] : edges)
            if (to == id) out.push_back(from);
        return out;
    }
};

inline PlanGraph build_graph(const Plan& plan) {
    PlanGraph g;
    std::map<int, int> indegree;
    for (const auto& step : plan.steps) {
        g.nodes.push_back(step.id);
        indegree[step.id] = 0;
    }
    for (const auto& step : plan.steps) {
        for (const auto& src : step.source) {
            if (src.kind != SourceRef::Kind::StepRef) continue;
            if (g.edges.insert({src.step_id, step.id}).second) indegree[step.id]++;
        }
    }
    // Kahn layering: repeatedly remove the in-degree-0 frontier.
    std::set<int> remaining(g.nodes.begin(), g.nodes.end());
    while (!remaining.empty()) {
        std::vector<int> layer;
        for (int id : remaining)
            if (indegree[id] == 0) layer.push_back(id);
        if (layer.empty()) throw StructureError("plan graph contains a cycle");
        std::sort(layer.begin(), layer.end());
        for (int id : layer) {
            remaining.erase(id);
            for (const auto& [from, to] : g.edges)
                if (from == id) indegree[to]--;
        }
        g.wavefronts.push_back(std::move(layer));
    }
    g.depth = int(g.wavefronts.size());
    return g;
}

enum class CycleMode { Sequential, Graph };

// Sequential execution spends one cycle per step; graph execution one cycle
// per wavefront (= longest-path length).
inline int execution_cycles(const PlanGraph& g, CycleMode mode) {
    return mode == CycleMode::Sequential ? int(g.nodes.size()) : g.depth;
}

struct CycleStats {
    double avg_sequential = 0;
    double avg_graph = 0;
    double reduction = 0;  // 1 - avg_graph / avg_sequential
};

inline CycleStats cycle_stats(const std::vector<PlanGraph>& graphs) {
    if (graphs.empty()) throw EmptyInput("cycle_stats needs at least one plan");
    CycleStats s;
    for (const auto& g : graphs) {
        s.avg_sequential += execution_cycles(g, CycleMode::Sequential);
        s.avg_graph += execution_cycles(g, CycleMode::Graph);
    }
    s.avg_sequential /= double(graphs.size());
    s.avg_graph /= double(graphs.size());
    s.reduction = 1.0 - s.avg_graph / s.avg_sequential;
    return s;
}

inline std::string graph_to_dot(const PlanGraph& g, const Plan& plan) {
    std::string out = "digraph plan {\n  rankdir=LR;\n";
    for (int id : g.nodes) {
        out += "  s" + std::to_string(id) + " [label=\"Step" + std::to_string(id) + ":" +
               operation_name(plan.step_by_id(id).operation) + "\"];\n";
    }
    for (const auto& [from, to] : g.edges)
        out += "  s" + std::to_string(from) + " -> s" + std::to_string(to) + ";\n";
    out += "}\n";
    return out;
}

}  // namespace spage
