#pragma once

// Graphs induced by systems of SDEs, unique solvability, and perfect
// interventions at the level of systems and graphs.

#include <algorithm>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "dscm/dmg.hpp"
#include "dscm/model.hpp"

namespace dscm {

/// Augmented graph G(D): processes, then initial-value nodes, then drivers.
/// u -> v is adapted iff u is an integrator of v; integrand-only parents give
/// predictable edges. Intervened processes keep no incoming edges.
inline Dmg graph_of_sdes(const SdeSystem& sys) {
    Dmg g;
    for (const auto& p : sys.processes) g.add_node(p.name);
    for (const auto& p : sys.processes) {
        g.add_node(NodeId{initial_name(p.name), std::nullopt, Role::exogenous, p.name,
                          p.init.kind == Distribution::Kind::constant});
    }
    for (const auto& d : sys.drivers) {
        g.add_node(NodeId{d.name, std::nullopt, Role::exogenous, {}, d.deterministic()});
    }
    for (const auto& p : sys.processes) {
        if (p.intervened) continue;
        g.add_directed(initial_name(p.name), p.name, Dependence::predictable);
        for (const auto& a : p.alpha)
            if (a != p.name) g.add_directed(a, p.name, Dependence::predictable);
        for (const auto& b : p.beta)
            if (b != p.name) g.add_directed(b, p.name, Dependence::adapted);
    }
    return g;
}

struct SolvabilityReport {
    bool solvable = true;
    std::string witness_process;             // first violating process
    std::vector<std::string> witness_set;    // beta(v) ∩ Sc(v)
    std::vector<std::string> inputs;         // initial values and drivers
    std::vector<std::vector<std::string>> order;  // process SCCs, topological
};

/// Solvable iff no process integrates against a member of its own strongly
/// connected component in G(D).
inline SolvabilityReport check_unique_solvability(const SdeSystem& sys) {
    const Dmg g = graph_of_sdes(sys);
    const auto ids = scc_ids(g);
    SolvabilityReport rep;
    for (const auto& comp : scc_partition(g)) {
        std::vector<std::string> procs;
        for (auto i : comp) {
            if (g.node(i).exogenous()) rep.inputs.push_back(g.name(i));
            else procs.push_back(g.name(i));
        }
        if (!procs.empty()) rep.order.push_back(std::move(procs));
    }
    for (const auto& p : sys.processes) {
        if (p.intervened) continue;
        const auto v = g.index(p.name);
        std::vector<std::string> hit;
        for (const auto& b : p.beta) {
            const auto u = g.index(b);
            if (!g.node(u).exogenous() && ids[u] == ids[v]) hit.push_back(b);
        }
        if (!hit.empty()) {
            std::sort(hit.begin(), hit.end());
            rep.solvable = false;
            rep.witness_process = p.name;
            rep.witness_set = std::move(hit);
            break;
        }
    }
    return rep;
}

/// G(M_D): the augmented graph with exogenous nodes replaced by bidirected
/// edges between the processes they jointly drive. Marked simple.
inline Dmg induced_dscm_graph(const SdeSystem& sys) {
    const auto rep = check_unique_solvability(sys);
    if (!rep.solvable) {
        std::string set;
        for (const auto& s : rep.witness_set) set += (set.empty() ? "" : ", ") + s;
        throw UnsolvableSystem("process '" + rep.witness_process + "' integrates against {" + set +
                               "} inside its own strongly connected component");
    }
    Dmg g = to_dmg(graph_of_sdes(sys));
    g.metadata().simple = true;
    return g;
}

/// Perfect intervention on processes: each target becomes the constant path
/// `value` with no integrands or integrators.
inline SdeSystem intervene_sde(const SdeSystem& sys, const std::vector<std::string>& targets, double value = 0.0) {
    SdeSystem out = sys;
    for (const auto& t : targets) {
        auto it = std::find_if(out.processes.begin(), out.processes.end(),
                               [&](const ProcessSpec& p) { return p.name == t; });
        if (it == out.processes.end()) throw InvalidArgument("intervention target '" + t + "' is not a process");
        it->alpha.clear();
        it->beta.clear();
        it->g.clear();
        it->markov = false;
        it->intervened = value;
        it->init = Distribution{Distribution::Kind::constant, value, 0.0};
    }
    return out;
}

/// Removes every edge with an arrowhead at a target.
inline Dmg intervene_graph(const Dmg& g, const NodeSet& targets) {
    std::vector<char> hit(g.size(), 0);
    for (auto t : targets) {
        if (t >= g.size()) throw UnknownNode("#" + std::to_string(t));
        if (g.node(t).role != Role::endogenous) {
            throw InvalidArgument("intervention target '" + g.name(t) + "' is not endogenous");
        }
        hit[t] = 1;
    }
    Dmg out;
    for (const auto& n : g.nodes()) out.add_node(n);
    for (const auto& e : g.edges()) {
        if (hit[e.dst]) continue;
        if (e.kind == EdgeKind::bidirected && hit[e.src]) continue;
        out.add_edge(e.src, e.dst, e.kind, e.dependence);
    }
    out.metadata() = g.metadata();
    return out;
}

inline Dmg intervene_graph(const Dmg& g, const std::vector<std::string>& targets) {
    return intervene_graph(g, g.indices(targets));
}

}  // namespace dscm
