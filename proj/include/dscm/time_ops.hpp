#pragma once

// Evaluation partitions of [0,T] and the graph transformations that act on
// them: time-splitting, subsampling, collapsing and marginalisation.

#include <algorithm>
#include <cmath>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "dscm/dmg.hpp"
#include "dscm/model.hpp"
#include "dscm/sde_graph.hpp"

namespace dscm {

struct TimePoint {
    double value = 0.0;
    std::string label;
};

/// An interval or a point of [0,T]. Points have lo == hi and both ends closed.
struct Piece {
    TimePoint lo, hi;
    bool lo_closed = true, hi_closed = true;

    bool is_point() const { return lo.value == hi.value; }
    bool contains(double t) const {
        if (t < lo.value || t > hi.value) return false;
        if (t == lo.value && !lo_closed) return false;
        if (t == hi.value && !hi_closed) return false;
        return true;
    }
    std::string label() const {
        if (is_point()) return "{" + lo.label + "}";
        return std::string(lo_closed ? "[" : "(") + lo.label + "," + hi.label + (hi_closed ? "]" : ")");
    }
};

/// Exists s in a, t in b with s < t.
inline bool strictly_before(const Piece& a, const Piece& b) { return a.lo.value < b.hi.value; }

/// Exists s in a, t in b with s <= t.
inline bool weakly_before(const Piece& a, const Piece& b) {
    return a.lo.value < b.hi.value || (a.lo.value == b.hi.value && a.lo_closed && b.hi_closed);
}

/// Ordered disjoint pieces, sorted by infimum (a point precedes the interval
/// opening at the same time).
struct EvalPartition {
    std::vector<Piece> pieces;
    double horizon = 1.0;

    static EvalPartition whole(double horizon) {
        EvalPartition p;
        p.horizon = horizon;
        p.pieces.push_back(Piece{{0.0, "0"}, {horizon, "T"}, true, true});
        return p;
    }

    std::optional<std::size_t> find(const std::string& label) const {
        for (std::size_t i = 0; i < pieces.size(); ++i)
            if (pieces[i].label() == label) return i;
        return std::nullopt;
    }

    /// True iff the pieces tile [0,T] without gaps.
    bool covers() const {
        if (pieces.empty()) return false;
        if (pieces.front().lo.value != 0.0 || !pieces.front().lo_closed) return false;
        if (pieces.back().hi.value != horizon || !pieces.back().hi_closed) return false;
        for (std::size_t i = 0; i + 1 < pieces.size(); ++i) {
            const auto& a = pieces[i];
            const auto& b = pieces[i + 1];
            if (a.hi.value != b.lo.value || a.hi_closed == b.lo_closed) return false;
        }
        return true;
    }

    std::string to_string() const {
        std::string s;
        for (const auto& p : pieces) s += (s.empty() ? "" : " ") + p.label();
        return s;
    }
};

/// Refines `base` so that each t in tau becomes a singleton piece.
inline EvalPartition split_partition(const std::vector<TimePoint>& tau, const EvalPartition& base) {
    EvalPartition out = base;
    std::vector<TimePoint> sorted = tau;
    std::sort(sorted.begin(), sorted.end(), [](const TimePoint& a, const TimePoint& b) { return a.value < b.value; });
    for (std::size_t i = 1; i < sorted.size(); ++i) {
        if (sorted[i].value == sorted[i - 1].value) {
            throw InvalidArgument("split times must be distinct: '" + sorted[i - 1].label + "' and '" +
                                  sorted[i].label + "'");
        }
    }
    for (const auto& t : sorted) {
        if (!(t.value >= 0.0 && t.value <= base.horizon)) {
            throw InvalidArgument("split time '" + t.label + "' lies outside [0, T]");
        }
        auto it = std::find_if(out.pieces.begin(), out.pieces.end(), [&](const Piece& p) { return p.contains(t.value); });
        if (it == out.pieces.end()) throw InvalidArgument("split time '" + t.label + "' is not covered by the partition");
        if (it->is_point()) continue;
        const Piece whole = *it;
        std::vector<Piece> parts;
        if (t.value > whole.lo.value) parts.push_back(Piece{whole.lo, t, whole.lo_closed, false});
        parts.push_back(Piece{t, t, true, true});
        if (t.value < whole.hi.value) parts.push_back(Piece{t, whole.hi, false, whole.hi_closed});
        it = out.pieces.erase(it);
        out.pieces.insert(it, parts.begin(), parts.end());
    }
    return out;
}

/// Resolves split points given as labels declared in the model, "0", "T",
/// or numeric literals.
inline std::vector<TimePoint> resolve_times(const std::vector<std::string>& items, const SdeSystem* sys,
                                            double horizon) {
    std::vector<TimePoint> out;
    for (const auto& item : items) {
        if (item.empty()) continue;
        if (item == "0") {
            out.push_back({0.0, "0"});
        } else if (item == "T") {
            out.push_back({horizon, "T"});
        } else if (auto v = sys ? sys->time_label(item) : std::nullopt) {
            out.push_back({*v, item});
        } else {
            double value = 0.0;
            std::size_t used = 0;
            try {
                value = std::stod(item, &used);
            } catch (const std::exception&) {
                used = 0;
            }
            if (used != item.size()) throw InvalidArgument("unknown split time '" + item + "'");
            out.push_back({value, format_number(value)});
        }
    }
    return out;
}

enum class SplitMode {
    strict,  // edges exactly as licensed by the piece-ordering rules
    figure,  // additionally drops cross-process point -> later-interval edges
};

struct SplitGraph {
    Dmg graph;
    EvalPartition partition;
    std::vector<std::string> processes;
};

/// Time-split graph G(M_ev+(tau)).
///
/// `g` is a collapsed graph with optional exogenous nodes. Exogenous nodes
/// with `initial_of` set are initial values and feed the first piece only;
/// other exogenous nodes feed every piece except a {0} point. For processes
/// v, u with u -> v in g:
///  - predictable: u^I' -> v^I whenever I' strictly precedes some part of I;
///  - adapted: u^I' -> v^I whenever I' weakly precedes I, adapted iff I' = I;
///  - continuation v^I' -> v^I for every earlier I'.
/// For Markov processes parents are restricted to the co-piece and the
/// immediate predecessor. A {0} point piece has only its initial value as
/// parent. Bidirected edges are copied between co-pieces.
inline SplitGraph time_split_graph(const Dmg& g, const std::map<std::string, bool>& markov,
                                   const std::vector<TimePoint>& tau, double horizon,
                                   SplitMode mode = SplitMode::strict) {
    SplitGraph sg;
    sg.partition = split_partition(tau, EvalPartition::whole(horizon));
    const auto& pieces = sg.partition.pieces;
    const std::size_t k = pieces.size();

    for (std::size_t i = 0; i < g.size(); ++i) {
        const auto& n = g.node(i);
        if (n.eval) throw InvalidArgument("graph is already split at node '" + n.name() + "'");
        if (n.role == Role::endogenous) sg.processes.push_back(n.process);
    }
    auto is_markov = [&](const std::string& v) {
        auto it = markov.find(v);
        return it != markov.end() && it->second;
    };

    Dmg& out = sg.graph;
    // piece_node[i][j]: node of endogenous g-node i at piece j.
    std::vector<std::vector<std::size_t>> piece_node(g.size());
    for (std::size_t i = 0; i < g.size(); ++i) {
        const auto& n = g.node(i);
        if (n.role != Role::endogenous) continue;
        for (std::size_t j = 0; j < k; ++j) {
            NodeId id = n;
            id.eval = pieces[j].label();
            piece_node[i].push_back(out.add_node(std::move(id)));
        }
    }
    std::vector<std::size_t> exo_node(g.size(), 0);
    for (std::size_t i = 0; i < g.size(); ++i)
        if (g.node(i).role != Role::endogenous) exo_node[i] = out.add_node(g.node(i));

    auto zero_point = [&](std::size_t j) { return pieces[j].is_point() && pieces[j].lo.value == 0.0; };

    for (std::size_t vi = 0; vi < g.size(); ++vi) {
        if (g.node(vi).role != Role::endogenous) continue;
        const bool mk = is_markov(g.node(vi).process);
        auto allowed = [&](std::size_t jp, std::size_t j) { return !mk || jp == j || jp + 1 == j; };

        for (std::size_t j = 0; j < k; ++j) {
            for (std::size_t jp = 0; jp < j; ++jp) {
                if (mk && jp + 1 != j) continue;
                out.add_directed(piece_node[vi][jp], piece_node[vi][j], Dependence::predictable);
            }
        }

        for (auto ui : g.parents(vi)) {
            const auto dep = *g.directed(ui, vi);
            const auto& u = g.node(ui);
            if (u.role != Role::endogenous) {
                if (!u.initial_of.empty()) {
                    out.add_directed(exo_node[ui], piece_node[vi][0], dep);
                    continue;
                }
                for (std::size_t j = 0; j < k; ++j)
                    if (!zero_point(j)) out.add_directed(exo_node[ui], piece_node[vi][j], dep);
                continue;
            }
            for (std::size_t j = 0; j < k; ++j) {
                if (zero_point(j)) continue;
                for (std::size_t jp = 0; jp < k; ++jp) {
                    if (!allowed(jp, j)) continue;
                    const bool licensed = dep == Dependence::adapted ? weakly_before(pieces[jp], pieces[j])
                                                                     : strictly_before(pieces[jp], pieces[j]);
                    if (!licensed) continue;
                    if (mode == SplitMode::figure && jp != j && pieces[jp].is_point() && !pieces[j].is_point()) {
                        continue;
                    }
                    const bool adapted = dep == Dependence::adapted && jp == j;
                    out.add_directed(piece_node[ui][jp], piece_node[vi][j],
                                     adapted ? Dependence::adapted : Dependence::predictable);
                }
            }
        }
    }

    for (const auto& e : g.edges()) {
        if (e.kind != EdgeKind::bidirected) continue;
        const bool se = g.node(e.src).role == Role::endogenous;
        const bool de = g.node(e.dst).role == Role::endogenous;
        for (std::size_t j = 0; j < k; ++j) {
            const auto a = se ? piece_node[e.src][j] : exo_node[e.src];
            const auto b = de ? piece_node[e.dst][j] : exo_node[e.dst];
            out.add_bidirected(a, b, e.dependence);
            if (!se && !de) break;
        }
    }
    out.metadata() = g.metadata();
    return sg;
}

inline std::map<std::string, bool> markov_flags(const SdeSystem& sys) {
    std::map<std::string, bool> out;
    for (const auto& p : sys.processes) out[p.name] = p.markov;
    return out;
}

/// Time-split of the augmented graph of a system, optionally after
/// marginalising `drop` (process or input names).
inline SplitGraph time_split(const SdeSystem& sys, const std::vector<TimePoint>& tau,
                             SplitMode mode = SplitMode::strict, const std::vector<std::string>& drop = {}) {
    Dmg g = graph_of_sdes(sys);
    if (!drop.empty()) g = latent_project(g, drop);
    return time_split_graph(g, markov_flags(sys), tau, sys.horizon, mode);
}

/// Subsampled graph G(M_ev(tau)): the latent projection that drops every
/// non-singleton piece. The returned partition lists the kept points.
inline SplitGraph subsample_graph(const SplitGraph& sg) {
    std::vector<std::string> interval_labels;
    EvalPartition points;
    points.horizon = sg.partition.horizon;
    for (const auto& p : sg.partition.pieces) {
        if (p.is_point()) points.pieces.push_back(p);
        else interval_labels.push_back(p.label());
    }
    NodeSet drop;
    for (std::size_t i = 0; i < sg.graph.size(); ++i) {
        const auto& n = sg.graph.node(i);
        if (n.eval && std::find(interval_labels.begin(), interval_labels.end(), *n.eval) != interval_labels.end()) {
            drop.push_back(i);
        }
    }
    SplitGraph out;
    out.graph = latent_project(sg.graph, drop);
    out.partition = std::move(points);
    out.processes = sg.processes;
    return out;
}

/// Collapses every process back to a single node: u -> v iff some
/// u^I' -> v^I exists with u != v, adapted iff any such edge is adapted.
/// With `require_cover`, a partition with gaps is rejected; otherwise the
/// collapsed nodes are labelled with the union of their pieces, e.g. {s,t}.
inline Dmg collapse_graph(const SplitGraph& sg, bool require_cover = true) {
    const bool covers = sg.partition.covers();
    if (require_cover && !covers) {
        throw InvalidArgument("partition '" + sg.partition.to_string() + "' does not cover [0,T]");
    }
    std::optional<std::string> union_label;
    if (!covers) {
        std::string s;
        for (const auto& p : sg.partition.pieces) {
            std::string inner = p.label();
            if (p.is_point()) inner = inner.substr(1, inner.size() - 2);
            s += (s.empty() ? "" : ",") + inner;
        }
        union_label = "{" + s + "}";
    }

    const Dmg& g = sg.graph;
    Dmg out;
    std::vector<std::size_t> to(g.size(), 0);
    for (std::size_t i = 0; i < g.size(); ++i) {
        NodeId id = g.node(i);
        if (id.eval) id.eval = union_label;
        const auto name = id.name();
        if (auto existing = out.find(name)) to[i] = *existing;
        else to[i] = out.add_node(std::move(id));
    }
    for (const auto& e : g.edges()) {
        if (to[e.src] == to[e.dst]) continue;
        out.add_edge(to[e.src], to[e.dst], e.kind, e.dependence);
    }
    out.metadata() = g.metadata();
    return out;
}

/// Marginalisation at graph level; `drop` may name endogenous or exogenous
/// nodes.
inline Dmg marginalise_graph(const Dmg& g, const NodeSet& drop) {
    for (auto d : drop) {
        if (d >= g.size()) throw UnknownNode("#" + std::to_string(d));
        if (g.node(d).role == Role::intervention) {
            throw InvalidArgument("cannot marginalise intervention node '" + g.name(d) + "'");
        }
    }
    return latent_project(g, drop);
}

inline Dmg marginalise_graph(const Dmg& g, const std::vector<std::string>& drop) {
    return marginalise_graph(g, g.indices(drop));
}

}  // namespace dscm
