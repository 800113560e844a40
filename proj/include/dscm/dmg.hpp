#pragma once

// Directed mixed graphs with per-edge dependence kinds, plus the separation
// and projection algorithms that operate on them.

#include <algorithm>
#include <cstddef>
#include <deque>
#include <map>
#include <optional>
#include <queue>
#include <string>
#include <string_view>
#include <tuple>
#include <unordered_map>
#include <utility>
#include <vector>

#include "dscm/error.hpp"

namespace dscm {

enum class Role { endogenous, exogenous, intervention };
enum class EdgeKind { directed, bidirected };

/// Predictable dependence excludes instantaneous effects; adapted allows them.
/// Adapted is the weaker guarantee, so merging two edges keeps `adapted`.
enum class Dependence { predictable, adapted };

inline Dependence merge(Dependence a, Dependence b) {
    return (a == Dependence::adapted || b == Dependence::adapted) ? Dependence::adapted
                                                                  : Dependence::predictable;
}

struct NodeId {
    std::string process;
    std::optional<std::string> eval;  // evaluation piece label, e.g. "(s,t)"
    Role role = Role::endogenous;
    std::string initial_of;           // set on initial-value nodes X_v^0
    bool deterministic = false;       // exogenous input with a point-mass law

    std::string name() const { return eval ? process + "@" + *eval : process; }
    bool exogenous() const { return role == Role::exogenous; }
    friend bool operator==(const NodeId&, const NodeId&) = default;
};

struct Edge {
    EdgeKind kind = EdgeKind::directed;
    std::size_t src = 0;
    std::size_t dst = 0;  // bidirected edges are stored with src < dst
    Dependence dependence = Dependence::predictable;
};

using NodeSet = std::vector<std::size_t>;

struct GraphMetadata {
    bool simple = false;              // induced from a uniquely solvable system
    bool projection_superset = false; // produced by latent projection
};

class Dmg {
public:
    std::size_t add_node(NodeId node) {
        const std::string key = node.name();
        if (index_.contains(key)) throw InvalidGraph("duplicate node '" + key + "'");
        index_.emplace(key, nodes_.size());
        nodes_.push_back(std::move(node));
        children_.emplace_back();
        parents_.emplace_back();
        spouses_.emplace_back();
        return nodes_.size() - 1;
    }

    std::size_t add_node(std::string process, Role role = Role::endogenous) {
        return add_node(NodeId{std::move(process), std::nullopt, role, {}, false});
    }

    /// Adds an edge; a second edge of the same kind between the same
    /// endpoints is merged into the first.
    void add_edge(std::size_t src, std::size_t dst, EdgeKind kind,
                  Dependence dep = Dependence::predictable) {
        check_index(src);
        check_index(dst);
        if (src == dst) {
            throw InvalidGraph("self-loop at '" + nodes_[src].name() + "'");
        }
        if (kind == EdgeKind::bidirected && src > dst) std::swap(src, dst);
        validate_new_edge(src, dst, kind);

        const auto key = std::make_tuple(kind, src, dst);
        if (auto it = edge_index_.find(key); it != edge_index_.end()) {
            auto& e = edges_[it->second];
            e.dependence = merge(e.dependence, dep);
            return;
        }
        edge_index_.emplace(key, edges_.size());
        edges_.push_back(Edge{kind, src, dst, dep});
        if (kind == EdgeKind::directed) {
            children_[src].push_back(dst);
            parents_[dst].push_back(src);
        } else {
            spouses_[src].push_back(dst);
            spouses_[dst].push_back(src);
        }
    }

    void add_directed(std::size_t src, std::size_t dst, Dependence dep = Dependence::predictable) {
        add_edge(src, dst, EdgeKind::directed, dep);
    }
    void add_bidirected(std::size_t a, std::size_t b, Dependence dep = Dependence::predictable) {
        add_edge(a, b, EdgeKind::bidirected, dep);
    }
    void add_directed(std::string_view src, std::string_view dst,
                      Dependence dep = Dependence::predictable) {
        add_directed(index(src), index(dst), dep);
    }
    void add_bidirected(std::string_view a, std::string_view b,
                        Dependence dep = Dependence::predictable) {
        add_bidirected(index(a), index(b), dep);
    }

    std::size_t size() const { return nodes_.size(); }
    bool empty() const { return nodes_.empty(); }
    const NodeId& node(std::size_t i) const { return nodes_.at(i); }
    const std::vector<NodeId>& nodes() const { return nodes_; }
    std::string name(std::size_t i) const { return nodes_.at(i).name(); }
    const std::vector<Edge>& edges() const { return edges_; }

    std::optional<std::size_t> find(std::string_view name) const {
        auto it = index_.find(std::string(name));
        if (it == index_.end()) return std::nullopt;
        return it->second;
    }
    std::size_t index(std::string_view name) const {
        if (auto i = find(name)) return *i;
        throw UnknownNode(std::string(name));
    }
    NodeSet indices(const std::vector<std::string>& names) const {
        NodeSet out;
        out.reserve(names.size());
        for (const auto& n : names) out.push_back(index(n));
        std::sort(out.begin(), out.end());
        out.erase(std::unique(out.begin(), out.end()), out.end());
        return out;
    }
    std::vector<std::string> names(const NodeSet& set) const {
        std::vector<std::string> out;
        for (auto i : set) out.push_back(name(i));
        return out;
    }

    const std::vector<std::size_t>& children(std::size_t i) const { return children_.at(i); }
    const std::vector<std::size_t>& parents(std::size_t i) const { return parents_.at(i); }
    const std::vector<std::size_t>& spouses(std::size_t i) const { return spouses_.at(i); }

    std::optional<Dependence> directed(std::size_t src, std::size_t dst) const {
        auto it = edge_index_.find(std::make_tuple(EdgeKind::directed, src, dst));
        if (it == edge_index_.end()) return std::nullopt;
        return edges_[it->second].dependence;
    }
    std::optional<Dependence> bidirected(std::size_t a, std::size_t b) const {
        if (a > b) std::swap(a, b);
        auto it = edge_index_.find(std::make_tuple(EdgeKind::bidirected, a, b));
        if (it == edge_index_.end()) return std::nullopt;
        return edges_[it->second].dependence;
    }
    bool adjacent(std::size_t a, std::size_t b) const {
        return directed(a, b) || directed(b, a) || bidirected(a, b);
    }

    bool has_exogenous() const {
        return std::any_of(nodes_.begin(), nodes_.end(), [](const NodeId& n) { return n.exogenous(); });
    }

    GraphMetadata& metadata() { return meta_; }
    const GraphMetadata& metadata() const { return meta_; }

    /// Edges as sorted (kind, src name, dst name, dependence) tuples; the
    /// basis for structural equality.
    std::vector<std::tuple<int, std::string, std::string, int>> canonical_edges() const {
        std::vector<std::tuple<int, std::string, std::string, int>> out;
        out.reserve(edges_.size());
        for (const auto& e : edges_) {
            std::string a = name(e.src), b = name(e.dst);
            if (e.kind == EdgeKind::bidirected && b < a) std::swap(a, b);
            out.emplace_back(static_cast<int>(e.kind), a, b, static_cast<int>(e.dependence));
        }
        std::sort(out.begin(), out.end());
        return out;
    }

    /// Same node set (by name and role) and same edge set; metadata and
    /// insertion order are ignored.
    friend bool operator==(const Dmg& a, const Dmg& b) {
        if (a.size() != b.size()) return false;
        for (const auto& n : a.nodes_) {
            auto j = b.find(n.name());
            if (!j || !(b.nodes_[*j] == n)) return false;
        }
        return a.canonical_edges() == b.canonical_edges();
    }

private:
    void check_index(std::size_t i) const {
        if (i >= nodes_.size()) throw InvalidGraph("edge endpoint out of range");
    }

    void validate_new_edge(std::size_t src, std::size_t dst, EdgeKind kind) const {
        const auto& s = nodes_[src];
        const auto& d = nodes_[dst];
        if (kind == EdgeKind::directed && d.role != Role::endogenous) {
            throw InvalidGraph("directed edge into non-endogenous node '" + d.name() + "'");
        }
        if (kind == EdgeKind::bidirected &&
            (s.role == Role::intervention || d.role == Role::intervention)) {
            throw InvalidGraph("intervention nodes admit a single outgoing edge only");
        }
        if (kind == EdgeKind::directed && s.role == Role::intervention && !children_[src].empty()) {
            throw InvalidGraph("intervention node '" + s.name() + "' already has its edge");
        }
    }

    std::vector<NodeId> nodes_;
    std::unordered_map<std::string, std::size_t> index_;
    std::vector<Edge> edges_;
    std::map<std::tuple<EdgeKind, std::size_t, std::size_t>, std::size_t> edge_index_;
    std::vector<std::vector<std::size_t>> children_, parents_, spouses_;
    GraphMetadata meta_;
};

namespace detail {

inline std::vector<char> mask_of(const Dmg& g, const NodeSet& set) {
    std::vector<char> m(g.size(), 0);
    for (auto i : set) {
        if (i >= g.size()) throw UnknownNode("#" + std::to_string(i));
        m[i] = 1;
    }
    return m;
}

inline NodeSet set_of(const std::vector<char>& mask) {
    NodeSet out;
    for (std::size_t i = 0; i < mask.size(); ++i)
        if (mask[i]) out.push_back(i);
    return out;
}

}  // namespace detail

/// Component id for every node, over directed edges only. Ids are assigned
/// in a topological order of the condensation (sources first, ties broken by
/// the smallest member index).
inline std::vector<std::size_t> scc_ids(const Dmg& g) {
    const std::size_t n = g.size();
    constexpr std::size_t unset = static_cast<std::size_t>(-1);
    std::vector<std::size_t> index(n, unset), low(n, 0), comp(n, unset);
    std::vector<char> on_stack(n, 0);
    std::vector<std::size_t> stack;
    std::size_t counter = 0, n_comp = 0;

    // Iterative Tarjan.
    for (std::size_t root = 0; root < n; ++root) {
        if (index[root] != unset) continue;
        std::vector<std::pair<std::size_t, std::size_t>> call{{root, 0}};
        index[root] = low[root] = counter++;
        stack.push_back(root);
        on_stack[root] = 1;
        while (!call.empty()) {
            auto& [v, next] = call.back();
            const auto& ch = g.children(v);
            if (next < ch.size()) {
                const std::size_t w = ch[next++];
                if (index[w] == unset) {
                    index[w] = low[w] = counter++;
                    stack.push_back(w);
                    on_stack[w] = 1;
                    call.emplace_back(w, 0);
                } else if (on_stack[w]) {
                    low[v] = std::min(low[v], index[w]);
                }
                continue;
            }
            if (low[v] == index[v]) {
                std::size_t w;
                do {
                    w = stack.back();
                    stack.pop_back();
                    on_stack[w] = 0;
                    comp[w] = n_comp;
                } while (w != v);
                ++n_comp;
            }
            const std::size_t done = v;
            call.pop_back();
            if (!call.empty()) low[call.back().first] = std::min(low[call.back().first], low[done]);
        }
    }

    // Kahn over the condensation for a deterministic topological numbering.
    std::vector<std::size_t> min_member(n_comp, unset), indeg(n_comp, 0);
    std::vector<std::vector<std::size_t>> succ(n_comp);
    for (std::size_t v = 0; v < n; ++v) min_member[comp[v]] = std::min(min_member[comp[v]], v);
    for (const auto& e : g.edges()) {
        if (e.kind != EdgeKind::directed || comp[e.src] == comp[e.dst]) continue;
        succ[comp[e.src]].push_back(comp[e.dst]);
        ++indeg[comp[e.dst]];
    }
    using Item = std::pair<std::size_t, std::size_t>;  // (min member, comp)
    std::priority_queue<Item, std::vector<Item>, std::greater<>> ready;
    for (std::size_t c = 0; c < n_comp; ++c)
        if (indeg[c] == 0) ready.emplace(min_member[c], c);
    std::vector<std::size_t> order_of(n_comp, 0);
    std::size_t next_id = 0;
    while (!ready.empty()) {
        auto [_, c] = ready.top();
        ready.pop();
        order_of[c] = next_id++;
        for (auto d : succ[c])
            if (--indeg[d] == 0) ready.emplace(min_member[d], d);
    }
    std::vector<std::size_t> out(n);
    for (std::size_t v = 0; v < n; ++v) out[v] = order_of[comp[v]];
    return out;
}

/// Strongly connected components of the directed part, listed in a
/// topological order of the condensation.
inline std::vector<NodeSet> scc_partition(const Dmg& g) {
    const auto ids = scc_ids(g);
    std::size_t k = 0;
    for (auto id : ids) k = std::max(k, id + 1);
    std::vector<NodeSet> out(k);
    for (std::size_t v = 0; v < ids.size(); ++v) out[ids[v]].push_back(v);
    return out;
}

inline std::vector<char> ancestor_mask(const Dmg& g, const NodeSet& s) {
    auto mask = detail::mask_of(g, s);
    std::deque<std::size_t> queue(s.begin(), s.end());
    while (!queue.empty()) {
        const auto v = queue.front();
        queue.pop_front();
        for (auto p : g.parents(v)) {
            if (!mask[p]) {
                mask[p] = 1;
                queue.push_back(p);
            }
        }
    }
    return mask;
}

/// Anc(s), reflexive.
inline NodeSet ancestors(const Dmg& g, const NodeSet& s) {
    return detail::set_of(ancestor_mask(g, s));
}

inline NodeSet descendants(const Dmg& g, const NodeSet& s) {
    auto mask = detail::mask_of(g, s);
    std::deque<std::size_t> queue(s.begin(), s.end());
    while (!queue.empty()) {
        const auto v = queue.front();
        queue.pop_front();
        for (auto c : g.children(v)) {
            if (!mask[c]) {
                mask[c] = 1;
                queue.push_back(c);
            }
        }
    }
    return detail::set_of(mask);
}

namespace detail {

// Search state: node plus how the walk arrived there.
enum Arrival : std::uint8_t {
    arrived_head = 0,        // edge has an arrowhead at the node
    arrived_tail_same = 1,   // node -> previous, previous in the same SCC
    arrived_tail_other = 2,  // node -> previous, previous in another SCC
};

inline bool separated(const Dmg& g, const NodeSet& a, const NodeSet& b, const NodeSet& c,
                      bool sigma) {
    const std::size_t n = g.size();
    const auto in_a = mask_of(g, a);
    const auto in_b = mask_of(g, b);
    const auto in_c = mask_of(g, c);
    for (auto v : a)
        if (in_b[v]) return false;  // a trivial walk connects them

    const auto anc = ancestor_mask(g, c);
    const auto scc = scc_ids(g);
    std::vector<char> seen(3 * n, 0);
    std::deque<std::pair<std::size_t, Arrival>> queue;

    auto tail_arrival = [&](std::size_t at, std::size_t from) {
        return scc[at] == scc[from] ? arrived_tail_same : arrived_tail_other;
    };
    auto push = [&](std::size_t v, Arrival m) {
        if (!seen[3 * v + m]) {
            seen[3 * v + m] = 1;
            queue.emplace_back(v, m);
        }
    };

    for (auto s : a) {
        for (auto ch : g.children(s)) push(ch, arrived_head);
        for (auto p : g.parents(s)) push(p, tail_arrival(p, s));
        for (auto sp : g.spouses(s)) push(sp, arrived_head);
    }

    while (!queue.empty()) {
        const auto [v, m] = queue.front();
        queue.pop_front();
        if (in_b[v]) return false;

        // Whether v may be passed when leaving along an edge with or without
        // an arrowhead at v, and (for tails) towards which neighbour.
        auto passable = [&](bool head_at_v, std::size_t next) {
            if (m == arrived_head && head_at_v) return static_cast<bool>(anc[v]);
            if (!in_c[v]) return true;
            if (!sigma) return false;
            const bool blockable =
                m == arrived_tail_other || (!head_at_v && scc[next] != scc[v]);
            return !blockable;
        };

        for (auto ch : g.children(v))
            if (passable(false, ch)) push(ch, arrived_head);
        for (auto p : g.parents(v))
            if (passable(true, p)) push(p, tail_arrival(p, v));
        for (auto sp : g.spouses(v))
            if (passable(true, sp)) push(sp, arrived_head);
    }
    return true;
}

}  // namespace detail

/// True iff every walk between a and b is sigma-blocked by c. A collider
/// blocks unless it is in Anc(c); a non-collider in c blocks only if it has a
/// child on the walk outside its own strongly connected component.
inline bool sigma_separated(const Dmg& g, const NodeSet& a, const NodeSet& b, const NodeSet& c) {
    return detail::separated(g, a, b, c, true);
}

/// As sigma_separated, but every non-collider in c blocks.
inline bool d_separated(const Dmg& g, const NodeSet& a, const NodeSet& b, const NodeSet& c) {
    return detail::separated(g, a, b, c, false);
}

inline bool sigma_separated(const Dmg& g, const std::vector<std::string>& a,
                            const std::vector<std::string>& b, const std::vector<std::string>& c) {
    return sigma_separated(g, g.indices(a), g.indices(b), g.indices(c));
}

inline bool d_separated(const Dmg& g, const std::vector<std::string>& a,
                        const std::vector<std::string>& b, const std::vector<std::string>& c) {
    return d_separated(g, g.indices(a), g.indices(b), g.indices(c));
}

/// Copy of g restricted to the nodes for which keep[i] is set.
inline Dmg induced_subgraph(const Dmg& g, const std::vector<char>& keep) {
    Dmg out;
    std::vector<std::size_t> remap(g.size(), 0);
    for (std::size_t i = 0; i < g.size(); ++i)
        if (keep[i]) remap[i] = out.add_node(g.node(i));
    for (const auto& e : g.edges())
        if (keep[e.src] && keep[e.dst]) out.add_edge(remap[e.src], remap[e.dst], e.kind, e.dependence);
    out.metadata() = g.metadata();
    return out;
}

/// Latent projection onto the nodes not in `drop`.
///
/// Directed u -> v survives when a directed walk u -> l1 -> ... -> v runs
/// through dropped nodes only; it is adapted iff some such walk is adapted
/// throughout. Bidirected u <-> v appears when both endpoints receive
/// arrowheads from a common dropped source (or a bidirected edge between
/// dropped descendants-of-sources). In a graph with explicit exogenous nodes
/// only exogenous sources carry hidden noise, so dropping an endogenous node
/// yields directed edges from its exogenous parents rather than a bidirected
/// edge. Deterministic exogenous inputs never confound.
inline Dmg latent_project(const Dmg& g, const NodeSet& drop) {
    const std::size_t n = g.size();
    const auto dropped = detail::mask_of(g, drop);
    const bool augmented = g.has_exogenous();

    auto noise_bearing = [&](std::size_t l) {
        const auto& node = g.node(l);
        if (node.deterministic || node.role == Role::intervention) return false;
        return augmented ? node.exogenous() : true;
    };

    // For every node x: dropped sources l with l -> ... -> x through dropped
    // nodes; `all_adapted` tracks whether such a walk exists with only adapted
    // edges.
    struct Reach {
        std::vector<char> any, all_adapted;
    };
    std::vector<Reach> from(n);  // from[l]: nodes reachable from dropped l
    for (std::size_t l = 0; l < n; ++l) {
        if (!dropped[l]) continue;
        Reach r{std::vector<char>(n, 0), std::vector<char>(n, 0)};
        std::deque<std::pair<std::size_t, bool>> queue{{l, true}};
        std::vector<char> seen_any(n, 0), seen_adapted(n, 0);
        seen_any[l] = seen_adapted[l] = 1;
        while (!queue.empty()) {
            auto [v, adapted] = queue.front();
            queue.pop_front();
            for (auto ch : g.children(v)) {
                const bool a2 = adapted && *g.directed(v, ch) == Dependence::adapted;
                if (ch != l) {
                    r.any[ch] = 1;
                    if (a2) r.all_adapted[ch] = 1;
                }
                if (!dropped[ch]) continue;
                if (a2 ? seen_adapted[ch] : seen_any[ch]) continue;
                seen_any[ch] = 1;
                if (a2) seen_adapted[ch] = 1;
                queue.emplace_back(ch, a2);
            }
        }
        from[l] = std::move(r);
    }

    Dmg out;
    std::vector<std::size_t> remap(n, 0);
    for (std::size_t i = 0; i < n; ++i)
        if (!dropped[i]) remap[i] = out.add_node(g.node(i));

    for (const auto& e : g.edges()) {
        if (dropped[e.src] || dropped[e.dst]) continue;
        out.add_edge(remap[e.src], remap[e.dst], e.kind, e.dependence);
    }

    // Directed edges through dropped intermediates.
    for (std::size_t u = 0; u < n; ++u) {
        if (dropped[u]) continue;
        for (auto l : g.children(u)) {
            if (!dropped[l]) continue;
            const bool first_adapted = *g.directed(u, l) == Dependence::adapted;
            for (std::size_t v = 0; v < n; ++v) {
                if (dropped[v] || v == u || !from[l].any[v]) continue;
                const bool adapted = first_adapted && from[l].all_adapted[v];
                out.add_directed(remap[u], remap[v],
                                 adapted ? Dependence::adapted : Dependence::predictable);
            }
        }
    }

    // "Arrowhead sources" of a kept node x: x itself (via bidirected edges)
    // or any dropped l reaching x.
    auto bidirect = [&](std::size_t u, std::size_t v, bool adapted) {
        if (u == v) return;
        out.add_bidirected(remap[u], remap[v], adapted ? Dependence::adapted : Dependence::predictable);
    };
    for (std::size_t l = 0; l < n; ++l) {
        if (!dropped[l]) continue;
        if (noise_bearing(l)) {
            for (std::size_t u = 0; u < n; ++u) {
                if (dropped[u] || !from[l].any[u]) continue;
                for (std::size_t v = u + 1; v < n; ++v) {
                    if (dropped[v] || !from[l].any[v]) continue;
                    bidirect(u, v, from[l].all_adapted[u] && from[l].all_adapted[v]);
                }
            }
        }
    }
    for (const auto& e : g.edges()) {
        if (e.kind != EdgeKind::bidirected) continue;
        if (!dropped[e.src] && !dropped[e.dst]) continue;
        const bool e_adapted = e.dependence == Dependence::adapted;
        // Kept endpoints reachable through each side (the side itself if kept).
        auto side = [&](std::size_t s) {
            std::vector<std::pair<std::size_t, bool>> hits;
            if (!dropped[s]) {
                hits.emplace_back(s, true);
                return hits;
            }
            for (std::size_t x = 0; x < n; ++x)
                if (!dropped[x] && from[s].any[x]) hits.emplace_back(x, from[s].all_adapted[x] != 0);
            return hits;
        };
        for (auto [u, au] : side(e.src))
            for (auto [v, av] : side(e.dst)) bidirect(u, v, e_adapted && au && av);
    }

    out.metadata() = g.metadata();
    out.metadata().projection_superset = true;
    return out;
}

inline Dmg latent_project(const Dmg& g, const std::vector<std::string>& drop) {
    return latent_project(g, g.indices(drop));
}

/// G(M) from an augmented graph G+(M): exogenous nodes are removed and every
/// pair of endogenous children of a common (non-deterministic) exogenous node
/// is joined by a bidirected edge, adapted iff both contributing edges are.
inline Dmg to_dmg(const Dmg& g) {
    std::vector<char> keep(g.size(), 0);
    for (std::size_t i = 0; i < g.size(); ++i) keep[i] = !g.node(i).exogenous();
    Dmg out = induced_subgraph(g, keep);
    for (std::size_t k = 0; k < g.size(); ++k) {
        const auto& node = g.node(k);
        if (!node.exogenous() || node.deterministic) continue;
        const auto& ch = g.children(k);
        for (std::size_t i = 0; i < ch.size(); ++i) {
            for (std::size_t j = i + 1; j < ch.size(); ++j) {
                const bool adapted = *g.directed(k, ch[i]) == Dependence::adapted &&
                                     *g.directed(k, ch[j]) == Dependence::adapted;
                out.add_bidirected(g.name(ch[i]), g.name(ch[j]),
                                   adapted ? Dependence::adapted : Dependence::predictable);
            }
        }
    }
    return out;
}

}  // namespace dscm
