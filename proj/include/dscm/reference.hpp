#pragma once

// Brute-force reference implementations used as test oracles. They follow
// the definitions literally and are only meant for small graphs.

#include <cstddef>
#include <vector>

#include "dscm/dmg.hpp"

namespace dscm::reference {

/// reach[u][v]: a directed path (possibly empty) leads from u to v.
/// Floyd-Warshall transitive closure.
inline std::vector<std::vector<char>> reachability(const Dmg& g) {
    const std::size_t n = g.size();
    std::vector<std::vector<char>> r(n, std::vector<char>(n, 0));
    for (std::size_t v = 0; v < n; ++v) r[v][v] = 1;
    for (const auto& e : g.edges())
        if (e.kind == EdgeKind::directed) r[e.src][e.dst] = 1;
    for (std::size_t k = 0; k < n; ++k)
        for (std::size_t i = 0; i < n; ++i)
            if (r[i][k])
                for (std::size_t j = 0; j < n; ++j)
                    if (r[k][j]) r[i][j] = 1;
    return r;
}

inline bool same_scc(const std::vector<std::vector<char>>& r, std::size_t u, std::size_t v) { return r[u][v] && r[v][u]; }

namespace detail {

// One traversal of an edge: from `from` to `to`, with the marks at both ends.
struct Step {
    std::size_t edge;
    bool reversed;
    std::size_t from, to;
    bool head_at_from, head_at_to;
};

struct WalkSearch {
    const Dmg& g;
    const std::vector<char>& in_b;
    const std::vector<char>& in_c;
    const std::vector<char>& anc_c;
    const std::vector<std::vector<char>>& reach;
    bool sigma;
    std::vector<std::vector<Step>> out;   // steps leaving each node
    std::vector<char> used;               // per (edge, direction), never reset
    std::vector<Step> walk;

    // Blocking status of the node between `in` and `next` on the walk.
    bool blocks(const Step& in, const Step& next) const {
        const std::size_t v = in.to;
        const bool collider = in.head_at_to && next.head_at_from;
        if (collider) return !anc_c[v];
        if (!in_c[v]) return false;
        if (!sigma) return true;
        // Children of v on the walk: a tail at v with an arrowhead opposite.
        const bool child_in = !in.head_at_to && in.head_at_from;
        const bool child_out = !next.head_at_from && next.head_at_to;
        const bool blockable = (child_in && !same_scc(reach, v, in.from)) || (child_out && !same_scc(reach, v, next.to));
        return blockable;
    }

    bool extend() {
        const Step last = walk.back();
        if (in_b[last.to]) return true;
        for (const auto& s : out[last.to]) {
            const std::size_t key = 2 * s.edge + (s.reversed ? 1 : 0);
            if (used[key]) continue;
            if (blocks(last, s)) continue;
            used[key] = 1;
            walk.push_back(s);
            const bool found = extend();
            walk.pop_back();
            if (found) return true;
        }
        return false;
    }
};

}  // namespace detail

/// Separation by searching walks from a to b, applying the blocking rules
/// literally to each pair of consecutive edge traversals. Whether a walk may
/// continue depends only on its last traversal, so each (edge, direction)
/// is expanded once. A shared member of a and b is never separated.
inline bool walk_separated(const Dmg& g, const NodeSet& a, const NodeSet& b, const NodeSet& c, bool sigma) {
    const std::size_t n = g.size();
    std::vector<char> in_b(n, 0), in_c(n, 0);
    for (auto v : b) in_b[v] = 1;
    for (auto v : c) in_c[v] = 1;
    for (auto v : a)
        if (in_b[v]) return false;
    const auto reach = reachability(g);
    std::vector<char> anc_c(n, 0);
    for (std::size_t u = 0; u < n; ++u)
        for (auto v : c)
            if (reach[u][v]) anc_c[u] = 1;

    detail::WalkSearch search{g, in_b, in_c, anc_c, reach, sigma, std::vector<std::vector<detail::Step>>(n),
                              std::vector<char>(2 * g.edges().size(), 0), {}};
    for (std::size_t i = 0; i < g.edges().size(); ++i) {
        const auto& e = g.edges()[i];
        const bool bi = e.kind == EdgeKind::bidirected;
        search.out[e.src].push_back({i, false, e.src, e.dst, bi, true});
        search.out[e.dst].push_back({i, true, e.dst, e.src, true, bi});
    }
    for (auto s : a) {
        for (const auto& st : search.out[s]) {
            const std::size_t key = 2 * st.edge + (st.reversed ? 1 : 0);
            if (search.used[key]) continue;
            search.used[key] = 1;
            search.walk.assign(1, st);
            if (search.extend()) return false;
        }
    }
    return true;
}

}  // namespace dscm::reference
