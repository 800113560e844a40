#pragma once

// FCI over an exact independence oracle, producing a partial ancestral
// graph. Selection bias is not modelled, so the orientation closure uses
// R1-R4 and R8-R10.

#include <algorithm>
#include <functional>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "dscm/dmg.hpp"
#include "dscm/independence.hpp"

namespace dscm {

enum class Mark : unsigned char { none = 0, circle, arrow, tail };

class Pag {
public:
    Pag() = default;
    explicit Pag(std::vector<std::string> nodes)
        : nodes_(std::move(nodes)), mark_(nodes_.size(), std::vector<Mark>(nodes_.size(), Mark::none)) {}

    std::size_t size() const { return nodes_.size(); }
    const std::vector<std::string>& nodes() const { return nodes_; }
    std::optional<std::size_t> find(const std::string& n) const {
        for (std::size_t i = 0; i < nodes_.size(); ++i)
            if (nodes_[i] == n) return i;
        return std::nullopt;
    }

    bool adjacent(std::size_t a, std::size_t b) const { return mark_[a][b] != Mark::none; }
    /// Mark at `b` on the edge between a and b.
    Mark at(std::size_t a, std::size_t b) const { return mark_[a][b]; }
    void set(std::size_t a, std::size_t b, Mark m) { mark_[a][b] = m; }
    void connect(std::size_t a, std::size_t b, Mark at_a, Mark at_b) {
        mark_[b][a] = at_a;
        mark_[a][b] = at_b;
    }
    void disconnect(std::size_t a, std::size_t b) { mark_[a][b] = mark_[b][a] = Mark::none; }

    /// One line per edge, `A o-o B`, `A o-> B`, `A --> B` or `A <-> B`,
    /// flipped so the stronger mark sits on the right (the smaller name first
    /// when both marks agree); lines sorted.
    std::vector<std::string> edge_lines() const {
        auto rank = [](Mark m) { return m == Mark::arrow ? 2 : m == Mark::circle ? 1 : 0; };
        auto left = [](Mark m) { return m == Mark::arrow ? '<' : m == Mark::circle ? 'o' : '-'; };
        auto right = [](Mark m) { return m == Mark::arrow ? '>' : m == Mark::circle ? 'o' : '-'; };
        std::vector<std::string> out;
        for (std::size_t a = 0; a < size(); ++a) {
            for (std::size_t b = a + 1; b < size(); ++b) {
                if (!adjacent(a, b)) continue;
                std::size_t x = a, y = b;
                const int ry = rank(at(y, x)), rx = rank(at(x, y));
                if (ry > rx || (ry == rx && nodes_[y] < nodes_[x])) std::swap(x, y);
                out.push_back(nodes_[x] + " " + left(at(y, x)) + "-" + right(at(x, y)) + " " + nodes_[y]);
            }
        }
        std::sort(out.begin(), out.end());
        return out;
    }

    std::string to_string() const {
        std::string s;
        for (const auto& l : edge_lines()) s += l + "\n";
        return s;
    }

    /// Equality up to node order.
    friend bool operator==(const Pag& a, const Pag& b) {
        auto sa = a.nodes_, sb = b.nodes_;
        std::sort(sa.begin(), sa.end());
        std::sort(sb.begin(), sb.end());
        return sa == sb && a.edge_lines() == b.edge_lines();
    }

private:
    std::vector<std::string> nodes_;
    std::vector<std::vector<Mark>> mark_;
};

namespace detail {

class FciOrienter {
public:
    FciOrienter(Pag& p, const std::vector<std::vector<std::optional<std::vector<std::size_t>>>>& sepset)
        : p_(p), sepset_(sepset), n_(p.size()) {}

    void run() {
        orient_colliders();
        bool changed = true;
        while (changed) {
            changed = false;
            changed |= r1();
            changed |= r2();
            changed |= r3();
            changed |= r4();
            changed |= r8();
            changed |= r9();
            changed |= r10();
        }
    }

private:
    bool in_sepset(std::size_t a, std::size_t c, std::size_t b) const {
        const auto& s = sepset_[a][c];
        return s && std::find(s->begin(), s->end(), b) != s->end();
    }

    // R0: unshielded a *-* b *-* c with b outside sepset(a, c) is a collider.
    void orient_colliders() {
        for (std::size_t b = 0; b < n_; ++b)
            for (std::size_t a = 0; a < n_; ++a)
                for (std::size_t c = a + 1; c < n_; ++c) {
                    if (a == b || c == b) continue;
                    if (!p_.adjacent(a, b) || !p_.adjacent(c, b) || p_.adjacent(a, c)) continue;
                    if (in_sepset(a, c, b)) continue;
                    p_.set(a, b, Mark::arrow);
                    p_.set(c, b, Mark::arrow);
                }
    }

    // R1: a *-> b o-* c, a and c non-adjacent => b --> c.
    bool r1() {
        bool changed = false;
        for (std::size_t b = 0; b < n_; ++b)
            for (std::size_t a = 0; a < n_; ++a) {
                if (a == b || !p_.adjacent(a, b) || p_.at(a, b) != Mark::arrow) continue;
                for (std::size_t c = 0; c < n_; ++c) {
                    if (c == a || c == b || !p_.adjacent(b, c) || p_.adjacent(a, c)) continue;
                    if (p_.at(c, b) != Mark::circle) continue;
                    p_.set(c, b, Mark::tail);
                    p_.set(b, c, Mark::arrow);
                    changed = true;
                }
            }
        return changed;
    }

    // R2: (a --> b *-> c or a *-> b --> c) and a *-o c => a *-> c.
    bool r2() {
        bool changed = false;
        for (std::size_t a = 0; a < n_; ++a)
            for (std::size_t c = 0; c < n_; ++c) {
                if (a == c || !p_.adjacent(a, c) || p_.at(a, c) != Mark::circle) continue;
                for (std::size_t b = 0; b < n_; ++b) {
                    if (b == a || b == c || !p_.adjacent(a, b) || !p_.adjacent(b, c)) continue;
                    const bool first = p_.at(a, b) == Mark::arrow && p_.at(b, a) == Mark::tail &&
                                       p_.at(b, c) == Mark::arrow;
                    const bool second = p_.at(a, b) == Mark::arrow && p_.at(b, c) == Mark::arrow &&
                                        p_.at(c, b) == Mark::tail;
                    if (first || second) {
                        p_.set(a, c, Mark::arrow);
                        changed = true;
                        break;
                    }
                }
            }
        return changed;
    }

    // R3: a *-> b <-* c, a *-o d o-* c, a and c non-adjacent, d *-o b
    // => d *-> b.
    bool r3() {
        bool changed = false;
        for (std::size_t d = 0; d < n_; ++d)
            for (std::size_t b = 0; b < n_; ++b) {
                if (d == b || !p_.adjacent(d, b) || p_.at(d, b) != Mark::circle) continue;
                bool done = false;
                for (std::size_t a = 0; a < n_ && !done; ++a) {
                    if (a == d || a == b) continue;
                    for (std::size_t c = a + 1; c < n_ && !done; ++c) {
                        if (c == d || c == b || p_.adjacent(a, c)) continue;
                        if (!p_.adjacent(a, b) || !p_.adjacent(c, b) || !p_.adjacent(a, d) || !p_.adjacent(c, d)) continue;
                        if (p_.at(a, b) != Mark::arrow || p_.at(c, b) != Mark::arrow) continue;
                        if (p_.at(a, d) != Mark::circle || p_.at(c, d) != Mark::circle) continue;
                        p_.set(d, b, Mark::arrow);
                        changed = done = true;
                    }
                }
            }
        return changed;
    }

    // R4: on a discriminating path <t, ..., a, b, c> for b with b o-* c:
    // b in sepset(t, c) => b --> c, otherwise a <-> b <-> c.
    bool r4() {
        bool changed = false;
        for (std::size_t b = 0; b < n_; ++b)
            for (std::size_t c = 0; c < n_; ++c) {
                if (b == c || !p_.adjacent(b, c) || p_.at(c, b) != Mark::circle) continue;
                for (std::size_t a = 0; a < n_; ++a) {
                    if (a == b || a == c) continue;
                    // a <-* b and a --> c, a collider-to-be on the path.
                    if (!p_.adjacent(a, b) || !p_.adjacent(a, c)) continue;
                    if (p_.at(b, a) != Mark::arrow || !is_parent(a, c)) continue;
                    if (auto t = discriminating_start(a, b, c)) {
                        if (in_sepset(*t, c, b)) {
                            p_.set(c, b, Mark::tail);
                            p_.set(b, c, Mark::arrow);
                        } else {
                            p_.set(a, b, Mark::arrow);
                            p_.set(b, a, Mark::arrow);
                            p_.set(c, b, Mark::arrow);
                            p_.set(b, c, Mark::arrow);
                        }
                        changed = true;
                        break;
                    }
                }
            }
        return changed;
    }

    bool is_parent(std::size_t x, std::size_t y) const {
        return p_.adjacent(x, y) && p_.at(x, y) == Mark::arrow && p_.at(y, x) == Mark::tail;
    }

    // Breadth-first search backwards from a for the start t of a
    // discriminating path t *-> q_1 <-> ... <-> a <-* b with every q_i a
    // parent of c and t not adjacent to c.
    std::optional<std::size_t> discriminating_start(std::size_t a, std::size_t b, std::size_t c) const {
        std::vector<char> seen(n_, 0);
        seen[b] = seen[c] = seen[a] = 1;
        std::vector<std::size_t> frontier{a};
        while (!frontier.empty()) {
            std::vector<std::size_t> next;
            for (auto q : frontier) {
                for (std::size_t t = 0; t < n_; ++t) {
                    if (seen[t] || !p_.adjacent(t, q) || p_.at(t, q) != Mark::arrow) continue;
                    if (!p_.adjacent(t, c) && t != c) return t;
                    // t continues the path only as a collider that is a parent of c.
                    if (p_.at(q, t) == Mark::arrow && is_parent(t, c)) {
                        seen[t] = 1;
                        next.push_back(t);
                    }
                }
            }
            frontier = std::move(next);
        }
        return std::nullopt;
    }

    // Uncovered potentially directed paths from `from` to `to`; calls f with
    // the vertex following `from`. The path may not pass through `avoid`.
    void uncovered_pd_paths(std::size_t from, std::size_t to, std::size_t avoid,
                            const std::function<bool(std::size_t)>& f) const {
        std::vector<std::size_t> path{from};
        std::vector<char> on(n_, 0);
        on[from] = 1;
        on[avoid] = 1;
        std::function<bool(std::size_t)> dfs = [&](std::size_t v) -> bool {
            for (std::size_t w = 0; w < n_; ++w) {
                if (!p_.adjacent(v, w)) continue;
                if (w != to && on[w]) continue;
                if (p_.at(w, v) == Mark::arrow || p_.at(v, w) == Mark::tail) continue;
                if (path.size() >= 2 && p_.adjacent(path[path.size() - 2], w)) continue;
                if (w == to) {
                    if (f(path.size() >= 2 ? path[1] : w)) return true;
                    continue;
                }
                on[w] = 1;
                path.push_back(w);
                if (dfs(w)) return true;
                path.pop_back();
                on[w] = 0;
            }
            return false;
        };
        dfs(from);
    }

    // R8: (a --> b --> c or a -o b --> c) and a o-> c => a --> c.
    bool r8() {
        bool changed = false;
        for (std::size_t a = 0; a < n_; ++a)
            for (std::size_t c = 0; c < n_; ++c) {
                if (a == c || !p_.adjacent(a, c) || p_.at(a, c) != Mark::arrow || p_.at(c, a) != Mark::circle) continue;
                for (std::size_t b = 0; b < n_; ++b) {
                    if (b == a || b == c || !p_.adjacent(a, b) || !is_parent(b, c)) continue;
                    const bool ab = p_.at(b, a) == Mark::tail &&
                                    (p_.at(a, b) == Mark::arrow || p_.at(a, b) == Mark::circle);
                    if (!ab) continue;
                    p_.set(c, a, Mark::tail);
                    changed = true;
                    break;
                }
            }
        return changed;
    }

    // R9: a o-> c and an uncovered potentially directed path a, b, ..., c
    // with b and c non-adjacent => a --> c.
    bool r9() {
        bool changed = false;
        for (std::size_t a = 0; a < n_; ++a)
            for (std::size_t c = 0; c < n_; ++c) {
                if (a == c || !p_.adjacent(a, c) || p_.at(a, c) != Mark::arrow || p_.at(c, a) != Mark::circle) continue;
                bool found = false;
                uncovered_pd_paths(a, c, a, [&](std::size_t b) {
                    if (b != c && !p_.adjacent(b, c)) found = true;
                    return found;
                });
                if (found) {
                    p_.set(c, a, Mark::tail);
                    changed = true;
                }
            }
        return changed;
    }

    // R10: a o-> c, b --> c <-- d, uncovered potentially directed paths from
    // a to b and from a to d whose second vertices m, w differ and are
    // non-adjacent => a --> c.
    bool r10() {
        bool changed = false;
        for (std::size_t a = 0; a < n_; ++a)
            for (std::size_t c = 0; c < n_; ++c) {
                if (a == c || !p_.adjacent(a, c) || p_.at(a, c) != Mark::arrow || p_.at(c, a) != Mark::circle) continue;
                bool done = false;
                for (std::size_t b = 0; b < n_ && !done; ++b) {
                    if (b == a || b == c || !is_parent(b, c)) continue;
                    for (std::size_t d = b + 1; d < n_ && !done; ++d) {
                        if (d == a || d == c || !is_parent(d, c)) continue;
                        std::vector<std::size_t> mus, omegas;
                        uncovered_pd_paths(a, b, c, [&](std::size_t m) {
                            mus.push_back(m);
                            return false;
                        });
                        uncovered_pd_paths(a, d, c, [&](std::size_t w) {
                            omegas.push_back(w);
                            return false;
                        });
                        for (auto m : mus)
                            for (auto w : omegas)
                                if (m != w && !p_.adjacent(m, w)) done = true;
                    }
                }
                if (done) {
                    p_.set(c, a, Mark::tail);
                    changed = true;
                }
            }
        return changed;
    }

    Pag& p_;
    const std::vector<std::vector<std::optional<std::vector<std::size_t>>>>& sepset_;
    std::size_t n_;
};

}  // namespace detail

/// FCI: skeleton by exhaustive separating-set search (smallest set first,
/// then lexicographic by universe position), collider orientation, then the
/// orientation closure.
inline Pag fci(const IndependenceModel& im) {
    const auto& u = im.universe();
    const std::size_t n = u.size();
    if (n >= 2 && im.max_cond() + 2 < n) {
        throw InvalidArgument("independence model must cover conditioning sets up to size " + std::to_string(n - 2));
    }
    Pag p(u);
    std::vector<std::vector<std::optional<std::vector<std::size_t>>>> sepset(
        n, std::vector<std::optional<std::vector<std::size_t>>>(n));
    for (std::size_t a = 0; a < n; ++a) {
        for (std::size_t b = a + 1; b < n; ++b) {
            std::vector<std::size_t> pool;
            for (std::size_t v = 0; v < n; ++v)
                if (v != a && v != b) pool.push_back(v);
            const bool separated = for_each_subset(pool, im.max_cond(), [&](const std::vector<std::size_t>& c) {
                if (!im.separated(a, b, c)) return false;
                sepset[a][b] = sepset[b][a] = c;
                return true;
            });
            if (!separated) p.connect(a, b, Mark::circle, Mark::circle);
        }
    }
    detail::FciOrienter(p, sepset).run();
    return p;
}

/// Soundness of `p` for `g`: the skeleton is exactly the set of pairs no
/// set separates, every arrowhead at b on a-b has b not an ancestor of a,
/// and every tail at a on a-b has a an ancestor of b.
inline bool soundness_check(const Dmg& g, const Pag& p) {
    if (p.size() != g.size()) return false;
    std::vector<std::size_t> gi(p.size());
    for (std::size_t i = 0; i < p.size(); ++i) {
        auto j = g.find(p.nodes()[i]);
        if (!j) return false;
        gi[i] = *j;
    }
    std::vector<std::vector<char>> anc(g.size());
    for (std::size_t v = 0; v < g.size(); ++v) anc[v] = ancestor_mask(g, NodeSet{v});

    for (std::size_t a = 0; a < p.size(); ++a) {
        for (std::size_t b = a + 1; b < p.size(); ++b) {
            NodeSet pool;
            for (std::size_t v = 0; v < g.size(); ++v)
                if (v != gi[a] && v != gi[b]) pool.push_back(v);
            const bool separable = for_each_subset(pool, pool.size(), [&](const std::vector<std::size_t>& c) {
                return sigma_separated(g, NodeSet{gi[a]}, NodeSet{gi[b]}, NodeSet(c.begin(), c.end()));
            });
            if (separable == p.adjacent(a, b)) return false;
        }
    }
    for (std::size_t a = 0; a < p.size(); ++a) {
        for (std::size_t b = 0; b < p.size(); ++b) {
            if (a == b || !p.adjacent(a, b)) continue;
            if (p.at(a, b) == Mark::arrow && anc[gi[a]][gi[b]]) return false;  // b in Anc(a)
            if (p.at(b, a) == Mark::tail && !anc[gi[b]][gi[a]]) return false;  // a not in Anc(b)
        }
    }
    return true;
}

struct CompletenessReport {
    bool pags_equal = false;
    bool models_equal = false;
    bool holds() const { return pags_equal == models_equal; }
};

/// Evaluates both sides of "same PAG iff same independence model".
inline CompletenessReport completeness_check(const Dmg& g1, const Dmg& g2) {
    std::vector<std::string> n1, n2;
    for (std::size_t i = 0; i < g1.size(); ++i) n1.push_back(g1.name(i));
    for (std::size_t i = 0; i < g2.size(); ++i) n2.push_back(g2.name(i));
    if (n1 != n2) throw InvalidArgument("completeness check needs graphs over the same node list");
    const std::size_t k = g1.size() >= 2 ? g1.size() - 2 : 0;
    const auto im1 = enumerate_im(g1, k);
    const auto im2 = enumerate_im(g2, k);
    CompletenessReport rep;
    rep.models_equal = im1 == im2;
    rep.pags_equal = fci(im1) == fci(im2);
    return rep;
}

}  // namespace dscm
