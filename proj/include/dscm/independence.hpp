#pragma once

// Independence models of graphs, local-independence graphs and do-calculus
// preconditions.

#include <algorithm>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <tuple>
#include <vector>

#include "dscm/dmg.hpp"
#include "dscm/graph_io.hpp"
#include "dscm/sde_graph.hpp"

namespace dscm {

struct IndependenceStatement {
    std::string a, b;
    std::vector<std::string> c;
    bool separated = true;
    friend bool operator==(const IndependenceStatement&, const IndependenceStatement&) = default;
};

/// Singleton-pair statements over a universe. Triples with |C| <= max_cond
/// that are not recorded are read as dependent (closed world).
class IndependenceModel {
public:
    IndependenceModel() = default;
    IndependenceModel(std::vector<std::string> universe, std::size_t max_cond)
        : universe_(std::move(universe)), max_cond_(max_cond) {
        for (std::size_t i = 0; i < universe_.size(); ++i) {
            if (!pos_.emplace(universe_[i], i).second) throw InvalidArgument("duplicate universe node '" + universe_[i] + "'");
        }
    }

    const std::vector<std::string>& universe() const { return universe_; }
    std::size_t max_cond() const { return max_cond_; }
    std::size_t index(const std::string& n) const {
        auto it = pos_.find(n);
        if (it == pos_.end()) throw UnknownNode(n);
        return it->second;
    }

    /// Records a statement; contradicting an earlier record is an error.
    void add(const std::string& a, const std::string& b, std::vector<std::string> c, bool separated) {
        auto key = make_key(a, b, c);
        auto [it, fresh] = records_.emplace(key, separated);
        if (!fresh && it->second != separated) {
            throw InvalidArgument("inconsistent model: " + a + " and " + b + " recorded both separated and dependent");
        }
        if (fresh) order_.push_back(key);
    }

    /// Separation status of (a, b | c) under the closed-world reading.
    bool separated(std::size_t a, std::size_t b, const std::vector<std::size_t>& c) const {
        Key k{std::min(a, b), std::max(a, b), sorted(c)};
        auto it = records_.find(k);
        if (it != records_.end()) return it->second;
        if (c.size() > max_cond_) throw InvalidArgument("query exceeds the model's conditioning bound");
        return false;
    }
    bool separated(const std::string& a, const std::string& b, const std::vector<std::string>& c) const {
        std::vector<std::size_t> ci;
        for (const auto& n : c) ci.push_back(index(n));
        return separated(index(a), index(b), ci);
    }

    std::vector<IndependenceStatement> statements() const {
        std::vector<IndependenceStatement> out;
        for (const auto& k : order_) {
            IndependenceStatement s{universe_[std::get<0>(k)], universe_[std::get<1>(k)], {}, records_.at(k)};
            for (auto i : std::get<2>(k)) s.c.push_back(universe_[i]);
            out.push_back(std::move(s));
        }
        return out;
    }

    /// Sets of separations, as comparable values.
    std::vector<std::tuple<std::size_t, std::size_t, std::vector<std::size_t>>> separations() const {
        std::vector<Key> out;
        for (const auto& [k, sep] : records_)
            if (sep) out.push_back(k);
        return out;
    }

    friend bool operator==(const IndependenceModel& x, const IndependenceModel& y) {
        return x.universe_ == y.universe_ && x.separations() == y.separations();
    }

private:
    using Key = std::tuple<std::size_t, std::size_t, std::vector<std::size_t>>;

    static std::vector<std::size_t> sorted(std::vector<std::size_t> v) {
        std::sort(v.begin(), v.end());
        return v;
    }

    Key make_key(const std::string& a, const std::string& b, const std::vector<std::string>& c) const {
        std::size_t ia = index(a), ib = index(b);
        if (ia == ib) throw InvalidArgument("statement relates '" + a + "' to itself");
        std::vector<std::size_t> ci;
        for (const auto& n : c) {
            const auto i = index(n);
            if (i == ia || i == ib) throw InvalidArgument("conditioning set contains an endpoint");
            ci.push_back(i);
        }
        ci = sorted(ci);
        return Key{std::min(ia, ib), std::max(ia, ib), ci};
    }

    std::vector<std::string> universe_;
    std::map<std::string, std::size_t> pos_;
    std::size_t max_cond_ = 0;
    std::map<Key, bool> records_;
    std::vector<Key> order_;
};

/// Calls f(subset) for every subset of `pool` of size <= max_size, by size
/// and then lexicographically by position in `pool`. Stops early if f
/// returns true; returns whether it did.
template <class F>
bool for_each_subset(const std::vector<std::size_t>& pool, std::size_t max_size, F&& f) {
    const std::size_t n = pool.size();
    std::vector<std::size_t> idx;
    std::vector<std::size_t> subset;
    for (std::size_t k = 0; k <= std::min(max_size, n); ++k) {
        idx.resize(k);
        for (std::size_t i = 0; i < k; ++i) idx[i] = i;
        while (true) {
            subset.resize(k);
            for (std::size_t i = 0; i < k; ++i) subset[i] = pool[idx[i]];
            if (f(subset)) return true;
            std::size_t i = k;
            while (i > 0 && idx[i - 1] == n - k + i - 1) --i;
            if (i == 0) break;
            ++idx[i - 1];
            for (std::size_t j = i; j < k; ++j) idx[j] = idx[j - 1] + 1;
        }
    }
    return false;
}

inline constexpr std::size_t default_im_size_limit = 10;

/// Every (a, b | C) sigma-separation statement with singleton a, b and
/// |C| <= max_set_size, over all graph nodes. Dependences are recorded too.
inline IndependenceModel enumerate_im(const Dmg& g, std::size_t max_set_size,
                                      std::size_t size_limit = default_im_size_limit) {
    if (g.size() > size_limit) {
        throw InvalidArgument("graph has " + std::to_string(g.size()) + " nodes; enumeration is limited to " +
                              std::to_string(size_limit));
    }
    std::vector<std::string> universe;
    for (std::size_t i = 0; i < g.size(); ++i) universe.push_back(g.name(i));
    const std::size_t bound = std::min(max_set_size, g.size() >= 2 ? g.size() - 2 : 0);
    IndependenceModel im(universe, bound);
    for (std::size_t a = 0; a < g.size(); ++a) {
        for (std::size_t b = a + 1; b < g.size(); ++b) {
            std::vector<std::size_t> pool;
            for (std::size_t v = 0; v < g.size(); ++v)
                if (v != a && v != b) pool.push_back(v);
            for_each_subset(pool, bound, [&](const std::vector<std::size_t>& c) {
                const bool sep = sigma_separated(g, NodeSet{a}, NodeSet{b}, NodeSet(c.begin(), c.end()));
                std::vector<std::string> cn;
                for (auto i : c) cn.push_back(universe[i]);
                im.add(universe[a], universe[b], cn, sep);
                return false;
            });
        }
    }
    return im;
}

namespace detail {

// Splits on commas outside brackets, so names like X@[0,s) stay intact.
inline std::vector<std::string> split_top_commas(const std::string& s) {
    std::vector<std::string> out;
    std::string cur;
    int depth = 0;
    for (char ch : s) {
        if (ch == '[' || ch == '(' || ch == '{') ++depth;
        if (ch == ']' || ch == ')' || ch == '}') --depth;
        if (ch == ',' && depth == 0) {
            out.push_back(trim(cur));
            cur.clear();
        } else {
            cur += ch;
        }
    }
    if (!trim(cur).empty() || !out.empty()) out.push_back(trim(cur));
    return out;
}

}  // namespace detail

/// Text form: header lines `# universe: A, B, ...` and `# max_cond: k`, then
/// `A _||_ B | C1,C2` per separation; `with_dependences` also writes
/// `A _|/|_ B | C` lines.
inline std::string write_im(const IndependenceModel& im, bool with_dependences = false) {
    std::ostringstream out;
    out << "# universe: ";
    for (std::size_t i = 0; i < im.universe().size(); ++i) out << (i ? ", " : "") << im.universe()[i];
    out << "\n# max_cond: " << im.max_cond() << '\n';
    for (const auto& s : im.statements()) {
        if (!s.separated && !with_dependences) continue;
        out << s.a << (s.separated ? " _||_ " : " _|/|_ ") << s.b;
        if (!s.c.empty()) {
            out << " | ";
            for (std::size_t i = 0; i < s.c.size(); ++i) out << (i ? "," : "") << s.c[i];
        }
        out << '\n';
    }
    return out.str();
}

inline IndependenceModel parse_im(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    std::vector<std::string> universe;
    std::optional<std::size_t> max_cond;
    std::vector<IndependenceStatement> stmts;
    int line_no = 0;
    auto fail = [&](const std::string& msg) { throw ParseError("line " + std::to_string(line_no) + ": " + msg); };
    while (std::getline(in, line)) {
        ++line_no;
        const auto t = detail::trim(line);
        if (t.empty()) continue;
        if (t[0] == '#') {
            const auto body = detail::trim(t.substr(1));
            if (body.rfind("universe:", 0) == 0) universe = detail::split_top_commas(body.substr(9));
            else if (body.rfind("max_cond:", 0) == 0) max_cond = std::stoul(body.substr(9));
            continue;
        }
        bool sep = true;
        auto op = t.find(" _||_ ");
        std::size_t op_len = 6;
        if (op == std::string::npos) {
            op = t.find(" _|/|_ ");
            op_len = 7;
            sep = false;
        }
        if (op == std::string::npos) fail("expected 'A _||_ B | C' or 'A _|/|_ B | C'");
        IndependenceStatement s;
        s.separated = sep;
        s.a = detail::trim(t.substr(0, op));
        auto rest = t.substr(op + op_len);
        const auto bar = rest.find(" | ");
        if (bar == std::string::npos) {
            s.b = detail::trim(rest);
        } else {
            s.b = detail::trim(rest.substr(0, bar));
            s.c = detail::split_top_commas(rest.substr(bar + 3));
        }
        stmts.push_back(std::move(s));
    }
    if (universe.empty()) {
        for (const auto& s : stmts) {
            for (const auto* n : {&s.a, &s.b})
                if (std::find(universe.begin(), universe.end(), *n) == universe.end()) universe.push_back(*n);
            for (const auto& c : s.c)
                if (std::find(universe.begin(), universe.end(), c) == universe.end()) universe.push_back(c);
        }
    }
    const std::size_t bound = max_cond.value_or(universe.size() >= 2 ? universe.size() - 2 : 0);
    IndependenceModel im(universe, bound);
    for (const auto& s : stmts) im.add(s.a, s.b, s.c, s.separated);
    return im;
}

struct IntegratorReport {
    bool pass = true;
    std::vector<std::pair<std::string, std::string>> endogenous;        // (integrator, process)
    std::vector<std::tuple<std::string, std::string, std::string>> shared;  // (integrator, v, v')
    std::vector<std::pair<std::string, std::string>> confounded;        // adapted bidirected pairs
};

/// Independent integrators: every integrator exogenous, no two processes
/// sharing one. Integrators are read off adapted in-edges; deterministic
/// drivers (time, constants) carry no noise and may be shared.
inline IntegratorReport check_independent_integrators(const Dmg& g) {
    IntegratorReport rep;
    std::map<std::size_t, std::vector<std::size_t>> users;
    for (const auto& e : g.edges()) {
        if (e.kind == EdgeKind::bidirected) {
            if (e.dependence == Dependence::adapted) rep.confounded.emplace_back(g.name(e.src), g.name(e.dst));
            continue;
        }
        if (e.dependence != Dependence::adapted) continue;
        const auto& src = g.node(e.src);
        if (src.role == Role::endogenous) {
            rep.endogenous.emplace_back(g.name(e.src), g.name(e.dst));
        } else if (!src.deterministic) {
            users[e.src].push_back(e.dst);
        }
    }
    for (auto& [w, vs] : users) {
        std::sort(vs.begin(), vs.end());
        for (std::size_t i = 0; i < vs.size(); ++i)
            for (std::size_t j = i + 1; j < vs.size(); ++j) rep.shared.emplace_back(g.name(w), g.name(vs[i]), g.name(vs[j]));
    }
    rep.pass = rep.endogenous.empty() && rep.shared.empty() && rep.confounded.empty();
    return rep;
}

struct LocalIndependenceGraph {
    Dmg graph;            // G(M): exogenous nodes replaced by bidirected edges
    bool guarantee = false;
    IntegratorReport report;
};

/// G(M) together with whether its missing edges certify local
/// independences (the independent-integrators condition).
inline LocalIndependenceGraph local_independence_graph(const Dmg& augmented) {
    LocalIndependenceGraph out;
    out.report = check_independent_integrators(augmented);
    out.graph = augmented.has_exogenous() ? to_dmg(augmented) : augmented;
    out.guarantee = out.report.pass;
    return out;
}

/// Sigma-separation read as a local-independence certificate. Refuses when
/// the graph carries no guarantee.
inline bool sigma_li_query(const LocalIndependenceGraph& lig, const NodeSet& a, const NodeSet& b, const NodeSet& c) {
    if (!lig.guarantee) {
        throw InvalidArgument("graph is not guaranteed to be a local independence graph: integrators are not independent");
    }
    return sigma_separated(lig.graph, a, b, c);
}

inline bool sigma_li_query(const LocalIndependenceGraph& lig, const std::vector<std::string>& a,
                           const std::vector<std::string>& b, const std::vector<std::string>& c) {
    return sigma_li_query(lig, lig.graph.indices(a), lig.graph.indices(b), lig.graph.indices(c));
}

/// Graph with edges into W removed and an intervention node I_x -> x for
/// every x in X. Returns the graph and the intervention node indices.
inline std::pair<Dmg, NodeSet> docalc_graph(const Dmg& g, const NodeSet& x, const NodeSet& w) {
    Dmg h = intervene_graph(g, w);
    NodeSet ix;
    for (auto v : x) {
        const auto i = h.add_node(NodeId{"I_" + g.name(v), std::nullopt, Role::intervention, {}, false});
        h.add_directed(i, v);
        ix.push_back(i);
    }
    return {std::move(h), ix};
}

/// The sigma-separation precondition of do-calculus rule 1, 2 or 3 after the
/// do(W) surgery; W joins the conditioning set.
inline bool docalc_check(const Dmg& g, int rule, const NodeSet& x, const NodeSet& y, const NodeSet& z,
                         const NodeSet& w) {
    if (rule < 1 || rule > 3) throw InvalidArgument("rule must be 1, 2 or 3");
    std::vector<char> seen(g.size(), 0);
    for (const auto* set : {&x, &y, &z, &w}) {
        for (auto v : *set) {
            if (v >= g.size()) throw UnknownNode("#" + std::to_string(v));
            if (g.node(v).role != Role::endogenous) throw InvalidArgument("'" + g.name(v) + "' is not endogenous");
            if (seen[v]) throw InvalidArgument("node '" + g.name(v) + "' appears in more than one set");
            seen[v] = 1;
        }
    }
    auto [h, ix] = docalc_graph(g, x, w);
    NodeSet cond = z;
    cond.insert(cond.end(), w.begin(), w.end());
    switch (rule) {
        case 1: return sigma_separated(h, y, x, cond);
        case 2: {
            NodeSet c2 = cond;
            c2.insert(c2.end(), x.begin(), x.end());
            return sigma_separated(h, y, ix, c2);
        }
        default: return sigma_separated(h, y, ix, cond);
    }
}

inline bool docalc_check(const Dmg& g, int rule, const std::vector<std::string>& x, const std::vector<std::string>& y,
                         const std::vector<std::string>& z, const std::vector<std::string>& w) {
    return docalc_check(g, rule, g.indices(x), g.indices(y), g.indices(z), g.indices(w));
}

}  // namespace dscm
