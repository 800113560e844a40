#pragma once

// Text formats for Dmg: a line-oriented edge list and a Graphviz DOT subset.
// Both emit nodes in insertion order and edges in canonical order, so output
// is a deterministic function of the graph.

#include <cctype>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "dscm/dmg.hpp"

namespace dscm {

namespace detail {

inline std::string trim(std::string_view s) {
    std::size_t b = 0, e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return std::string(s.substr(b, e - b));
}

inline std::vector<std::string> split_ws(std::string_view s) {
    std::vector<std::string> out;
    std::istringstream in{std::string(s)};
    std::string tok;
    while (in >> tok) out.push_back(tok);
    return out;
}

inline const char* role_word(Role r) {
    switch (r) {
        case Role::exogenous: return "exogenous";
        case Role::intervention: return "intervention";
        default: return "endogenous";
    }
}

// Edges sorted by the canonical tuple order, as (src, dst, edge) index
// triples into g.
inline std::vector<Edge> sorted_edges(const Dmg& g) {
    std::vector<Edge> es = g.edges();
    std::sort(es.begin(), es.end(), [&](const Edge& a, const Edge& b) {
        return std::make_tuple(static_cast<int>(a.kind), a.src, a.dst) <
               std::make_tuple(static_cast<int>(b.kind), b.src, b.dst);
    });
    return es;
}

}  // namespace detail

/// Edge-list format:
///   node NAME [exogenous|intervention] [deterministic] [init=PROC]
///   SRC -> DST [adapted]
///   A <-> B [adapted]
/// Lines starting with '#' are comments. Every node is declared, so isolated
/// nodes and roles survive a round trip.
inline std::string export_edges(const Dmg& g) {
    std::ostringstream out;
    for (const auto& n : g.nodes()) {
        out << "node " << n.name();
        if (n.role != Role::endogenous) out << ' ' << detail::role_word(n.role);
        if (n.deterministic) out << " deterministic";
        if (!n.initial_of.empty()) out << " init=" << n.initial_of;
        out << '\n';
    }
    for (const auto& e : detail::sorted_edges(g)) {
        out << g.name(e.src) << (e.kind == EdgeKind::directed ? " -> " : " <-> ") << g.name(e.dst);
        if (e.dependence == Dependence::adapted) out << " adapted";
        out << '\n';
    }
    return out.str();
}

namespace detail {

// "X1@(s,t)" -> process "X1", eval "(s,t)".
inline NodeId node_from_name(const std::string& name) {
    NodeId id;
    if (auto at = name.find('@'); at != std::string::npos) {
        id.process = name.substr(0, at);
        id.eval = name.substr(at + 1);
    } else {
        id.process = name;
    }
    return id;
}

}  // namespace detail

inline Dmg parse_edges(std::string_view text) {
    Dmg g;
    std::istringstream in{std::string(text)};
    std::string raw;
    int line_no = 0;
    auto fail = [&](const std::string& msg) {
        throw ParseError("line " + std::to_string(line_no) + ": " + msg);
    };
    auto ensure = [&](const std::string& name) {
        if (!g.find(name)) g.add_node(detail::node_from_name(name));
        return g.index(name);
    };
    while (std::getline(in, raw)) {
        ++line_no;
        if (auto hash = raw.find('#'); hash != std::string::npos) raw.resize(hash);
        const auto tok = detail::split_ws(raw);
        if (tok.empty()) continue;
        if (tok[0] == "node") {
            if (tok.size() < 2) fail("node declaration without a name");
            NodeId id = detail::node_from_name(tok[1]);
            for (std::size_t i = 2; i < tok.size(); ++i) {
                if (tok[i] == "exogenous") id.role = Role::exogenous;
                else if (tok[i] == "intervention") id.role = Role::intervention;
                else if (tok[i] == "endogenous") id.role = Role::endogenous;
                else if (tok[i] == "deterministic") id.deterministic = true;
                else if (tok[i].rfind("init=", 0) == 0) id.initial_of = tok[i].substr(5);
                else fail("unknown node attribute '" + tok[i] + "'");
            }
            if (g.find(tok[1])) fail("node '" + tok[1] + "' declared twice");
            g.add_node(std::move(id));
            continue;
        }
        if (tok.size() < 3 || tok.size() > 4) fail("expected 'a -> b [adapted]' or 'a <-> b [adapted]'");
        Dependence dep = Dependence::predictable;
        if (tok.size() == 4) {
            if (tok[3] != "adapted" && tok[3] != "predictable") fail("unknown edge attribute '" + tok[3] + "'");
            if (tok[3] == "adapted") dep = Dependence::adapted;
        }
        try {
            if (tok[1] == "->") g.add_directed(ensure(tok[0]), ensure(tok[2]), dep);
            else if (tok[1] == "<->") g.add_bidirected(ensure(tok[0]), ensure(tok[2]), dep);
            else fail("unknown edge operator '" + tok[1] + "'");
        } catch (const InvalidGraph& e) {
            fail(e.what());
        }
    }
    return g;
}

namespace detail {

inline std::string dot_quote(const std::string& s) {
    std::string out = "\"";
    for (char c : s) {
        if (c == '"' || c == '\\') out += '\\';
        out += c;
    }
    return out + '"';
}

}  // namespace detail

/// DOT export. Exogenous nodes are boxes, intervention nodes diamonds;
/// adapted edges carry color=red and bidirected edges dir=both.
inline std::string export_dot(const Dmg& g) {
    std::ostringstream out;
    out << "digraph G {\n";
    for (const auto& n : g.nodes()) {
        std::vector<std::string> attrs;
        if (n.role == Role::exogenous) attrs.push_back("shape=box");
        if (n.role == Role::intervention) attrs.push_back("shape=diamond");
        if (n.deterministic) attrs.push_back("style=dashed");
        if (!n.initial_of.empty()) attrs.push_back("init=" + detail::dot_quote(n.initial_of));
        out << "  " << detail::dot_quote(n.name());
        if (!attrs.empty()) {
            out << " [";
            for (std::size_t i = 0; i < attrs.size(); ++i) out << (i ? ", " : "") << attrs[i];
            out << ']';
        }
        out << ";\n";
    }
    for (const auto& e : detail::sorted_edges(g)) {
        std::vector<std::string> attrs;
        if (e.kind == EdgeKind::bidirected) attrs.push_back("dir=both");
        if (e.dependence == Dependence::adapted) attrs.push_back("color=red");
        out << "  " << detail::dot_quote(g.name(e.src)) << " -> " << detail::dot_quote(g.name(e.dst));
        if (!attrs.empty()) {
            out << " [";
            for (std::size_t i = 0; i < attrs.size(); ++i) out << (i ? ", " : "") << attrs[i];
            out << ']';
        }
        out << ";\n";
    }
    out << "}\n";
    return out.str();
}

namespace detail {

class DotLexer {
public:
    explicit DotLexer(std::string_view s) : s_(s) {}

    // Returns the next token; "" at end of input. Quoted ids are unescaped
    // and returned without quotes, with `quoted` set.
    std::string next(bool* quoted = nullptr) {
        skip();
        if (quoted) *quoted = false;
        if (pos_ >= s_.size()) return {};
        const char c = s_[pos_];
        if (c == '"') {
            std::string out;
            ++pos_;
            while (pos_ < s_.size() && s_[pos_] != '"') {
                if (s_[pos_] == '\\' && pos_ + 1 < s_.size()) ++pos_;
                out += s_[pos_++];
            }
            if (pos_ >= s_.size()) throw ParseError("dot: unterminated string");
            ++pos_;
            if (quoted) *quoted = true;
            return out;
        }
        if (s_.substr(pos_, 2) == "->") {
            pos_ += 2;
            return "->";
        }
        if (std::string_view("{}[];,=").find(c) != std::string_view::npos) {
            ++pos_;
            return std::string(1, c);
        }
        std::string out;
        while (pos_ < s_.size()) {
            const char d = s_[pos_];
            if (std::isspace(static_cast<unsigned char>(d)) || std::string_view("{}[];,=\"").find(d) != std::string_view::npos)
                break;
            if (s_.substr(pos_, 2) == "->") break;
            out += d;
            ++pos_;
        }
        return out;
    }

    std::string peek() {
        const auto saved = pos_;
        auto t = next();
        pos_ = saved;
        return t;
    }

private:
    void skip() {
        while (pos_ < s_.size()) {
            if (std::isspace(static_cast<unsigned char>(s_[pos_]))) {
                ++pos_;
            } else if (s_.substr(pos_, 2) == "//" || s_[pos_] == '#') {
                while (pos_ < s_.size() && s_[pos_] != '\n') ++pos_;
            } else {
                break;
            }
        }
    }

    std::string_view s_;
    std::size_t pos_ = 0;
};

}  // namespace detail

/// Reads the DOT subset written by export_dot: `digraph`, node statements
/// with shape/style/init attributes, `->` edges with dir=both and color=red.
inline Dmg parse_dot(std::string_view text) {
    detail::DotLexer lex(text);
    if (lex.next() != "digraph") throw ParseError("dot: expected 'digraph'");
    if (lex.peek() != "{") lex.next();
    if (lex.next() != "{") throw ParseError("dot: expected '{'");

    struct PendingEdge {
        std::string src, dst;
        bool both = false, red = false;
    };
    std::vector<NodeId> nodes;
    std::vector<PendingEdge> edges;
    auto declared = [&](const std::string& name) {
        for (const auto& n : nodes)
            if (n.name() == name) return true;
        return false;
    };

    auto read_attrs = [&]() {
        std::vector<std::pair<std::string, std::string>> attrs;
        if (lex.peek() != "[") return attrs;
        lex.next();
        while (true) {
            auto key = lex.next();
            if (key == "]") break;
            if (key == ",") continue;
            if (key.empty()) throw ParseError("dot: unterminated attribute list");
            if (lex.next() != "=") throw ParseError("dot: expected '=' after '" + key + "'");
            attrs.emplace_back(key, lex.next());
        }
        return attrs;
    };

    while (true) {
        auto tok = lex.next();
        if (tok.empty()) throw ParseError("dot: missing '}'");
        if (tok == "}") break;
        if (tok == ";") continue;
        if (lex.peek() == "->") {
            lex.next();
            PendingEdge e{tok, lex.next()};
            for (const auto& [k, v] : read_attrs()) {
                if (k == "dir" && v == "both") e.both = true;
                if (k == "color" && v == "red") e.red = true;
            }
            edges.push_back(e);
            continue;
        }
        NodeId id = detail::node_from_name(tok);
        for (const auto& [k, v] : read_attrs()) {
            if (k == "shape" && v == "box") id.role = Role::exogenous;
            if (k == "shape" && v == "diamond") id.role = Role::intervention;
            if (k == "style" && v == "dashed") id.deterministic = true;
            if (k == "init") id.initial_of = v;
        }
        if (!declared(tok)) nodes.push_back(std::move(id));
    }

    Dmg g;
    for (auto& n : nodes) g.add_node(std::move(n));
    for (const auto& e : edges) {
        if (!g.find(e.src)) g.add_node(detail::node_from_name(e.src));
        if (!g.find(e.dst)) g.add_node(detail::node_from_name(e.dst));
        const auto dep = e.red ? Dependence::adapted : Dependence::predictable;
        if (e.both) g.add_bidirected(e.src, e.dst, dep);
        else g.add_directed(e.src, e.dst, dep);
    }
    return g;
}

}  // namespace dscm
