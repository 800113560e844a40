#pragma once

// Systems of SDEs and their text format.
//
//   system {
//     exogenous W: brownian;            # also poisson(rate), time, constant(c)
//     time s = 0.3;                     # label usable in split points
//     process X {
//       init = normal(0, 1);            # or constant(c)
//       alpha = {X, Y};
//       beta = {W};
//       g = [0.5 * Y - X];              # one integrand per beta entry
//       markov = true;                  # optional, default false
//     }
//     process Z { do = 1.5; }           # intervened: constant path
//     horizon 1;
//   }
//
// Each process solves X_v(t) = X_v^0 + sum_j int_0^t g_{v,j}(s-, X_alpha) dH_j(s)
// with H_j the j-th entry of beta. The symbol `t` denotes time in integrands.

#include <algorithm>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "dscm/error.hpp"
#include "dscm/expr.hpp"

namespace dscm {

struct Distribution {
    enum class Kind { constant, normal };
    Kind kind = Kind::constant;
    double a = 0.0;  // value, or mean
    double b = 0.0;  // variance (normal only)
    friend bool operator==(const Distribution&, const Distribution&) = default;
};

struct DriverSpec {
    enum class Kind { brownian, poisson, time, constant };
    std::string name;
    Kind kind = Kind::brownian;
    double param = 0.0;  // rate for poisson, value for constant
    SourcePos pos;

    /// Point-mass law: carries no randomness.
    bool deterministic() const { return kind == Kind::time || kind == Kind::constant; }

    friend bool operator==(const DriverSpec& a, const DriverSpec& b) {
        return a.name == b.name && a.kind == b.kind && a.param == b.param;
    }
};

struct ProcessSpec {
    std::string name;
    Distribution init;
    std::vector<std::string> alpha;
    std::vector<std::string> beta;
    std::vector<Expr> g;
    bool markov = false;
    std::optional<double> intervened;  // perfect intervention: X_v(t) = value
    SourcePos pos;

    friend bool operator==(const ProcessSpec& a, const ProcessSpec& b) {
        return a.name == b.name && a.init == b.init && a.alpha == b.alpha && a.beta == b.beta && a.g == b.g &&
               a.markov == b.markov && a.intervened == b.intervened;
    }
};

struct SdeSystem {
    std::vector<DriverSpec> drivers;
    std::vector<ProcessSpec> processes;
    std::vector<std::pair<std::string, double>> times;  // named split points
    double horizon = 1.0;
    std::vector<std::string> warnings;

    const ProcessSpec* process(std::string_view name) const {
        for (const auto& p : processes)
            if (p.name == name) return &p;
        return nullptr;
    }
    const DriverSpec* driver(std::string_view name) const {
        for (const auto& d : drivers)
            if (d.name == name) return &d;
        return nullptr;
    }
    std::optional<double> time_label(std::string_view name) const {
        for (const auto& [n, v] : times)
            if (n == name) return v;
        return std::nullopt;
    }
    std::vector<std::string> process_names() const {
        std::vector<std::string> out;
        for (const auto& p : processes) out.push_back(p.name);
        return out;
    }

    friend bool operator==(const SdeSystem& a, const SdeSystem& b) {
        return a.drivers == b.drivers && a.processes == b.processes && a.times == b.times && a.horizon == b.horizon;
    }
};

/// Name of the initial-value node of process `v`.
inline std::string initial_name(const std::string& v) { return v + "^0"; }

inline constexpr std::string_view time_symbol = "t";

/// Checks names, references and arities; appends growth-condition warnings.
/// Throws ParseError with the position of the first offending item.
inline void validate(SdeSystem& sys) {
    if (sys.processes.empty()) throw ParseError("system declares no processes");
    if (!(sys.horizon > 0.0)) throw ParseError("horizon must be positive");

    std::map<std::string, SourcePos> seen;
    auto declare = [&](const std::string& name, SourcePos pos) {
        if (name == time_symbol) Lexer::error(pos, "'t' is reserved for time");
        if (auto [it, fresh] = seen.emplace(name, pos); !fresh) {
            Lexer::error(pos, "duplicate name '" + name + "' (first declared at " + format_pos(it->second) + ")");
        }
    };
    for (const auto& d : sys.drivers) {
        declare(d.name, d.pos);
        if (d.kind == DriverSpec::Kind::poisson && !(d.param > 0.0)) {
            Lexer::error(d.pos, "poisson rate of '" + d.name + "' must be positive");
        }
    }
    for (const auto& p : sys.processes) declare(p.name, p.pos);
    std::set<std::string> time_seen;
    for (const auto& [n, v] : sys.times) {
        if (!time_seen.insert(n).second) throw ParseError("duplicate time label '" + n + "'");
        if (v < 0.0 || v > sys.horizon) throw ParseError("time label '" + n + "' lies outside [0, horizon]");
    }

    sys.warnings.clear();
    for (const auto& p : sys.processes) {
        if (p.intervened) continue;
        if (p.init.kind == Distribution::Kind::normal && p.init.b < 0.0) {
            Lexer::error(p.pos, "negative initial variance for '" + p.name + "'");
        }
        auto resolve = [&](const std::string& n, const char* what) {
            if (!seen.contains(n)) Lexer::error(p.pos, "unresolved name '" + n + "' in " + what + " of '" + p.name + "'");
        };
        for (const auto& a : p.alpha) resolve(a, "alpha");
        for (const auto& b : p.beta) {
            resolve(b, "beta");
            if (b == p.name) Lexer::error(p.pos, "process '" + p.name + "' cannot integrate against itself");
        }
        if (p.g.size() != p.beta.size()) {
            Lexer::error(p.pos, "process '" + p.name + "' has " + std::to_string(p.g.size()) + " integrand(s) but " +
                                    std::to_string(p.beta.size()) + " integrator(s)");
        }
        std::set<std::string> allowed(p.alpha.begin(), p.alpha.end());
        allowed.insert(p.name);
        allowed.insert(std::string(time_symbol));
        for (const auto& e : p.g) {
            std::set<std::string> vars;
            collect_vars(e, vars);
            for (const auto& v : vars) {
                if (!allowed.contains(v)) {
                    Lexer::error(e.pos, "integrand of '" + p.name + "' references '" + v + "', which is not in alpha");
                }
            }
            if (contains_op(e, Expr::Op::div) || contains_op(e, Expr::Op::exp)) {
                sys.warnings.push_back(format_pos(e.pos) + ": integrand of '" + p.name +
                                       "' uses '/' or exp; growth and Lipschitz bounds are not checked");
            }
        }
    }
}

namespace detail {

class ModelParser {
public:
    explicit ModelParser(std::string_view text) : lex_(text) {}

    SdeSystem parse() {
        SdeSystem sys;
        lex_.expect_keyword("system");
        lex_.expect("{");
        bool have_horizon = false;
        while (!lex_.accept("}")) {
            const Token t = lex_.peek();
            if (t.kind == Token::Kind::end) Lexer::error(t.pos, "missing '}' at end of system");
            if (lex_.accept_keyword("exogenous")) {
                sys.drivers.push_back(driver(t.pos));
            } else if (lex_.accept_keyword("process")) {
                sys.processes.push_back(process(t.pos));
            } else if (lex_.accept_keyword("time")) {
                const auto name = lex_.expect_ident().text;
                lex_.expect("=");
                sys.times.emplace_back(name, lex_.expect_number());
                lex_.expect(";");
            } else if (lex_.accept_keyword("horizon")) {
                if (have_horizon) Lexer::error(t.pos, "horizon given twice");
                sys.horizon = lex_.expect_number();
                have_horizon = true;
                lex_.expect(";");
            } else {
                Lexer::error(t.pos, "expected 'exogenous', 'process', 'time' or 'horizon' but found " +
                                        Lexer::describe(t));
            }
        }
        if (lex_.peek().kind != Token::Kind::end) Lexer::error(lex_.peek().pos, "trailing input after system");
        if (!have_horizon) throw ParseError("missing 'horizon'");
        validate(sys);
        return sys;
    }

private:
    DriverSpec driver(SourcePos pos) {
        DriverSpec d;
        d.pos = pos;
        d.name = lex_.expect_ident().text;
        lex_.expect(":");
        const Token kind = lex_.expect_ident();
        if (kind.text == "brownian") {
            d.kind = DriverSpec::Kind::brownian;
        } else if (kind.text == "time") {
            d.kind = DriverSpec::Kind::time;
        } else if (kind.text == "poisson" || kind.text == "constant") {
            d.kind = kind.text == "poisson" ? DriverSpec::Kind::poisson : DriverSpec::Kind::constant;
            lex_.expect("(");
            d.param = lex_.expect_number();
            lex_.expect(")");
        } else {
            Lexer::error(kind.pos, "unknown driver kind '" + kind.text + "'");
        }
        lex_.expect(";");
        return d;
    }

    std::vector<std::string> nameset() {
        std::vector<std::string> out;
        lex_.expect("{");
        if (lex_.accept("}")) return out;
        do {
            const Token t = lex_.expect_ident();
            if (std::find(out.begin(), out.end(), t.text) != out.end()) {
                Lexer::error(t.pos, "'" + t.text + "' listed twice");
            }
            out.push_back(t.text);
        } while (lex_.accept(","));
        lex_.expect("}");
        return out;
    }

    Distribution dist() {
        const Token t = lex_.expect_ident();
        Distribution d;
        lex_.expect("(");
        if (t.text == "constant") {
            d.kind = Distribution::Kind::constant;
            d.a = lex_.expect_number();
        } else if (t.text == "normal") {
            d.kind = Distribution::Kind::normal;
            d.a = lex_.expect_number();
            lex_.expect(",");
            d.b = lex_.expect_number();
        } else {
            Lexer::error(t.pos, "unknown distribution '" + t.text + "'");
        }
        lex_.expect(")");
        return d;
    }

    ProcessSpec process(SourcePos pos) {
        ProcessSpec p;
        p.pos = pos;
        p.name = lex_.expect_ident().text;
        lex_.expect("{");
        if (lex_.accept_keyword("do")) {
            lex_.expect("=");
            p.intervened = lex_.expect_number();
            p.init = Distribution{Distribution::Kind::constant, *p.intervened, 0.0};
            lex_.expect(";");
            lex_.expect("}");
            return p;
        }
        lex_.expect_keyword("init");
        lex_.expect("=");
        p.init = dist();
        lex_.expect(";");
        lex_.expect_keyword("alpha");
        lex_.expect("=");
        p.alpha = nameset();
        lex_.expect(";");
        lex_.expect_keyword("beta");
        lex_.expect("=");
        p.beta = nameset();
        lex_.expect(";");
        lex_.expect_keyword("g");
        lex_.expect("=");
        lex_.expect("[");
        if (!lex_.accept("]")) {
            do {
                p.g.push_back(parse_expr(lex_));
            } while (lex_.accept(","));
            lex_.expect("]");
        }
        lex_.expect(";");
        if (lex_.accept_keyword("markov")) {
            lex_.expect("=");
            const Token b = lex_.expect_ident();
            if (b.text != "true" && b.text != "false") Lexer::error(b.pos, "expected 'true' or 'false'");
            p.markov = b.text == "true";
            lex_.expect(";");
        }
        lex_.expect("}");
        return p;
    }

    Lexer lex_;
};

}  // namespace detail

inline SdeSystem parse_model(std::string_view text) { return detail::ModelParser(text).parse(); }

inline std::string print_model(const SdeSystem& sys) {
    std::ostringstream out;
    auto names = [](const std::vector<std::string>& v) {
        std::string s = "{";
        for (std::size_t i = 0; i < v.size(); ++i) s += (i ? ", " : "") + v[i];
        return s + "}";
    };
    out << "system {\n";
    for (const auto& d : sys.drivers) {
        out << "  exogenous " << d.name << ": ";
        switch (d.kind) {
            case DriverSpec::Kind::brownian: out << "brownian"; break;
            case DriverSpec::Kind::time: out << "time"; break;
            case DriverSpec::Kind::poisson: out << "poisson(" << format_number(d.param) << ")"; break;
            case DriverSpec::Kind::constant: out << "constant(" << format_number(d.param) << ")"; break;
        }
        out << ";\n";
    }
    for (const auto& [n, v] : sys.times) out << "  time " << n << " = " << format_number(v) << ";\n";
    for (const auto& p : sys.processes) {
        out << "  process " << p.name << " {\n";
        if (p.intervened) {
            out << "    do = " << format_number(*p.intervened) << ";\n  }\n";
            continue;
        }
        out << "    init = ";
        if (p.init.kind == Distribution::Kind::constant) out << "constant(" << format_number(p.init.a) << ")";
        else out << "normal(" << format_number(p.init.a) << ", " << format_number(p.init.b) << ")";
        out << ";\n";
        out << "    alpha = " << names(p.alpha) << ";\n";
        out << "    beta = " << names(p.beta) << ";\n";
        out << "    g = [";
        for (std::size_t i = 0; i < p.g.size(); ++i) out << (i ? ", " : "") << to_string(p.g[i]);
        out << "];\n";
        if (p.markov) out << "    markov = true;\n";
        out << "  }\n";
    }
    out << "  horizon " << format_number(sys.horizon) << ";\n}\n";
    return out.str();
}

}  // namespace dscm
