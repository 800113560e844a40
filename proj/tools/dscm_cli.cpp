#include <CLI11.hpp>
#include <json.hpp>

#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "dscm/acceptance.hpp"
#include "dscm/fci.hpp"
#include "dscm/graph_io.hpp"
#include "dscm/independence.hpp"
#include "dscm/model.hpp"
#include "dscm/sde_graph.hpp"
#include "dscm/simulate.hpp"
#include "dscm/time_ops.hpp"

using namespace dscm;
using nlohmann::json;

namespace {

std::string read_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open '" + path + "'");
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

bool ends_with(const std::string& s, std::string_view suffix) {
    return s.size() >= suffix.size() && s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0;
}

bool is_model(const std::string& path) { return !ends_with(path, ".edges") && !ends_with(path, ".dot") && !ends_with(path, ".gv"); }

SdeSystem load_model(const std::string& path) {
    if (!is_model(path)) throw Error("'" + path + "' is a graph file; this command needs a model");
    auto sys = parse_model(read_file(path));
    for (const auto& w : sys.warnings) std::cerr << path << ":" << w << "\n";
    return sys;
}

// A model yields its augmented graph G+(D), or G(M_D) with `induced`.
Dmg load_graph(const std::string& path, bool induced) {
    if (ends_with(path, ".edges")) return parse_edges(read_file(path));
    if (ends_with(path, ".dot") || ends_with(path, ".gv")) return parse_dot(read_file(path));
    const auto sys = load_model(path);
    return induced ? induced_dscm_graph(sys) : graph_of_sdes(sys);
}

Dmg induce(const Dmg& g, bool induced) { return induced && g.has_exogenous() ? to_dmg(g) : g; }

std::vector<std::string> split_list(const std::string& s) {
    std::vector<std::string> out;
    std::string cur;
    int depth = 0;
    for (char ch : s) {
        if (ch == '[' || ch == '(' || ch == '{') ++depth;
        if (ch == ']' || ch == ')' || ch == '}') --depth;
        if (ch == ',' && depth == 0) {
            if (!cur.empty()) out.push_back(cur);
            cur.clear();
        } else if (ch != ' ') {
            cur += ch;
        }
    }
    if (!cur.empty()) out.push_back(cur);
    return out;
}

const char* dep_word(Dependence d) { return d == Dependence::adapted ? "adapted" : "predictable"; }

json graph_json(const Dmg& g) {
    json nodes = json::array(), edges = json::array();
    for (const auto& n : g.nodes()) {
        json j{{"name", n.name()},
               {"role", n.role == Role::endogenous ? "endogenous" : n.role == Role::exogenous ? "exogenous" : "intervention"}};
        if (n.deterministic) j["deterministic"] = true;
        if (!n.initial_of.empty()) j["initial_of"] = n.initial_of;
        nodes.push_back(j);
    }
    for (const auto& e : g.edges()) {
        edges.push_back({{"src", g.name(e.src)},
                         {"dst", g.name(e.dst)},
                         {"kind", e.kind == EdgeKind::directed ? "directed" : "bidirected"},
                         {"dependence", dep_word(e.dependence)}});
    }
    return {{"nodes", nodes}, {"edges", edges}};
}

struct Output {
    bool json = false;
    std::string format = "edges";

    void graph(const Dmg& g) const {
        if (json) std::cout << graph_json(g).dump(2) << "\n";
        else if (format == "dot") std::cout << export_dot(g);
        else std::cout << export_edges(g);
    }
};

SplitMode split_mode(const std::string& s) { return s == "figure" ? SplitMode::figure : SplitMode::strict; }

struct SplitArgs {
    std::string model, tau, mode = "strict", drop;
};

SplitGraph build_split(const SplitArgs& a) {
    const auto sys = load_model(a.model);
    return time_split(sys, resolve_times(split_list(a.tau), &sys, sys.horizon), split_mode(a.mode), split_list(a.drop));
}

void add_split_options(CLI::App* cmd, SplitArgs& a) {
    cmd->add_option("model", a.model, "model file")->required();
    cmd->add_option("--tau", a.tau, "split points: labels, 0, T or numbers, comma separated")->required();
    cmd->add_option("--mode", a.mode, "edge rule set")->check(CLI::IsMember({"strict", "figure"}));
    cmd->add_option("--drop", a.drop, "processes or inputs to marginalise before splitting");
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Dynamic structural causal models of SDE systems"};
    app.require_subcommand(1);
    Output out;
    app.add_flag("--json", out.json, "machine-readable output");
    std::function<int()> action;

    std::string model;
    auto* validate = app.add_subcommand("validate", "parse and check a model, report solvability");
    validate->add_option("model", model, "model file")->required();
    validate->callback([&] {
        action = [&] {
            const auto sys = load_model(model);
            const auto rep = check_unique_solvability(sys);
            if (out.json) {
                std::cout << json{{"valid", true},
                                  {"solvable", rep.solvable},
                                  {"witness_process", rep.witness_process},
                                  {"witness_set", rep.witness_set},
                                  {"order", rep.order},
                                  {"warnings", sys.warnings}}
                                 .dump(2)
                          << "\n";
            } else {
                std::cout << "valid: true\nsolvable: " << (rep.solvable ? "true" : "false") << "\n";
                if (!rep.solvable) {
                    std::cout << "witness: " << rep.witness_process << " integrates against {";
                    for (std::size_t i = 0; i < rep.witness_set.size(); ++i) std::cout << (i ? ", " : "") << rep.witness_set[i];
                    std::cout << "}\n";
                }
            }
            return rep.solvable ? 0 : 1;
        };
    });

    std::string input;
    bool induced = false;
    auto* graph = app.add_subcommand("graph", "print the augmented graph of a model (or G(M) with --induced)");
    graph->add_option("input", input, "model or graph file")->required();
    graph->add_option("--format", out.format)->check(CLI::IsMember({"dot", "edges"}));
    graph->add_flag("--induced", induced, "exogenous inputs replaced by bidirected edges");
    graph->callback([&] { action = [&] { out.graph(load_graph(input, induced)); return 0; }; });

    SplitArgs split_args;
    auto* split = app.add_subcommand("split", "time-split graph");
    add_split_options(split, split_args);
    split->add_option("--format", out.format)->check(CLI::IsMember({"dot", "edges"}));
    split->add_flag("--induced", induced, "exogenous inputs replaced by bidirected edges");
    split->callback([&] { action = [&] { out.graph(induce(build_split(split_args).graph, induced)); return 0; }; });

    auto* subsample = app.add_subcommand("subsample", "subsampled graph: only the split points are kept");
    add_split_options(subsample, split_args);
    subsample->add_option("--format", out.format)->check(CLI::IsMember({"dot", "edges"}));
    subsample->add_flag("--induced", induced, "exogenous inputs replaced by bidirected edges");
    subsample->callback([&] {
        action = [&] { out.graph(induce(subsample_graph(build_split(split_args)).graph, induced)); return 0; };
    });

    bool collapse_points = false;
    auto* collapse = app.add_subcommand("collapse", "collapse a time-split graph back to one node per process");
    add_split_options(collapse, split_args);
    collapse->add_flag("--points", collapse_points, "collapse the subsampled graph; nodes are labelled with the point set");
    collapse->add_option("--format", out.format)->check(CLI::IsMember({"dot", "edges"}));
    collapse->callback([&] {
        action = [&] {
            auto sg = build_split(split_args);
            if (collapse_points) sg = subsample_graph(sg);
            out.graph(collapse_graph(sg, !collapse_points));
            return 0;
        };
    });

    std::string drop;
    auto* marginalise = app.add_subcommand("marginalise", "latent projection that drops the given nodes");
    marginalise->add_option("input", input, "model or graph file")->required();
    marginalise->add_option("--drop", drop, "nodes to drop")->required();
    marginalise->add_flag("--induced", induced);
    marginalise->add_option("--format", out.format)->check(CLI::IsMember({"dot", "edges"}));
    marginalise->callback([&] {
        action = [&] { out.graph(marginalise_graph(load_graph(input, induced), split_list(drop))); return 0; };
    });

    std::string targets;
    double do_value = 0.0;
    bool as_graph = false;
    auto* intervene = app.add_subcommand("intervene", "perfect intervention on processes");
    intervene->add_option("input", input, "model or graph file")->required();
    intervene->add_option("--targets", targets, "processes to intervene on")->required();
    intervene->add_option("--value", do_value, "constant value of the intervened paths");
    intervene->add_flag("--graph", as_graph, "print the intervened graph instead of the model");
    intervene->add_flag("--induced", induced);
    intervene->add_option("--format", out.format)->check(CLI::IsMember({"dot", "edges"}));
    intervene->callback([&] {
        action = [&] {
            const auto t = split_list(targets);
            if (!is_model(input) || as_graph) {
                out.graph(intervene_graph(load_graph(input, induced), t));
            } else {
                std::cout << print_model(intervene_sde(load_model(input), t, do_value));
            }
            return 0;
        };
    });

    std::string a_set, b_set, c_set, sep_mode = "sigma";
    auto* sep = app.add_subcommand("sep", "sigma- or d-separation query");
    sep->add_option("input", input, "model or graph file")->required();
    sep->add_option("--a", a_set)->required();
    sep->add_option("--b", b_set)->required();
    sep->add_option("--c", c_set);
    sep->add_option("--mode", sep_mode)->check(CLI::IsMember({"sigma", "d"}));
    sep->add_flag("--induced", induced);
    sep->callback([&] {
        action = [&] {
            const auto g = load_graph(input, induced);
            const auto a = split_list(a_set), b = split_list(b_set), c = split_list(c_set);
            const bool s = sep_mode == "d" ? d_separated(g, a, b, c) : sigma_separated(g, a, b, c);
            if (out.json) std::cout << json{{"a", a}, {"b", b}, {"c", c}, {"mode", sep_mode}, {"separated", s}}.dump(2) << "\n";
            else std::cout << "separated: " << (s ? "true" : "false") << "\n";
            return 0;
        };
    });

    std::size_t max_cond = 2;
    bool with_dependences = false;
    auto* im = app.add_subcommand("im", "sigma-separation independence model");
    im->add_option("input", input, "model or graph file")->required();
    im->add_option("--max", max_cond, "largest conditioning set");
    im->add_flag("--dependences", with_dependences, "also list dependent triples");
    im->add_flag("--induced", induced);
    im->callback([&] {
        action = [&] {
            const auto model_im = enumerate_im(load_graph(input, induced), max_cond);
            if (out.json) {
                json stmts = json::array();
                for (const auto& s : model_im.statements())
                    if (s.separated || with_dependences) stmts.push_back({{"a", s.a}, {"b", s.b}, {"c", s.c}, {"separated", s.separated}});
                std::cout << json{{"universe", model_im.universe()}, {"max_cond", model_im.max_cond()}, {"statements", stmts}}.dump(2)
                          << "\n";
            } else {
                std::cout << write_im(model_im, with_dependences);
            }
            return 0;
        };
    });

    auto* lig = app.add_subcommand("lig", "local-independence graph and the independent-integrators check");
    lig->add_option("input", input, "model or augmented graph file")->required();
    lig->add_option("--drop", drop, "processes or inputs to marginalise first");
    lig->add_option("--a", a_set, "query: local independence of b from a given c");
    lig->add_option("--b", b_set);
    lig->add_option("--c", c_set);
    lig->add_option("--format", out.format)->check(CLI::IsMember({"dot", "edges"}));
    lig->callback([&] {
        action = [&] {
            auto g = load_graph(input, false);
            if (!drop.empty()) g = latent_project(g, split_list(drop));
            const auto l = local_independence_graph(g);
            std::optional<bool> answer;
            if (!a_set.empty() || !b_set.empty()) {
                if (a_set.empty() || b_set.empty()) throw CLI::ValidationError("--a and --b must be given together");
                answer = sigma_li_query(l, split_list(a_set), split_list(b_set), split_list(c_set));
            }
            if (out.json) {
                json rep{{"guarantee", l.guarantee}, {"graph", graph_json(l.graph)}};
                json endo = json::array(), shared = json::array(), conf = json::array();
                for (const auto& [w, v] : l.report.endogenous) endo.push_back({w, v});
                for (const auto& [w, v1, v2] : l.report.shared) shared.push_back({w, v1, v2});
                for (const auto& [u, v] : l.report.confounded) conf.push_back({u, v});
                rep["endogenous_integrators"] = endo;
                rep["shared_integrators"] = shared;
                rep["adapted_confounding"] = conf;
                if (answer) rep["locally_independent"] = *answer;
                std::cout << rep.dump(2) << "\n";
                return 0;
            }
            std::cout << "# guarantee: " << (l.guarantee ? "true" : "false") << "\n";
            for (const auto& [w, v] : l.report.endogenous) std::cout << "# endogenous integrator " << w << " of " << v << "\n";
            for (const auto& [w, v1, v2] : l.report.shared) std::cout << "# integrator " << w << " shared by " << v1 << ", " << v2 << "\n";
            for (const auto& [u, v] : l.report.confounded) std::cout << "# adapted confounding " << u << " <-> " << v << "\n";
            if (answer) std::cout << "locally independent: " << (*answer ? "true" : "false") << "\n";
            else out.graph(l.graph);
            return 0;
        };
    });

    int rule = 1;
    std::string x_set, y_set, z_set, w_set;
    auto* docalc = app.add_subcommand("docalc", "sigma-separation precondition of a do-calculus rule");
    docalc->add_option("input", input, "model or graph file")->required();
    docalc->add_option("--rule", rule)->required()->check(CLI::Range(1, 3));
    docalc->add_option("--x", x_set, "set whose observation or action is exchanged")->required();
    docalc->add_option("--y", y_set, "outcome set")->required();
    docalc->add_option("--z", z_set, "observed set");
    docalc->add_option("--w", w_set, "intervened set");
    docalc->add_flag("--induced", induced);
    docalc->callback([&] {
        action = [&] {
            const auto g = load_graph(input, induced);
            const bool ok = docalc_check(g, rule, split_list(x_set), split_list(y_set), split_list(z_set), split_list(w_set));
            if (out.json) std::cout << json{{"rule", rule}, {"applies", ok}}.dump(2) << "\n";
            else std::cout << "rule " << rule << " applies: " << (ok ? "true" : "false") << "\n";
            return 0;
        };
    });

    std::string im_file, from_graph;
    auto* fci_cmd = app.add_subcommand("fci", "FCI on an independence model");
    auto* im_opt = fci_cmd->add_option("--im", im_file, "independence model file");
    auto* graph_opt = fci_cmd->add_option("--from-graph", from_graph, "graph or model whose sigma-separations are used");
    im_opt->excludes(graph_opt);
    fci_cmd->add_flag("--induced", induced);
    fci_cmd->callback([&] {
        if (im_file.empty() == from_graph.empty()) throw CLI::ValidationError("exactly one of --im and --from-graph is required");
        action = [&] {
            IndependenceModel model_im;
            if (!im_file.empty()) {
                model_im = parse_im(read_file(im_file));
            } else {
                const auto g = load_graph(from_graph, induced);
                model_im = enumerate_im(g, g.size() >= 2 ? g.size() - 2 : 0);
            }
            const auto pag = fci(model_im);
            if (out.json) std::cout << json{{"nodes", pag.nodes()}, {"edges", pag.edge_lines()}}.dump(2) << "\n";
            else std::cout << pag.to_string();
            return 0;
        };
    });

    SimConfig cfg;
    cfg.dt = 0.01;
    cfg.n_paths = 100;
    std::string csv_path;
    auto* sim = app.add_subcommand("simulate", "Euler-Maruyama paths as CSV time,process,path,value");
    sim->add_option("model", model, "model file")->required();
    sim->add_option("--dt", cfg.dt)->check(CLI::PositiveNumber);
    sim->add_option("--paths", cfg.n_paths)->check(CLI::PositiveNumber);
    sim->add_option("--seed", cfg.seed);
    sim->add_option("--horizon", cfg.horizon, "defaults to the model's horizon")->check(CLI::NonNegativeNumber);
    sim->add_option("--stride", cfg.record_stride, "write every n-th grid point")->check(CLI::PositiveNumber);
    sim->add_option("--out", csv_path, "output file (default: standard output)");
    sim->callback([&] {
        action = [&] {
            cfg.retain_drivers = false;
            const auto ens = simulate(load_model(model), cfg);
            std::ofstream file;
            if (!csv_path.empty()) {
                file.open(csv_path);
                if (!file) throw Error("cannot write '" + csv_path + "'");
            }
            std::ostream& os = csv_path.empty() ? std::cout : file;
            os << "time,process,path,value\n";
            os.precision(17);
            for (std::size_t r = 0; r < ens.recorded.size(); ++r)
                for (std::size_t i = 0; i < ens.processes.size(); ++i)
                    for (std::size_t p = 0; p < ens.n_paths; ++p)
                        os << ens.grid[ens.recorded[r]] << ',' << ens.processes[i] << ',' << p << ',' << ens.at(i, p, r) << '\n';
            return 0;
        };
    });

    std::vector<int> only;
    auto* verify = app.add_subcommand("verify", "run the acceptance criteria");
    verify->add_option("ids", only, "criterion ids (default: all)");
    verify->callback([&] {
        action = [&] {
            json results = json::array();
            const auto rs = acceptance::run(only, [&](const acceptance::Result& r) {
                if (!out.json) std::cout << acceptance::format(r) << std::endl;
            });
            std::size_t passed = 0;
            for (const auto& r : rs) {
                passed += r.pass() ? 1 : 0;
                results.push_back({{"id", r.id}, {"title", r.title}, {"pass", r.pass()}, {"seconds", r.seconds},
                                   {"limit", r.limit}, {"detail", r.detail}});
            }
            if (out.json) std::cout << json{{"passed", passed}, {"total", rs.size()}, {"results", results}}.dump(2) << "\n";
            else std::cout << passed << "/" << rs.size() << " criteria passed\n";
            return passed == rs.size() ? 0 : 1;
        };
    });

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }
    try {
        return action();
    } catch (const CLI::ValidationError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
