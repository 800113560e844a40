#pragma once

// End-to-end acceptance checks. Each criterion yields one pass/fail line
// with its runtime and a short diagnostic.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <functional>
#include <map>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <boost/math/distributions/binomial.hpp>
#include <boost/math/distributions/chi_squared.hpp>

#include "dscm/dmg.hpp"
#include "dscm/fci.hpp"
#include "dscm/fixtures.hpp"
#include "dscm/independence.hpp"
#include "dscm/model.hpp"
#include "dscm/random_models.hpp"
#include "dscm/reference.hpp"
#include "dscm/sde_graph.hpp"
#include "dscm/simulate.hpp"
#include "dscm/stat_tests.hpp"
#include "dscm/time_ops.hpp"

namespace dscm::acceptance {

struct Result {
    int id = 0;
    std::string title;
    bool ok = false;          // outcome of the check itself
    double seconds = 0.0;
    double limit = 0.0;       // runtime budget in seconds
    std::string detail;
    bool pass() const { return ok && seconds < limit; }
};

struct Outcome {
    bool ok = false;
    std::string detail;
};

/// Sorted edge lines `a -> b`, `a <-> b` with ` [adapted]` where applicable.
inline std::set<std::string> edge_lines(const Dmg& g) {
    std::set<std::string> out;
    for (const auto& e : g.edges()) {
        std::string a = g.name(e.src), b = g.name(e.dst);
        if (e.kind == EdgeKind::bidirected && b < a) std::swap(a, b);
        out.insert(a + (e.kind == EdgeKind::directed ? " -> " : " <-> ") + b +
                   (e.dependence == Dependence::adapted ? " [adapted]" : ""));
    }
    return out;
}

struct EdgeDiff {
    std::vector<std::string> missing, extra;
    bool exact() const { return missing.empty() && extra.empty(); }
};

inline EdgeDiff diff_edges(const std::set<std::string>& expected, const std::set<std::string>& actual) {
    EdgeDiff d;
    std::set_difference(expected.begin(), expected.end(), actual.begin(), actual.end(), std::back_inserter(d.missing));
    std::set_difference(actual.begin(), actual.end(), expected.begin(), expected.end(), std::back_inserter(d.extra));
    return d;
}

inline std::string join(const std::vector<std::string>& v, const std::string& sep = "; ") {
    std::string s;
    for (const auto& x : v) s += (s.empty() ? "" : sep) + x;
    return s;
}

inline std::string describe(const EdgeDiff& d) {
    if (d.exact()) return "exact";
    std::string s;
    if (!d.missing.empty()) s += "missing {" + join(d.missing) + "}";
    if (!d.extra.empty()) s += std::string(s.empty() ? "" : ", ") + "extra {" + join(d.extra) + "}";
    return s;
}

inline std::string fmt(double x, int precision = 4) {
    std::ostringstream o;
    o.precision(precision);
    o << x;
    return o.str();
}

// --- structural criteria ---------------------------------------------------

inline Outcome augmented_graph() {
    const auto g = graph_of_sdes(parse_model(fixtures::example1));
    const std::set<std::string> expected{
        "X1^0 -> X1", "X2^0 -> X2", "X3^0 -> X3", "X4^0 -> X4",
        "W -> X1 [adapted]", "W -> X3 [adapted]", "N -> X2 [adapted]", "X2 -> X4 [adapted]",
        "X1 -> X2", "X2 -> X3", "X3 -> X1"};
    const auto d = diff_edges(expected, edge_lines(g));
    return {d.exact() && g.size() == 10, "edges " + describe(d) + ", " + std::to_string(g.size()) + " nodes"};
}

inline Outcome induced_graph() {
    const auto sys = parse_model(fixtures::example1);
    const auto g = induced_dscm_graph(sys);
    const std::set<std::string> expected{"X1 -> X2", "X2 -> X3", "X3 -> X1", "X2 -> X4 [adapted]",
                                         "X1 <-> X3 [adapted]"};
    const auto d = diff_edges(expected, edge_lines(g));
    const bool nodes = g.names(NodeSet{0, 1, 2, 3}) == std::vector<std::string>{"X1", "X2", "X3", "X4"} && g.size() == 4;
    return {d.exact() && nodes && g.metadata().simple, "edges " + describe(d)};
}

inline Outcome sigma_versus_d() {
    const auto g = graph_of_sdes(parse_model(fixtures::example1));
    const bool d = d_separated(g, {"X1^0"}, {"X2^0"}, {"X1", "X2"});
    const bool s = sigma_separated(g, {"X1^0"}, {"X2^0"}, {"X1", "X2"});
    return {d && !s, std::string("d-separated ") + (d ? "true" : "false") + ", sigma-separated " + (s ? "true" : "false")};
}

inline Outcome separation_oracle() {
    std::size_t queries = 0, graphs = 0, mismatches = 0;
    std::string first;
    auto check_graph = [&](const Dmg& g, std::size_t max_cond) {
        ++graphs;
        const std::size_t n = g.size();
        for (std::size_t a = 0; a < n; ++a) {
            for (std::size_t b = a + 1; b < n; ++b) {
                NodeSet pool;
                for (std::size_t v = 0; v < n; ++v)
                    if (v != a && v != b) pool.push_back(v);
                for_each_subset(pool, max_cond, [&](const std::vector<std::size_t>& c) {
                    const NodeSet cs(c.begin(), c.end());
                    for (bool sigma : {true, false}) {
                        ++queries;
                        const bool fast = sigma ? sigma_separated(g, {a}, {b}, cs) : d_separated(g, {a}, {b}, cs);
                        const bool slow = reference::walk_separated(g, {a}, {b}, cs, sigma);
                        if (fast != slow && mismatches++ == 0) {
                            first = std::string(sigma ? "sigma" : "d") + " query " + g.name(a) + "," + g.name(b) +
                                    " in graph with " + std::to_string(g.edges().size()) + " edges";
                        }
                    }
                    return false;
                });
            }
        }
    };
    random::for_each_small_dmg(4, 6, [&](const Dmg& g) { check_graph(g, 2); });
    const std::size_t small_graphs = graphs;
    std::mt19937_64 rng(0);
    for (int i = 0; i < 1000; ++i) check_graph(random::random_dmg(rng, 6, 0.2, 0.1), 4);
    return {mismatches == 0, std::to_string(small_graphs) + " exhaustive 4-node graphs + 1000 random 6-node graphs, " +
                                 std::to_string(queries) + " queries, " + std::to_string(mismatches) + " mismatches" +
                                 (first.empty() ? "" : " (first: " + first + ")")};
}

/// Edges of the subsampled graph that the published rendering omits.
inline const std::set<std::string>& subsample_extras() {
    static const std::set<std::string> extras{
        "W -> X2@{s}", "W -> X4@{s}", "W -> X2@{t}", "W -> X4@{t}",
        "N -> X1@{s}", "N -> X4@{s}", "N -> X1@{t}", "N -> X4@{t}",
        "X1^0 -> X4@{s}", "X1@{s} -> X4@{t}", "X4@{s} -> X4@{t}"};
    return extras;
}

inline Outcome split_and_subsample() {
    const auto sys = parse_model(fixtures::example1);
    const auto tau = resolve_times({"s", "t"}, &sys, sys.horizon);
    const auto sg = time_split(sys, tau, SplitMode::figure, {"X3^0", "X3", "X4^0"});

    std::set<std::string> middle{"X1^0 -> X1@[0,s)", "X2^0 -> X2@[0,s)"};
    const std::vector<std::string> pieces{"[0,s)", "{s}", "(s,t)", "{t}", "(t,T]"};
    for (const auto& p : pieces) {
        middle.insert("W -> X1@" + p + " [adapted]");
        middle.insert("N -> X2@" + p + " [adapted]");
    }
    for (const auto* v : {"X1", "X2", "X4"})
        for (std::size_t i = 0; i + 1 < pieces.size(); ++i)
            middle.insert(std::string(v) + "@" + pieces[i] + " -> " + v + "@" + pieces[i + 1]);
    for (const auto& e : {"X1@[0,s) -> X2@[0,s)", "X2@[0,s) -> X1@[0,s)", "X1@[0,s) -> X2@{s}", "X2@[0,s) -> X1@{s}",
                          "X1@(s,t) -> X2@(s,t)", "X2@(s,t) -> X1@(s,t)", "X1@(s,t) -> X2@{t}", "X2@(s,t) -> X1@{t}",
                          "X1@(t,T] -> X2@(t,T]", "X2@(t,T] -> X1@(t,T]", "X2@[0,s) -> X4@[0,s) [adapted]",
                          "X2@[0,s) -> X4@{s}", "X2@(s,t) -> X4@(s,t) [adapted]", "X2@(s,t) -> X4@{t}",
                          "X2@(t,T] -> X4@(t,T] [adapted]", "X2@{s} -> X4@{s} [adapted]", "X2@{t} -> X4@{t} [adapted]"})
        middle.insert(e);
    const auto dm = diff_edges(middle, edge_lines(sg.graph));

    const std::set<std::string> right{
        "X1^0 -> X1@{s}", "X2^0 -> X2@{s}", "X1^0 -> X2@{s}", "X2^0 -> X1@{s}",
        "W -> X1@{s} [adapted]", "W -> X1@{t} [adapted]", "N -> X2@{s} [adapted]", "N -> X2@{t} [adapted]",
        "X1@{s} -> X2@{t}", "X2@{s} -> X1@{t}", "X2^0 -> X4@{s}", "X2@{s} -> X4@{t}",
        "X2@{s} -> X4@{s} [adapted]", "X2@{t} -> X4@{t} [adapted]", "X1@{s} -> X1@{t}", "X2@{s} -> X2@{t}"};
    const auto sub = subsample_graph(sg);
    const auto dr = diff_edges(right, edge_lines(sub.graph));
    const std::set<std::string> extra(dr.extra.begin(), dr.extra.end());
    const bool superset = dr.missing.empty();
    const bool known_extras = extra == subsample_extras();
    std::string detail = "split graph " + describe(dm) + "; subsampled graph exact " + (dr.exact() ? "true" : "false") +
                         ", contains all " + std::to_string(right.size()) + " drawn edges " + (superset ? "true" : "false") +
                         ", additional projected edges " + std::to_string(extra.size()) +
                         (known_extras ? " (the known set)" : " (unexpected: " + describe(dr) + ")");
    return {dm.exact() && dr.exact(), detail};
}

inline Outcome collapse_consistency() {
    std::mt19937_64 rng(0);
    std::size_t identity = 0, distinct = 0, split_nontrivial = 0;
    const std::size_t runs = 200;
    for (std::size_t i = 0; i < runs; ++i) {
        const auto sys = random::random_solvable_system(rng);
        const auto tau = random::random_tau(rng, sys.horizon, 4);
        const auto g = graph_of_sdes(sys);
        const auto sg = time_split(sys, tau);
        if (collapse_graph(sg) == g) ++identity;
        if (!tau.empty()) {
            ++split_nontrivial;
            const auto sub = collapse_graph(subsample_graph(sg), false);
            std::vector<std::string> a, b;
            for (std::size_t k = 0; k < g.size(); ++k) a.push_back(g.name(k));
            for (std::size_t k = 0; k < sub.size(); ++k) b.push_back(sub.name(k));
            std::sort(a.begin(), a.end());
            std::sort(b.begin(), b.end());
            if (a != b) ++distinct;
        }
    }
    return {identity == runs && distinct == split_nontrivial,
            "collapse(split) = g in " + std::to_string(identity) + "/" + std::to_string(runs) +
                "; subsampled collapse differs in node set in " + std::to_string(distinct) + "/" +
                std::to_string(split_nontrivial) + " non-empty splits"};
}

/// Graph of the example split at 0, with exogenous inputs replaced by
/// bidirected edges.
inline Dmg initial_split_graph() {
    const auto sys = parse_model(fixtures::example1);
    const auto sg = time_split_graph(graph_of_sdes(sys), markov_flags(sys), {{0.0, "0"}}, sys.horizon, SplitMode::figure);
    return to_dmg(sg.graph);
}

inline Outcome fci_initial_split() {
    const auto g = initial_split_graph();
    const auto pag = fci(enumerate_im(g, g.size() - 2));
    auto at = [&](const std::string& a, const std::string& b) { return pag.at(*pag.find(a), *pag.find(b)); };
    auto body = [](int i) { return "X" + std::to_string(i) + "@(0,T]"; };
    auto zero = [](int i) { return "X" + std::to_string(i) + "@{0}"; };

    std::set<std::pair<std::string, std::string>> expected;
    auto add = [&](std::string a, std::string b) {
        if (b < a) std::swap(a, b);
        expected.emplace(a, b);
    };
    add(body(1), body(2));
    add(body(2), body(3));
    add(body(1), body(3));
    add(body(2), body(4));
    for (int i = 1; i <= 3; ++i)
        for (int j = 1; j <= 3; ++j) add(zero(i), body(j));
    add(zero(4), body(4));

    std::set<std::pair<std::string, std::string>> actual;
    for (std::size_t a = 0; a < pag.size(); ++a)
        for (std::size_t b = a + 1; b < pag.size(); ++b)
            if (pag.adjacent(a, b)) {
                auto x = pag.nodes()[a], y = pag.nodes()[b];
                if (y < x) std::swap(x, y);
                actual.emplace(x, y);
            }
    const bool skeleton = actual == expected;
    const bool directed = skeleton && at(body(4), body(2)) == Mark::tail && at(body(2), body(4)) == Mark::arrow;

    // Marks read from the rendering: circles at the initial-value side and
    // arrowheads at the process side; circles within the cycle.
    std::size_t marks_ok = 0, marks_total = 0;
    if (skeleton) {
        for (int i = 1; i <= 3; ++i)
            for (int j = 1; j <= 3; ++j) {
                ++marks_total;
                if (at(body(j), zero(i)) == Mark::circle && at(zero(i), body(j)) == Mark::arrow) ++marks_ok;
            }
        ++marks_total;
        if (at(body(4), zero(4)) == Mark::circle && at(zero(4), body(4)) == Mark::arrow) ++marks_ok;
        for (auto [a, b] : {std::pair{1, 2}, {2, 3}, {1, 3}}) {
            ++marks_total;
            if (at(body(a), body(b)) == Mark::circle && at(body(b), body(a)) == Mark::circle) ++marks_ok;
        }
    }
    return {skeleton && directed,
            "skeleton " + std::string(skeleton ? "exact" : "differs") + " (" + std::to_string(actual.size()) + " of " +
                std::to_string(expected.size()) + " adjacencies), X2 --> X4 " + (directed ? "true" : "false") +
                ", other endpoint marks as drawn " + std::to_string(marks_ok) + "/" + std::to_string(marks_total) +
                " [flagged, not asserted]"};
}

inline Outcome fci_soundness() {
    std::mt19937_64 rng(0);
    std::uniform_int_distribution<std::size_t> size(2, 6);
    std::size_t sound = 0;
    const std::size_t runs = 200;
    for (std::size_t i = 0; i < runs; ++i) {
        const auto g = random::random_dmg(rng, size(rng), 0.25, 0.15);
        const auto pag = fci(enumerate_im(g, g.size() - 2));
        if (soundness_check(g, pag)) ++sound;
    }
    return {sound == runs, std::to_string(sound) + "/" + std::to_string(runs) + " sound"};
}

inline Outcome solvability() {
    const auto good = check_unique_solvability(parse_model(fixtures::example1));
    const auto bad = check_unique_solvability(parse_model(fixtures::example1_mutated));
    const bool ok = good.solvable && !bad.solvable && bad.witness_process == "X3" &&
                    bad.witness_set == std::vector<std::string>{"X2"};
    return {ok, std::string("example solvable ") + (good.solvable ? "true" : "false") + ", mutation solvable " +
                    (bad.solvable ? "true" : "false") + ", witness (" + bad.witness_process + ", {" +
                    join(bad.witness_set, ",") + "})"};
}

// --- numerical criteria ----------------------------------------------------

inline Outcome adaptedness() {
    const auto sys = parse_model(fixtures::example1);
    SimConfig cfg;
    cfg.dt = 1e-3;
    cfg.n_paths = 64;
    cfg.seed = 0;
    const std::size_t steps = grid_steps(sys.horizon, cfg.dt);
    std::mt19937_64 rng(0);
    std::uniform_int_distribution<std::size_t> cut(0, steps);
    std::size_t held = 0;
    std::string cuts;
    for (int i = 0; i < 10; ++i) {
        const double t = static_cast<double>(cut(rng)) * cfg.dt;
        cuts += (cuts.empty() ? "" : ",") + fmt(t, 3);
        if (check_adaptedness(sys, cfg, t)) ++held;
    }
    SimConfig broken = cfg;
    broken.scheme = Scheme::anticipating;
    const bool mutant = check_adaptedness(sys, broken, sys.horizon / 2);
    return {held == 10 && !mutant, "held at " + std::to_string(held) + "/10 cuts {" + cuts +
                                       "}; anticipating scheme adapted " + (mutant ? "true" : "false")};
}

inline Outcome numerical_soundness() {
    const std::size_t n = 10000;
    SimConfig cfg;
    cfg.dt = 1e-3;
    cfg.n_paths = n;
    cfg.seed = 0;
    cfg.retain_drivers = false;
    cfg.record_stride = 1000;

    const auto ou = parse_model(fixtures::ornstein_uhlenbeck);
    const double theta = 1.0, mu = 0.5, sigma = 0.8, x0 = 2.0, horizon = ou.horizon;
    const auto ens = simulate(ou, cfg);
    const auto xs = ens.column("X", horizon);
    double mean = 0.0;
    for (double x : xs) mean += x;
    mean /= static_cast<double>(n);
    double var = 0.0;
    for (double x : xs) var += (x - mean) * (x - mean);
    var /= static_cast<double>(n - 1);
    const double true_mean = mu + (x0 - mu) * std::exp(-theta * horizon);
    const double true_var = sigma * sigma * (1.0 - std::exp(-2.0 * theta * horizon)) / (2.0 * theta);
    const double z_mean = (mean - true_mean) / std::sqrt(true_var / static_cast<double>(n));
    const double z_var = (var - true_var) / (true_var * std::sqrt(2.0 / static_cast<double>(n - 1)));

    const auto pc = parse_model(fixtures::poisson_counter);
    const double lambda = pc.drivers.front().param * pc.horizon;
    const auto counts = simulate(pc, cfg).column("X", pc.horizon);
    // Bins 0..K-1 plus a pooled tail, K the first count with expectation < 5.
    std::vector<double> expected;
    double pk = std::exp(-lambda), mass = 0.0;
    for (int k = 0;; ++k) {
        if (pk * static_cast<double>(n) < 5.0) break;
        expected.push_back(pk * static_cast<double>(n));
        mass += pk;
        pk *= lambda / (k + 1);
    }
    expected.push_back((1.0 - mass) * static_cast<double>(n));
    std::vector<double> observed(expected.size(), 0.0);
    for (double c : counts) {
        const auto k = static_cast<std::size_t>(std::llround(c));
        observed[std::min(k, expected.size() - 1)] += 1.0;
    }
    double chi2 = 0.0;
    for (std::size_t k = 0; k < expected.size(); ++k) chi2 += (observed[k] - expected[k]) * (observed[k] - expected[k]) / expected[k];
    const boost::math::chi_squared_distribution<double> dist(static_cast<double>(expected.size() - 1));
    const double p = boost::math::cdf(boost::math::complement(dist, chi2));

    const bool ok = std::abs(z_mean) < 3.0 && std::abs(z_var) < 3.0 && p > 0.01;
    return {ok, "OU mean " + fmt(mean) + " vs " + fmt(true_mean) + " (z=" + fmt(z_mean, 3) + "), variance " + fmt(var) +
                    " vs " + fmt(true_var) + " (z=" + fmt(z_var, 3) + "); Poisson chi2=" + fmt(chi2) + " on " +
                    std::to_string(expected.size() - 1) + " dof, p=" + fmt(p, 3)};
}

struct Triple {
    std::size_t a, b;
    std::vector<std::size_t> c;
};

/// Nodes of a subsampled augmented graph mapped to evaluations: initial
/// values at time 0, point pieces at their time.
inline std::vector<Eval> evaluations(const Dmg& g, const EvalPartition& points) {
    std::vector<Eval> out;
    for (const auto& n : g.nodes()) {
        if (!n.initial_of.empty()) {
            out.push_back({n.initial_of, 0.0});
            continue;
        }
        if (!n.eval) throw InvalidArgument("node '" + n.name() + "' has no evaluation time");
        const auto piece = points.find(*n.eval);
        if (!piece || !points.pieces[*piece].is_point()) throw InvalidArgument("node '" + n.name() + "' is not a point");
        out.push_back({n.process, points.pieces[*piece].lo.value});
    }
    return out;
}

inline Outcome markov_statistical(std::size_t reps = 200, std::size_t n_paths = 20000) {
    const auto sys = parse_model(fixtures::example1_linear);
    const auto tau = resolve_times({"s", "t"}, &sys, sys.horizon);
    const auto sub = subsample_graph(time_split(sys, tau));
    std::vector<std::string> drivers;
    for (const auto& d : sys.drivers) drivers.push_back(d.name);
    const auto g = latent_project(sub.graph, drivers);
    const auto evals = evaluations(g, sub.partition);

    std::vector<Triple> separated, d_only;
    const std::size_t n = g.size();
    for (std::size_t a = 0; a < n; ++a)
        for (std::size_t b = a + 1; b < n; ++b) {
            std::vector<std::size_t> pool;
            for (std::size_t v = 0; v < n; ++v)
                if (v != a && v != b) pool.push_back(v);
            for_each_subset(pool, 2, [&](const std::vector<std::size_t>& c) {
                const NodeSet cs(c.begin(), c.end());
                if (sigma_separated(g, {a}, {b}, cs)) separated.push_back({a, b, c});
                else if (d_separated(g, {a}, {b}, cs)) d_only.push_back({a, b, c});
                return false;
            });
        }

    std::vector<std::size_t> rejections(separated.size(), 0), detections(d_only.size(), 0);
    SimConfig cfg;
    cfg.dt = 0.02;
    cfg.n_paths = n_paths;
    cfg.retain_drivers = false;
    for (std::size_t r = 0; r < reps; ++r) {
        cfg.seed = r;
        const CiOracle oracle(simulate(sys, cfg), evals);
        for (std::size_t i = 0; i < separated.size(); ++i)
            if (!oracle.test({separated[i].a}, {separated[i].b}, separated[i].c).independent) ++rejections[i];
        for (std::size_t i = 0; i < d_only.size(); ++i)
            if (!oracle.test({d_only[i].a}, {d_only[i].b}, d_only[i].c).independent) ++detections[i];
    }

    const double limit = 0.02;
    std::size_t worst = 0, exceed = 0, total = 0;
    for (std::size_t i = 0; i < separated.size(); ++i) {
        total += rejections[i];
        if (rejections[i] > rejections[worst]) worst = i;
        if (static_cast<double>(rejections[i]) > limit * static_cast<double>(reps)) ++exceed;
    }
    auto triple_name = [&](const Triple& t) {
        std::string s = g.name(t.a) + " _||_ " + g.name(t.b);
        if (!t.c.empty()) {
            std::vector<std::string> cn;
            for (auto v : t.c) cn.push_back(g.name(v));
            s += " | " + join(cn, ",");
        }
        return s;
    };
    // Under exact calibration each triple's rejection count is Binomial(reps, alpha).
    const boost::math::binomial_distribution<double> null(static_cast<double>(reps), 0.01);
    const double p_exceed =
        boost::math::cdf(boost::math::complement(null, std::floor(limit * static_cast<double>(reps))));
    const double pooled = separated.empty() ? 0.0 : static_cast<double>(total) / static_cast<double>(reps * separated.size());

    std::size_t detected = 0;
    for (auto d : detections)
        if (static_cast<double>(d) > 0.5 * static_cast<double>(reps)) ++detected;
    std::string detail = std::to_string(separated.size()) + " sigma-separated triples, " + std::to_string(reps) + " reps x " +
                         std::to_string(n_paths) + " paths; pooled rejection rate " + fmt(pooled, 3) + "; triples above " +
                         fmt(limit) + ": " + std::to_string(exceed) + " (expected under exact calibration " +
                         fmt(p_exceed * static_cast<double>(separated.size()), 3) + ")";
    if (!separated.empty()) {
        detail += "; worst " + triple_name(separated[worst]) + " at " +
                  fmt(static_cast<double>(rejections[worst]) / static_cast<double>(reps), 3);
    }
    detail += "; d-but-not-sigma separated triples detected dependent in most reps: " + std::to_string(detected) + "/" +
              std::to_string(d_only.size()) + " [reported, not asserted]";
    return {!separated.empty() && exceed == 0, detail};
}

struct LiQuery {
    std::vector<std::string> a, b, c;
};

/// Every sigma_li_query certificate with disjoint non-empty a, b and any c
/// over the remaining processes.
inline std::vector<LiQuery> li_certificates(const LocalIndependenceGraph& lig, const std::vector<std::string>& procs) {
    std::vector<LiQuery> out;
    const std::size_t k = procs.size();
    std::size_t total = 1;
    for (std::size_t i = 0; i < k; ++i) total *= 3;
    for (std::size_t code = 0; code < total; ++code) {
        // Each process goes to a (1), b (2) or neither (0); c ranges below.
        std::vector<std::string> a, b, rest;
        std::size_t x = code;
        for (std::size_t i = 0; i < k; ++i, x /= 3) {
            if (x % 3 == 1) a.push_back(procs[i]);
            else if (x % 3 == 2) b.push_back(procs[i]);
            else rest.push_back(procs[i]);
        }
        if (a.empty() || b.empty()) continue;
        for (std::size_t mask = 0; mask < (std::size_t{1} << rest.size()); ++mask) {
            std::vector<std::string> c;
            for (std::size_t i = 0; i < rest.size(); ++i)
                if (mask >> i & 1) c.push_back(rest[i]);
            if (sigma_li_query(lig, a, b, c)) out.push_back({a, b, c});
        }
    }
    return out;
}

inline Outcome local_independence_statistical(std::size_t reps = 200, std::size_t n_paths = 2000) {
    // Marginal of the example over {X3, X4}: the guarantee applies, but its
    // graph X1 <-> X2 cycle yields no separation certificates.
    const auto ex = parse_model(fixtures::example1);
    const auto marg = latent_project(graph_of_sdes(ex), std::vector<std::string>{"X3", "X4"});
    const auto marg_lig = local_independence_graph(marg);
    std::size_t marg_certs = 0;
    if (marg_lig.guarantee) marg_certs = li_certificates(marg_lig, {"X1", "X2"}).size();

    const auto chain = parse_model(fixtures::chain);
    const auto lig = local_independence_graph(graph_of_sdes(chain));
    if (!lig.guarantee) return {false, "chain system fails the independent-integrators check"};
    const auto certs = li_certificates(lig, chain.process_names());

    SimConfig cfg;
    cfg.dt = 0.01;
    cfg.n_paths = n_paths;
    cfg.retain_drivers = false;
    std::vector<std::size_t> rejections(certs.size(), 0);
    std::size_t power_hits = 0;
    for (std::size_t r = 0; r < reps; ++r) {
        cfg.seed = r;
        const auto ens = simulate(chain, cfg);
        for (std::size_t i = 0; i < certs.size(); ++i)
            if (!local_independence_test(ens, certs[i].a, certs[i].b, certs[i].c).holds) ++rejections[i];
        if (!local_independence_test(ens, {"Y1"}, {"Y2"}, {}).holds) ++power_hits;
    }
    std::size_t worst = 0;
    for (std::size_t i = 0; i < certs.size(); ++i)
        if (rejections[i] > rejections[worst]) worst = i;
    const double worst_rate = certs.empty() ? 0.0 : static_cast<double>(rejections[worst]) / static_cast<double>(reps);
    std::string detail = "marginal example guarantee " + std::string(marg_lig.guarantee ? "true" : "false") + " with " +
                         std::to_string(marg_certs) + " certificates (its graph is the cycle X1 <-> X2); chain system " +
                         std::to_string(certs.size()) + " certificates over " + std::to_string(reps) + " reps x " +
                         std::to_string(n_paths) + " paths, worst rejection rate " + fmt(worst_rate, 3);
    if (!certs.empty()) {
        detail += " (" + join(certs[worst].a, ",") + " -/-> " + join(certs[worst].b, ",") + " | " +
                  join(certs[worst].c, ",") + ")";
    }
    detail += "; power for Y1 -> Y2: " + fmt(static_cast<double>(power_hits) / static_cast<double>(reps), 3) +
              " [reported, not asserted]";
    return {marg_lig.guarantee && !certs.empty() && worst_rate <= 0.02, detail};
}

// --- driver ----------------------------------------------------------------

struct Criterion {
    int id;
    std::string title;
    double limit;
    std::function<Outcome()> run;
};

inline std::vector<Criterion> criteria() {
    return {
        {1, "augmented graph of the example system", 1.0, augmented_graph},
        {2, "induced mixed graph of the example system", 1.0, induced_graph},
        {3, "sigma- versus d-separation of initial values", 1.0, sigma_versus_d},
        {4, "separation against walk-enumeration oracle", 60.0, separation_oracle},
        {5, "time-split and subsampled graphs of the marginal example", 1.0, split_and_subsample},
        {6, "collapse of time-split graphs", 30.0, collapse_consistency},
        {7, "FCI on the example split at time 0", 10.0, fci_initial_split},
        {8, "FCI soundness on random graphs", 120.0, fci_soundness},
        {9, "unique solvability and witness", 1.0, solvability},
        {10, "adaptedness of the scheme", 30.0, adaptedness},
        {11, "OU moments and Poisson counts", 60.0, numerical_soundness},
        {12, "Markov property on the linear example", 600.0, [] { return markov_statistical(); }},
        {13, "local-independence Markov property", 300.0, [] { return local_independence_statistical(); }},
    };
}

/// Runs the selected criteria (all when `only` is empty), reporting each
/// result through `report` as soon as it is available.
inline std::vector<Result> run(const std::vector<int>& only, const std::function<void(const Result&)>& report) {
    std::vector<Result> out;
    for (const auto& c : criteria()) {
        if (!only.empty() && std::find(only.begin(), only.end(), c.id) == only.end()) continue;
        Result r;
        r.id = c.id;
        r.title = c.title;
        r.limit = c.limit;
        const auto start = std::chrono::steady_clock::now();
        try {
            const auto o = c.run();
            r.ok = o.ok;
            r.detail = o.detail;
        } catch (const std::exception& e) {
            r.ok = false;
            r.detail = std::string("error: ") + e.what();
        }
        r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        if (report) report(r);
        out.push_back(std::move(r));
    }
    return out;
}

inline std::string format(const Result& r) {
    std::ostringstream o;
    o << (r.pass() ? "PASS" : "FAIL") << "  [" << r.id << "] " << r.title << " (" << fmt(r.seconds, 3) << " s, limit "
      << fmt(r.limit) << " s): " << r.detail;
    if (r.ok && !r.pass()) o << " [over time budget]";
    return o.str();
}

}  // namespace dscm::acceptance
