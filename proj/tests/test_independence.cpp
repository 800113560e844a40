#include <gtest/gtest.h>

#include <random>

#include "dscm/fixtures.hpp"
#include "dscm/independence.hpp"
#include "dscm/model.hpp"
#include "dscm/random_models.hpp"

using namespace dscm;

namespace {

Dmg chain3() {
    Dmg g;
    for (auto n : {"A", "B", "C"}) g.add_node(n);
    g.add_directed("A", "B");
    g.add_directed("B", "C");
    return g;
}

// Acyclic DMG on V0..V{n-1}: directed edges only from lower to higher index.
Dmg random_admg(std::mt19937_64& rng, std::size_t n, double p_dir, double p_bi) {
    std::bernoulli_distribution dir(p_dir), bi(p_bi);
    Dmg g;
    for (std::size_t i = 0; i < n; ++i) g.add_node("V" + std::to_string(i));
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j) {
            if (dir(rng)) g.add_directed(i, j);
            if (bi(rng)) g.add_bidirected(i, j);
        }
    return g;
}

// Copy of g without directed edges leaving `out_of` or entering `into`.
Dmg cut(const Dmg& g, const std::vector<char>& out_of, const std::vector<char>& into) {
    Dmg h;
    for (const auto& n : g.nodes()) h.add_node(n);
    for (const auto& e : g.edges()) {
        if (e.kind == EdgeKind::directed && out_of[e.src]) continue;
        if (into[e.dst]) continue;
        if (e.kind == EdgeKind::bidirected && into[e.src]) continue;
        h.add_edge(e.src, e.dst, e.kind, e.dependence);
    }
    return h;
}

}  // namespace

TEST(IndependenceModel, ChainStatements) {
    const auto im = enumerate_im(chain3(), 1);
    EXPECT_EQ(im.universe(), (std::vector<std::string>{"A", "B", "C"}));
    EXPECT_TRUE(im.separated("A", "C", {"B"}));
    EXPECT_FALSE(im.separated("A", "C", {}));
    EXPECT_FALSE(im.separated("A", "B", {"C"}));
    EXPECT_EQ(im.separations().size(), 1u);
    EXPECT_EQ(write_im(im), "# universe: A, B, C\n# max_cond: 1\nA _||_ C | B\n");
}

TEST(IndependenceModel, ClosedWorldAndConsistency) {
    IndependenceModel im({"A", "B", "C"}, 1);
    im.add("A", "B", {}, true);
    EXPECT_TRUE(im.separated("B", "A", {}));
    EXPECT_FALSE(im.separated("A", "C", {"B"}));
    EXPECT_THROW(im.add("B", "A", {}, false), InvalidArgument);
    EXPECT_THROW(im.add("A", "A", {}, true), InvalidArgument);
    EXPECT_THROW(im.add("A", "B", {"A"}, true), InvalidArgument);
    EXPECT_THROW(im.add("A", "Q", {}, true), UnknownNode);
    EXPECT_THROW(im.separated("A", "B", {"C", "C"}), InvalidArgument);
    EXPECT_THROW(IndependenceModel({"A", "A"}, 0), InvalidArgument);
}

TEST(IndependenceModel, TextRoundTrip) {
    std::mt19937_64 rng(41);
    for (int i = 0; i < 50; ++i) {
        const auto im = enumerate_im(random::random_dmg(rng, 5, 0.25, 0.15), 3);
        ASSERT_EQ(parse_im(write_im(im)), im);
        ASSERT_EQ(parse_im(write_im(im, true)), im);
    }
}

TEST(IndependenceModel, TextKeepsBracketedNames) {
    const auto im = parse_im("X@[0,s) _||_ Y@{s} | Z@(s,t),W\n");
    EXPECT_EQ(im.universe(), (std::vector<std::string>{"X@[0,s)", "Y@{s}", "Z@(s,t)", "W"}));
    EXPECT_TRUE(im.separated("Y@{s}", "X@[0,s)", {"W", "Z@(s,t)"}));
    EXPECT_THROW(parse_im("A and B\n"), ParseError);
}

TEST(IndependenceModel, EnumerationRespectsSizeLimit) {
    std::mt19937_64 rng(42);
    const auto g = random::random_dmg(rng, 11, 0.1, 0.1);
    EXPECT_THROW(enumerate_im(g, 1), InvalidArgument);
    EXPECT_NO_THROW(enumerate_im(g, 1, 11));
}

TEST(Subsets, OrderAndEarlyStop) {
    std::vector<std::vector<std::size_t>> seen;
    for_each_subset({4, 7, 9}, 2, [&](const std::vector<std::size_t>& s) {
        seen.push_back(s);
        return false;
    });
    const std::vector<std::vector<std::size_t>> expected{{}, {4}, {7}, {9}, {4, 7}, {4, 9}, {7, 9}};
    EXPECT_EQ(seen, expected);
    std::size_t calls = 0;
    EXPECT_TRUE(for_each_subset({1, 2, 3}, 3, [&](const std::vector<std::size_t>&) { return ++calls == 3; }));
    EXPECT_EQ(calls, 3u);
}

TEST(Integrators, ExampleFailsWithBothViolations) {
    const auto rep = check_independent_integrators(graph_of_sdes(parse_model(fixtures::example1)));
    EXPECT_FALSE(rep.pass);
    ASSERT_EQ(rep.endogenous.size(), 1u);
    EXPECT_EQ(rep.endogenous[0], (std::pair<std::string, std::string>{"X2", "X4"}));
    ASSERT_EQ(rep.shared.size(), 1u);
    EXPECT_EQ(rep.shared[0], (std::tuple<std::string, std::string, std::string>{"W", "X1", "X3"}));
}

TEST(Integrators, MarginalOfExamplePasses) {
    const auto aug = graph_of_sdes(parse_model(fixtures::example1));
    const auto lig = local_independence_graph(latent_project(aug, std::vector<std::string>{"X3", "X4"}));
    EXPECT_TRUE(lig.guarantee);
    const auto& g = lig.graph;
    EXPECT_EQ(g.size(), 2u);
    EXPECT_TRUE(g.directed(g.index("X1"), g.index("X2")));
    EXPECT_TRUE(g.directed(g.index("X2"), g.index("X1")));
    EXPECT_FALSE(sigma_li_query(lig, {"X1"}, {"X2"}, {}));
}

TEST(Integrators, SharedClockIsExempt) {
    const auto lig = local_independence_graph(graph_of_sdes(parse_model(fixtures::chain)));
    EXPECT_TRUE(lig.guarantee);
    for (const auto& e : lig.graph.edges()) EXPECT_EQ(e.kind, EdgeKind::directed);
    EXPECT_TRUE(sigma_li_query(lig, {"Y1"}, {"Y3"}, {"Y2"}));
    EXPECT_FALSE(sigma_li_query(lig, {"Y1"}, {"Y3"}, {}));
}

TEST(Integrators, QueryRefusedWithoutGuarantee) {
    const auto lig = local_independence_graph(graph_of_sdes(parse_model(fixtures::example1)));
    EXPECT_FALSE(lig.guarantee);
    EXPECT_THROW(sigma_li_query(lig, {"X1"}, {"X4"}, {}), InvalidArgument);
}

TEST(Integrators, AdaptedConfoundingFails) {
    Dmg g;
    g.add_node("A");
    g.add_node("B");
    g.add_bidirected("A", "B", Dependence::adapted);
    const auto rep = check_independent_integrators(g);
    EXPECT_FALSE(rep.pass);
    EXPECT_EQ(rep.confounded.size(), 1u);
    Dmg h;
    for (auto n : {"A", "B"}) h.add_node(n);
    h.add_bidirected("A", "B", Dependence::predictable);
    EXPECT_TRUE(check_independent_integrators(h).pass);
}

TEST(DoCalculus, ConfoundedPairNeedsAdjustment) {
    // Z -> X -> Y, Z -> Y: observing X is not acting on X unless Z is given.
    Dmg g;
    for (auto n : {"Z", "X", "Y"}) g.add_node(n);
    g.add_directed("Z", "X");
    g.add_directed("X", "Y");
    g.add_directed("Z", "Y");
    EXPECT_FALSE(docalc_check(g, 2, {"X"}, {"Y"}, {}, {}));
    EXPECT_TRUE(docalc_check(g, 2, {"X"}, {"Y"}, {"Z"}, {}));
    EXPECT_FALSE(docalc_check(g, 3, {"X"}, {"Y"}, {}, {}));
    EXPECT_FALSE(docalc_check(g, 1, {"Z"}, {"Y"}, {}, {"X"}));
}

TEST(DoCalculus, ActionOnNonAncestorIsIrrelevant) {
    Dmg g;
    for (auto n : {"X", "Y"}) g.add_node(n);
    g.add_directed("Y", "X");
    EXPECT_TRUE(docalc_check(g, 3, {"X"}, {"Y"}, {}, {}));
    EXPECT_FALSE(docalc_check(g, 1, {"X"}, {"Y"}, {}, {}));
}

TEST(DoCalculus, InterventionCutsFeedbackLoop) {
    // Y <-> Z cycle with X -> Z: intervening on Z leaves Y independent of X.
    Dmg g;
    for (auto n : {"X", "Y", "Z"}) g.add_node(n);
    g.add_directed("X", "Z");
    g.add_directed("Z", "Y");
    g.add_directed("Y", "Z");
    EXPECT_FALSE(docalc_check(g, 1, {"X"}, {"Y"}, {}, {}));
    EXPECT_TRUE(docalc_check(g, 1, {"X"}, {"Y"}, {}, {"Z"}));
    EXPECT_TRUE(docalc_check(g, 3, {"X"}, {"Y"}, {}, {"Z"}));
}

TEST(DoCalculus, RejectsInvalidArguments) {
    const auto g = chain3();
    EXPECT_THROW(docalc_check(g, 4, {"A"}, {"C"}, {}, {}), InvalidArgument);
    EXPECT_THROW(docalc_check(g, 1, {"A"}, {"A"}, {}, {}), InvalidArgument);
    EXPECT_THROW(docalc_check(g, 1, {"A"}, {"Q"}, {}, {}), UnknownNode);
}

TEST(DoCalculus, AgreesWithMutilatedGraphRulesOnAcyclicGraphs) {
    // Rule 2: Y _||_ X | Z,W with edges into W and out of X removed.
    // Rule 3: Y _||_ X | Z,W with edges into W and into X \ An(Z) removed,
    // ancestors taken after removing the edges into W.
    std::mt19937_64 rng(43);
    std::size_t checked = 0;
    for (int i = 0; i < 300; ++i) {
        const auto g = random_admg(rng, 5, 0.35, 0.15);
        for (std::size_t code = 0; code < 1024; code += 3) {
            std::size_t c = code;
            NodeSet x, y, z, w;
            for (std::size_t v = 0; v < 5; ++v, c /= 4) {
                const auto r = c % 4;
                if (r == 0) x.push_back(v);
                if (r == 1) y.push_back(v);
                if (r == 2) z.push_back(v);
                if (r == 3 && w.size() < 1) w.push_back(v);
            }
            if (x.empty() || y.empty()) continue;
            std::vector<char> in_x(5, 0), in_w(5, 0), none(5, 0);
            for (auto v : x) in_x[v] = 1;
            for (auto v : w) in_w[v] = 1;
            NodeSet cond = z;
            cond.insert(cond.end(), w.begin(), w.end());

            const auto g_rule2 = cut(cut(g, none, in_w), in_x, none);
            ASSERT_EQ(docalc_check(g, 2, x, y, z, w), d_separated(g_rule2, y, x, cond));

            const auto g_w = cut(g, none, in_w);
            const auto anc_z = ancestor_mask(g_w, z);
            std::vector<char> x_not_anc(5, 0);
            for (auto v : x) x_not_anc[v] = !anc_z[v];
            const auto g_rule3 = cut(g_w, none, x_not_anc);
            ASSERT_EQ(docalc_check(g, 3, x, y, z, w), d_separated(g_rule3, y, x, cond));

            ASSERT_EQ(docalc_check(g, 1, x, y, z, w), d_separated(g_w, y, x, cond));
            ++checked;
        }
    }
    EXPECT_GT(checked, 10000u);
}
