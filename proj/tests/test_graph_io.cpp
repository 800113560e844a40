#include <gtest/gtest.h>

#include <random>

#include "dscm/fixtures.hpp"
#include "dscm/graph_io.hpp"
#include "dscm/random_models.hpp"
#include "dscm/sde_graph.hpp"
#include "dscm/time_ops.hpp"

using namespace dscm;

TEST(EdgeList, EmptyGraphExportsNothing) {
    EXPECT_EQ(export_edges(Dmg{}), "");
    EXPECT_EQ(parse_edges("").size(), 0u);
    EXPECT_EQ(export_dot(Dmg{}), "digraph G {\n}\n");
}

TEST(EdgeList, ExportIsSortedAndMarksAdaptedEdges) {
    Dmg g;
    g.add_node("B");
    g.add_node("A");
    g.add_node("W", Role::exogenous);
    g.add_directed("W", "A", Dependence::adapted);
    g.add_bidirected("B", "A");
    g.add_directed("A", "B");
    EXPECT_EQ(export_edges(g),
              "node B\n"
              "node A\n"
              "node W exogenous\n"
              "A -> B\n"
              "W -> A adapted\n"
              "B <-> A\n");
}

TEST(EdgeList, ParsesUndeclaredNodesAndComments) {
    const auto g = parse_edges("# header\nA -> B adapted  # trailing\n\nB <-> C\n");
    ASSERT_EQ(g.size(), 3u);
    EXPECT_EQ(g.directed(g.index("A"), g.index("B")), Dependence::adapted);
    EXPECT_EQ(g.bidirected(g.index("C"), g.index("B")), Dependence::predictable);
}

TEST(EdgeList, ReportsLineOfMalformedInput) {
    try {
        parse_edges("A -> B\nA => B\n");
        FAIL() << "expected ParseError";
    } catch (const ParseError& e) {
        EXPECT_NE(std::string(e.what()).find("line 2"), std::string::npos);
    }
    EXPECT_THROW(parse_edges("A -> A\n"), ParseError);
    EXPECT_THROW(parse_edges("A -> B bogus\n"), ParseError);
    EXPECT_THROW(parse_edges("node A\nnode A\n"), ParseError);
    EXPECT_THROW(parse_edges("node A colour=red\n"), ParseError);
}

TEST(EdgeList, RoundTripsAugmentedExample) {
    const auto g = graph_of_sdes(parse_model(fixtures::example1));
    const auto h = parse_edges(export_edges(g));
    EXPECT_EQ(h, g);
    EXPECT_EQ(export_edges(h), export_edges(g));
}

TEST(EdgeList, RoundTripsTimeSplitNames) {
    const auto sys = parse_model(fixtures::example1);
    const auto sg = time_split(sys, resolve_times({"s", "t"}, &sys, sys.horizon));
    EXPECT_EQ(parse_edges(export_edges(sg.graph)), sg.graph);
}

TEST(EdgeList, RoundTripsRandomGraphs) {
    std::mt19937_64 rng(11);
    for (int i = 0; i < 100; ++i) {
        const auto g = random::random_dmg(rng, 6, 0.3, 0.2);
        ASSERT_EQ(parse_edges(export_edges(g)), g);
    }
}

TEST(Dot, RoundTripsAugmentedExample) {
    const auto g = graph_of_sdes(parse_model(fixtures::example1));
    const auto text = export_dot(g);
    EXPECT_NE(text.find("\"W\" [shape=box]"), std::string::npos);
    EXPECT_NE(text.find("\"W\" -> \"X1\" [color=red]"), std::string::npos);
    EXPECT_EQ(text.find("dir=both"), std::string::npos);
    EXPECT_EQ(parse_dot(text), g);
}

TEST(Dot, RoundTripsRandomGraphs) {
    std::mt19937_64 rng(12);
    for (int i = 0; i < 100; ++i) {
        const auto g = random::random_dmg(rng, 5, 0.3, 0.3);
        ASSERT_EQ(parse_dot(export_dot(g)), g);
    }
}

TEST(Dot, QuotesSpecialCharacters) {
    Dmg g;
    g.add_node(NodeId{"X1", "[0,s)", Role::endogenous, {}, false});
    g.add_node("a\"b");
    g.add_bidirected(0, 1, Dependence::adapted);
    const auto text = export_dot(g);
    EXPECT_NE(text.find("\"a\\\"b\""), std::string::npos);
    EXPECT_EQ(parse_dot(text), g);
}

TEST(Dot, RejectsMalformedInput) {
    EXPECT_THROW(parse_dot("graph { }"), ParseError);
    EXPECT_THROW(parse_dot("digraph G { A -> B"), ParseError);
    EXPECT_THROW(parse_dot("digraph G { \"A -> B; }"), ParseError);
}
