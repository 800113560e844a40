#include <gtest/gtest.h>

#include <fstream>
#include <random>
#include <sstream>

#include "dscm/fixtures.hpp"
#include "dscm/graph_io.hpp"
#include "dscm/model.hpp"
#include "dscm/random_models.hpp"
#include "dscm/sde_graph.hpp"

using namespace dscm;

namespace {

std::string error_of(std::string_view text) {
    try {
        parse_model(text);
    } catch (const ParseError& e) {
        return e.what();
    }
    return {};
}

std::string read_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

constexpr std::string_view minimal = R"(system {
  exogenous W: brownian;
  process X { init = constant(0); alpha = {}; beta = {W}; g = [1]; }
  horizon 1;
})";

}  // namespace

TEST(Expr, PrintParseRoundTrip) {
    for (const char* src : {"1 + 2 * X", "(1 + 2) * X", "-X - (Y - Z)", "min(1, max(-1, X4))", "exp(sin(X / 2))",
                            "X - -Y", "2 * t"}) {
        const auto e = parse_expr(src);
        EXPECT_EQ(parse_expr(to_string(e)), e) << src;
    }
}

TEST(Expr, CompiledEvaluation) {
    const auto e = parse_expr("min(1, max(-1, X)) + 0.5 * sin(Y) - exp(0) / 2");
    const CompiledExpr c(e, [](const std::string& n) { return n == "X" ? 0 : 1; });
    EXPECT_DOUBLE_EQ(c.eval({3.0, 0.0}), 1.0 - 0.5);
    EXPECT_DOUBLE_EQ(c.eval({-0.25, 1.0}), -0.25 + 0.5 * std::sin(1.0) - 0.5);
    EXPECT_TRUE(CompiledExpr(parse_expr("0"), [](const std::string&) { return 0; }).is_constant_zero());
}

TEST(Model, ParsesExample) {
    const auto sys = parse_model(fixtures::example1);
    ASSERT_EQ(sys.processes.size(), 4u);
    ASSERT_EQ(sys.drivers.size(), 2u);
    EXPECT_EQ(sys.drivers[1].kind, DriverSpec::Kind::poisson);
    EXPECT_DOUBLE_EQ(sys.drivers[1].param, 2.0);
    EXPECT_EQ(sys.time_label("s"), 0.4);
    EXPECT_FALSE(sys.time_label("u"));
    EXPECT_EQ(sys.process("X4")->beta, std::vector<std::string>{"X2"});
    EXPECT_TRUE(sys.process("X1")->markov);
    EXPECT_DOUBLE_EQ(sys.horizon, 1.0);
    EXPECT_TRUE(sys.warnings.empty());
}

TEST(Model, PrintParseRoundTrip) {
    for (auto text : {fixtures::example1, fixtures::example1_mutated, fixtures::example1_linear,
                      fixtures::ornstein_uhlenbeck, fixtures::poisson_counter, fixtures::chain}) {
        const auto sys = parse_model(text);
        const auto printed = print_model(sys);
        EXPECT_EQ(parse_model(printed), sys);
        EXPECT_EQ(print_model(parse_model(printed)), printed);
    }
    std::mt19937_64 rng(21);
    for (int i = 0; i < 100; ++i) {
        const auto sys = parse_model(random::random_model_text(rng));
        ASSERT_EQ(parse_model(print_model(sys)), sys);
    }
}

TEST(Model, InterventionRoundTrips) {
    const auto sys = intervene_sde(parse_model(fixtures::example1), {"X2"}, 1.5);
    EXPECT_NE(print_model(sys).find("do = 1.5;"), std::string::npos);
    EXPECT_EQ(parse_model(print_model(sys)), sys);
}

TEST(Model, ErrorsCarryPositions) {
    EXPECT_EQ(error_of("system { horizon 1; }"), "system declares no processes");
    EXPECT_EQ(error_of("system {\n  exogenous W: gaussian;\n}"), "2:16: unknown driver kind 'gaussian'");
    EXPECT_NE(error_of("system {\n  exogenous W: brownian;\n  process X { init = constant(0); alpha = {Y}; beta = {W}; "
                       "g = [1]; }\n  horizon 1;\n}")
                  .find("3:3: unresolved name 'Y' in alpha of 'X'"),
              std::string::npos);
    EXPECT_NE(error_of("system {\n  exogenous W: brownian;\n  process X { init = constant(0); alpha = {}; beta = {W}; "
                       "g = [1, 2]; }\n  horizon 1;\n}")
                  .find("has 2 integrand(s) but 1 integrator(s)"),
              std::string::npos);
    EXPECT_NE(error_of("system {\n  exogenous W: brownian;\n  exogenous W: time;\n  process X { init = constant(0); "
                       "alpha = {}; beta = {W}; g = [1]; }\n  horizon 1;\n}")
                  .find("3:3: duplicate name 'W' (first declared at 2:3)"),
              std::string::npos);
    EXPECT_NE(error_of("system {\n  exogenous W: brownian;\n  process X { init = constant(0); alpha = {}; beta = {W}; "
                       "g = [Y]; }\n  horizon 1;\n}")
                  .find("references 'Y', which is not in alpha"),
              std::string::npos);
    EXPECT_EQ(error_of("system {\n  exogenous W: brownian;\n  process X { init = constant(0); alpha = {}; beta = {W}; "
                       "g = [1]; }\n}"),
              "missing 'horizon'");
    EXPECT_NE(error_of(std::string(minimal) + " extra").find("trailing input"), std::string::npos);
    EXPECT_NE(error_of("system {\n  exogenous N: poisson(0);\n  process X { init = constant(0); alpha = {}; beta = {N}; "
                       "g = [1]; }\n  horizon 1;\n}")
                  .find("poisson rate"),
              std::string::npos);
    EXPECT_TRUE(error_of(minimal).empty());
}

TEST(Model, DivisionRaisesGrowthWarning) {
    const auto sys = parse_model(R"(system {
  exogenous W: brownian;
  process X { init = constant(1); alpha = {X}; beta = {W}; g = [1 / X]; }
  horizon 1;
})");
    ASSERT_EQ(sys.warnings.size(), 1u);
    EXPECT_NE(sys.warnings[0].find("3:"), std::string::npos);
}

TEST(SdeGraph, AugmentedExampleEdges) {
    const auto g = graph_of_sdes(parse_model(fixtures::example1));
    EXPECT_EQ(g.size(), 10u);
    EXPECT_EQ(g.directed(g.index("W"), g.index("X1")), Dependence::adapted);
    EXPECT_EQ(g.directed(g.index("X3"), g.index("X1")), Dependence::predictable);
    EXPECT_EQ(g.directed(g.index("X2"), g.index("X4")), Dependence::adapted);
    EXPECT_EQ(g.directed(g.index("X1^0"), g.index("X1")), Dependence::predictable);
    EXPECT_FALSE(g.directed(g.index("X1"), g.index("X1")));
    EXPECT_EQ(g.node(g.index("X1^0")).initial_of, "X1");
}

TEST(Solvability, ExampleIsSolvable) {
    const auto rep = check_unique_solvability(parse_model(fixtures::example1));
    EXPECT_TRUE(rep.solvable);
    ASSERT_EQ(rep.order.size(), 2u);
    EXPECT_EQ(rep.order[1], std::vector<std::string>{"X4"});
}

TEST(Solvability, MutatedExampleGivesWitness) {
    const auto sys = parse_model(fixtures::example1_mutated);
    const auto rep = check_unique_solvability(sys);
    EXPECT_FALSE(rep.solvable);
    EXPECT_EQ(rep.witness_process, "X3");
    EXPECT_EQ(rep.witness_set, std::vector<std::string>{"X2"});
    EXPECT_THROW(induced_dscm_graph(sys), UnsolvableSystem);
}

TEST(Solvability, IntegratingAgainstUpstreamProcessIsFine) {
    const auto sys = parse_model(fixtures::chain);
    EXPECT_TRUE(check_unique_solvability(sys).solvable);
    auto rep = check_unique_solvability(parse_model(R"(system {
  exogenous W: brownian;
  process X { init = constant(0); alpha = {Y}; beta = {W}; g = [Y]; }
  process Y { init = constant(0); alpha = {}; beta = {X}; g = [1]; }
  horizon 1;
})"));
    EXPECT_FALSE(rep.solvable);
    EXPECT_EQ(rep.witness_process, "Y");
}

TEST(Intervention, GraphAndSystemCommuteOnExample) {
    const auto sys = parse_model(fixtures::example1);
    for (const auto& targets : std::vector<std::vector<std::string>>{{"X1"}, {"X2"}, {"X2", "X4"}, {"X1", "X2", "X3"}}) {
        const auto lhs = induced_dscm_graph(intervene_sde(sys, targets));
        const auto rhs = intervene_graph(induced_dscm_graph(sys), targets);
        EXPECT_EQ(lhs.canonical_edges(), rhs.canonical_edges());
    }
}

TEST(Intervention, GraphAndSystemCommuteOnRandomSystems) {
    std::mt19937_64 rng(22);
    for (int i = 0; i < 200; ++i) {
        const auto sys = random::random_solvable_system(rng);
        const auto names = sys.process_names();
        std::vector<std::string> targets;
        for (std::size_t k = 0; k < names.size(); ++k)
            if ((i >> k) & 1) targets.push_back(names[k]);
        const auto lhs = induced_dscm_graph(intervene_sde(sys, targets));
        const auto rhs = intervene_graph(induced_dscm_graph(sys), targets);
        ASSERT_EQ(lhs.canonical_edges(), rhs.canonical_edges()) << print_model(sys);
    }
}

TEST(Intervention, RestoresSolvability) {
    const auto sys = parse_model(fixtures::example1_mutated);
    EXPECT_TRUE(check_unique_solvability(intervene_sde(sys, {"X2"})).solvable);
    EXPECT_THROW(intervene_sde(sys, {"W"}), InvalidArgument);
    const auto g = induced_dscm_graph(parse_model(fixtures::example1));
    EXPECT_THROW(intervene_graph(g, std::vector<std::string>{"Q"}), UnknownNode);
}

TEST(ModelFiles, MatchLibraryFixtures) {
    const std::string dir = DSCM_SOURCE_DIR "/models/";
    EXPECT_EQ(parse_model(read_file(dir + "example1.dscm")), parse_model(fixtures::example1));
    EXPECT_EQ(parse_model(read_file(dir + "example1_mutated.dscm")), parse_model(fixtures::example1_mutated));
    EXPECT_EQ(parse_model(read_file(dir + "example1_linear.dscm")), parse_model(fixtures::example1_linear));
    EXPECT_EQ(parse_model(read_file(dir + "chain.dscm")), parse_model(fixtures::chain));
    EXPECT_EQ(parse_model(read_file(dir + "ornstein_uhlenbeck.dscm")), parse_model(fixtures::ornstein_uhlenbeck));
    EXPECT_EQ(parse_model(read_file(dir + "poisson_counter.dscm")), parse_model(fixtures::poisson_counter));
}
