#pragma once

// Seeded generators of random graphs, systems and split times for property
// sweeps.

#include <algorithm>
#include <random>
#include <string>
#include <vector>

#include "dscm/dmg.hpp"
#include "dscm/model.hpp"
#include "dscm/sde_graph.hpp"
#include "dscm/time_ops.hpp"

namespace dscm::random {

/// DMG on nodes V0..V{n-1}: each ordered pair gets a directed edge with
/// probability p_dir, each unordered pair a bidirected edge with p_bi.
inline Dmg random_dmg(std::mt19937_64& rng, std::size_t n, double p_dir, double p_bi) {
    std::bernoulli_distribution dir(p_dir), bi(p_bi), adapted(0.5);
    Dmg g;
    for (std::size_t i = 0; i < n; ++i) g.add_node("V" + std::to_string(i));
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j)
            if (i != j && dir(rng)) g.add_directed(i, j, adapted(rng) ? Dependence::adapted : Dependence::predictable);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j)
            if (bi(rng)) g.add_bidirected(i, j, adapted(rng) ? Dependence::adapted : Dependence::predictable);
    return g;
}

/// Every DMG on n nodes whose edge set is a subset of size <= max_edges of
/// the n(n-1) directed and n(n-1)/2 bidirected slots. Calls f(g).
template <class F>
void for_each_small_dmg(std::size_t n, std::size_t max_edges, F&& f) {
    struct Slot {
        EdgeKind kind;
        std::size_t a, b;
    };
    std::vector<Slot> slots;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j)
            if (i != j) slots.push_back({EdgeKind::directed, i, j});
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j) slots.push_back({EdgeKind::bidirected, i, j});
    std::vector<std::size_t> pick;
    auto emit = [&]() {
        Dmg g;
        for (std::size_t i = 0; i < n; ++i) g.add_node("V" + std::to_string(i));
        for (auto s : pick) g.add_edge(slots[s].a, slots[s].b, slots[s].kind, Dependence::predictable);
        f(g);
    };
    auto rec = [&](auto&& self, std::size_t start) -> void {
        emit();
        if (pick.size() == max_edges) return;
        for (std::size_t s = start; s < slots.size(); ++s) {
            pick.push_back(s);
            self(self, s + 1);
            pick.pop_back();
        }
    };
    rec(rec, 0);
}

/// Model text of a random system with 1-5 processes P1..Pn and 1-3 drivers.
/// The system may be unsolvable.
inline std::string random_model_text(std::mt19937_64& rng) {
    std::uniform_int_distribution<int> n_proc(1, 5), n_drv(1, 3), kind(0, 2);
    std::bernoulli_distribution coin(0.35), markov(0.5), normal_init(0.5);
    const int np = n_proc(rng), nd = n_drv(rng);
    std::vector<std::string> procs, drivers;
    std::string text = "system {\n";
    for (int j = 0; j < nd; ++j) {
        drivers.push_back("D" + std::to_string(j + 1));
        static const char* kinds[] = {"brownian", "poisson(1.5)", "time"};
        text += "  exogenous " + drivers.back() + ": " + kinds[kind(rng)] + ";\n";
    }
    for (int i = 0; i < np; ++i) procs.push_back("P" + std::to_string(i + 1));
    for (const auto& v : procs) {
        std::vector<std::string> alpha, beta;
        for (const auto& u : procs)
            if (coin(rng)) alpha.push_back(u);
        for (const auto& d : drivers)
            if (coin(rng)) beta.push_back(d);
        for (const auto& u : procs)
            if (u != v && coin(rng) && coin(rng)) beta.push_back(u);
        if (beta.empty()) beta.push_back(drivers.front());
        auto join = [](const std::vector<std::string>& s) {
            std::string out;
            for (const auto& x : s) out += (out.empty() ? "" : ", ") + x;
            return out;
        };
        std::string drift = "0.1";
        for (const auto& u : alpha) drift += " + 0.1 * " + u;
        std::vector<std::string> g(beta.size(), drift);
        text += "  process " + v + " {\n";
        text += std::string("    init = ") + (normal_init(rng) ? "normal(0, 1)" : "constant(0.5)") + ";\n";
        text += "    alpha = {" + join(alpha) + "};\n";
        text += "    beta = {" + join(beta) + "};\n";
        text += "    g = [" + join(g) + "];\n";
        if (markov(rng)) text += "    markov = true;\n";
        text += "  }\n";
    }
    text += "  horizon 1;\n}\n";
    return text;
}

/// A random uniquely solvable system.
inline SdeSystem random_solvable_system(std::mt19937_64& rng) {
    while (true) {
        auto sys = parse_model(random_model_text(rng));
        if (check_unique_solvability(sys).solvable) return sys;
    }
}

/// Up to max_size distinct split times in [0, horizon], drawn from a grid
/// of tenths and including the endpoints occasionally.
inline std::vector<TimePoint> random_tau(std::mt19937_64& rng, double horizon, std::size_t max_size) {
    std::uniform_int_distribution<std::size_t> size(0, max_size);
    std::uniform_int_distribution<int> tick(0, 10);
    std::vector<int> ticks;
    const std::size_t k = size(rng);
    while (ticks.size() < k) {
        const int t = tick(rng);
        if (std::find(ticks.begin(), ticks.end(), t) == ticks.end()) ticks.push_back(t);
    }
    std::sort(ticks.begin(), ticks.end());
    std::vector<TimePoint> tau;
    for (int t : ticks) {
        const double v = horizon * t / 10.0;
        tau.push_back({v, t == 0 ? "0" : t == 10 ? "T" : "t" + std::to_string(t)});
    }
    return tau;
}

}  // namespace dscm::random
