#pragma once

// Euler-Maruyama solver for systems of SDEs with Brownian, Poisson, time and
// constant drivers, and the adaptedness check built on it.
//
// Each path p draws its inputs from mt19937_64 seeded with (seed, p): the
// initial values in process order, then K increments per driver in driver
// order. Paths are therefore reproducible individually and independent of
// chunking.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <random>
#include <string>
#include <vector>

#include "dscm/dmg.hpp"
#include "dscm/expr.hpp"
#include "dscm/model.hpp"
#include "dscm/sde_graph.hpp"

namespace dscm {

enum class Scheme {
    euler_maruyama,
    anticipating,  // uses the increment of the next step; not adapted, for mutation tests
};

struct SimConfig {
    double dt = 1e-3;
    double horizon = 0.0;  // 0: take the system's horizon
    std::size_t n_paths = 1;
    std::uint64_t seed = 0;
    Scheme scheme = Scheme::euler_maruyama;
    bool retain_drivers = true;
    std::size_t record_stride = 1;  // store every m-th grid point (and the last)
    std::size_t chunk = 4096;
};

/// Driver increments and initial values for a set of paths.
struct Inputs {
    std::size_t n_paths = 0;
    std::size_t steps = 0;
    std::vector<std::vector<double>> init;       // [process][path]
    std::vector<std::vector<double>> increments;  // [driver][path * steps + k]
};

struct PathEnsemble {
    std::vector<double> grid;                // all grid times t_0..t_K
    std::vector<std::size_t> recorded;       // grid indices stored in `values`
    std::vector<std::string> processes;
    std::vector<std::vector<double>> values;  // [process][path * recorded.size() + r]
    std::vector<std::string> drivers;
    std::vector<std::vector<double>> driver_increments;  // [driver][path * K + k], if retained
    std::size_t n_paths = 0;
    std::uint64_t seed = 0;
    double dt = 0.0;

    std::size_t process_index(const std::string& name) const {
        for (std::size_t i = 0; i < processes.size(); ++i)
            if (processes[i] == name) return i;
        throw UnknownNode(name);
    }

    /// Position in `recorded` of the grid point at time t.
    std::size_t record_at(double t) const {
        const double k = t / dt;
        const auto ki = static_cast<std::size_t>(std::llround(k));
        if (std::abs(k - static_cast<double>(ki)) > 1e-6 || ki >= grid.size()) {
            throw InvalidArgument("time " + format_number(t) + " is not on the simulation grid");
        }
        auto it = std::lower_bound(recorded.begin(), recorded.end(), ki);
        if (it == recorded.end() || *it != ki) throw InvalidArgument("time " + format_number(t) + " was not recorded");
        return static_cast<std::size_t>(it - recorded.begin());
    }

    double at(std::size_t process, std::size_t path, std::size_t r) const {
        return values[process][path * recorded.size() + r];
    }

    /// Values of one process at one recorded time, across paths.
    std::vector<double> column(std::size_t process, std::size_t r) const {
        std::vector<double> out(n_paths);
        for (std::size_t p = 0; p < n_paths; ++p) out[p] = at(process, p, r);
        return out;
    }

    std::vector<double> column(const std::string& process, double t) const {
        return column(process_index(process), record_at(t));
    }
};

inline std::size_t grid_steps(double horizon, double dt) {
    if (!(dt > 0.0)) throw InvalidArgument("time step must be positive");
    if (!(horizon > 0.0)) throw InvalidArgument("horizon must be positive");
    const double k = horizon / dt;
    const auto ki = static_cast<std::size_t>(std::llround(k));
    if (ki == 0 || std::abs(k - static_cast<double>(ki)) > 1e-9 * std::max(1.0, k)) {
        throw InvalidArgument("horizon " + format_number(horizon) + " is not a multiple of dt " + format_number(dt));
    }
    return ki;
}

namespace detail {

inline std::mt19937_64 path_rng(std::uint64_t seed, std::size_t path) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(path), static_cast<std::uint32_t>(static_cast<std::uint64_t>(path) >> 32)};
    return std::mt19937_64(seq);
}

}  // namespace detail

/// Draws inputs for paths [first, first + count).
inline Inputs draw_inputs(const SdeSystem& sys, std::size_t steps, double dt, std::uint64_t seed, std::size_t first,
                          std::size_t count) {
    Inputs in;
    in.n_paths = count;
    in.steps = steps;
    in.init.assign(sys.processes.size(), std::vector<double>(count, 0.0));
    in.increments.assign(sys.drivers.size(), std::vector<double>(count * steps, 0.0));
    std::normal_distribution<double> normal(0.0, 1.0);
    const double sqdt = std::sqrt(dt);
    for (std::size_t p = 0; p < count; ++p) {
        auto rng = detail::path_rng(seed, first + p);
        for (std::size_t i = 0; i < sys.processes.size(); ++i) {
            const auto& d = sys.processes[i].init;
            in.init[i][p] = d.kind == Distribution::Kind::normal ? d.a + std::sqrt(d.b) * normal(rng) : d.a;
        }
        for (std::size_t j = 0; j < sys.drivers.size(); ++j) {
            const auto& drv = sys.drivers[j];
            double* inc = in.increments[j].data() + p * steps;
            switch (drv.kind) {
                case DriverSpec::Kind::brownian:
                    for (std::size_t k = 0; k < steps; ++k) inc[k] = sqdt * normal(rng);
                    break;
                case DriverSpec::Kind::poisson: {
                    std::poisson_distribution<long> pois(drv.param * dt);
                    for (std::size_t k = 0; k < steps; ++k) inc[k] = static_cast<double>(pois(rng));
                    break;
                }
                case DriverSpec::Kind::time:
                    for (std::size_t k = 0; k < steps; ++k) inc[k] = dt;
                    break;
                case DriverSpec::Kind::constant: break;
            }
        }
    }
    return in;
}

namespace detail {

struct CompiledProcess {
    std::size_t index = 0;
    std::vector<CompiledExpr> g;
    std::vector<std::string> inputs;      // slot -> variable name
    struct Integrator {
        bool endogenous = false;
        std::size_t index = 0;  // process or driver index
    };
    std::vector<Integrator> beta;
};

// Process indices in a topological order of the SCCs of G(D).
inline std::vector<std::size_t> solve_order(const SdeSystem& sys) {
    const Dmg g = graph_of_sdes(sys);
    std::vector<std::size_t> order;
    for (const auto& comp : scc_partition(g))
        for (auto v : comp)
            if (!g.node(v).exogenous()) order.push_back(v);  // process nodes come first in G(D)
    return order;
}

inline std::vector<CompiledProcess> compile(const SdeSystem& sys) {
    std::vector<CompiledProcess> out;
    for (auto v : solve_order(sys)) {
        const auto& p = sys.processes[v];
        CompiledProcess cp;
        cp.index = v;
        if (!p.intervened) {
            auto slot_of = [&](const std::string& name) {
                auto it = std::find(cp.inputs.begin(), cp.inputs.end(), name);
                if (it != cp.inputs.end()) return static_cast<int>(it - cp.inputs.begin());
                cp.inputs.push_back(name);
                return static_cast<int>(cp.inputs.size() - 1);
            };
            for (const auto& e : p.g) cp.g.emplace_back(e, slot_of);
            for (const auto& b : p.beta) {
                CompiledProcess::Integrator it;
                if (sys.process(b)) {
                    it.endogenous = true;
                    for (std::size_t i = 0; i < sys.processes.size(); ++i)
                        if (sys.processes[i].name == b) it.index = i;
                } else {
                    for (std::size_t i = 0; i < sys.drivers.size(); ++i)
                        if (sys.drivers[i].name == b) it.index = i;
                }
                cp.beta.push_back(it);
            }
        }
        out.push_back(std::move(cp));
    }
    return out;
}

}  // namespace detail

/// Integrates a block of paths given their inputs. Writes the recorded grid
/// values into `ens` rows [first, first + in.n_paths).
inline void integrate(const SdeSystem& sys, const Inputs& in, double dt, Scheme scheme, std::size_t first,
                      PathEnsemble& ens) {
    const auto procs = detail::compile(sys);
    const std::size_t n = in.n_paths, steps = in.steps, np = sys.processes.size(), nd = sys.drivers.size();
    const std::size_t nrec = ens.recorded.size();

    std::vector<std::vector<double>> cur(np, std::vector<double>(n)), next(np, std::vector<double>(n));
    std::vector<std::vector<double>> level(nd, std::vector<double>(n, 0.0));
    std::vector<double> tvec(n), term(n), dh(n);
    std::vector<std::vector<double>> scratch;
    for (std::size_t i = 0; i < np; ++i) {
        const auto& p = sys.processes[i];
        for (std::size_t q = 0; q < n; ++q) cur[i][q] = p.intervened ? *p.intervened : in.init[i][q];
    }
    for (std::size_t j = 0; j < nd; ++j)
        if (sys.drivers[j].kind == DriverSpec::Kind::constant) std::fill(level[j].begin(), level[j].end(), sys.drivers[j].param);

    std::size_t rec = 0;
    auto record = [&](std::size_t k) {
        if (rec < nrec && ens.recorded[rec] == k) {
            for (std::size_t i = 0; i < np; ++i)
                for (std::size_t q = 0; q < n; ++q) ens.values[i][(first + q) * nrec + rec] = cur[i][q];
            ++rec;
        }
    };
    auto name_slot = [&](const std::string& name) -> const double* {
        if (name == time_symbol) return tvec.data();
        for (std::size_t i = 0; i < np; ++i)
            if (sys.processes[i].name == name) return cur[i].data();
        for (std::size_t j = 0; j < nd; ++j)
            if (sys.drivers[j].name == name) return level[j].data();
        throw UnknownNode(name);
    };
    std::vector<std::vector<const double*>> input_ptrs;
    for (const auto& cp : procs) {
        std::vector<const double*> ptrs;
        for (const auto& name : cp.inputs) ptrs.push_back(name_slot(name));
        input_ptrs.push_back(std::move(ptrs));
    }

    record(0);
    for (std::size_t k = 0; k < steps; ++k) {
        std::fill(tvec.begin(), tvec.end(), static_cast<double>(k) * dt);
        const std::size_t kin = scheme == Scheme::anticipating ? k + 1 : k;
        for (std::size_t c = 0; c < procs.size(); ++c) {
            const auto& cp = procs[c];
            const auto v = cp.index;
            auto& out = next[v];
            std::copy(cur[v].begin(), cur[v].end(), out.begin());
            for (std::size_t j = 0; j < cp.g.size(); ++j) {
                const auto& b = cp.beta[j];
                if (b.endogenous) {
                    for (std::size_t q = 0; q < n; ++q) dh[q] = next[b.index][q] - cur[b.index][q];
                } else if (kin < steps) {
                    const double* inc = in.increments[b.index].data();
                    for (std::size_t q = 0; q < n; ++q) dh[q] = inc[q * steps + kin];
                } else {
                    std::fill(dh.begin(), dh.end(), 0.0);
                }
                cp.g[j].eval(input_ptrs[c], n, term.data(), scratch);
                for (std::size_t q = 0; q < n; ++q) out[q] += term[q] * dh[q];
            }
            for (std::size_t q = 0; q < n; ++q) {
                if (!std::isfinite(out[q])) {
                    throw NumericalError("non-finite value of '" + sys.processes[v].name + "' at t=" +
                                         format_number(static_cast<double>(k + 1) * dt));
                }
            }
        }
        for (std::size_t j = 0; j < nd; ++j) {
            if (sys.drivers[j].kind == DriverSpec::Kind::constant) continue;
            const double* inc = in.increments[j].data();
            for (std::size_t q = 0; q < n; ++q) level[j][q] += inc[q * steps + k];
        }
        std::swap(cur, next);
        // `input_ptrs` point into the old `cur`; rebind after the swap.
        for (std::size_t c = 0; c < procs.size(); ++c)
            for (std::size_t s = 0; s < procs[c].inputs.size(); ++s) input_ptrs[c][s] = name_slot(procs[c].inputs[s]);
        record(k + 1);
    }
}

namespace detail {

inline PathEnsemble empty_ensemble(const SdeSystem& sys, const SimConfig& cfg, std::size_t steps, double dt) {
    PathEnsemble ens;
    ens.n_paths = cfg.n_paths;
    ens.seed = cfg.seed;
    ens.dt = dt;
    for (std::size_t k = 0; k <= steps; ++k) ens.grid.push_back(static_cast<double>(k) * dt);
    const std::size_t stride = std::max<std::size_t>(1, cfg.record_stride);
    for (std::size_t k = 0; k <= steps; k += stride) ens.recorded.push_back(k);
    if (ens.recorded.back() != steps) ens.recorded.push_back(steps);
    ens.processes = sys.process_names();
    for (const auto& d : sys.drivers) ens.drivers.push_back(d.name);
    ens.values.assign(sys.processes.size(), std::vector<double>(cfg.n_paths * ens.recorded.size()));
    if (cfg.retain_drivers) ens.driver_increments.assign(sys.drivers.size(), std::vector<double>(cfg.n_paths * steps));
    return ens;
}

}  // namespace detail

/// Solves `sys` on the uniform grid k * dt, k = 0..K. Integrands are
/// evaluated at t_k (left limits) and multiplied by the increment over
/// [t_k, t_k+1); endogenous integrators are advanced first.
inline PathEnsemble simulate(const SdeSystem& sys, const SimConfig& cfg) {
    const auto rep = check_unique_solvability(sys);
    if (!rep.solvable) throw UnsolvableSystem("system is not uniquely solvable (process '" + rep.witness_process + "')");
    if (cfg.n_paths == 0) throw InvalidArgument("n_paths must be at least 1");
    const double horizon = cfg.horizon > 0.0 ? cfg.horizon : sys.horizon;
    const std::size_t steps = grid_steps(horizon, cfg.dt);
    auto ens = detail::empty_ensemble(sys, cfg, steps, cfg.dt);
    const std::size_t chunk = std::max<std::size_t>(1, cfg.chunk);
    for (std::size_t first = 0; first < cfg.n_paths; first += chunk) {
        const std::size_t count = std::min(chunk, cfg.n_paths - first);
        const auto in = draw_inputs(sys, steps, cfg.dt, cfg.seed, first, count);
        integrate(sys, in, cfg.dt, cfg.scheme, first, ens);
        if (cfg.retain_drivers) {
            for (std::size_t j = 0; j < sys.drivers.size(); ++j)
                std::copy(in.increments[j].begin(), in.increments[j].end(),
                          ens.driver_increments[j].begin() + static_cast<std::ptrdiff_t>(first * steps));
        }
    }
    return ens;
}

/// Simulates twice from the same seed, the second time with every driver
/// increment after t_cut redrawn. True iff all process values at grid times
/// <= t_cut agree exactly.
inline bool check_adaptedness(const SdeSystem& sys, const SimConfig& cfg, double t_cut) {
    if (!check_unique_solvability(sys).solvable) throw UnsolvableSystem("system is not uniquely solvable");
    const double horizon = cfg.horizon > 0.0 ? cfg.horizon : sys.horizon;
    const std::size_t steps = grid_steps(horizon, cfg.dt);
    const double kc = t_cut / cfg.dt;
    const auto k_cut = static_cast<std::size_t>(std::llround(kc));
    if (std::abs(kc - static_cast<double>(k_cut)) > 1e-6 || k_cut > steps) {
        throw InvalidArgument("cut time " + format_number(t_cut) + " is not on the grid");
    }
    SimConfig full = cfg;
    full.record_stride = 1;
    full.retain_drivers = false;
    auto a = detail::empty_ensemble(sys, full, steps, cfg.dt);
    auto b = a;
    const auto in = draw_inputs(sys, steps, cfg.dt, cfg.seed, 0, cfg.n_paths);
    auto other = draw_inputs(sys, steps, cfg.dt, cfg.seed ^ 0x9e3779b97f4a7c15ULL, 0, cfg.n_paths);
    Inputs mixed = in;
    for (std::size_t j = 0; j < mixed.increments.size(); ++j)
        for (std::size_t p = 0; p < cfg.n_paths; ++p)
            for (std::size_t k = k_cut; k < steps; ++k) mixed.increments[j][p * steps + k] = other.increments[j][p * steps + k];
    integrate(sys, in, cfg.dt, cfg.scheme, 0, a);
    integrate(sys, mixed, cfg.dt, cfg.scheme, 0, b);
    for (std::size_t i = 0; i < a.values.size(); ++i)
        for (std::size_t p = 0; p < cfg.n_paths; ++p)
            for (std::size_t k = 0; k <= k_cut; ++k)
                if (a.values[i][p * a.recorded.size() + k] != b.values[i][p * b.recorded.size() + k]) return false;
    return true;
}

}  // namespace dscm
