#pragma once

// Statistical tests on simulated ensembles: a partial-correlation CI test
// across paths and a Granger-style local-independence test. Both assume
// linear-Gaussian structure for exact calibration.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include <boost/math/distributions/fisher_f.hpp>
#include <boost/math/distributions/normal.hpp>

#include "dscm/error.hpp"
#include "dscm/simulate.hpp"

namespace dscm {

/// An evaluation X_process(time).
struct Eval {
    std::string process;
    double time = 0.0;
    friend bool operator==(const Eval&, const Eval&) = default;
};

struct CiResult {
    double statistic = 0.0;  // largest |z| over the tested pairs
    double p_value = 1.0;    // Bonferroni-adjusted
    bool independent = true;
};

/// Fisher-z test of partial correlation zero given `cond`, on a covariance
/// matrix estimated from n samples.
inline std::pair<double, double> fisher_z(const Eigen::MatrixXd& cov, std::size_t n, std::size_t i, std::size_t j,
                                          const std::vector<std::size_t>& cond) {
    std::vector<std::size_t> idx{i, j};
    idx.insert(idx.end(), cond.begin(), cond.end());
    const auto m = static_cast<Eigen::Index>(idx.size());
    Eigen::MatrixXd sub(m, m);
    for (Eigen::Index a = 0; a < m; ++a)
        for (Eigen::Index b = 0; b < m; ++b) sub(a, b) = cov(static_cast<Eigen::Index>(idx[a]), static_cast<Eigen::Index>(idx[b]));
    Eigen::LDLT<Eigen::MatrixXd> ldlt(sub);
    const double scale = sub.diagonal().cwiseAbs().maxCoeff();
    const auto d = ldlt.vectorD();
    if (ldlt.info() != Eigen::Success || !(scale > 0.0) || d.minCoeff() <= 1e-12 * scale) {
        throw NumericalError("singular covariance in partial-correlation test");
    }
    const Eigen::MatrixXd prec = ldlt.solve(Eigen::MatrixXd::Identity(m, m));
    double r = -prec(0, 1) / std::sqrt(prec(0, 0) * prec(1, 1));
    r = std::clamp(r, -1.0 + 1e-15, 1.0 - 1e-15);
    const double dof = static_cast<double>(n) - static_cast<double>(cond.size()) - 3.0;
    if (dof <= 0.0) throw NumericalError("too few paths for the conditioning set");
    const double z = std::atanh(r) * std::sqrt(dof);
    const boost::math::normal_distribution<double> std_normal;
    const double p = 2.0 * boost::math::cdf(boost::math::complement(std_normal, std::abs(z)));
    return {z, p};
}

/// Sample covariance of the columns of `data` (rows are paths).
inline Eigen::MatrixXd sample_covariance(const Eigen::MatrixXd& data) {
    const Eigen::RowVectorXd mean = data.colwise().mean();
    const Eigen::MatrixXd centred = data.rowwise() - mean;
    return (centred.transpose() * centred) / static_cast<double>(data.rows() - 1);
}

/// Paths x evaluations matrix.
inline Eigen::MatrixXd evaluation_matrix(const PathEnsemble& ens, const std::vector<Eval>& evals) {
    Eigen::MatrixXd m(static_cast<Eigen::Index>(ens.n_paths), static_cast<Eigen::Index>(evals.size()));
    for (std::size_t c = 0; c < evals.size(); ++c) {
        const auto proc = ens.process_index(evals[c].process);
        const auto r = ens.record_at(evals[c].time);
        for (std::size_t p = 0; p < ens.n_paths; ++p) m(static_cast<Eigen::Index>(p), static_cast<Eigen::Index>(c)) = ens.at(proc, p, r);
    }
    return m;
}

/// Covariance of a fixed list of evaluations, for running many CI queries
/// against one ensemble.
class CiOracle {
public:
    CiOracle(const PathEnsemble& ens, std::vector<Eval> evals)
        : evals_(std::move(evals)), n_(ens.n_paths), cov_(sample_covariance(evaluation_matrix(ens, evals_))) {}

    const std::vector<Eval>& evals() const { return evals_; }

    std::size_t index(const Eval& e) const {
        for (std::size_t i = 0; i < evals_.size(); ++i)
            if (evals_[i] == e) return i;
        throw InvalidArgument("evaluation " + e.process + "(" + format_number(e.time) + ") is not in the oracle");
    }

    /// Sets of evaluation indices. Members of c are dropped from a and b;
    /// a shared member of a and b makes the sets dependent. Pairwise p-values
    /// are combined by Bonferroni.
    CiResult test(std::vector<std::size_t> a, std::vector<std::size_t> b, const std::vector<std::size_t>& c,
                  double alpha = 0.01) const {
        auto drop_c = [&](std::vector<std::size_t>& s) {
            s.erase(std::remove_if(s.begin(), s.end(),
                                   [&](std::size_t x) { return std::find(c.begin(), c.end(), x) != c.end(); }),
                    s.end());
        };
        drop_c(a);
        drop_c(b);
        CiResult res;
        for (auto x : a) {
            if (std::find(b.begin(), b.end(), x) != b.end()) {
                res.statistic = std::numeric_limits<double>::infinity();
                res.p_value = 0.0;
                res.independent = false;
                return res;
            }
        }
        if (a.empty() || b.empty()) return res;
        double min_p = 1.0;
        for (auto x : a)
            for (auto y : b) {
                const auto [z, p] = fisher_z(cov_, n_, x, y, c);
                res.statistic = std::max(res.statistic, std::abs(z));
                min_p = std::min(min_p, p);
            }
        res.p_value = std::min(1.0, min_p * static_cast<double>(a.size() * b.size()));
        res.independent = res.p_value > alpha;
        return res;
    }

private:
    std::vector<Eval> evals_;
    std::size_t n_;
    Eigen::MatrixXd cov_;
};

/// Tests X_a _||_ X_b | X_c across paths of the ensemble.
inline CiResult ci_test(const PathEnsemble& ens, const std::vector<Eval>& a, const std::vector<Eval>& b,
                        const std::vector<Eval>& c, double alpha = 0.01) {
    std::vector<Eval> all;
    auto add = [&](const std::vector<Eval>& s) {
        std::vector<std::size_t> idx;
        for (const auto& e : s) {
            auto it = std::find(all.begin(), all.end(), e);
            if (it == all.end()) {
                all.push_back(e);
                idx.push_back(all.size() - 1);
            } else {
                idx.push_back(static_cast<std::size_t>(it - all.begin()));
            }
        }
        return idx;
    };
    const auto ia = add(a), ib = add(b), ic = add(c);
    return CiOracle(ens, all).test(ia, ib, ic, alpha);
}

struct LocalIndependenceResult {
    bool holds = true;
    double score = 0.0;    // largest F statistic
    double p_value = 1.0;  // Bonferroni-adjusted over targets and test times
};

/// Grid indices used as test times: `count` points spread over the grid,
/// leaving room for `lags` history values and one forward increment.
inline std::vector<std::size_t> default_test_indices(const PathEnsemble& ens, std::size_t lags, std::size_t count = 5) {
    const std::size_t steps = ens.grid.size() - 1;
    std::vector<std::size_t> out;
    if (steps < lags + 1) throw InvalidArgument("grid too short for the requested number of lags");
    const std::size_t lo = lags - 1, hi = steps - 1;
    for (std::size_t i = 0; i < count; ++i) {
        const std::size_t k = lo + (hi - lo) * (i + 1) / (count + 1);
        if (out.empty() || out.back() != k) out.push_back(k);
    }
    return out;
}

namespace detail {

inline double rss(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, Eigen::Index* rank) {
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(x);
    qr.setThreshold(1e-10);
    *rank = qr.rank();
    const Eigen::VectorXd beta = qr.solve(y);
    return (y - x * beta).squaredNorm();
}

}  // namespace detail

/// Granger-style test of X_a -/-> X_b | X_c. For each target b and test
/// index k, the increment X_b[k+1] - X_b[k] is regressed across paths on an
/// intercept and the last `lags` grid values of B and C (restricted), and
/// additionally of A (full); the A block is tested with an F-test. The
/// statement holds iff no Bonferroni-adjusted p-value falls below alpha.
/// Requires every grid point to be recorded.
inline LocalIndependenceResult local_independence_test(const PathEnsemble& ens, std::vector<std::string> a,
                                                       const std::vector<std::string>& b,
                                                       const std::vector<std::string>& c, std::size_t lags = 2,
                                                       double alpha = 0.01, std::vector<std::size_t> test_indices = {}) {
    if (b.empty()) throw InvalidArgument("target set must be non-empty");
    if (ens.recorded.size() != ens.grid.size()) throw InvalidArgument("local independence test needs the full grid");
    if (lags == 0) throw InvalidArgument("at least one lag is required");
    LocalIndependenceResult res;
    for (const auto& x : a) {
        if (std::find(b.begin(), b.end(), x) != b.end()) {
            res.holds = false;
            res.score = std::numeric_limits<double>::infinity();
            res.p_value = 0.0;
            return res;
        }
    }
    a.erase(std::remove_if(a.begin(), a.end(), [&](const std::string& x) { return std::find(c.begin(), c.end(), x) != c.end(); }),
            a.end());
    if (a.empty()) return res;
    if (test_indices.empty()) test_indices = default_test_indices(ens, lags);

    std::vector<std::size_t> base_procs, a_procs;
    for (const auto& x : b) base_procs.push_back(ens.process_index(x));
    for (const auto& x : c) base_procs.push_back(ens.process_index(x));
    for (const auto& x : a) a_procs.push_back(ens.process_index(x));

    const auto n = static_cast<Eigen::Index>(ens.n_paths);
    const std::size_t nrec = ens.recorded.size();
    double min_p = 1.0;
    std::size_t tests = 0;
    for (const auto& target : b) {
        const auto tb = ens.process_index(target);
        for (auto k : test_indices) {
            if (k + 1 >= nrec || k + 1 < lags) throw InvalidArgument("test index outside the usable grid");
            const auto pr = static_cast<Eigen::Index>(1 + base_procs.size() * lags);
            const auto pf = pr + static_cast<Eigen::Index>(a_procs.size() * lags);
            Eigen::MatrixXd xf(n, pf);
            Eigen::VectorXd y(n);
            for (Eigen::Index p = 0; p < n; ++p) {
                const auto row = static_cast<std::size_t>(p) * nrec;
                y(p) = ens.values[tb][row + k + 1] - ens.values[tb][row + k];
                Eigen::Index col = 0;
                xf(p, col++) = 1.0;
                for (auto proc : base_procs)
                    for (std::size_t l = 0; l < lags; ++l) xf(p, col++) = ens.values[proc][row + k - l];
                for (auto proc : a_procs)
                    for (std::size_t l = 0; l < lags; ++l) xf(p, col++) = ens.values[proc][row + k - l];
            }
            Eigen::Index rank_r = 0, rank_f = 0;
            const double rss_r = detail::rss(xf.leftCols(pr), y, &rank_r);
            const double rss_f = detail::rss(xf, y, &rank_f);
            if (rank_f < pf) throw NumericalError("collinear regressors in local independence test");
            const double q = static_cast<double>(pf - pr);
            const double dof = static_cast<double>(n - pf);
            if (dof <= 0.0) throw NumericalError("too few paths for the regression");
            const double f = std::max(0.0, ((rss_r - rss_f) / q) / (rss_f / dof));
            const boost::math::fisher_f_distribution<double> dist(q, dof);
            const double p = boost::math::cdf(boost::math::complement(dist, f));
            res.score = std::max(res.score, f);
            min_p = std::min(min_p, p);
            ++tests;
        }
    }
    res.p_value = std::min(1.0, min_p * static_cast<double>(tests));
    res.holds = res.p_value > alpha;
    return res;
}

}  // namespace dscm
