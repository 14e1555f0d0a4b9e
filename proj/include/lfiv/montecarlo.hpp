#ifndef LFIV_MONTECARLO_HPP
#define LFIV_MONTECARLO_HPP

// Monte Carlo harness for the simulation design: pointwise behaviour of
// phi-hat on a fixed grid and the sampling/testing behaviour of beta-hat.
// Every replication draws from its own seed stream, so reports are
// identical for any worker count.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <optional>
#include <utility>
#include <vector>

#include "lfiv/dgp.hpp"
#include "lfiv/estimators.hpp"
#include "lfiv/inference.hpp"
#include "lfiv/parallel.hpp"

namespace lfiv {

struct GridSpec {
    double lo = -5.0;
    double hi = 5.0;
    Index points = 200;

    MatrixXd matrix() const {
        MatrixXd g(points, 1);
        g.col(0) = VectorXd::LinSpaced(points, lo, hi);
        return g;
    }
    double length() const { return hi - lo; }
};

struct PointwiseBand {
    VectorXd grid, truth, mean, median, q05, q95, mse;
};

struct MonteCarloReport {
    double m_multiplier = 1.0;
    Index n = 0;
    int replications = 0;  // successful
    int failures = 0;
    double mean_m_used = 0.0;

    // phi study; isb/imse are grid means, *_scaled multiply by the interval length
    double imse = 0.0, isb = 0.0, imse_scaled = 0.0, isb_scaled = 0.0;
    PointwiseBand pointwise;

    // beta study
    double beta_mean = 0.0, beta_sd = 0.0;
    std::map<double, double> rejections;  // level -> rate under beta_null = beta0
    std::vector<std::pair<double, double>> power_curve;  // (beta_null, rate at power_level)
};

/// Linear-interpolation sample quantile (type 7).
inline double quantile(std::vector<double> v, double prob) {
    if (v.empty()) return std::numeric_limits<double>::quiet_NaN();
    std::sort(v.begin(), v.end());
    const double pos = prob * static_cast<double>(v.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const auto hi = std::min(lo + 1, v.size() - 1);
    const double frac = pos - static_cast<double>(lo);
    return v[lo] + frac * (v[hi] - v[lo]);
}

/// Pointwise summaries of an (replications x grid) matrix of estimates.
inline PointwiseBand aggregate_band(const MatrixXd& est, const VectorXd& grid, const VectorXd& truth) {
    PointwiseBand b;
    const Index C = grid.size();
    b.grid = grid;
    b.truth = truth;
    b.mean = est.colwise().mean().transpose();
    b.median.resize(C);
    b.q05.resize(C);
    b.q95.resize(C);
    b.mse.resize(C);
    for (Index c = 0; c < C; ++c) {
        std::vector<double> col(est.col(c).data(), est.col(c).data() + est.rows());
        b.median(c) = quantile(col, 0.5);
        b.q05(c) = quantile(col, 0.05);
        b.q95(c) = quantile(col, 0.95);
        b.mse(c) = (est.col(c).array() - truth(c)).square().mean();
    }
    return b;
}

struct McPhiConfig {
    int M = 1000;
    Index n = 200;
    double beta0 = 1.0;
    std::vector<double> multipliers{0.5, 1.0, 2.0};
    GridSpec grid;
    std::uint64_t master_seed = 1;
    FitConfig fit;
    int threads = 1;
    bool identical_replications = false;  // every replication reuses stream 0 (diagnostic)
};

/// Fully nonparametric study: Y - beta0 X is the response.
inline std::vector<MonteCarloReport> run_mc_phi(const McPhiConfig& cfg) {
    if (cfg.M < 2) throw ConfigError("Monte Carlo needs M >= 2");
    const MatrixXd grid = cfg.grid.matrix();
    const std::size_t K = cfg.multipliers.size();
    std::vector<std::optional<std::vector<PhiEstimate>>> reps(static_cast<std::size_t>(cfg.M));

    parallel_for(cfg.M, cfg.threads, [&](long r) {
        const auto stream = cfg.identical_replications ? 0u : static_cast<std::uint64_t>(r);
        Dataset full = generate({cfg.n, cfg.beta0, derive_seed(cfg.master_seed, stream)});
        Dataset d;
        d.y = full.y - cfg.beta0 * full.x.col(0);
        d.x = MatrixXd(d.y.size(), 0);
        d.z = std::move(full.z);
        d.w = std::move(full.w);
        try {
            const GramMatrices g = build_gram(d, cfg.fit.kernel, cfg.fit.measure, cfg.fit.lf);
            reps[static_cast<std::size_t>(r)] = fit_phi_on_gram(g, d, d.y, cfg.fit.lf, grid, cfg.multipliers);
        } catch (const Error& e) {
            if (e.kind() == ErrorKind::config) throw;
        }
    });

    std::vector<MonteCarloReport> out;
    VectorXd truth = grid.col(0).unaryExpr([](double z) { return dgp_phi(z); });
    for (std::size_t k = 0; k < K; ++k) {
        MonteCarloReport rep;
        rep.m_multiplier = cfg.multipliers[k];
        rep.n = cfg.n;
        std::vector<const PhiEstimate*> ok;
        for (const auto& r : reps)
            if (r) ok.push_back(&(*r)[k]);
        rep.replications = static_cast<int>(ok.size());
        rep.failures = cfg.M - rep.replications;
        if (ok.empty()) {
            out.push_back(rep);
            continue;
        }
        MatrixXd est(static_cast<Index>(ok.size()), grid.rows());
        double msum = 0.0;
        for (std::size_t i = 0; i < ok.size(); ++i) {
            est.row(static_cast<Index>(i)) = ok[i]->at_grid->transpose();
            msum += ok[i]->m_used;
        }
        rep.mean_m_used = msum / static_cast<double>(ok.size());
        rep.pointwise = aggregate_band(est, grid.col(0), truth);
        const VectorXd raw_mean = est.colwise().mean().transpose();
        rep.isb = (raw_mean - truth).squaredNorm() / static_cast<double>(grid.rows());
        rep.imse = rep.pointwise.mse.mean();
        rep.isb_scaled = rep.isb * cfg.grid.length();
        rep.imse_scaled = rep.imse * cfg.grid.length();
        out.push_back(std::move(rep));
    }
    return out;
}

struct McBetaConfig {
    int M = 10000;
    Index n = 200;
    double beta0 = 1.0;
    std::vector<double> multipliers{1.0, 2.0};
    std::vector<double> beta_null_grid{0.6, 0.7, 0.8, 0.9, 1.0, 1.1, 1.2, 1.3, 1.4};
    std::vector<double> levels{0.05, 0.10};
    double power_level = 0.05;
    std::uint64_t master_seed = 1;
    FitConfig fit;
    int threads = 1;
};

/// One replication of the beta study: estimates on the simulated sample and
/// on its single warp-speed bootstrap resample, per multiplier.
struct BetaReplication {
    bool ok = false;
    std::vector<double> beta_hat;
    std::vector<double> beta_star;
    std::vector<int> m_used;
    std::vector<int> m_used_star;
};

struct McBetaResult {
    std::vector<MonteCarloReport> reports;  // one per multiplier
    std::vector<BetaReplication> replications;
};

inline BetaReplication run_beta_replication(const McBetaConfig& cfg, long r) {
    BetaReplication rep;
    const Dataset d = generate({cfg.n, cfg.beta0, derive_seed(cfg.master_seed, static_cast<std::uint64_t>(r))});
    try {
        const GramMatrices g = build_gram(d, cfg.fit.kernel, cfg.fit.measure, cfg.fit.lf);
        const auto est = fit_beta_on_gram(g, d, cfg.fit.lf, cfg.multipliers);
        int attempts = 0;
        const auto star = bootstrap_draw(d, cfg.fit, cfg.multipliers,
                                         derive_seed(cfg.master_seed, static_cast<std::uint64_t>(r), 1), attempts);
        if (!star) return rep;
        for (std::size_t k = 0; k < cfg.multipliers.size(); ++k) {
            rep.beta_hat.push_back(est[k].beta(0));
            rep.m_used.push_back(est[k].m_used);
            rep.beta_star.push_back((*star)[k].beta(0));
            rep.m_used_star.push_back((*star)[k].m_used);
        }
        rep.ok = true;
    } catch (const Error& e) {
        if (e.kind() == ErrorKind::config) throw;
    }
    return rep;
}

/// Mean, SD, size and power summaries of beta study replications.
inline std::vector<MonteCarloReport> summarize_beta(const McBetaConfig& cfg,
                                                    const std::vector<BetaReplication>& reps) {
    std::vector<MonteCarloReport> out;
    const double n = static_cast<double>(cfg.n);
    for (std::size_t k = 0; k < cfg.multipliers.size(); ++k) {
        MonteCarloReport rep;
        rep.m_multiplier = cfg.multipliers[k];
        rep.n = cfg.n;
        std::vector<double> beta, boot;
        double msum = 0.0;
        for (const auto& r : reps) {
            if (!r.ok) continue;
            beta.push_back(r.beta_hat[k]);
            boot.push_back(n * std::pow(r.beta_star[k] - r.beta_hat[k], 2));
            msum += r.m_used[k];
        }
        rep.replications = static_cast<int>(beta.size());
        rep.failures = static_cast<int>(reps.size()) - rep.replications;
        if (!beta.empty()) {
            const double cnt = static_cast<double>(beta.size());
            rep.mean_m_used = msum / cnt;
            double mean = 0.0;
            for (double b : beta) mean += b;
            mean /= cnt;
            double ss = 0.0;
            for (double b : beta) ss += (b - mean) * (b - mean);
            rep.beta_mean = mean;
            rep.beta_sd = beta.size() > 1 ? std::sqrt(ss / (cnt - 1.0)) : 0.0;

            auto sample_stats = [&](double null) {
                std::vector<double> s;
                for (double b : beta) s.push_back(n * (b - null) * (b - null));
                return s;
            };
            const auto h0 = warp_speed_rejections(sample_stats(cfg.beta0), boot, cfg.levels);
            for (std::size_t l = 0; l < cfg.levels.size(); ++l) rep.rejections[cfg.levels[l]] = h0[l];
            for (double null : cfg.beta_null_grid)
                rep.power_curve.emplace_back(null,
                                             warp_speed_rejections(sample_stats(null), boot, {cfg.power_level})[0]);
        }
        out.push_back(std::move(rep));
    }
    return out;
}

/// Beta study: mean/SD of beta-hat, warp-speed rejection rates under
/// beta_null = beta0 and the power curve over beta_null_grid.
inline McBetaResult run_mc_beta(const McBetaConfig& cfg) {
    if (cfg.M < 2) throw ConfigError("Monte Carlo needs M >= 2");
    McBetaResult res;
    res.replications.resize(static_cast<std::size_t>(cfg.M));
    parallel_for(cfg.M, cfg.threads,
                 [&](long r) { res.replications[static_cast<std::size_t>(r)] = run_beta_replication(cfg, r); });
    res.reports = summarize_beta(cfg, res.replications);
    return res;
}

/// Warp-speed rejection frequencies at the configured levels for a single
/// null value, using the benchmark m-hat_beta (multiplier of the fit config).
inline std::vector<double> warp_speed_mc(const DGPConfig& dgp, int M, double beta_null, const FitConfig& fit,
                                         std::uint64_t seed, const std::vector<double>& levels = {0.05, 0.10},
                                         int threads = 1) {
    if (M < 100) throw ConfigError("warp-speed Monte Carlo needs M >= 100");
    McBetaConfig cfg;
    cfg.M = M;
    cfg.n = dgp.n;
    cfg.beta0 = dgp.beta0;
    cfg.multipliers = {fit.lf.m_multiplier};
    cfg.levels = levels;
    cfg.beta_null_grid = {};
    cfg.master_seed = seed;
    cfg.fit = fit;
    cfg.threads = threads;
    McBetaResult res = run_mc_beta(cfg);
    const auto& reps = res.replications;
    std::vector<double> sample, boot;
    const double n = static_cast<double>(dgp.n);
    for (const auto& r : reps) {
        if (!r.ok) continue;
        sample.push_back(n * std::pow(r.beta_hat[0] - beta_null, 2));
        boot.push_back(n * std::pow(r.beta_star[0] - r.beta_hat[0], 2));
    }
    return warp_speed_rejections(sample, boot, levels);
}

} // namespace lfiv

#endif
