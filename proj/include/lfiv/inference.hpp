#ifndef LFIV_INFERENCE_HPP
#define LFIV_INFERENCE_HPP

// Pairwise (row-resampling) bootstrap for beta-hat and the bootstrap Wald
// test. Statistic: n |beta-hat - beta_null|^2; bootstrap statistics are
// recentred at beta-hat.

#include <Eigen/Dense>

#include <cstdint>
#include <random>
#include <vector>

#include "lfiv/data.hpp"
#include "lfiv/estimators.hpp"
#include "lfiv/parallel.hpp"

namespace lfiv {

inline constexpr int max_resample_attempts = 10;

struct BootstrapResult {
    std::vector<VectorXd> replicates;  // successful draws, in draw order
    int failed_draws = 0;              // draws abandoned after max_resample_attempts
    int redraws = 0;
};

struct WaldResult {
    VectorXd beta_hat;
    VectorXd beta_null;
    double statistic = 0.0;
    double p_value = 1.0;
    int B = 0;
    int failed_draws = 0;
    std::vector<double> bootstrap_statistics;
};

inline double wald_statistic(const VectorXd& beta, const VectorXd& center, Index n) {
    return static_cast<double>(n) * (beta - center).squaredNorm();
}

/// (1 + #{b : boot_b >= stat}) / (B + 1).
inline double plus_one_p_value(double stat, const std::vector<double>& boot) {
    std::size_t count = 0;
    for (double s : boot)
        if (s >= stat) ++count;
    return (1.0 + static_cast<double>(count)) / (static_cast<double>(boot.size()) + 1.0);
}

/// Row indices of a with-replacement resample of size n.
inline std::vector<Index> resample_rows(Index n, std::mt19937_64& rng) {
    std::uniform_int_distribution<Index> pick(0, n - 1);
    std::vector<Index> idx(static_cast<std::size_t>(n));
    for (auto& i : idx) i = pick(rng);
    return idx;
}

/// Refits beta-hat on a pairwise resample (m re-selected) for each multiplier.
/// Resamples with a singular Sigma-hat are redrawn; returns nullopt when all
/// attempts fail. `attempts` receives the number of draws used.
inline std::optional<std::vector<BetaEstimate>> bootstrap_draw(const Dataset& d, const FitConfig& cfg,
                                                               const std::vector<double>& multipliers,
                                                               std::uint64_t seed, int& attempts) {
    std::mt19937_64 rng(seed);
    for (attempts = 1; attempts <= max_resample_attempts; ++attempts) {
        const Dataset star = d.rows(resample_rows(d.n(), rng));
        try {
            const GramMatrices g = build_gram(star, cfg.kernel, cfg.measure, cfg.lf);
            return fit_beta_on_gram(g, star, cfg.lf, multipliers);
        } catch (const SingularSigma&) {
        } catch (const DegenerateSample&) {
        }
    }
    attempts = max_resample_attempts;
    return std::nullopt;
}

inline BootstrapResult pairwise_bootstrap(const Dataset& d, const FitConfig& cfg, int B, std::uint64_t seed,
                                          int threads = 1) {
    if (B < 1) throw ConfigError("bootstrap needs B >= 1");
    validate(d);
    std::vector<std::optional<VectorXd>> draws(static_cast<std::size_t>(B));
    std::vector<int> attempts(static_cast<std::size_t>(B), 0);
    parallel_for(B, threads, [&](long b) {
        int used = 0;
        auto fit = bootstrap_draw(d, cfg, {cfg.lf.m_multiplier}, derive_seed(seed, static_cast<std::uint64_t>(b)),
                                  used);
        attempts[static_cast<std::size_t>(b)] = used;
        if (fit) draws[static_cast<std::size_t>(b)] = fit->front().beta;
    });
    BootstrapResult out;
    for (std::size_t b = 0; b < draws.size(); ++b) {
        out.redraws += attempts[b] - 1;
        if (draws[b])
            out.replicates.push_back(*draws[b]);
        else
            ++out.failed_draws;
    }
    return out;
}

inline WaldResult wald_test(const Dataset& d, const VectorXd& beta_null, const FitConfig& cfg, int B,
                            std::uint64_t seed, int threads = 1) {
    if (B < 1) throw ConfigError("bootstrap needs B >= 1");
    validate(d);
    if (beta_null.size() != d.kappa())
        throw DimensionMismatch("beta_null", "beta_null length does not match the number of linear regressors");
    const BetaEstimate est = fit_beta(d, cfg.kernel, cfg.measure, cfg.lf);
    const BootstrapResult boot = pairwise_bootstrap(d, cfg, B, seed, threads);
    WaldResult r;
    r.beta_hat = est.beta;
    r.beta_null = beta_null;
    r.B = static_cast<int>(boot.replicates.size());
    r.failed_draws = boot.failed_draws;
    r.statistic = wald_statistic(est.beta, beta_null, d.n());
    for (const auto& b : boot.replicates) r.bootstrap_statistics.push_back(wald_statistic(b, est.beta, d.n()));
    r.p_value = plus_one_p_value(r.statistic, r.bootstrap_statistics);
    return r;
}

/// Warp-speed pooling: each sample statistic is ranked against the pooled
/// bootstrap statistics of all replications; returns the share of p-values
/// at or below each level.
inline std::vector<double> warp_speed_rejections(const std::vector<double>& sample_stats,
                                                 const std::vector<double>& pooled_boot,
                                                 const std::vector<double>& levels) {
    std::vector<double> sorted = pooled_boot;
    std::sort(sorted.begin(), sorted.end());
    std::vector<double> rates(levels.size(), 0.0);
    if (sample_stats.empty()) return rates;
    const double denom = static_cast<double>(sorted.size()) + 1.0;
    for (double s : sample_stats) {
        const auto ge = static_cast<double>(sorted.end() - std::lower_bound(sorted.begin(), sorted.end(), s));
        const double p = (1.0 + ge) / denom;
        for (std::size_t k = 0; k < levels.size(); ++k)
            if (p <= levels[k]) rates[k] += 1.0;
    }
    for (double& r : rates) r /= static_cast<double>(sample_stats.size());
    return rates;
}

} // namespace lfiv

#endif
