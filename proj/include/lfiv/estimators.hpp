#ifndef LFIV_ESTIMATORS_HPP
#define LFIV_ESTIMATORS_HPP

// phi-hat for the fully nonparametric model and (beta-hat, phi-hat) for the
// partly linear model, assembled from LF traces:
//
//   Sigma-hat = n^-2 X'F (X - R_m A_X),   rhs = n^-2 X'F (Y - R_m s),
//   beta-hat  = Sigma-hat^-1 rhs,
//   phi-hat   = R_m (s - A_X beta-hat)   (LF on the target Y - X beta-hat).

#include <Eigen/Dense>

#include <algorithm>
#include <optional>
#include <vector>

#include "lfiv/data.hpp"
#include "lfiv/gram.hpp"
#include "lfiv/landweber.hpp"

namespace lfiv {

inline constexpr double default_phi_penalty = 0.5;
inline constexpr double default_beta_penalty = 2.0;
inline constexpr double max_sigma_condition = 1e12;

struct PhiEstimate {
    VectorXd at_data;
    std::optional<VectorXd> at_grid;
    std::optional<MatrixXd> grid;
    int m_used = 1;
    double h_used = 0.0;
    double a_used = 0.0;
    std::optional<MSelection> selection;
};

struct BetaEstimate {
    VectorXd beta;
    MatrixXd sigma_hat;
    VectorXd rhs;
    double condition = 0.0;
    int m_used = 1;
    double h_used = 0.0;
    double a_used = 0.0;
    std::optional<MSelection> selection;
};

namespace detail {

// m-hat for the response y: fixed or penalized selection. The sweep trace
// is handed back so callers can reuse its iterates.
inline std::optional<MSelection> choose_m(const GramMatrices& g, const VectorXd& y, const LFConfig& lf,
                                          double default_penalty, LFTrace& trace, int& m_hat) {
    const int cap = lf.resolved_max_m(g.n);
    if (lf.fixed_m) {
        if (*lf.fixed_m < 0 || *lf.fixed_m > cap)
            throw ConfigError("fixed m must lie in [0, max_m]");
        m_hat = *lf.fixed_m;
        return std::nullopt;
    }
    MSelection sel = select_m(g, y, lf.penalty_exponent.value_or(default_penalty), cap, lf.fit_scale_exponent,
                              &trace);
    m_hat = sel.m_hat;
    return sel;
}

inline int used_m(int m_hat, const LFConfig& lf, double multiplier) {
    return lf.fixed_m ? m_hat : scaled_m(m_hat, multiplier);
}

inline void require_np(const Dataset& d) {
    if (!d.fully_nonparametric())
        throw ConfigError("fit_phi_np expects a dataset without linear regressors (kappa = 0)");
}

} // namespace detail

/// phi-hat for target y on an existing gram, one estimate per multiplier of m-hat.
inline std::vector<PhiEstimate> fit_phi_on_gram(const GramMatrices& g, const Dataset& d, const VectorXd& target,
                                                const LFConfig& lf, const std::optional<MatrixXd>& grid,
                                                const std::vector<double>& multipliers) {
    LFTrace trace;
    int m_hat = 0;
    auto sel = detail::choose_m(g, target, lf, default_phi_penalty, trace, m_hat);
    int needed = 0;
    for (double mult : multipliers) needed = std::max(needed, detail::used_m(m_hat, lf, mult));
    const MatrixXd t = target;
    if (trace.iterates.empty())
        trace = lf_apply(g, t, needed);
    else
        lf_extend(g, trace, t, needed);

    std::optional<GridKernel> gk;
    if (grid) gk = build_grid_K(*grid, d, g.kernel, g.measure);

    std::vector<PhiEstimate> out;
    for (double mult : multipliers) {
        PhiEstimate e;
        e.m_used = detail::used_m(m_hat, lf, mult);
        e.at_data = trace.iterates[static_cast<std::size_t>(e.m_used)].col(0);
        e.h_used = g.h;
        e.a_used = g.a;
        e.selection = sel;
        if (gk) {
            e.at_grid = lf_apply_grid(*gk, g, trace, t, e.m_used).col(0);
            e.grid = *grid;
        }
        out.push_back(std::move(e));
    }
    return out;
}

/// Fully nonparametric phi-hat at the data points (and optionally on a grid).
inline PhiEstimate fit_phi_np(const Dataset& d, const KernelSpec& kernel, const MeasureSpec& measure,
                              const LFConfig& lf, const std::optional<MatrixXd>& grid = std::nullopt) {
    validate(d);
    detail::require_np(d);
    const GramMatrices g = build_gram(d, kernel, measure, lf);
    return fit_phi_on_gram(g, d, d.y, lf, grid, {lf.m_multiplier}).front();
}

/// beta-hat on an existing gram for each multiplier of m-hat_beta. m is
/// selected on the response only.
inline std::vector<BetaEstimate> fit_beta_on_gram(const GramMatrices& g, const Dataset& d, const LFConfig& lf,
                                                  const std::vector<double>& multipliers) {
    if (d.kappa() < 1) throw ConfigError("fit_beta needs at least one linear regressor");
    LFTrace sweep;
    int m_hat = 0;
    auto sel = detail::choose_m(g, d.y, lf, default_beta_penalty, sweep, m_hat);
    int needed = 0;
    for (double mult : multipliers) needed = std::max(needed, detail::used_m(m_hat, lf, mult));

    MatrixXd targets(d.n(), 1 + d.kappa());
    targets.col(0) = d.y;
    targets.rightCols(d.kappa()) = d.x;
    const LFTrace trace = lf_apply(g, targets, needed);

    const double inv_n2 = 1.0 / (static_cast<double>(d.n()) * static_cast<double>(d.n()));
    const MatrixXd XtF = d.x.transpose() * g.F;
    std::vector<BetaEstimate> out;
    for (double mult : multipliers) {
        BetaEstimate e;
        e.m_used = detail::used_m(m_hat, lf, mult);
        const MatrixXd& S = trace.iterates[static_cast<std::size_t>(e.m_used)];
        e.sigma_hat = inv_n2 * XtF * (d.x - S.rightCols(d.kappa()));
        e.rhs = inv_n2 * XtF * (d.y - S.col(0));
        Eigen::JacobiSVD<MatrixXd> svd(e.sigma_hat);
        const auto& sv = svd.singularValues();
        const double smax = sv(0);
        const double smin = sv(sv.size() - 1);
        e.condition = smin > 0.0 ? smax / smin : std::numeric_limits<double>::infinity();
        if (!(smax > 0.0) || !(e.condition < max_sigma_condition) || !e.sigma_hat.allFinite())
            throw SingularSigma(e.condition);
        e.beta = e.sigma_hat.colPivHouseholderQr().solve(e.rhs);
        e.h_used = g.h;
        e.a_used = g.a;
        e.selection = sel;
        out.push_back(std::move(e));
    }
    return out;
}

inline BetaEstimate fit_beta(const Dataset& d, const KernelSpec& kernel, const MeasureSpec& measure,
                             const LFConfig& lf) {
    validate(d);
    const GramMatrices g = build_gram(d, kernel, measure, lf);
    return fit_beta_on_gram(g, d, lf, {lf.m_multiplier}).front();
}

/// phi-hat in the partly linear model: LF on Y - X beta-hat with a fresh m-hat_phi.
inline PhiEstimate fit_phi_pl(const Dataset& d, const BetaEstimate& beta, const KernelSpec& kernel,
                              const MeasureSpec& measure, const LFConfig& lf,
                              const std::optional<MatrixXd>& grid = std::nullopt) {
    validate(d);
    if (beta.beta.size() != d.kappa())
        throw DimensionMismatch("beta", "beta-hat length does not match the number of linear regressors");
    const GramMatrices g = build_gram(d, kernel, measure, lf);
    const VectorXd target = d.kappa() > 0 ? VectorXd(d.y - d.x * beta.beta) : d.y;
    return fit_phi_on_gram(g, d, target, lf, grid, {lf.m_multiplier}).front();
}

} // namespace lfiv

#endif
