#ifndef LFIV_LANDWEBER_HPP
#define LFIV_LANDWEBER_HPP

// Landweber-Fridman iteration on the data-point representation of A*_Z A_Z.
//
// With M = a/(n^2 h^p) K F and phi_0 = M t for a target t (Y, or the
// columns of X), the iterates are
//
//   phi_l = phi_{l-1} - M phi_{l-1} + phi_0,      l = 1..m,
//
// so phi_m = a sum_{l=0}^m (I - a A*A)^l A* t evaluated at Z_1..Z_n.

#include <Eigen/Dense>

#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "lfiv/data.hpp"
#include "lfiv/gram.hpp"

namespace lfiv {

struct LFTrace {
    std::vector<MatrixXd> iterates;  // m+1 entries, each n x r
    double a = 0.0;
    double h = 0.0;

    int m() const { return static_cast<int>(iterates.size()) - 1; }
    const MatrixXd& final() const { return iterates.back(); }
};

struct ObjectivePoint {
    int m = 0;
    double fit = 0.0;
    double penalty = 0.0;
    double total = 0.0;
};

struct MSelection {
    int m_hat = 1;
    std::vector<ObjectivePoint> curve;  // m = 1..evaluated_to
    double penalty_exponent = 0.5;
    int max_m = 0;
    int evaluated_to = 0;
    bool hit_cap = false;
};

inline constexpr double divergence_factor = 10.0;

namespace detail {

inline void check_iterate(const MatrixXd& phi, int l) {
    if (!phi.allFinite())
        throw IterationDivergence(l, "non-finite LF iterate at step " + std::to_string(l) +
                                         " (step constant a too large?)");
}

// r'Fr summed over columns, with Fr = F t - F phi.
inline double residual_form(const MatrixXd& target, const MatrixXd& Ft, const MatrixXd& phi,
                            const MatrixXd& Fphi) {
    return ((target - phi).array() * (Ft - Fphi).array()).sum();
}

inline void check_growth(double previous, double current, int l) {
    if (previous > std::numeric_limits<double>::min() && current > divergence_factor * previous)
        throw IterationDivergence(l, "LF residual grew more than tenfold at step " + std::to_string(l));
}

} // namespace detail

/// The LF recursion for an abstract operator: given phi0 = a A* b and
/// step(v) = a A*A v, returns phi_m = a sum_{l=0}^m (I - a A*A)^l A* b.
template <typename StepOp>
MatrixXd landweber_final(StepOp&& step, const MatrixXd& phi0, int m) {
    MatrixXd phi = phi0;
    for (int l = 1; l <= m; ++l) phi = phi - step(phi) + phi0;
    return phi;
}

/// Continues an existing trace up to iteration m (no-op if already there).
inline void lf_extend(const GramMatrices& g, LFTrace& trace, const MatrixXd& target, int m) {
    if (trace.iterates.empty()) throw ConfigError("cannot extend an empty LF trace");
    const double c = g.a * g.scale();
    const MatrixXd Ft = g.F * target;
    const MatrixXd phi0 = trace.iterates.front();
    trace.iterates.reserve(static_cast<std::size_t>(m) + 1);
    double q_before = -1.0;
    for (int l = trace.m() + 1; l <= m; ++l) {
        const MatrixXd& prev = trace.iterates.back();
        const MatrixXd Fprev = g.F * prev;
        const double q_prev = detail::residual_form(target, Ft, prev, Fprev);
        if (q_before >= 0.0) detail::check_growth(q_before, q_prev, l - 1);
        q_before = q_prev;
        MatrixXd next = prev - c * (g.K * Fprev) + phi0;
        detail::check_iterate(next, l);
        trace.iterates.push_back(std::move(next));
    }
}

/// All LF iterates 0..m for an n x r target.
inline LFTrace lf_apply(const GramMatrices& g, const MatrixXd& target, int m) {
    if (m < 0) throw ConfigError("number of LF iterations must be nonnegative");
    if (target.rows() != g.n)
        throw DimensionMismatch("target", "LF target has " + std::to_string(target.rows()) + " rows, expected " +
                                              std::to_string(g.n));
    LFTrace trace;
    trace.a = g.a;
    trace.h = g.h;
    MatrixXd phi0 = (g.a * g.scale()) * (g.K * (g.F * target));
    detail::check_iterate(phi0, 0);
    trace.iterates.push_back(std::move(phi0));
    lf_extend(g, trace, target, m);
    return trace;
}

/// Values at grid points after m steps (m defaults to the trace length).
/// The recursion phibar_l = phibar_{l-1} - c Kbar F phi_{l-1} + phibar_0 is
/// evaluated in its unrolled form (m+1) phibar_0 - c Kbar F sum_{l<m} phi_l.
inline MatrixXd lf_apply_grid(const GridKernel& gk, const GramMatrices& g, const LFTrace& trace,
                              const MatrixXd& target, int m = -1) {
    if (m < 0) m = trace.m();
    if (gk.Kbar.cols() != g.n || target.rows() != g.n)
        throw DimensionMismatch("grid", "grid kernel / target do not match the gram dimension");
    if (trace.iterates.empty() || m > trace.m() || trace.iterates.front().rows() != g.n ||
        trace.iterates.front().cols() != target.cols())
        throw DimensionMismatch("trace", "LF trace does not cover the requested iterations or target shape");
    const double c = g.a * g.scale();
    const MatrixXd bar0 = c * (gk.Kbar * (g.F * target));
    MatrixXd acc = MatrixXd::Zero(g.n, target.cols());
    for (int l = 0; l < m; ++l) acc += trace.iterates[static_cast<std::size_t>(l)];
    return static_cast<double>(m + 1) * bar0 - c * (gk.Kbar * (g.F * acc));
}

/// Sweeps LF on the response and returns the penalized-fit argmin
///   n^(-e_fit) [y - phi_m]' F [y - phi_m] + m^penalty_exponent / n
/// over m = 1..max_m (ties go to the smaller m). The full trace of the
/// sweep is returned through trace_out when given.
///
/// Since the fit term is nonnegative, the sweep stops as soon as the
/// penalty alone exceeds the best total seen.
inline MSelection select_m(const GramMatrices& g, const VectorXd& y, double penalty_exponent, int max_m,
                           double fit_scale_exponent = 1.25, LFTrace* trace_out = nullptr) {
    if (max_m < 1) throw ConfigError("max_m must be at least 1");
    if (y.size() != g.n) throw DimensionMismatch("y", "selection target length does not match the gram dimension");
    const double nn = static_cast<double>(g.n);
    const double fit_scale = std::pow(nn, -fit_scale_exponent);
    const double c = g.a * g.scale();

    MSelection sel;
    sel.penalty_exponent = penalty_exponent;
    sel.max_m = max_m;

    const VectorXd Fy = g.F * y;
    VectorXd phi0 = c * (g.K * Fy);
    detail::check_iterate(phi0, 0);
    VectorXd phi = phi0;
    LFTrace local;
    LFTrace& trace = trace_out ? *trace_out : local;
    trace = LFTrace{};
    trace.a = g.a;
    trace.h = g.h;
    if (trace_out) trace.iterates.push_back(phi0);

    double best = std::numeric_limits<double>::infinity();
    double prev_fit = -1.0;
    for (int m = 0;; ++m) {
        const VectorXd Fphi = g.F * phi;
        const double fit = (y - phi).dot(Fy - Fphi);
        if (m >= 1) detail::check_growth(prev_fit, fit, m);
        prev_fit = fit;
        if (m >= 1) {
            const double penalty = std::pow(static_cast<double>(m), penalty_exponent) / nn;
            const double total = fit_scale * fit + penalty;
            sel.curve.push_back({m, fit_scale * fit, penalty, total});
            sel.evaluated_to = m;
            if (total < best) {
                best = total;
                sel.m_hat = m;
            }
            if (m == max_m) break;
            const double next_penalty = std::pow(static_cast<double>(m + 1), penalty_exponent) / nn;
            if (next_penalty >= best) break;
        }
        phi = phi - c * (g.K * Fphi) + phi0;
        detail::check_iterate(phi, m + 1);
        if (trace_out) trace.iterates.push_back(phi);
    }
    sel.hit_cap = sel.m_hat == max_m;
    return sel;
}

/// Iterations actually used after applying a multiplier: max(1, ceil(mult * m_hat)).
inline int scaled_m(int m_hat, double multiplier) {
    const int m = static_cast<int>(std::ceil(multiplier * static_cast<double>(m_hat) - 1e-12));
    return m < 1 ? 1 : m;
}

} // namespace lfiv

#endif
