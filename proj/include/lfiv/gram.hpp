#ifndef LFIV_GRAM_HPP
#define LFIV_GRAM_HPP

// Finite-sample matrices through which every operator composition of the
// estimator is computed:
//
//   K(i,j) = K((Z_i - Z_j)/h) / pi(Z_i)      (not symmetric: row scaled)
//   F(i,j) = F_mu(W_i - W_j)                  (symmetric, PSD, unit diagonal)
//
// A*_Z A_Z acts on values at the data points as scale() * K * F, with
// scale() = 1/(n^2 h^p).

#include <Eigen/Dense>

#include <cmath>
#include <numbers>

#include "lfiv/data.hpp"
#include "lfiv/kernels.hpp"

namespace lfiv {

inline constexpr double flush_threshold = 1e-300;

struct GramMatrices {
    MatrixXd K;
    MatrixXd F;
    double h = 1.0;
    double a = 1.0;
    Index n = 0;
    Index p = 1;
    ResolvedKernel kernel;
    ResolvedMeasure measure;

    /// 1/(n^2 h^p), the factor in front of K F.
    double scale() const {
        const double nn = static_cast<double>(n);
        return 1.0 / (nn * nn * std::pow(h, static_cast<double>(p)));
    }
};

/// Rows indexed by evaluation points z_c, columns by observations.
struct GridKernel {
    MatrixXd Kbar;
    MatrixXd grid;
};

namespace detail {
inline double flush(double v) { return std::abs(v) < flush_threshold ? 0.0 : v; }
} // namespace detail

/// Characteristic function of mu at t. For the standard Gaussian this is exp(-|t|^2/2).
template <typename Derived>
double charfn_eval(CharFnKind kind, const Eigen::MatrixBase<Derived>& t) {
    switch (kind) {
    case CharFnKind::gaussian_standard: return std::exp(-0.5 * t.squaredNorm());
    }
    return 0.0;
}

/// Entry (c,j) = K((points_c - Z_j)/h) / pi(points_c).
inline MatrixXd kernel_rows(const MatrixXd& points, const MatrixXd& z, const ResolvedKernel& k,
                            const ResolvedMeasure& m) {
    MatrixXd out(points.rows(), z.rows());
    const double inv_h = 1.0 / k.h;
    for (Index c = 0; c < points.rows(); ++c) {
        const double inv_pi = 1.0 / pi_eval(m, points.row(c).transpose());
        for (Index j = 0; j < z.rows(); ++j) {
            // a kernel weight that underflows stays zero even where pi itself underflows
            const double kv = detail::flush(kernel_eval(k, (points.row(c) - z.row(j)) * inv_h));
            out(c, j) = kv == 0.0 ? 0.0 : detail::flush(kv * inv_pi);
        }
    }
    return out;
}

inline MatrixXd build_K(const Dataset& d, const ResolvedKernel& k, const ResolvedMeasure& m) {
    return kernel_rows(d.z, d.z, k, m);
}

/// Entry (i,j) = F_mu(W_i - W_j), symmetrized after construction.
inline MatrixXd build_F(const MatrixXd& w, CharFnKind kind = CharFnKind::gaussian_standard) {
    const Index n = w.rows();
    MatrixXd F(n, n);
    for (Index i = 0; i < n; ++i) {
        F(i, i) = 1.0;
        for (Index j = i + 1; j < n; ++j) {
            const double v = detail::flush(charfn_eval(kind, (w.row(i) - w.row(j)).transpose()));
            F(i, j) = v;
            F(j, i) = v;
        }
    }
    F = 0.5 * (F + F.transpose()).eval();
    return F;
}

inline MatrixXd build_F(const Dataset& d, const ResolvedMeasure& m) { return build_F(d.w, m.charfn); }

/// a = 1 / (max_i ratio_i)^2.
inline double step_from_ratios(const VectorXd& ratios) {
    const double r = ratios.maxCoeff();
    if (!(r > 0.0) || !std::isfinite(r)) throw DegenerateSample("density ratios must be positive and finite");
    return 1.0 / (r * r);
}

/// Plug-in bound on 1/|A_Z|^2: a = 1/[max_i fhat_Z(Z_i)/pi(Z_i)]^2.
inline double compute_a(const Dataset& d, const ResolvedKernel& k, const ResolvedMeasure& m) {
    const VectorXd f = kde_at_points(d.z, k);
    VectorXd ratio(d.n());
    for (Index i = 0; i < d.n(); ++i) ratio(i) = f(i) / pi_eval(m, d.z.row(i).transpose());
    return step_from_ratios(ratio);
}

inline GridKernel build_grid_K(const MatrixXd& grid, const Dataset& d, const ResolvedKernel& k,
                               const ResolvedMeasure& m) {
    detail::check_finite(grid, "grid");
    if (grid.cols() != d.z.cols())
        throw DimensionMismatch("grid", "grid has " + std::to_string(grid.cols()) + " columns, z has " +
                                            std::to_string(d.z.cols()));
    return GridKernel{kernel_rows(grid, d.z, k, m), grid};
}

/// Fixed-bandwidth instrument smoothing counterpart of F: entry (i,j) =
/// hW^(-q) (K_W * K_W)((W_j - W_i)/hW) with K_W a standard Gaussian product
/// kernel, whose self-convolution is the N(0, 2 I_q) density.
inline MatrixXd smoothed_counterpart_F(const MatrixXd& w, double hW) {
    if (!(hW > 0.0)) throw ConfigError("instrument bandwidth must be positive");
    const Index n = w.rows();
    const double q = static_cast<double>(w.cols());
    const double norm = std::pow(hW, -q) * std::pow(4.0 * std::numbers::pi, -0.5 * q);
    MatrixXd S(n, n);
    for (Index i = 0; i < n; ++i)
        for (Index j = 0; j < n; ++j) {
            const double sq = ((w.row(j) - w.row(i)) / hW).squaredNorm();
            S(i, j) = detail::flush(norm * std::exp(-sq / 4.0));
        }
    return S;
}

/// Resolves h, pi and a, then builds K and F.
inline GramMatrices build_gram(const Dataset& d, const KernelSpec& kspec, const MeasureSpec& mspec,
                               const LFConfig& lf = {}) {
    GramMatrices g;
    g.n = d.n();
    g.p = d.p();
    g.kernel = resolve_kernel(kspec, d.z);
    g.measure = resolve_measure(mspec, d.z);
    g.h = g.kernel.h;
    g.K = build_K(d, g.kernel, g.measure);
    g.F = build_F(d, g.measure);
    if (lf.step_a) {
        if (!(*lf.step_a > 0.0)) throw ConfigError("step_a must be positive");
        g.a = *lf.step_a;
    } else {
        g.a = compute_a(d, g.kernel, g.measure);
    }
    return g;
}

} // namespace lfiv

#endif
