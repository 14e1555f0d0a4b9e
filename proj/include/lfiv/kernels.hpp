#ifndef LFIV_KERNELS_HPP
#define LFIV_KERNELS_HPP

#include <Eigen/Dense>

#include <cmath>
#include <numbers>

#include "lfiv/data.hpp"

namespace lfiv {

struct ResolvedKernel {
    KernelFamily family = KernelFamily::gaussian_product;
    int order = 2;
    double h = 1.0;
    Index dim = 1;
};

inline double std_normal_pdf(double u) {
    return std::exp(-0.5 * u * u) / std::sqrt(2.0 * std::numbers::pi);
}

/// Product of standard normal densities over the coordinates of u.
template <typename Derived>
double kernel_eval(const ResolvedKernel&, const Eigen::MatrixBase<Derived>& u) {
    // exp of the summed squares keeps one transcendental call per evaluation
    const double sq = u.squaredNorm();
    const double norm = std::pow(2.0 * std::numbers::pi, -0.5 * static_cast<double>(u.size()));
    return norm * std::exp(-0.5 * sq);
}

/// Sample standard deviation (n-1 denominator) of each column.
inline VectorXd column_sd(const MatrixXd& z) {
    const double n = static_cast<double>(z.rows());
    VectorXd sd(z.cols());
    for (Index j = 0; j < z.cols(); ++j) {
        const double mean = z.col(j).mean();
        sd(j) = std::sqrt((z.col(j).array() - mean).square().sum() / (n - 1.0));
    }
    return sd;
}

/// sigma_Z: the sample SD for p = 1, the mean of coordinate SDs otherwise.
inline double pooled_sd(const MatrixXd& z) {
    if (z.rows() < 2) throw DegenerateSample("need at least 2 observations to estimate a standard deviation");
    const double s = column_sd(z).mean();
    if (!(s > 0.0)) throw DegenerateSample("sample standard deviation of z is zero");
    return s;
}

/// Silverman rule of thumb h = sigma_Z n^(-1/(2 rho + p)).
inline double silverman_bandwidth(const MatrixXd& z, int order) {
    const double s = pooled_sd(z);
    const double n = static_cast<double>(z.rows());
    const double p = static_cast<double>(z.cols());
    return s * std::pow(n, -1.0 / (2.0 * order + p));
}

inline ResolvedKernel resolve_kernel(const KernelSpec& spec, const MatrixXd& z) {
    ResolvedKernel k;
    k.family = spec.family;
    k.order = spec.order;
    k.dim = z.cols();
    if (spec.bandwidth) {
        if (!(*spec.bandwidth > 0.0)) throw ConfigError("kernel bandwidth must be positive");
        k.h = *spec.bandwidth;
    } else {
        k.h = silverman_bandwidth(z, spec.order);
    }
    return k;
}

inline ResolvedMeasure resolve_measure(const MeasureSpec& spec, const MatrixXd& z) {
    ResolvedMeasure m;
    m.charfn = spec.charfn;
    m.pi_mean = spec.pi_mean ? *spec.pi_mean : VectorXd::Zero(z.cols());
    if (m.pi_mean.size() != z.cols())
        throw ConfigError("pi_mean has dimension " + std::to_string(m.pi_mean.size()) + ", z has " +
                          std::to_string(z.cols()));
    if (spec.pi_variance) {
        m.pi_variance = *spec.pi_variance;
    } else {
        const double s = pooled_sd(z);
        m.pi_variance = spec.pi_variance_factor * s * s;
    }
    if (!(m.pi_variance > 0.0)) throw ConfigError("pi variance must be positive");
    return m;
}

/// Weighting density pi: N(mean, variance I_p) evaluated at z.
template <typename Derived>
double pi_eval(const ResolvedMeasure& m, const Eigen::MatrixBase<Derived>& z) {
    const double sq = (z - m.pi_mean).squaredNorm();
    const double p = static_cast<double>(z.size());
    return std::pow(2.0 * std::numbers::pi * m.pi_variance, -0.5 * p) * std::exp(-0.5 * sq / m.pi_variance);
}

/// Leave-none-out kernel density estimate at each row of z.
inline VectorXd kde_at_points(const MatrixXd& z, const ResolvedKernel& k) {
    const Index n = z.rows();
    VectorXd f = VectorXd::Zero(n);
    const double inv_h = 1.0 / k.h;
    for (Index i = 0; i < n; ++i) {
        f(i) += kernel_eval(k, VectorXd::Zero(z.cols()));
        for (Index j = i + 1; j < n; ++j) {
            const double v = kernel_eval(k, (z.row(i) - z.row(j)) * inv_h);
            f(i) += v;
            f(j) += v;
        }
    }
    return f / (static_cast<double>(n) * std::pow(k.h, static_cast<double>(z.cols())));
}

} // namespace lfiv

#endif
