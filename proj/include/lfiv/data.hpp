#ifndef LFIV_DATA_HPP
#define LFIV_DATA_HPP

// Observation container and the configuration objects shared by the
// kernels, gram, landweber and estimator layers.

#include <Eigen/Dense>

#include <cmath>
#include <optional>
#include <string>

#include "lfiv/error.hpp"

namespace lfiv {

using Eigen::Index;
using Eigen::MatrixXd;
using Eigen::VectorXd;

/// Observations of Y = X'beta + phi(Z) + U with E[U|W] = 0.
/// An x with zero columns encodes the fully nonparametric model.
struct Dataset {
    VectorXd y;  // n
    MatrixXd x;  // n x kappa
    MatrixXd z;  // n x p
    MatrixXd w;  // n x q

    Index n() const { return y.size(); }
    Index kappa() const { return x.cols(); }
    Index p() const { return z.cols(); }
    Index q() const { return w.cols(); }
    bool fully_nonparametric() const { return x.cols() == 0; }

    /// Rows selected by index, in the given order (used for resampling and permutations).
    template <typename IndexRange>
    Dataset rows(const IndexRange& idx) const {
        Dataset out;
        const auto m = static_cast<Index>(idx.size());
        out.y.resize(m);
        out.x.resize(m, x.cols());
        out.z.resize(m, z.cols());
        out.w.resize(m, w.cols());
        Index r = 0;
        for (auto i : idx) {
            out.y(r) = y(i);
            out.x.row(r) = x.row(i);
            out.z.row(r) = z.row(i);
            out.w.row(r) = w.row(i);
            ++r;
        }
        return out;
    }
};

enum class CharFnKind { gaussian_standard };

/// Measure mu on the instrument index space (through its characteristic
/// function) and the weighting density pi on the Z space.
struct MeasureSpec {
    CharFnKind charfn = CharFnKind::gaussian_standard;
    std::optional<VectorXd> pi_mean;     // zeros when absent
    std::optional<double> pi_variance;   // resolved as pi_variance_factor * sigma_Z^2 when absent
    double pi_variance_factor = 2.0;
};

/// Gaussian density used for pi, with a single variance shared by all coordinates.
struct ResolvedMeasure {
    CharFnKind charfn = CharFnKind::gaussian_standard;
    VectorXd pi_mean;
    double pi_variance = 1.0;
};

enum class KernelFamily { gaussian_product };

struct KernelSpec {
    KernelFamily family = KernelFamily::gaussian_product;
    int order = 2;
    std::optional<double> bandwidth;  // Silverman rule of thumb when absent
};

/// Landweber-Fridman settings. Unset fields take estimator-specific defaults:
/// penalty exponent 1/2 for phi and 2 for beta, max_m = 50 n, a from the KDE plug-in.
struct LFConfig {
    std::optional<double> step_a;
    std::optional<int> max_m;
    std::optional<int> fixed_m;
    std::optional<double> penalty_exponent;
    double m_multiplier = 1.0;
    double fit_scale_exponent = 1.25;  // objective fit term is n^(-e) r'Fr

    int resolved_max_m(Index n) const { return max_m ? *max_m : static_cast<int>(50 * n); }
};

/// Everything needed to refit an estimator on a resample.
struct FitConfig {
    KernelSpec kernel;
    MeasureSpec measure;
    LFConfig lf;
};

namespace detail {

template <typename Derived>
void check_finite(const Eigen::DenseBase<Derived>& m, const std::string& field) {
    for (Index i = 0; i < m.rows(); ++i)
        for (Index j = 0; j < m.cols(); ++j)
            if (!std::isfinite(m(i, j))) throw NonFiniteValue(field, static_cast<long>(i));
}

} // namespace detail

/// Throws DimensionMismatch or NonFiniteValue; otherwise returns normally.
inline void validate(const Dataset& d) {
    const Index n = d.y.size();
    if (n < 2) throw DimensionMismatch("y", "dataset needs at least 2 rows, got " + std::to_string(n));
    auto rows_match = [n](Index rows, const char* field) {
        if (rows != n)
            throw DimensionMismatch(field, std::string("field ") + field + " has " + std::to_string(rows) +
                                               " rows, expected " + std::to_string(n));
    };
    if (d.x.cols() > 0) rows_match(d.x.rows(), "x");
    rows_match(d.z.rows(), "z");
    rows_match(d.w.rows(), "w");
    if (d.z.cols() < 1) throw DimensionMismatch("z", "z must have at least one column");
    if (d.w.cols() < 1) throw DimensionMismatch("w", "w must have at least one column");
    detail::check_finite(d.y, "y");
    detail::check_finite(d.x, "x");
    detail::check_finite(d.z, "z");
    detail::check_finite(d.w, "w");
}

} // namespace lfiv

#endif
