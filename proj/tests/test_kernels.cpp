#include <catch_amalgamated.hpp>

#include <algorithm>
#include <numeric>
#include <random>

#include "lfiv/kernels.hpp"
#include "oracles.hpp"

using namespace lfiv;
using Catch::Approx;

TEST_CASE("Gaussian product kernel values", "[kernels]") {
    ResolvedKernel k1{KernelFamily::gaussian_product, 2, 1.0, 1};
    REQUIRE(kernel_eval(k1, Eigen::Matrix<double, 1, 1>(0.0)) == Approx(0.3989422804014327).epsilon(1e-14));
    REQUIRE(kernel_eval(k1, Eigen::Matrix<double, 1, 1>(1.5)) == kernel_eval(k1, Eigen::Matrix<double, 1, 1>(-1.5)));
    ResolvedKernel k2{KernelFamily::gaussian_product, 2, 1.0, 2};
    REQUIRE(kernel_eval(k2, Eigen::Vector2d(0.0, 0.0)) == Approx(1.0 / (2.0 * oracle::pi)).epsilon(1e-14));
    REQUIRE(kernel_eval(k2, Eigen::Vector2d(0.3, -1.2)) ==
            Approx(oracle::normal_density(0.3, 0, 1) * oracle::normal_density(-1.2, 0, 1)).epsilon(1e-13));
}

TEST_CASE("kernel integrates to one by trapezoid quadrature", "[kernels]") {
    const int N = 801;
    const double lo = -8.0, hi = 8.0, step = (hi - lo) / (N - 1);
    auto weight = [&](int i) { return (i == 0 || i == N - 1) ? 0.5 : 1.0; };
    ResolvedKernel k1{KernelFamily::gaussian_product, 2, 1.0, 1};
    double s1 = 0.0;
    for (int i = 0; i < N; ++i) s1 += weight(i) * kernel_eval(k1, Eigen::Matrix<double, 1, 1>(lo + i * step));
    REQUIRE(std::abs(s1 * step - 1.0) < 1e-6);

    const int N2 = 321;
    const double step2 = (hi - lo) / (N2 - 1);
    auto w2 = [&](int i) { return (i == 0 || i == N2 - 1) ? 0.5 : 1.0; };
    ResolvedKernel k2{KernelFamily::gaussian_product, 2, 1.0, 2};
    double s2 = 0.0;
    for (int i = 0; i < N2; ++i)
        for (int j = 0; j < N2; ++j)
            s2 += w2(i) * w2(j) * kernel_eval(k2, Eigen::Vector2d(lo + i * step2, lo + j * step2));
    REQUIRE(std::abs(s2 * step2 * step2 - 1.0) < 1e-6);
}

TEST_CASE("Silverman bandwidth", "[kernels]") {
    SECTION("unit SD sample, n = 256") {
        // +-1 alternating values, rescaled so the n-1 sample SD is exactly 1
        VectorXd z(256);
        for (Index i = 0; i < 256; ++i) z(i) = (i % 2 == 0) ? 1.0 : -1.0;
        z *= std::sqrt(255.0 / 256.0);
        REQUIRE(oracle::welford_sd(z) == Approx(1.0).epsilon(1e-14));
        REQUIRE(silverman_bandwidth(z, 2) == Approx(std::pow(256.0, -0.2)).epsilon(1e-12));
        REQUIRE(std::pow(256.0, -0.2) == Approx(0.32988).epsilon(1e-4));
    }
    SECTION("constant sample is degenerate") {
        REQUIRE_THROWS_AS(silverman_bandwidth(VectorXd::Constant(10, 3.0), 2), DegenerateSample);
    }
    SECTION("N(0,1) draws match the one-pass reference") {
        std::mt19937_64 rng(42);
        const MatrixXd z = oracle::gaussian_matrix(200, 1, rng);
        const double expected = oracle::welford_sd(z.col(0)) * std::pow(200.0, -0.2);
        REQUIRE(silverman_bandwidth(z, 2) == Approx(expected).epsilon(1e-12));
        REQUIRE(std::pow(200.0, -0.2) == Approx(0.34657).epsilon(1e-4));
    }
    SECTION("scale equivariance") {
        std::mt19937_64 rng(7);
        const MatrixXd z = oracle::gaussian_matrix(50, 2, rng);
        for (double c : {0.1, 2.5, 40.0})
            REQUIRE(silverman_bandwidth(c * z, 2) == Approx(c * silverman_bandwidth(z, 2)).epsilon(1e-12));
    }
    SECTION("order enters the exponent") {
        VectorXd z = VectorXd::LinSpaced(100, 0.0, 1.0);
        const double sd = oracle::welford_sd(z);
        REQUIRE(silverman_bandwidth(z, 4) == Approx(sd * std::pow(100.0, -1.0 / 9.0)).epsilon(1e-12));
    }
}

TEST_CASE("weighting density pi", "[kernels]") {
    ResolvedMeasure m{CharFnKind::gaussian_standard, VectorXd::Zero(1), 2.0};
    REQUIRE(pi_eval(m, Eigen::Matrix<double, 1, 1>(0.0)) == Approx(1.0 / std::sqrt(4.0 * oracle::pi)).epsilon(1e-14));
    REQUIRE(pi_eval(m, Eigen::Matrix<double, 1, 1>(0.7)) == pi_eval(m, Eigen::Matrix<double, 1, 1>(-0.7)));

    const double s = 1.3;
    ResolvedMeasure m2{CharFnKind::gaussian_standard, VectorXd::Zero(1), 2.0 * s * s};
    REQUIRE(pi_eval(m2, Eigen::Matrix<double, 1, 1>(1.0)) ==
            Approx(oracle::normal_density(1.0, 0.0, 3.38)).epsilon(1e-13));

    SECTION("data-driven variance resolves to twice the sample variance") {
        std::mt19937_64 rng(3);
        const MatrixXd z = oracle::gaussian_matrix(80, 1, rng, 2.0);
        const ResolvedMeasure r = resolve_measure({}, z);
        const double sd = oracle::welford_sd(z.col(0));
        REQUIRE(r.pi_variance == Approx(2.0 * sd * sd).epsilon(1e-12));
    }
}

TEST_CASE("kernel density estimate at the data points", "[kernels]") {
    SECTION("single point") {
        ResolvedKernel k{KernelFamily::gaussian_product, 2, 0.5, 1};
        const VectorXd f = kde_at_points(MatrixXd::Constant(1, 1, 3.0), k);
        REQUIRE(f(0) == Approx(oracle::normal_density(0, 0, 1) / 0.5).epsilon(1e-14));
    }
    SECTION("three points with h = 1") {
        ResolvedKernel k{KernelFamily::gaussian_product, 2, 1.0, 1};
        const VectorXd z = (VectorXd(3) << 0.0, 1.0, 2.0).finished();
        const VectorXd f = kde_at_points(z, k);
        const double expected = (0.3989422804014327 + 0.24197072451914337 + 0.05399096651318806) / 3.0;
        REQUIRE(f(0) == Approx(expected).epsilon(1e-14));
        REQUIRE(f(1) == Approx((2 * 0.24197072451914337 + 0.3989422804014327) / 3.0).epsilon(1e-14));
    }
    SECTION("agrees with the reference KDE, positive, permutation invariant") {
        std::mt19937_64 rng(11);
        const MatrixXd z = oracle::gaussian_matrix(60, 1, rng);
        ResolvedKernel k{KernelFamily::gaussian_product, 2, 0.4, 1};
        const VectorXd f = kde_at_points(z, k);
        const VectorXd ref = oracle::kde_1d(z.col(0), 0.4);
        REQUIRE((f - ref).cwiseAbs().maxCoeff() < 1e-13);
        REQUIRE(f.minCoeff() > 0.0);

        std::vector<Index> perm(60);
        std::iota(perm.begin(), perm.end(), 0);
        std::shuffle(perm.begin(), perm.end(), rng);
        MatrixXd zp(60, 1);
        for (Index i = 0; i < 60; ++i) zp(i, 0) = z(perm[static_cast<std::size_t>(i)], 0);
        const VectorXd fp = kde_at_points(zp, k);
        for (Index i = 0; i < 60; ++i) REQUIRE(fp(i) == Approx(f(perm[static_cast<std::size_t>(i)])).epsilon(1e-13));
    }
}
