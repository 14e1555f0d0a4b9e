#include <catch_amalgamated.hpp>

#include <algorithm>
#include <numeric>
#include <random>

#include "lfiv/dgp.hpp"
#include "lfiv/landweber.hpp"
#include "oracles.hpp"

using namespace lfiv;

namespace {

Dataset np_dataset(Index n, std::uint64_t seed) {
    Dataset d = generate({n, 1.0, seed});
    d.y = d.y - d.x.col(0);
    d.x = MatrixXd(n, 0);
    return d;
}

MatrixXd step_matrix(const GramMatrices& g) { return (g.a * g.scale()) * g.K * g.F; }

} // namespace

TEST_CASE("LF iterates against dense oracles", "[landweber]") {
    const Dataset d = np_dataset(30, 3);
    const GramMatrices g = build_gram(d, {}, {}, {});
    const MatrixXd S = step_matrix(g);
    const MatrixXd t = d.y;

    SECTION("m = 0 is the first smoothing step") {
        const LFTrace tr = lf_apply(g, t, 0);
        REQUIRE(tr.m() == 0);
        REQUIRE(oracle::max_rel_diff(tr.final(), S * t) < 1e-12);
    }
    SECTION("power sum and closed form") {
        const LFTrace tr = lf_apply(g, t, 6);
        for (int m = 0; m <= 6; ++m) {
            const MatrixXd& phi = tr.iterates[static_cast<std::size_t>(m)];
            REQUIRE(oracle::max_rel_diff(phi, oracle::power_sum(S, t, m)) < 1e-10);
            const MatrixXd I = MatrixXd::Identity(30, 30);
            REQUIRE(oracle::max_rel_diff(phi, t - oracle::matrix_power(I - S, m + 1) * t) < 1e-8);
        }
    }
    SECTION("zero target stays zero") {
        const LFTrace tr = lf_apply(g, MatrixXd::Zero(30, 2), 5);
        for (const auto& it : tr.iterates) REQUIRE(it.isZero(0.0));
    }
    SECTION("multi-column targets are processed column by column") {
        MatrixXd T(30, 2);
        T.col(0) = d.y;
        T.col(1) = d.z.col(0);
        const LFTrace both = lf_apply(g, T, 4);
        REQUIRE(oracle::max_rel_diff(both.final().col(1), lf_apply(g, d.z, 4).final()) < 1e-13);
    }
    SECTION("extending a trace matches a direct run") {
        LFTrace tr = lf_apply(g, t, 2);
        lf_extend(g, tr, t, 7);
        REQUIRE(oracle::max_rel_diff(tr.final(), lf_apply(g, t, 7).final()) < 1e-14);
    }
    SECTION("negative m is rejected") { REQUIRE_THROWS_AS(lf_apply(g, t, -1), ConfigError); }
    SECTION("wrong target length is rejected") { REQUIRE_THROWS_AS(lf_apply(g, MatrixXd::Zero(29, 1), 1), DimensionMismatch); }
}

TEST_CASE("abstract LF recursion on a matrix operator", "[landweber]") {
    std::mt19937_64 rng(41);
    const MatrixXd A = oracle::gaussian_matrix(12, 6, rng);
    const MatrixXd b = oracle::gaussian_matrix(12, 1, rng);
    const double norm = oracle::spectral_norm(A);
    const double a = 1.0 / (norm * norm);
    auto step = [&](const MatrixXd& v) { return MatrixXd(a * A.transpose() * (A * v)); };
    const MatrixXd phi0 = a * A.transpose() * b;

    for (int m : {0, 1, 5, 20}) {
        const MatrixXd R = oracle::regularized_inverse(A, a, m);
        REQUIRE(oracle::max_rel_diff(landweber_final(step, phi0, m), R * b) < 1e-10);
        REQUIRE(oracle::spectral_norm(R) <= std::sqrt(a * (m + 1)) * (1 + 1e-12));
    }

    double prev = std::numeric_limits<double>::infinity();
    for (int m = 0; m <= 40; ++m) {
        const double r = (A * landweber_final(step, phi0, m) - b).norm();
        REQUIRE(r <= prev * (1 + 1e-12));
        prev = r;
    }
}

TEST_CASE("grid evaluation", "[landweber]") {
    const Dataset d = np_dataset(25, 8);
    const GramMatrices g = build_gram(d, {}, {}, {});
    const LFTrace tr = lf_apply(g, d.y, 9);

    SECTION("grid at the data points reproduces the data iterates") {
        const GridKernel gk = build_grid_K(d.z, d, g.kernel, g.measure);
        for (int m : {0, 1, 9}) {
            const MatrixXd at = lf_apply_grid(gk, g, tr, d.y, m);
            REQUIRE(oracle::max_rel_diff(at, tr.iterates[static_cast<std::size_t>(m)]) < 1e-11);
        }
    }
    SECTION("grid recursion matches step-by-step evaluation") {
        const MatrixXd grid = (MatrixXd(4, 1) << -2.0, -0.3, 0.4, 3.0).finished();
        const GridKernel gk = build_grid_K(grid, d, g.kernel, g.measure);
        const double c = g.a * g.scale();
        const MatrixXd bar0 = c * gk.Kbar * g.F * d.y;
        MatrixXd bar = bar0;
        for (int l = 1; l <= 9; ++l) bar = bar - c * gk.Kbar * g.F * tr.iterates[static_cast<std::size_t>(l - 1)] + bar0;
        REQUIRE(oracle::max_rel_diff(lf_apply_grid(gk, g, tr, d.y), bar) < 1e-11);
    }
    SECTION("requesting beyond the trace is an error") {
        const GridKernel gk = build_grid_K(d.z, d, g.kernel, g.measure);
        REQUIRE_THROWS_AS(lf_apply_grid(gk, g, tr, d.y, 10), DimensionMismatch);
    }
}

TEST_CASE("selection of m", "[landweber]") {
    const Dataset d = np_dataset(60, 12);
    const GramMatrices g = build_gram(d, {}, {}, {});

    SECTION("cap of one") {
        const MSelection s = select_m(g, d.y, 0.5, 1);
        REQUIRE(s.m_hat == 1);
        REQUIRE(s.hit_cap);
        REQUIRE(s.curve.size() == 1);
    }
    SECTION("curve is consistent with the reported argmin") {
        LFTrace tr;
        const MSelection s = select_m(g, d.y, 0.5, 5000, 1.25, &tr);
        REQUIRE(s.evaluated_to == static_cast<int>(s.curve.size()));
        REQUIRE(tr.m() == s.evaluated_to);
        const auto best = std::min_element(s.curve.begin(), s.curve.end(),
                                           [](const auto& l, const auto& r) { return l.total < r.total; });
        REQUIRE(best->m == s.m_hat);  // min_element returns the first minimum
        for (const auto& pt : s.curve) {
            REQUIRE(pt.total == Catch::Approx(pt.fit + pt.penalty).epsilon(1e-14));
            const VectorXd r = d.y - tr.iterates[static_cast<std::size_t>(pt.m)];
            REQUIRE(pt.fit == Catch::Approx(std::pow(60.0, -1.25) * r.dot(g.F * r)).epsilon(1e-9));
        }
        if (s.evaluated_to < s.max_m)
            REQUIRE(std::pow(s.evaluated_to + 1.0, 0.5) / 60.0 >= best->total);
    }
    SECTION("a zero response is fitted perfectly, so the smallest m wins") {
        const MSelection s = select_m(g, VectorXd::Zero(60), 2.0, 100);
        REQUIRE(s.m_hat == 1);
        REQUIRE(s.curve.front().fit == 0.0);
        REQUIRE(s.evaluated_to == 1);
    }
    SECTION("equal totals resolve to the smallest m") {
        const MSelection s = select_m(g, VectorXd::Zero(60), 0.0, 100);
        REQUIRE(s.m_hat == 1);
        REQUIRE(s.curve.front().total == 1.0 / 60.0);
    }
    SECTION("invalid cap") { REQUIRE_THROWS_AS(select_m(g, d.y, 0.5, 0), ConfigError); }
    SECTION("multiplier rounding") {
        REQUIRE(scaled_m(7, 0.5) == 4);
        REQUIRE(scaled_m(8, 0.5) == 4);
        REQUIRE(scaled_m(1, 0.5) == 1);
        REQUIRE(scaled_m(7, 2.0) == 14);
        REQUIRE(scaled_m(0, 1.0) == 1);
    }
}

TEST_CASE("objective is U-shaped on simulated samples", "[landweber][mc]") {
    int interior = 0;
    for (std::uint64_t s = 0; s < 100; ++s) {
        const Dataset d = np_dataset(200, 1000 + s);
        const GramMatrices g = build_gram(d, {}, {}, {});
        const MSelection sel = select_m(g, d.y, 0.5, 50 * 200);
        if (sel.m_hat > 1 && !sel.hit_cap && sel.evaluated_to > sel.m_hat) ++interior;
    }
    REQUIRE(interior >= 95);
}

TEST_CASE("row permutation permutes the iterates", "[landweber]") {
    const Dataset d = np_dataset(40, 21);
    std::vector<Index> perm(40);
    std::iota(perm.begin(), perm.end(), Index{0});
    std::shuffle(perm.begin(), perm.end(), std::mt19937_64(4));
    const Dataset dp = d.rows(perm);
    const GramMatrices g = build_gram(d, {}, {}, {});
    const GramMatrices gp = build_gram(dp, {}, {}, {});
    REQUIRE(gp.a == Catch::Approx(g.a).epsilon(1e-12));
    const MatrixXd phi = lf_apply(g, d.y, 15).final();
    const MatrixXd phip = lf_apply(gp, dp.y, 15).final();
    for (Index i = 0; i < 40; ++i) REQUIRE(phip(i, 0) == Catch::Approx(phi(perm[static_cast<std::size_t>(i)], 0)).epsilon(1e-10));
    REQUIRE(select_m(gp, dp.y, 0.5, 2000).m_hat == select_m(g, d.y, 0.5, 2000).m_hat);
}

TEST_CASE("an oversized step constant is reported as divergence", "[landweber]") {
    const Dataset d = np_dataset(30, 5);
    LFConfig lf;
    lf.step_a = 1e6;
    const GramMatrices g = build_gram(d, {}, {}, lf);
    REQUIRE_THROWS_AS(lf_apply(g, d.y, 2000), IterationDivergence);
    REQUIRE_THROWS_AS(select_m(g, d.y, 0.5, 2000), IterationDivergence);
}
