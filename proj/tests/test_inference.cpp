#include <catch_amalgamated.hpp>

#include "lfiv/dgp.hpp"
#include "lfiv/inference.hpp"
#include "oracles.hpp"

using namespace lfiv;
using Catch::Approx;

TEST_CASE("plus-one p-value and Wald statistic", "[inference]") {
    REQUIRE(plus_one_p_value(1.0, {}) == 1.0);
    REQUIRE(plus_one_p_value(2.0, {1.0, 2.0, 3.0}) == Approx(0.75));
    REQUIRE(plus_one_p_value(10.0, {1.0, 2.0, 3.0}) == Approx(0.25));
    REQUIRE(wald_statistic(VectorXd::Constant(2, 1.5), VectorXd::Constant(2, 1.0), 100) == Approx(50.0));
}

TEST_CASE("warp-speed rejection rates", "[inference]") {
    SECTION("no sample statistics") { REQUIRE(warp_speed_rejections({}, {1.0}, {0.05}) == std::vector<double>{0.0}); }
    SECTION("all sample statistics tie with the pool") {
        const std::vector<double> r = warp_speed_rejections({1.0, 1.0}, std::vector<double>(50, 1.0), {0.05, 1.0});
        REQUIRE(r[0] == 0.0);
        REQUIRE(r[1] == 1.0);
    }
    SECTION("hand-counted example") {
        std::vector<double> pool;
        for (int i = 1; i <= 19; ++i) pool.push_back(i);
        // p = (1 + #pool >= s) / 20
        const auto r = warp_speed_rejections({0.5, 18.5, 19.5, 25.0}, pool, {0.05, 0.10});
        REQUIRE(r[0] == Approx(0.5));
        REQUIRE(r[1] == Approx(0.75));
    }
}

TEST_CASE("pairwise bootstrap", "[inference]") {
    const Dataset d = generate({60, 1.0, 4});
    FitConfig cfg;

    SECTION("B < 1 is rejected") {
        REQUIRE_THROWS_AS(pairwise_bootstrap(d, cfg, 0, 1), ConfigError);
        REQUIRE_THROWS_AS(wald_test(d, VectorXd::Ones(1), cfg, 0, 1), ConfigError);
    }
    SECTION("one draw is deterministic and equals the refit on the resample") {
        const BootstrapResult a = pairwise_bootstrap(d, cfg, 1, 77);
        const BootstrapResult b = pairwise_bootstrap(d, cfg, 1, 77);
        REQUIRE(a.replicates.size() == 1);
        REQUIRE(a.replicates[0] == b.replicates[0]);
        std::mt19937_64 rng(derive_seed(77, 0));
        const Dataset star = d.rows(resample_rows(60, rng));
        REQUIRE(a.redraws == 0);
        REQUIRE(a.replicates[0](0) == fit_beta(star, {}, {}, {}).beta(0));
    }
    SECTION("results do not depend on the number of threads") {
        const BootstrapResult one = pairwise_bootstrap(d, cfg, 12, 5, 1);
        const BootstrapResult four = pairwise_bootstrap(d, cfg, 12, 5, 4);
        REQUIRE(one.replicates == four.replicates);
    }
    SECTION("testing at beta-hat gives p = 1") {
        const VectorXd b = fit_beta(d, {}, {}, {}).beta;
        const WaldResult w = wald_test(d, b, cfg, 19, 3);
        REQUIRE(w.statistic == 0.0);
        REQUIRE(w.p_value == 1.0);
    }
    SECTION("wrong null dimension") {
        REQUIRE_THROWS_AS(wald_test(d, VectorXd::Ones(2), cfg, 5, 1), DimensionMismatch);
    }
    SECTION("rescaling the endogenous regressor Z leaves the test unchanged") {
        Dataset scaled = d;
        scaled.z *= 3.0;
        const WaldResult a = wald_test(d, VectorXd::Constant(1, 0.8), cfg, 49, 11);
        const WaldResult b = wald_test(scaled, VectorXd::Constant(1, 0.8), cfg, 49, 11);
        REQUIRE(b.statistic == Approx(a.statistic).epsilon(1e-8));
        REQUIRE(b.p_value == a.p_value);
    }
    SECTION("rejection at 10% whenever at 5%") {
        for (std::uint64_t s = 0; s < 5; ++s) {
            const WaldResult w = wald_test(generate({60, 1.0, 100 + s}), VectorXd::Ones(1), cfg, 39, s);
            REQUIRE(w.p_value > 0.0);
            REQUIRE(w.p_value <= 1.0);
            if (w.p_value <= 0.05) REQUIRE(w.p_value <= 0.10);
        }
    }
}

TEST_CASE("bootstrap spread matches the sampling spread at n = 200", "[inference][slow]") {
    const Dataset d = generate({200, 1.0, 2024});
    const BootstrapResult r = pairwise_bootstrap(d, {}, 399, 8);
    REQUIRE(r.failed_draws == 0);
    VectorXd b(static_cast<Index>(r.replicates.size()));
    for (std::size_t i = 0; i < r.replicates.size(); ++i) b(static_cast<Index>(i)) = r.replicates[i](0);
    const double sd = oracle::welford_sd(b);
    REQUIRE(sd > 0.7 * 0.0894);
    REQUIRE(sd < 1.3 * 0.0894);
}
