#include <catch_amalgamated.hpp>

#include <limits>
#include <numeric>

#include "lfiv/data.hpp"
#include "lfiv/estimators.hpp"

using namespace lfiv;

namespace {

Dataset small_dataset(Index n) {
    Dataset d;
    d.y = VectorXd::LinSpaced(n, 0.0, 1.0);
    d.x = MatrixXd::Ones(n, 1);
    d.z = VectorXd::LinSpaced(n, -1.0, 1.0);
    d.w = MatrixXd::Random(n, 2);
    return d;
}

} // namespace

TEST_CASE("validate accepts well-formed input", "[data]") {
    const Dataset d = small_dataset(3);
    REQUIRE_NOTHROW(validate(d));
    // idempotent, no side effects
    const Dataset copy = d;
    validate(d);
    validate(d);
    REQUIRE(d.y == copy.y);
    REQUIRE(d.w == copy.w);
}

TEST_CASE("validate reports the offending field on a row-count mismatch", "[data]") {
    Dataset d = small_dataset(3);
    d.z = VectorXd::LinSpaced(4, -1.0, 1.0);
    try {
        validate(d);
        FAIL("expected DimensionMismatch");
    } catch (const DimensionMismatch& e) {
        REQUIRE(e.field() == "z");
        REQUIRE(e.kind() == ErrorKind::data);
    }
}

TEST_CASE("validate reports the row of a non-finite value", "[data]") {
    Dataset d = small_dataset(3);
    d.y(2) = std::numeric_limits<double>::quiet_NaN();
    try {
        validate(d);
        FAIL("expected NonFiniteValue");
    } catch (const NonFiniteValue& e) {
        REQUIRE(e.row() == 2);
        REQUIRE(e.field() == "y");
    }
    d.y(2) = 0.0;
    d.w(1, 1) = std::numeric_limits<double>::infinity();
    REQUIRE_THROWS_AS(validate(d), NonFiniteValue);
}

TEST_CASE("validate requires at least two rows", "[data]") {
    REQUIRE_THROWS_AS(validate(small_dataset(1)), DimensionMismatch);
}

TEST_CASE("kappa = 0 encodes the fully nonparametric model", "[data]") {
    Dataset d = small_dataset(12);
    d.x = MatrixXd();  // no linear part at all
    REQUIRE(d.fully_nonparametric());
    REQUIRE_NOTHROW(validate(d));
    LFConfig lf;
    lf.fixed_m = 3;
    const PhiEstimate e = fit_phi_np(d, {}, {}, lf);
    REQUIRE(e.at_data.size() == 12);
    REQUIRE(e.m_used == 3);

    std::vector<Index> idx(12);
    std::iota(idx.begin(), idx.end(), 0);
    const Dataset r = d.rows(idx);
    REQUIRE(r.fully_nonparametric());
    REQUIRE(r.y == d.y);
}
