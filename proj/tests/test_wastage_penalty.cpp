#include "doctest.h"

#include "wpb/error.hpp"
#include "wpb/wastage_penalty.hpp"

#include <cmath>
#include <random>
#include <vector>

using namespace wpb;

namespace {

// Oracle: plain long-double bisection of wastage == penalty + satisfaction,
// written from the cost definitions without touching the library solvers.
long double oracle_balance(double mean, double max, double agreed, double price, double viol, double sat) {
    auto f = [&](long double r) {
        return (r - mean) / agreed * price - (1.0L - r / max) * viol - sat;
    };
    long double lo = mean, hi = max;
    for (int i = 0; i < 300; ++i) {
        const long double mid = (lo + hi) / 2;
        (f(mid) < 0 ? lo : hi) = mid;
    }
    return (lo + hi) / 2;
}

ErrorCode code_of(auto&& fn) {
    try {
        fn();
    } catch (const Error& e) {
        return e.code();
    }
    FAIL("expected an Error");
    return ErrorCode::InvalidArgument;
}

const DemandStats kStats(40.0, 80.0, 100.0);
const CostRates kRates{1.5, 0.5, 1.0, 0.0};

}  // namespace

TEST_SUITE("wastage_penalty") {

TEST_CASE("DemandStats invariants") {
    CHECK_NOTHROW(DemandStats(0.0, 10.0, 10.0));
    CHECK(code_of([] { DemandStats(50.0, 40.0, 100.0); }) == ErrorCode::InvalidArgument);
    CHECK(code_of([] { DemandStats(40.0, 120.0, 100.0); }) == ErrorCode::InvalidArgument);
    CHECK(code_of([] { DemandStats(0.0, 0.0, 100.0); }) == ErrorCode::InvalidArgument);
    CHECK(code_of([] { DemandStats(-1.0, 10.0, 100.0); }) == ErrorCode::InvalidArgument);
    CHECK(code_of([] { CostRates{-1.0, 0.0, 0.0, 0.0}.validate(); }) == ErrorCode::InvalidArgument);
}

TEST_CASE("wastage_fraction and wastage_cost") {
    CHECK(wastage_fraction(40.0, kStats) == 0.0);
    CHECK(wastage_fraction(100.0, kStats) == doctest::Approx(1.0 - 40.0 / 100.0));
    CHECK(wastage_fraction(70.0, kStats) == doctest::Approx(0.3));
    CHECK(wastage_fraction(20.0, kStats) < 0.0);

    CHECK(wastage_cost(40.0, kStats, kRates) == 0.0);
    CHECK(wastage_cost(70.0, kStats, kRates) == doctest::Approx(0.6));
    CHECK(wastage_cost(70.0, kStats, CostRates{0.0, 0.0, 3.0, 0.0}) == 0.0);
}

TEST_CASE("violation_probability_linear and expected_penalty") {
    CHECK(violation_probability_linear(0.0, kStats) == 1.0);
    CHECK(violation_probability_linear(80.0, kStats) == 0.0);
    CHECK(violation_probability_linear(40.0, kStats) == 0.5);
    CHECK(code_of([] { violation_probability_linear(80.5, kStats); }) == ErrorCode::DomainError);

    CHECK(expected_penalty(0.0, CostRates{0, 0, 9.0, 0}) == 0.0);
    CHECK(expected_penalty(1.0, CostRates{0, 0, 7.0, 0}) == 7.0);
    CHECK(expected_penalty(0.25, CostRates{0, 0, 4.0, 0}) == 1.0);
}

TEST_CASE("balance_closed_form") {
    SUBCASE("reference point") {
        const auto b = balance_closed_form(kStats, kRates);
        const double oracle = static_cast<double>(oracle_balance(40, 80, 100, 2.0, 1.0, 0.0));
        CHECK(oracle == doctest::Approx(14400.0 / 260.0).epsilon(1e-15));
        CHECK(b.r_provisioned == doctest::Approx(oracle).epsilon(1e-14));
        CHECK(b.r_provisioned == doctest::Approx(55.3846).epsilon(1e-6));
        CHECK(b.w == doctest::Approx((b.r_provisioned - 40.0) / 100.0));
        CHECK(b.p_viol == doctest::Approx(1.0 - b.r_provisioned / 80.0));
        CHECK(b.c_wastage == doctest::Approx(b.expected_penalty).epsilon(1e-13));
    }
    SUBCASE("limit cases are exact") {
        CHECK(balance_closed_form(kStats, CostRates{1.5, 0.5, 0.0, 0.0}).r_provisioned == 40.0);
        CHECK(balance_closed_form(kStats, CostRates{0.0, 0.0, 3.0, 0.0}).r_provisioned == 80.0);
    }
    SUBCASE("errors") {
        CHECK(code_of([] { balance_closed_form(kStats, CostRates{0, 0, 0, 0}); }) == ErrorCode::DegenerateCosts);
        CHECK(code_of([] { balance_closed_form(kStats, CostRates{1, 1, 1, 0.2}); }) ==
              ErrorCode::NonzeroSatisfaction);
    }
}

TEST_CASE("balance_numeric") {
    CHECK(balance_numeric(kStats, kRates, 1e-12).r_provisioned ==
          doctest::Approx(14400.0 / 260.0).epsilon(1e-12));

    const CostRates with_sat{1.5, 0.5, 1.0, 0.2};
    const auto b = balance_numeric(kStats, with_sat, 1e-12);
    const double oracle = static_cast<double>(oracle_balance(40, 80, 100, 2.0, 1.0, 0.2));
    CHECK(oracle == doctest::Approx(2.0 / 0.0325).epsilon(1e-14));
    CHECK(b.r_provisioned == doctest::Approx(oracle).epsilon(1e-12));
    CHECK(std::abs(b.c_wastage - b.expected_penalty - 0.2) <= 1e-12);

    CHECK(code_of([] { balance_numeric(kStats, CostRates{1.5, 0.5, 1.0, 10.0}); }) == ErrorCode::NoRootInRange);
    CHECK(code_of([] { balance_numeric(kStats, CostRates{0, 0, 0, 0}); }) == ErrorCode::DegenerateCosts);
    CHECK(code_of([] { balance_numeric(kStats, kRates, 0.0); }) == ErrorCode::InvalidArgument);

    // mean == max collapses the bracket.
    CHECK(balance_numeric(DemandStats(50, 50, 100), kRates).r_provisioned == 50.0);
    CHECK(balance_numeric(kStats, CostRates{2.0, 0.0, 0.0, 0.0}).r_provisioned == 40.0);
    CHECK(balance_numeric(kStats, CostRates{0.0, 0.0, 1.0, 0.0}).r_provisioned == 80.0);
}

TEST_CASE("property: randomized corpus against the oracle") {
    std::mt19937_64 eng(99);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    for (int i = 0; i < 2000; ++i) {
        const double agreed = 1.0 + 1000.0 * unit(eng);
        const double max = agreed * (0.01 + 0.99 * unit(eng));
        const double mean = max * unit(eng);
        const CostRates rates{10.0 * unit(eng), 10.0 * unit(eng), 10.0 * unit(eng), 0.0};
        const DemandStats stats(mean, max, agreed);

        const auto closed = balance_closed_form(stats, rates);
        const auto numeric = balance_numeric(stats, rates);
        const double oracle =
            static_cast<double>(oracle_balance(mean, max, agreed, rates.c_en + rates.c_co2, rates.c_viol, 0.0));

        CHECK(closed.r_provisioned >= mean);
        CHECK(closed.r_provisioned <= max);
        CHECK(std::abs(closed.r_provisioned - oracle) <= 1e-11 * max);
        CHECK(std::abs(numeric.r_provisioned - closed.r_provisioned) <= 1e-9 * max);

        // Price enters only as c_en + c_co2.
        const auto merged = balance_closed_form(stats, CostRates{rates.c_en + rates.c_co2, 0.0, rates.c_viol, 0.0});
        CHECK(merged.r_provisioned == doctest::Approx(closed.r_provisioned).epsilon(1e-14));

        // Monotone in c_viol (up) and in price (down).
        auto more_viol = rates;
        more_viol.c_viol *= 1.5;
        CHECK(balance_closed_form(stats, more_viol).r_provisioned >= closed.r_provisioned * (1 - 1e-15));
        auto more_price = rates;
        more_price.c_en *= 1.5;
        CHECK(balance_closed_form(stats, more_price).r_provisioned <= closed.r_provisioned * (1 + 1e-15));
    }
}

TEST_CASE("heuristic_band") {
    const auto b = evaluate_level(55.3846, kStats, kRates);
    CHECK(heuristic_band(b, 0.0, kStats) == Interval{55.3846, 55.3846});
    const auto band = heuristic_band(b, 0.10, kStats);
    CHECK(band.lower == doctest::Approx(49.84614));
    CHECK(band.upper == doctest::Approx(60.92306));
    const auto high = heuristic_band(evaluate_level(95.0, DemandStats(40, 100, 100), kRates), 0.10,
                                     DemandStats(40, 100, 100));
    CHECK(high.lower == doctest::Approx(85.5));
    CHECK(high.upper == 100.0);
    CHECK(code_of([&] { heuristic_band(b, 1.0, kStats); }) == ErrorCode::InvalidArgument);
}

TEST_CASE("sensitivity_sweep") {
    SUBCASE("c_viol = 0 rows collapse to the mean") {
        const std::vector<DemandStats> stats = {kStats, DemandStats(10, 30, 50)};
        const std::vector<CostRates> rates = {CostRates{1, 1, 0, 0}};
        for (const auto& row : sensitivity_sweep(stats, rates)) {
            REQUIRE(row.ok());
            CHECK(row.result->r_provisioned == row.mean_demand);
        }
    }
    SUBCASE("monotone in c_viol, checked cell by cell against the oracle") {
        std::vector<CostRates> rates;
        for (int k = 0; k <= 10; ++k) rates.push_back(CostRates{1.5, 0.5, static_cast<double>(k), 0});
        const std::vector<DemandStats> stats = {kStats};
        const auto rows = sensitivity_sweep(stats, rates);
        REQUIRE(rows.size() == 11);
        double prev = -1.0;
        for (const auto& row : rows) {
            REQUIRE(row.ok());
            const double oracle = static_cast<double>(oracle_balance(40, 80, 100, 2.0, row.rates.c_viol, 0));
            CHECK(row.result->r_provisioned == doctest::Approx(oracle).epsilon(1e-12));
            CHECK(row.result->r_provisioned >= prev);
            prev = row.result->r_provisioned;
        }
    }
    SUBCASE("cardinality and per-cell errors") {
        const std::vector<DemandStats> stats = {kStats, DemandStats(10, 30, 50)};
        const std::vector<CostRates> rates = {CostRates{1, 1, 1, 0}, CostRates{0, 0, 0, 0}};
        const auto rows = sensitivity_sweep(stats, rates);
        CHECK(rows.size() == 4);
        CHECK(rows[0].ok());
        CHECK_FALSE(rows[1].ok());
        CHECK(rows[1].error.find("DegenerateCosts") != std::string::npos);
        const auto bad = evaluate_cell(90, 80, 100, kRates);
        CHECK_FALSE(bad.ok());
        CHECK(bad.error.find("InvalidArgument") != std::string::npos);
    }
}

}  // TEST_SUITE
