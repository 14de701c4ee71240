#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "batchclear/rational_extract.hpp"
#include "batchclear/solver_reference.hpp"
#include "support/fixtures.hpp"

using namespace batchclear;

TEST_CASE("constant product + constant sum extracts an exact rational equilibrium") {
    batch_instance inst;
    inst.assets = {"A", "B"};
    cfmm_decl prod;
    prod.id = "p";
    prod.assets = {0, 1};
    prod.reserves = {2.0, 8.0};  // spot 4
    prod.fn = trading_function(constant_product{});
    inst.participants.emplace_back(std::move(prod));
    cfmm_decl sum;
    sum.id = "s";
    sum.assets = {0, 1};
    sum.reserves = {0.0, 3.0};  // sells B above rate 1/6 (B per A rate 6)
    sum.fn = trading_function(constant_sum{6.0});
    inst.participants.emplace_back(std::move(sum));

    auto ref = solve_two_asset(inst);
    REQUIRE(ref.solution.status == solve_status::converged);
    auto exact = extract_rational(inst, ref.solution.prices);
    REQUIRE(exact.status == rational_status::ok);
    CHECK(exact.clearing_exact);
    // rate 6 exactly: the sum CFMM is marginal, the product sells 1/3 A
    CHECK(exact.prices[0].approx / exact.prices[1].approx == doctest::Approx(6.0).epsilon(1e-12));
    CHECK(exact.prices[0].num == "6");
    CHECK(exact.prices[0].den == "1");
    CHECK(exact.prices[1].num == "1");
    CHECK(exact.trades[0][0].approx == doctest::Approx(-1.0 / 3.0).epsilon(1e-12));
}

TEST_CASE("the LMSR instance is structurally irrational") {
    auto inst = fixtures::lmsr_instance();
    auto ref = solve_two_asset(inst);
    auto exact = extract_rational(inst, ref.solution.prices);
    CHECK(exact.status == rational_status::not_rational);
}

TEST_CASE("an all-spots-equal no-trade market extracts the exact spot prices") {
    batch_instance inst;
    inst.assets = {"A", "B"};
    cfmm_decl c1;
    c1.id = "m1";
    c1.assets = {0, 1};
    c1.reserves = {2.0, 8.0};
    c1.fn = trading_function(constant_product{});
    inst.participants.emplace_back(std::move(c1));
    cfmm_decl c2;
    c2.id = "m2";
    c2.assets = {0, 1};
    c2.reserves = {1.0, 4.0};
    c2.fn = trading_function(constant_product{});
    inst.participants.emplace_back(std::move(c2));

    price_vector approx;
    approx.values = {4.0, 1.0};
    auto exact = extract_rational(inst, approx);
    REQUIRE(exact.status == rational_status::ok);
    CHECK(exact.prices[0].num == "4");
    CHECK(exact.prices[0].den == "1");
    CHECK(exact.prices[1].num == "1");
    for (const auto& row : exact.trades)
        for (const auto& v : row) CHECK(v.approx == 0.0);
}

TEST_CASE("two products clear at the exact rational midpoint rate") {
    auto inst = fixtures::two_product_instance();
    auto ref = solve_two_asset(inst);
    auto exact = extract_rational(inst, ref.solution.prices);
    REQUIRE(exact.status == rational_status::ok);
    CHECK(exact.prices[0].num == "13");  // 6.5 == 13/2
    CHECK(exact.prices[0].den == "2");
    CHECK(exact.clearing_exact);
}

TEST_CASE("random rational-linear instances extract with zero residual") {
    std::mt19937 rng(55);
    fixtures::generator_options gopts;
    gopts.rational_only = true;
    gopts.two_asset = true;
    int extracted = 0;
    for (int t = 0; t < 30 && extracted < 10; ++t) {
        auto inst = fixtures::random_instance(rng, gopts);
        auto ref = solve_two_asset(inst);
        if (ref.solution.status != solve_status::converged) continue;
        auto exact = extract_rational(inst, ref.solution.prices);
        if (exact.status != rational_status::ok) continue;
        ++extracted;
        CHECK(exact.clearing_exact);
        const double rate_ref = ref.solution.prices[0] / ref.solution.prices[1];
        const double rate_ex = exact.prices[0].approx / exact.prices[1].approx;
        CHECK(rate_ex == doctest::Approx(rate_ref).epsilon(1e-6));
    }
    CHECK(extracted >= 5);
}
