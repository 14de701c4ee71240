#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "batchclear/errors.hpp"
#include "batchclear/solver_reference.hpp"
#include "batchclear/verifier.hpp"
#include "support/fixtures.hpp"

using namespace batchclear;

TEST_CASE("LMSR instance clears at exactly rate 1/2 with fill (2/3) ln 2") {
    auto inst = fixtures::lmsr_instance();
    auto result = solve_two_asset(inst);
    REQUIRE(result.solution.status == solve_status::converged);
    const auto& sol = result.solution;
    CHECK(sol.prices[0] / sol.prices[1] == doctest::Approx(0.5).epsilon(1e-10));
    const double fill = -sol.trades[0][0];
    CHECK(fill == doctest::Approx((2.0 / 3.0) * std::log(2.0)).epsilon(1e-9));
    CHECK(all_pass(verify_solution(inst, sol, 1e-8)));
}

TEST_CASE("two constant-product CFMMs clear strictly between their spots") {
    auto inst = fixtures::two_product_instance();
    auto result = solve_two_asset(inst);
    REQUIRE(result.solution.status == solve_status::converged);
    const double rate = result.solution.prices[0] / result.solution.prices[1];
    CHECK(rate > 4.0);
    CHECK(rate < 9.0);
    CHECK(rate == doctest::Approx(6.5).epsilon(1e-10));
    CHECK(all_pass(verify_solution(inst, result.solution, 1e-9)));
}

TEST_CASE("buy offers route through the dense grid scan") {
    batch_instance inst;
    inst.assets = {"A", "B"};
    limit_sell_offer s{0, 1, 100.0, 0.5};
    inst.participants.emplace_back(s);
    limit_buy_offer b;
    b.sell = 1;
    b.buy = 0;
    b.endowment = 70.0;
    b.target = 120.0;
    b.max_price = 1.0;  // B -> A limit; active when the A -> B rate is below 1
    inst.participants.emplace_back(b);

    reference_options opts;
    opts.grid_points = 20000;
    auto result = solve_two_asset(inst, opts);
    REQUIRE(result.solution.status == solve_status::converged);
    REQUIRE(!result.brackets.empty());
    const double rate = result.solution.prices[0] / result.solution.prices[1];
    CHECK(rate == doctest::Approx(0.7).epsilon(1e-9));  // 100 sold == 70/rate bought
    auto report = verify_solution(inst, result.solution, 1e-8);
    CHECK(all_pass(report));
}

TEST_CASE("a one-sided market reports no equilibrium") {
    batch_instance inst;
    inst.assets = {"A", "B"};
    limit_sell_offer s{0, 1, 10.0, 2.0};
    inst.participants.emplace_back(s);
    auto result = solve_two_asset(inst);
    CHECK(result.solution.status == solve_status::no_equilibrium_found);
}

TEST_CASE("wrong arity is rejected") {
    batch_instance inst;
    inst.assets = {"A", "B", "C"};
    limit_sell_offer s{0, 1, 1.0, 1.0};
    inst.participants.emplace_back(s);
    CHECK_THROWS_AS(solve_two_asset(inst), wrong_arity);
}

TEST_CASE("legacy strict-constant mode: the degenerate example admits only the zero trade") {
    auto inst = fixtures::degenerate_instance();
    auto report = legacy_exact_constant_check(inst);
    CHECK_FALSE(report.nonzero_trade_feasible);
}

TEST_CASE("the axiom rule trades where the strict-constant rule cannot") {
    auto inst = fixtures::degenerate_instance();
    auto result = solve_two_asset(inst);
    REQUIRE(result.solution.status == solve_status::converged);
    const double rate = result.solution.prices[0] / result.solution.prices[1];
    CHECK(rate == doctest::Approx(16.0 / 3.0).epsilon(1e-9));
    const auto& cfmm_trade = result.solution.trades[2];
    CHECK(cfmm_trade[0] == doctest::Approx(7.0 / 16.0).epsilon(1e-8));  // buys A
    CHECK(std::abs(cfmm_trade[0]) > 1e-3);
    CHECK(all_pass(verify_solution(inst, result.solution, 1e-8)));
}

TEST_CASE("a no-offer instance is trivially a zero trade under the strict rule") {
    batch_instance inst;
    inst.assets = {"A", "B"};
    cfmm_decl c;
    c.id = "amm";
    c.assets = {0, 1};
    c.reserves = {1.0, 10.0};
    c.fn = trading_function(constant_product{});
    inst.participants.emplace_back(std::move(c));
    auto report = legacy_exact_constant_check(inst);
    CHECK_FALSE(report.nonzero_trade_feasible);
}

TEST_CASE("grid fills satisfy per-participant Walras") {
    std::mt19937 rng(2024);
    fixtures::generator_options gopts;
    gopts.two_asset = true;
    for (int t = 0; t < 20; ++t) {
        auto inst = fixtures::random_instance(rng, gopts);
        auto result = solve_two_asset(inst);
        if (result.solution.status != solve_status::converged) continue;
        const auto& sol = result.solution;
        for (size_t i = 0; i < sol.trades.size(); ++i) {
            const double v = sol.prices[0] * sol.trades[i][0] + sol.prices[1] * sol.trades[i][1];
            double wealth = 1.0;
            if (const auto* s = std::get_if<limit_sell_offer>(&inst.participants[i]))
                wealth += sol.prices[s->sell] * s->amount;
            if (const auto* c = std::get_if<cfmm_decl>(&inst.participants[i]))
                for (size_t k = 0; k < c->assets.size(); ++k)
                    wealth += sol.prices[c->assets[k]] * c->reserves[k];
            CHECK(std::abs(v) <= 1e-9 * wealth);
        }
    }
}

TEST_CASE("single CFMM alone clears at its spot with no trade") {
    batch_instance inst;
    inst.assets = {"A", "B"};
    cfmm_decl c;
    c.id = "solo";
    c.assets = {0, 1};
    c.reserves = {2.0, 5.0};
    c.fn = trading_function(constant_product{});
    inst.participants.emplace_back(std::move(c));
    auto result = solve_two_asset(inst);
    REQUIRE(result.solution.status == solve_status::converged);
    CHECK(result.solution.prices[0] / result.solution.prices[1] == doctest::Approx(2.5).epsilon(1e-9));
    CHECK(std::abs(result.solution.trades[0][0]) < 1e-9);
}
