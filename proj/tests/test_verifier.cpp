#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "batchclear/errors.hpp"
#include "batchclear/solver_reference.hpp"
#include "batchclear/verifier.hpp"
#include "support/fixtures.hpp"

using namespace batchclear;

namespace {

const check_result* find(const std::vector<check_result>& report, const std::string& name) {
    for (const auto& c : report)
        if (c.name == name) return &c;
    return nullptr;
}

}  // namespace

TEST_CASE("the reference LMSR solution passes every check") {
    auto inst = fixtures::lmsr_instance();
    auto sol = solve_two_asset(inst).solution;
    auto report = verify_solution(inst, sol, 1e-8);
    for (const auto& c : report) {
        INFO(c.name, " residual ", c.residual);
        CHECK(c.pass);
        CHECK(c.residual < 1e-8);
    }
}

TEST_CASE("doubling one CFMM trade breaks conservation and Walras, nothing else regresses") {
    auto inst = fixtures::lmsr_instance();
    auto sol = solve_two_asset(inst).solution;
    auto good = verify_solution(inst, sol, 1e-8);
    batch_solution bad = sol;
    for (auto& d : bad.trades[1]) d *= 2.0;
    auto report = verify_solution(inst, bad, 1e-8);
    CHECK_FALSE(find(report, "conservation")->pass);
    CHECK_FALSE(find(report, "walras")->pass);
    // checks that passed before and are unrelated to the tampering stay green
    CHECK(find(report, "offer-rationality")->pass == find(good, "offer-rationality")->pass);
}

TEST_CASE("an offer filled below its limit price fails offer-rationality") {
    batch_instance inst;
    inst.assets = {"A", "B"};
    limit_sell_offer s{0, 1, 10.0, 2.0};
    inst.participants.emplace_back(s);
    limit_sell_offer t{1, 0, 30.0, 0.1};
    inst.participants.emplace_back(t);

    batch_solution sol;
    sol.prices.values = {1.0, 1.0};  // rate 1 < limit 2
    sol.trades = {{-10.0, 10.0}, {10.0, -10.0}};
    auto report = verify_solution(inst, sol, 1e-8);
    CHECK_FALSE(find(report, "offer-rationality")->pass);
    CHECK(find(report, "conservation")->pass);
    CHECK(find(report, "walras")->pass);
}

TEST_CASE("verification is invariant to rescaling the price vector") {
    auto inst = fixtures::lmsr_instance();
    auto sol = solve_two_asset(inst).solution;
    batch_solution scaled = sol;
    for (auto& v : scaled.prices.values) v *= 37.0;
    auto r1 = verify_solution(inst, sol, 1e-8);
    auto r2 = verify_solution(inst, scaled, 1e-8);
    REQUIRE(r1.size() == r2.size());
    for (size_t i = 0; i < r1.size(); ++i) {
        CHECK(r1[i].pass == r2[i].pass);
        CHECK(r1[i].residual == doctest::Approx(r2[i].residual).epsilon(1e-9));
    }
}

TEST_CASE("missing trades raise incomplete_solution") {
    auto inst = fixtures::lmsr_instance();
    auto sol = solve_two_asset(inst).solution;
    sol.trades.pop_back();
    CHECK_THROWS_AS(verify_solution(inst, sol, 1e-8), incomplete_solution);
}

TEST_CASE("no-beyond: the CFMM lands exactly on the batch rate") {
    batch_instance inst;
    inst.assets = {"A", "B"};
    cfmm_decl c;
    c.id = "amm";
    c.assets = {0, 1};
    c.reserves = {1.0, 10.0};
    c.fn = trading_function(constant_product{});
    inst.participants.emplace_back(std::move(c));
    limit_sell_offer s{1, 0, 100.0, 1.0 / 100.0};
    inst.participants.emplace_back(s);

    batch_solution sol;
    sol.prices.values = {40.0, 1.0};
    sol.trades = {{-0.375, 15.0}, {0.375, -15.0}};  // r2 == 40 == r1
    CHECK(check_nobeyond(inst, sol).pass);

    batch_solution beyond = sol;
    // hand-built overshoot: spot after = 50 > batch rate 40
    const double a1 = std::sqrt(10.0 / 50.0);  // keep f constant-ish, spot 50
    const double b1 = 50.0 * a1;
    beyond.trades[0] = {a1 - 1.0, b1 - 10.0};
    beyond.trades[1] = {1.0 - a1, 10.0 - b1};
    CHECK_FALSE(check_nobeyond(inst, beyond).pass);
}

TEST_CASE("no-beyond: a no-trade CFMM at its own spot passes") {
    batch_instance inst;
    inst.assets = {"A", "B"};
    cfmm_decl c;
    c.id = "amm";
    c.assets = {0, 1};
    c.reserves = {1.0, 10.0};
    c.fn = trading_function(constant_product{});
    inst.participants.emplace_back(std::move(c));
    batch_solution sol;
    sol.prices.values = {10.0, 1.0};
    sol.trades = {{0.0, 0.0}};
    CHECK(check_nobeyond(inst, sol).pass);
}
