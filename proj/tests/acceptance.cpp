// Acceptance suite: runs every clearing-engine exit criterion at its stated
// tolerance and prints one PASS/FAIL line per criterion.  Exit code is the
// number of failed criteria.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <random>
#include <string>
#include <vector>

#include "batchclear/analysis.hpp"
#include "batchclear/errors.hpp"
#include "batchclear/rational_extract.hpp"
#include "batchclear/solver_convex.hpp"
#include "batchclear/solver_reference.hpp"
#include "batchclear/solver_tatonnement.hpp"
#include "batchclear/verifier.hpp"
#include "support/fixtures.hpp"
#include "support/oracles.hpp"

using namespace batchclear;
using clock_type = std::chrono::steady_clock;

namespace {

int failures = 0;

void report(int criterion, bool pass, const std::string& detail) {
    std::printf("%s criterion %d: %s\n", pass ? "PASS" : "FAIL", criterion, detail.c_str());
    std::fflush(stdout);
    if (!pass) ++failures;
}

double seconds_since(clock_type::time_point t0) {
    return std::chrono::duration<double>(clock_type::now() - t0).count();
}

bool close(double a, double b, double tol) { return std::abs(a - b) <= tol * std::max(1.0, std::abs(b)); }

// ---- criterion 1: the irrational LMSR equilibrium through all solvers ----
void criterion_1() {
    const auto t0 = clock_type::now();
    auto inst = fixtures::lmsr_instance();
    const double want_rate = 0.5;
    const double want_fill = (2.0 / 3.0) * std::log(2.0);
    std::string why;
    bool ok = true;

    auto ref = solve_two_asset(inst).solution;
    const double ref_rate = ref.prices[0] / ref.prices[1];
    if (std::abs(ref_rate - want_rate) > 1e-10 * want_rate ||
        std::abs(-ref.trades[0][0] - want_fill) > 1e-10 * want_fill) {
        ok = false;
        why += " reference off";
    }

    auto cvx = solve_convex(inst).solution;
    const double cvx_rate = cvx.prices[0] / cvx.prices[1];
    if (std::abs(cvx_rate - want_rate) > 1e-5 * want_rate ||
        std::abs(-cvx.trades[0][0] - want_fill) > 1e-5 * want_fill) {
        ok = false;
        why += " convex off";
    }

    auto tat = solve_tatonnement(inst);
    const double tat_rate = tat.prices[0] / tat.prices[1];
    if (std::abs(tat_rate - want_rate) > 1e-4 * want_rate ||
        std::abs(-tat.trades[0][0] - want_fill) > 1e-4 * want_fill) {
        ok = false;
        why += " tatonnement off";
    }

    auto exact = extract_rational(inst, ref.prices);
    if (exact.status != rational_status::not_rational) {
        ok = false;
        why += " extract_rational should report NotRational";
    }
    const double dt = seconds_since(t0);
    if (dt >= 1.0) {
        ok = false;
        why += " runtime " + std::to_string(dt) + "s";
    }
    report(1, ok,
           "LMSR irrationality: rate 1/2 and fill (2/3)ln2 on all three solvers, NotRational "
           "extraction (" +
               std::to_string(dt) + "s)" + why);
}

// ---- criterion 2: degenerate strict-constant CFMM vs the axiom rule ----
void criterion_2() {
    const auto t0 = clock_type::now();
    auto inst = fixtures::degenerate_instance();
    bool ok = true;
    std::string why;
    auto legacy = legacy_exact_constant_check(inst);
    if (legacy.nonzero_trade_feasible) {
        ok = false;
        why += " legacy mode found a nonzero trade";
    }
    auto sol = solve_two_asset(inst).solution;
    const double cfmm_trade = sol.trades[2][0];
    if (std::abs(cfmm_trade) < 1e-3) {
        ok = false;
        why += " axiom rule did not trade";
    }
    if (!all_pass(verify_solution(inst, sol, 1e-8))) {
        ok = false;
        why += " axiom-rule solution failed verification";
    }
    const double dt = seconds_since(t0);
    if (dt >= 1.0) {
        ok = false;
        why += " runtime";
    }
    report(2, ok,
           "degenerate CFMM: strict-equality mode admits only the zero trade, the axiom rule "
           "trades and verifies (" +
               std::to_string(dt) + "s)" + why);
}

// ---- criterion 3: density formula against the brute-force oracle ----
void criterion_3() {
    trading_function fn(constant_product{});
    std::vector<double> res = {1.0, 10.0};
    auto [d0, d1] = density_from_function(fn, res);
    bool ok = d0.cumulative(40.0) == 0.375;  // exact binary64 value
    std::string why = ok ? "" : " D(40) != 0.375 exactly";
    double worst = 0.0;
    for (int i = 0; i < 200; ++i) {
        const double z = 10.0 * std::pow(60.0, i / 199.0);
        const double sold =
            oracle::sold_at_rate([](double a, double b) { return a * b; }, 1.0, 10.0, z);
        worst = std::max(worst, std::abs(d0.cumulative(z) - sold));
    }
    if (worst > 1e-9) {
        ok = false;
        why += " max oracle gap " + std::to_string(worst);
    }
    report(3, ok, "constant-product density matches the demand oracle on a 200-point grid" + why);
}

struct suite_instance {
    batch_instance inst;
    convex_result solved;
};

std::vector<suite_instance> criterion4_suite;

// jump rates per asset pair, for the kink exclusion in the gradient check
std::vector<std::pair<std::pair<int, int>, double>> jump_rates(const batch_instance& inst) {
    std::vector<std::pair<std::pair<int, int>, double>> out;
    for (const auto& part : inst.participants) {
        if (const auto* s = std::get_if<limit_sell_offer>(&part))
            out.push_back({{s->sell, s->buy}, s->min_price});
        if (const auto* c = std::get_if<cfmm_decl>(&part)) {
            if (const auto* cs = c->fn.get_if<constant_sum>()) {
                out.push_back({{c->assets[0], c->assets[1]}, cs->rate});
                out.push_back({{c->assets[1], c->assets[0]}, 1.0 / cs->rate});
            }
        }
    }
    return out;
}

// ---- criterion 4: convex program properties on random instances ----
void criterion_4() {
    const auto t0 = clock_type::now();
    std::mt19937 rng(20260811);
    fixtures::generator_options gopts;
    gopts.max_assets = 6;
    gopts.max_participants = 10;
    bool ok = true;
    std::string why;
    int nonneg_bad = 0, terminal_bad = 0, grad_bad = 0;
    criterion4_suite.clear();

    std::uniform_real_distribution<double> up(1.0, 6.0);
    std::uniform_real_distribution<double> uy(0.0, 1.5);

    while (criterion4_suite.size() < 50) {
        auto inst = fixtures::random_instance(rng, gopts);
        convex_program prog;
        try {
            prog = build_convex_program(inst);
        } catch (const unsupported_participant&) {
            continue;
        }
        if (prog.half_count() == 0) continue;

        // nonnegativity at 1000 random feasible states
        for (int k = 0; k < 1000; ++k) {
            std::vector<double> p(static_cast<size_t>(prog.asset_count()));
            std::vector<double> y(static_cast<size_t>(prog.half_count()));
            for (auto& v : p) v = up(rng);
            for (auto& v : y) v = uy(rng);
            auto s = prog.make_feasible(std::move(p), std::move(y));
            if (prog.objective(s) < -1e-9) ++nonneg_bad;
        }

        // gradient vs central differences away from the beta kinks
        const auto jumps = jump_rates(inst);
        for (int k = 0; k < 3; ++k) {
            std::vector<double> p(static_cast<size_t>(prog.asset_count()));
            std::vector<double> y(static_cast<size_t>(prog.half_count()));
            for (auto& v : p) v = up(rng);
            for (auto& v : y) v = 0.25 * uy(rng);
            auto s = prog.make_feasible(std::move(p), std::move(y));
            std::vector<double> dp, dy;
            prog.gradient(s, dp, dy);
            for (size_t j = 0; j < s.p.size(); ++j) {
                bool near_kink = false;
                for (const auto& [pair, rate] : jumps) {
                    if (pair.first != static_cast<int>(j) && pair.second != static_cast<int>(j))
                        continue;
                    const double w = s.p[static_cast<size_t>(pair.first)] /
                                     s.p[static_cast<size_t>(pair.second)];
                    if (std::abs(w - rate) < 1e-3 * rate) near_kink = true;
                }
                if (near_kink) continue;
                const double h = 1e-6 * std::max(1.0, s.p[j]);
                program_state hi = s, lo = s;
                hi.p[j] += h;
                lo.p[j] -= h;
                double fd;
                try {
                    fd = (prog.objective(hi, 1e-3) - prog.objective(lo, 1e-3)) / (2.0 * h);
                } catch (const infeasible_state&) {
                    continue;
                }
                if (std::abs(dp[j] - fd) > std::max(1e-6, 1e-4 * std::abs(dp[j])) * 5.0) ++grad_bad;
            }
        }

        // terminal state
        auto solved = solve_convex(inst);
        const double obj = solved.solution.objective_value;
        double scale = 1.0;
        for (int i = 0; i < prog.half_count(); ++i)
            scale = std::max(scale, solved.state.y[static_cast<size_t>(i)]);
        if (obj > 1e-7) {
            ++terminal_bad;
        } else {
            // zero-objective equivalence: volumes match p_A D(p_A/p_B)
            auto prog2 = solved.program;
            double worst = 0.0;
            for (int i = 0; i < prog2.half_count(); ++i) {
                const double pa = solved.state.p[static_cast<size_t>(prog2.sell_asset(i))];
                const double pb = solved.state.p[static_cast<size_t>(prog2.buy_asset(i))];
                const double yi = solved.state.y[static_cast<size_t>(i)];
                // left cumulative: at a pinned marginal rate the fill is
                // set-valued, so accept y between the left and right limits
                const double d_lo = prog2.half_cumulative(i, pa / pb * (1.0 - 1e-9));
                const double d_hi = prog2.half_cumulative(i, pa / pb * (1.0 + 1e-9));
                const double lo = pa * d_lo - 1e-5 * scale;
                const double hi = pa * d_hi + 1e-5 * scale;
                if (yi < lo || yi > hi) worst = std::max(worst, std::max(lo - yi, yi - hi));
            }
            if (worst > 0.0) ++terminal_bad;
        }
        criterion4_suite.push_back({std::move(inst), std::move(solved)});
    }
    const double dt = seconds_since(t0);
    if (nonneg_bad > 0) {
        ok = false;
        why += " " + std::to_string(nonneg_bad) + " negative-objective states";
    }
    if (terminal_bad > 0) {
        ok = false;
        why += " " + std::to_string(terminal_bad) + " instances above terminal tolerance";
    }
    if (grad_bad > 0) {
        ok = false;
        why += " " + std::to_string(grad_bad) + " gradient mismatches";
    }
    if (dt >= 60.0) {
        ok = false;
        why += " runtime " + std::to_string(dt) + "s";
    }
    report(4, ok,
           "convex program nonnegativity, terminal optimality and gradient checks on 50 random "
           "instances (" +
               std::to_string(dt) + "s)" + why);
}

// ---- criterion 5: cross-solver agreement on the 2-asset subset ----
void criterion_5() {
    bool ok = true;
    std::string why;
    int compared = 0;
    for (const auto& si : criterion4_suite) {
        if (si.inst.asset_count() != 2) continue;
        if (si.solved.solution.status != solve_status::converged) continue;
        auto ref = solve_two_asset(si.inst);
        if (ref.solution.status != solve_status::converged) continue;
        ++compared;
        const double r_ref = ref.solution.prices[0] / ref.solution.prices[1];
        const double r_cvx = si.solved.solution.prices[0] / si.solved.solution.prices[1];
        if (std::abs(r_cvx - r_ref) > 1e-5 * r_ref) {
            ok = false;
            why += " convex rate " + std::to_string(r_cvx) + " vs " + std::to_string(r_ref);
        }
        auto tat = solve_tatonnement(si.inst);
        if (tat.status == solve_status::converged) {
            const double r_tat = tat.prices[0] / tat.prices[1];
            if (std::abs(r_tat - r_ref) > 1e-4 * r_ref) {
                ok = false;
                why += " tatonnement rate off";
            }
        }
    }
    if (compared < 5) {
        ok = false;
        why += " too few 2-asset instances (" + std::to_string(compared) + ")";
    }
    report(5, ok,
           "reference/convex agreement to 1e-5 and reference/tatonnement to 1e-4 on " +
               std::to_string(compared) + " two-asset instances" + why);
}

// ---- criterion 6: exact rational extraction ----
void criterion_6() {
    std::mt19937 rng(606);
    fixtures::generator_options gopts;
    gopts.rational_only = true;
    gopts.two_asset = true;
    bool ok = true;
    std::string why;
    int done = 0, attempts = 0;
    while (done < 20 && attempts < 400) {
        ++attempts;
        auto inst = fixtures::random_instance(rng, gopts);
        auto ref = solve_two_asset(inst);
        if (ref.solution.status != solve_status::converged) continue;
        auto cvx = solve_convex(inst);
        if (cvx.solution.status != solve_status::converged) continue;
        auto exact = extract_rational(inst, cvx.solution.prices);
        if (exact.status != rational_status::ok) {
            ok = false;
            why += " extraction failed (" + exact.detail + ")";
            break;
        }
        if (!exact.clearing_exact) {
            ok = false;
            why += " clearing not exact";
            break;
        }
        // exact trades sum to zero in binary64 as well
        for (int a = 0; a < 2; ++a) {
            double net = 0.0;
            for (const auto& row : exact.trades) net += row[static_cast<size_t>(a)].approx;
            if (std::abs(net) > 1e-9) {
                ok = false;
                why += " double-converted residual";
            }
        }
        const double r_ex = exact.prices[0].approx / exact.prices[1].approx;
        const double r_cvx = cvx.solution.prices[0] / cvx.solution.prices[1];
        if (std::abs(r_ex - r_cvx) > 1e-6 * r_cvx) {
            ok = false;
            why += " exact rate " + std::to_string(r_ex) + " vs solver " + std::to_string(r_cvx);
            break;
        }
        ++done;
    }
    if (done < 20) {
        ok = false;
        why += " only " + std::to_string(done) + " extractions";
    }
    report(6, ok, "exact rational extraction with zero residual on 20 random instances" + why);
}

// ---- criterion 7: fee wrapper ----
void criterion_7() {
    bool ok = true;
    std::string why;
    trading_function base(constant_product{});
    std::vector<double> res = {1.0, 10.0};
    std::vector<double> prices = {40.0, 1.0};
    for (double eps : {0.0, 0.003, 0.05}) {
        auto wrapped = apply_fee_wrapper(base, res, eps);
        auto r = compute_demand(wrapped, res, prices);
        const double got = r.spot_after[0] / r.spot_after[1];
        if (std::abs(got - 40.0) > 1e-6 * 40.0) {
            ok = false;
            why += " eps=" + std::to_string(eps) + " spot " + std::to_string(got);
        }
        if (eps == 0.0) {
            auto plain = compute_demand(base, res, prices);
            if (r.new_reserves[0] != plain.new_reserves[0] ||
                r.new_reserves[1] != plain.new_reserves[1] || r.delta[0] != plain.delta[0] ||
                r.delta[1] != plain.delta[1]) {
                ok = false;
                why += " eps=0 not bit-identical";
            }
        }
    }
    // the other trade direction pays the fee on the other asset
    std::vector<double> prices2 = {2.0, 1.0};
    auto wrapped = apply_fee_wrapper(base, res, 0.05);
    auto r2 = compute_demand(wrapped, res, prices2);
    if (std::abs(r2.spot_after[0] / r2.spot_after[1] - 2.0) > 1e-6 * 2.0) {
        ok = false;
        why += " buy-direction spot off";
    }
    report(7, ok, "fee wrapper keeps post-fee spot valuations proportional to batch valuations" + why);
}

// ---- criterion 8: WGS / budget-invariance probe suite ----
void criterion_8() {
    bool ok = true;
    std::string why;
    std::vector<double> r2 = {2.0, 3.0};
    std::vector<double> r2b = {1.0, 1.0};
    std::vector<double> r3 = {1.0, 1.0, 1.0};

    auto expect_wgs = [&](const trading_function& fn, std::span<const double> res, bool want,
                          const char* name) {
        auto v = wgs_probe(fn, res);
        if (v.pass != want) {
            ok = false;
            why += std::string(" ") + name + (want ? " failed WGS" : " passed WGS");
            if (!want && v.pass) return;
            if (v.witness) {
                why += " (demand " + std::to_string(v.witness->before) + " -> " +
                       std::to_string(v.witness->after) + ")";
            }
        }
    };
    expect_wgs(trading_function(constant_product{}), r2, true, "constant-product");
    expect_wgs(trading_function(weighted_product{1.0, 3.0}), r2, true, "weighted-product");
    expect_wgs(trading_function(constant_sum{2.0}), r2, true, "constant-sum");
    expect_wgs(trading_function(lmsr_rule{}), r2b, true, "lmsr");
    expect_wgs(trading_function(hspec{{2.0}}), r2, true, "hspec-const");
    expect_wgs(trading_function(hspec{{1.0, 1.0}}), r2, true, "hspec-linear");
    expect_wgs(trading_function(hspec{{1.5, 0.2, 0.3}}), r2, true, "hspec-quadratic");
    expect_wgs(trading_function(monomial{{1.0, 1.0}}), r2, true, "monomial-xy");
    expect_wgs(trading_function(monomial{{2.0, 3.0, 1.0}}), r3, true, "monomial-3");
    {
        trading_function subs(custom_function{
            [](std::span<const double> x) { return x[0] * x[0] + x[1] * x[2]; }});
        auto v = wgs_probe(subs, r3);
        if (v.pass || !v.witness) {
            ok = false;
            why += " x^2+yz should fail WGS with a witness";
        }
    }

    auto expect_budget = [&](const trading_function& fn, std::span<const double> res, bool want,
                             const char* name) {
        auto v = budget_invariance_probe(fn, res);
        if (v.pass != want) {
            ok = false;
            why += std::string(" ") + name + (want ? " failed budget-invariance" : " passed budget-invariance");
        }
    };
    expect_budget(trading_function(monomial{{2.0, 1.0}}), r2, true, "monomial");
    expect_budget(trading_function(hspec{{1.2, 0.4}}), r2, true, "hspec");
    expect_budget(trading_function(custom_function{
                      [](std::span<const double> x) { return x[0] * x[0] + x[1] * x[2]; }}),
                  r3, true, "x^2+yz");
    expect_budget(trading_function(custom_function{
                      [](std::span<const double> x) { return x[0] + x[1] + x[0] * x[1]; }}),
                  r2, false, "x+y+xy");
    report(8, ok, "WGS and budget-invariance probe verdicts across the trading-function zoo" + why);
}

// ---- criterion 9: trading-rule family identities ----
void criterion_9() {
    bool ok = true;
    std::string why;
    auto v = family_identity_check(10'000, 4242);
    if (!v.pass) {
        ok = false;
        why += " " + v.detail;
    }
    trading_function fn(constant_product{});
    std::vector<double> res = {1.0, 10.0};
    std::vector<double> p = {40.0, 1.0};
    auto a = family_demand(fn, res, p, 1.0);
    auto b = compute_demand(fn, res, p);
    if (a.new_reserves != b.new_reserves || a.delta != b.delta) {
        ok = false;
        why += " alpha=1 demand differs from demand_response";
    }
    report(9, ok, "family identities on 10^4 triples to 1e-12; alpha=1 equals the demand response" + why);
}

// ---- criterion 10: verifier soundness ----
void criterion_10() {
    bool ok = true;
    std::string why;
    auto inst = fixtures::lmsr_instance();
    auto ref = solve_two_asset(inst).solution;
    auto cvx = solve_convex(inst).solution;
    auto tat = solve_tatonnement(inst);
    if (!all_pass(verify_solution(inst, ref, 1e-8))) {
        ok = false;
        why += " reference solution rejected";
    }
    if (!all_pass(verify_solution(inst, cvx, 1e-5))) {
        ok = false;
        why += " convex solution rejected";
    }
    if (!all_pass(verify_solution(inst, tat, 1e-5))) {
        ok = false;
        why += " tatonnement solution rejected";
    }
    auto inst2 = fixtures::two_product_instance();
    auto sol2 = solve_two_asset(inst2).solution;
    if (!all_pass(verify_solution(inst2, sol2, 1e-8))) {
        ok = false;
        why += " two-product solution rejected";
    }

    auto find = [](const std::vector<check_result>& rep, const char* name) -> const check_result* {
        for (const auto& c : rep)
            if (c.name == name) return &c;
        return nullptr;
    };
    auto baseline = verify_solution(inst, ref, 1e-8);

    // conservation violation
    {
        batch_solution bad = ref;
        bad.trades[1][0] += 0.25;
        auto rep = verify_solution(inst, bad, 1e-8);
        if (find(rep, "conservation")->pass) {
            ok = false;
            why += " conservation violation unnoticed";
        }
        if (find(rep, "offer-rationality")->pass != find(baseline, "offer-rationality")->pass) {
            ok = false;
            why += " unrelated check regressed (conservation case)";
        }
    }
    // Walras violation
    {
        batch_solution bad = ref;
        bad.trades[1][1] += 0.5;  // CFMM receives free B
        auto rep = verify_solution(inst, bad, 1e-8);
        if (find(rep, "walras")->pass) {
            ok = false;
            why += " walras violation unnoticed";
        }
    }
    // limit-price violation
    {
        batch_instance li;
        li.assets = {"A", "B"};
        limit_sell_offer s{0, 1, 10.0, 2.0};
        li.participants.emplace_back(s);
        limit_sell_offer t{1, 0, 30.0, 0.1};
        li.participants.emplace_back(t);
        batch_solution bad;
        bad.prices.values = {1.0, 1.0};
        bad.trades = {{-10.0, 10.0}, {10.0, -10.0}};
        auto rep = verify_solution(li, bad, 1e-8);
        if (find(rep, "offer-rationality")->pass) {
            ok = false;
            why += " limit-price violation unnoticed";
        }
        if (!find(rep, "conservation")->pass || !find(rep, "walras")->pass) {
            ok = false;
            why += " unrelated checks regressed (limit case)";
        }
    }
    report(10, ok, "verifier accepts every solver output and pinpoints constructed violations" + why);
}

}  // namespace

int main() {
    criterion_1();
    criterion_2();
    criterion_3();
    criterion_4();
    criterion_5();
    criterion_6();
    criterion_7();
    criterion_8();
    criterion_9();
    criterion_10();
    if (failures == 0) std::printf("all acceptance criteria passed\n");
    return failures;
}
