#include "batchclear/solver_reference.hpp"

#include <algorithm>
#include <cmath>

#include "batchclear/errors.hpp"
#include "participant_demand.hpp"

namespace batchclear {

namespace {

struct rate_probe {
    std::vector<detail::participant_response> responses;
    double excess_a = 0.0;  // aggregate excess of asset 0
};

// Evaluate the batch at rate (price of asset 0 in units of asset 1), with
// set-valued fills resolved greedily toward clearing.
rate_probe probe_at(const batch_instance& inst, double rate, double window) {
    price_vector p;
    p.values = {rate, 1.0};
    rate_probe out;
    out.responses.reserve(inst.participants.size());
    for (int i = 0; i < static_cast<int>(inst.participants.size()); ++i)
        out.responses.push_back(detail::respond(inst, i, p, window, /*allow_buy_offers=*/true));
    detail::resolve_marginal_fills(inst, out.responses);
    for (const auto& r : out.responses) out.excess_a += r.delta[0];
    return out;
}

// Rates at which some participant's behavior changes discontinuously.
std::vector<double> critical_rates(const batch_instance& inst) {
    std::vector<double> rates;
    for (const auto& part : inst.participants) {
        if (const auto* s = std::get_if<limit_sell_offer>(&part)) {
            rates.push_back(s->sell == 0 ? s->min_price : 1.0 / s->min_price);
        } else if (const auto* b = std::get_if<limit_buy_offer>(&part)) {
            rates.push_back(b->sell == 0 ? b->max_price : 1.0 / b->max_price);
        } else if (const auto* c = std::get_if<cfmm_decl>(&part)) {
            if (const auto* cs = c->fn.get_if<constant_sum>())
                rates.push_back(c->assets[0] == 0 ? cs->rate : 1.0 / cs->rate);
            else if (c->reserves.size() == 2 && c->reserves[0] > 0.0 && c->reserves[1] > 0.0) {
                try {
                    auto spot = spot_valuations(c->fn, c->reserves);
                    const double s = spot[0] / spot[1];
                    rates.push_back(c->assets[0] == 0 ? s : 1.0 / s);
                } catch (const error&) {
                }
            }
        }
    }
    std::erase_if(rates, [](double r) { return !(r > 0.0) || !std::isfinite(r); });
    std::sort(rates.begin(), rates.end());
    return rates;
}

double snap_rate(double rate, const std::vector<double>& critical, double rel = 1e-11) {
    for (double c : critical)
        if (std::abs(rate - c) <= rel * c) return c;
    return rate;
}

batch_solution build_solution(const batch_instance& inst, double rate, double window,
                              solve_status status, long iterations) {
    auto probe = probe_at(inst, rate, window);
    batch_solution sol;
    sol.prices = normalize_prices(price_vector{{rate, 1.0}});
    sol.iterations = iterations;
    sol.status = status;
    sol.fee_withheld.assign(2, 0.0);
    const auto scale = inst.total_endowment();
    double rel = 0.0;
    for (size_t a = 0; a < 2; ++a) {
        double z = 0.0;
        for (const auto& r : probe.responses) z += r.delta[a];
        rel = std::max(rel, std::abs(z) / std::max(1.0, scale[a]));
    }
    sol.objective_value = rel;
    for (auto& r : probe.responses) {
        sol.trades.push_back(std::move(r.delta));
        for (size_t a = 0; a < 2; ++a) sol.fee_withheld[a] += r.fee_withheld[a];
    }
    return sol;
}

}  // namespace

reference_result solve_two_asset(const batch_instance& inst, const reference_options& opts) {
    if (inst.asset_count() != 2) throw wrong_arity("reference solver handles exactly two assets");
    const auto critical = critical_rates(inst);
    double lo = 1.0 / opts.rate_margin, hi = opts.rate_margin;
    if (!critical.empty()) {
        lo = critical.front() / opts.rate_margin;
        hi = critical.back() * opts.rate_margin;
    }

    bool has_buy = false;
    for (const auto& part : inst.participants)
        if (std::holds_alternative<limit_buy_offer>(part)) has_buy = true;

    auto excess = [&](double rate) { return probe_at(inst, rate, 0.0).excess_a; };

    reference_result out;
    long iters = 0;

    auto refine = [&](double a, double b) {
        // bisection on a sign change of the excess demand of asset 0
        double fa = excess(a);
        for (int i = 0; i < 220 && (b - a) > opts.rate_tol * a; ++i) {
            ++iters;
            const double mid = std::sqrt(a * b);
            const double fm = excess(mid);
            if ((fa > 0.0) == (fm > 0.0)) {
                a = mid;
                fa = fm;
            } else {
                b = mid;
            }
        }
        return 0.5 * (a + b);
    };

    if (!has_buy) {
        // WGS participants: excess demand of asset 0 is nonincreasing in its
        // relative price, so one bracket suffices.
        double flo = excess(lo), fhi = excess(hi);
        if (!(flo > 0.0) || !(fhi < 0.0)) {
            // one-sided market; report, do not assert
            out.solution = build_solution(inst, std::sqrt(lo * hi), 0.0,
                                          solve_status::no_equilibrium_found, iters);
            return out;
        }
        double rate = snap_rate(refine(lo, hi), critical);
        out.brackets.push_back({lo, hi, rate});
        out.solution = build_solution(inst, rate, 0.0, solve_status::converged, iters);
        return out;
    }

    // buy offers break monotonicity: dense log-spaced scan, then local
    // refinement of every sign change; the lowest rate is canonical
    const long n = std::max<long>(opts.grid_points, 1024);
    double prev_rate = lo, prev_z = excess(lo);
    for (long i = 1; i <= n; ++i) {
        const double r = lo * std::pow(hi / lo, static_cast<double>(i) / static_cast<double>(n));
        const double z = excess(r);
        ++iters;
        if ((prev_z > 0.0) != (z > 0.0) || z == 0.0) {
            const double refined = snap_rate(refine(prev_rate, r), critical);
            out.brackets.push_back({prev_rate, r, refined});
        }
        prev_rate = r;
        prev_z = z;
    }
    if (out.brackets.empty()) {
        out.solution =
            build_solution(inst, std::sqrt(lo * hi), 0.0, solve_status::no_equilibrium_found, iters);
        return out;
    }
    out.solution =
        build_solution(inst, out.brackets.front().rate, 0.0, solve_status::converged, iters);
    return out;
}

exact_constant_report legacy_exact_constant_check(const batch_instance& inst, long rate_grid) {
    if (inst.asset_count() != 2) throw wrong_arity("legacy check handles exactly two assets");
    const cfmm_decl* cfmm = nullptr;
    for (const auto& part : inst.participants) {
        if (const auto* c = std::get_if<cfmm_decl>(&part)) {
            if (cfmm) throw unsupported_participant("legacy check expects a single CFMM");
            cfmm = c;
        }
    }
    if (!cfmm || !cfmm->fn.has_value_function())
        throw unsupported_participant("legacy check needs one CFMM with an explicit f");

    const auto scale = inst.total_endowment();
    const double tol = 1e-9 * std::max({1.0, scale[0], scale[1]});
    const double f0 = *cfmm->fn.value(cfmm->reserves);

    // offers take their full preferred fill at or above their limit price
    auto offers_excess_a = [&](double rate) {
        double z = 0.0;
        for (const auto& part : inst.participants) {
            if (const auto* s = std::get_if<limit_sell_offer>(&part)) {
                const double r = s->sell == 0 ? rate : 1.0 / rate;
                if (r >= s->min_price) z += s->sell == 0 ? -s->amount : r * s->amount;
            } else if (const auto* b = std::get_if<limit_buy_offer>(&part)) {
                const double r = b->sell == 0 ? rate : 1.0 / rate;
                if (r >= b->max_price) {
                    const double sold = std::min(b->target, b->endowment * r) / r;
                    z += b->sell == 0 ? -sold : r * sold;
                }
            }
        }
        return z;
    };

    const bool cfmm_first = cfmm->assets[0] == 0;
    auto candidates = critical_rates(inst);
    double lo = candidates.empty() ? 1e-3 : candidates.front() / 10.0;
    double hi = candidates.empty() ? 1e3 : candidates.back() * 10.0;

    exact_constant_report report;
    report.detail = "no rate admits a nonzero exact-constant CFMM trade";
    auto try_rate = [&](double rate) {
        if (report.nonzero_trade_feasible) return;
        // conservation pins the CFMM trade: it must absorb the offers' flow
        const double x_req = -offers_excess_a(rate);  // units of asset 0 the CFMM buys
        if (std::abs(x_req) <= tol) return;           // only the zero trade
        const double local0 = cfmm_first ? x_req : -rate * x_req;
        const double local1 = cfmm_first ? -rate * x_req : x_req;
        double nr[2] = {cfmm->reserves[0] + local0, cfmm->reserves[1] + local1};
        if (nr[0] < 0.0 || nr[1] < 0.0) return;
        const double f1 = *cfmm->fn.value(std::span<const double>(nr, 2));
        if (std::abs(f1 - f0) <= 1e-9 * std::max(1.0, std::abs(f0))) {
            report.nonzero_trade_feasible = true;
            report.rate = rate;
            report.cfmm_fill = x_req;
            report.detail = "strict-constant CFMM trade found";
        }
    };
    for (double c : candidates) try_rate(c);
    for (long i = 0; i <= rate_grid && !report.nonzero_trade_feasible; ++i)
        try_rate(lo * std::pow(hi / lo, static_cast<double>(i) / static_cast<double>(rate_grid)));
    return report;
}

}  // namespace batchclear
