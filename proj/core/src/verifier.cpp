#include "batchclear/verifier.hpp"

#include <algorithm>
#include <cmath>

#include "batchclear/errors.hpp"

namespace batchclear {

namespace {

double rate_of(const price_vector& p, int sell, int buy) { return p[sell] / p[buy]; }

// grad f at the post-fee reserves, with inflow coordinates scaled by (1-eps)
// (the effective one-sided spot of a fee-charging rule).
std::optional<std::vector<double>> post_spot(const cfmm_decl& c, const std::vector<double>& post_fee,
                                             const std::vector<double>& delta_local) {
    if (!c.fn.has_value_function() && !c.fn.is<hspec>() && !c.fn.is<density_pair>()) return std::nullopt;
    try {
        auto v = spot_valuations(c.fn, post_fee);
        for (size_t k = 0; k < v.size(); ++k)
            if (delta_local[k] > 0.0) v[k] *= 1.0 - c.fee;
        return v;
    } catch (const error&) {
        return std::nullopt;
    }
}

struct cfmm_view {
    const cfmm_decl* decl = nullptr;
    std::vector<double> delta_local;
    std::vector<double> post_fee;  // reserves + delta with the fee withheld
    double trade_norm = 0.0;
};

cfmm_view view_of(const cfmm_decl& c, const std::vector<double>& delta, int assets) {
    (void)assets;
    cfmm_view v;
    v.decl = &c;
    v.delta_local.resize(c.assets.size());
    v.post_fee.resize(c.assets.size());
    for (size_t k = 0; k < c.assets.size(); ++k) {
        const double d = delta[static_cast<size_t>(c.assets[k])];
        v.delta_local[k] = d;
        v.post_fee[k] = c.reserves[k] + (d > 0.0 ? (1.0 - c.fee) * d : d);
        v.trade_norm = std::max(v.trade_norm, std::abs(d));
    }
    return v;
}

}  // namespace

std::vector<check_result> verify_solution(const batch_instance& inst, const batch_solution& sol,
                                          double tol) {
    if (sol.trades.size() != inst.participants.size())
        throw incomplete_solution("solution does not cover every participant");
    const int n = inst.asset_count();
    for (const auto& t : sol.trades)
        if (static_cast<int>(t.size()) != n)
            throw incomplete_solution("trade vector has wrong asset dimension");
    const price_vector& p = sol.prices;

    auto scale = inst.total_endowment();
    for (auto& s : scale) s = std::max(s, 1.0);

    std::vector<check_result> report;

    // (1) Walras: every trade is priced at the batch valuations
    {
        double worst = 0.0;
        for (size_t i = 0; i < inst.participants.size(); ++i) {
            double value = 0.0, wealth = 0.0;
            for (int a = 0; a < n; ++a) value += p[a] * sol.trades[i][static_cast<size_t>(a)];
            const auto& part = inst.participants[i];
            if (const auto* s = std::get_if<limit_sell_offer>(&part)) wealth = p[s->sell] * s->amount;
            if (const auto* b = std::get_if<limit_buy_offer>(&part)) wealth = p[b->sell] * b->endowment;
            if (const auto* c = std::get_if<cfmm_decl>(&part))
                for (size_t k = 0; k < c->assets.size(); ++k)
                    wealth += p[c->assets[k]] * c->reserves[k];
            worst = std::max(worst, std::abs(value) / std::max(1.0, wealth));
        }
        report.push_back({"walras", worst <= tol, worst, "max |p . delta| over participant wealth"});
    }

    // (2) conservation
    {
        auto flows = net_flows(inst, sol);
        double worst = 0.0;
        for (int a = 0; a < n; ++a)
            worst = std::max(worst, std::abs(flows[static_cast<size_t>(a)]) / scale[static_cast<size_t>(a)]);
        report.push_back({"conservation", worst <= tol, worst, "max per-asset net flow over endowment"});
    }

    // (3) trading function never decreases
    {
        double worst = 0.0;
        bool pass = true;
        for (size_t i = 0; i < inst.participants.size(); ++i) {
            const auto* c = std::get_if<cfmm_decl>(&inst.participants[i]);
            if (!c || !c->fn.has_value_function()) continue;
            auto v = view_of(*c, sol.trades[i], n);
            const double f0 = *c->fn.value(c->reserves);
            const double f1 = *c->fn.value(v.post_fee);
            const double drop = (f0 - f1) / std::max(1.0, std::abs(f0));
            worst = std::max(worst, drop);
            if (drop > tol) pass = false;
        }
        report.push_back({"function-monotone", pass, std::max(0.0, worst),
                          "max relative decrease of f over CFMMs"});
    }

    // (4) independence: every CFMM trade recomputed from (reserves, fn, p)
    {
        double worst = 0.0;
        for (size_t i = 0; i < inst.participants.size(); ++i) {
            const auto* c = std::get_if<cfmm_decl>(&inst.participants[i]);
            if (!c) continue;
            std::vector<double> lp(c->assets.size());
            for (size_t k = 0; k < c->assets.size(); ++k) lp[k] = p[c->assets[k]];
            trading_function fn = c->fee > 0.0 ? apply_fee_wrapper(c->fn, c->reserves, c->fee) : c->fn;
            // a knife-edge rule within tolerance of its break-even rate is
            // set-valued: any fill in the interval is acceptable
            bool marginal = false;
            if (const auto* cs = c->fn.get_if<constant_sum>(); cs && c->assets.size() == 2) {
                const double rho = lp[0] / lp[1];
                marginal = std::abs(rho - cs->rate) <= tol * cs->rate;
                if (marginal) {
                    const double sold = -sol.trades[i][static_cast<size_t>(c->assets[0])];
                    const double slack = tol * std::max(1.0, c->reserves[0]);
                    bool in_box = sold >= -c->reserves[1] / cs->rate - slack &&
                                  sold <= c->reserves[0] + slack;
                    if (!in_box) worst = std::max(worst, 1.0);
                    continue;
                }
            }
            auto resp = compute_demand(fn, c->reserves, lp);
            for (size_t k = 0; k < c->assets.size(); ++k) {
                const double got = sol.trades[i][static_cast<size_t>(c->assets[k])];
                double want = resp.delta[k];
                if (resp.sell_interval && resp.interval_asset &&
                    static_cast<size_t>(*resp.interval_asset) == k) {
                    const double sold = -got;
                    if (sold >= resp.sell_interval->first - tol &&
                        sold <= resp.sell_interval->second + tol)
                        want = got;
                }
                worst = std::max(worst, std::abs(got - want) /
                                            scale[static_cast<size_t>(c->assets[k])]);
            }
        }
        report.push_back({"independence", worst <= tol, worst,
                          "max deviation from the recomputed demand response"});
    }

    // (5)+(6) no internal arbitrage / spot == batch: post-trade spot
    // valuations of every traded CFMM proportional to p
    {
        double worst = 0.0;
        for (size_t i = 0; i < inst.participants.size(); ++i) {
            const auto* c = std::get_if<cfmm_decl>(&inst.participants[i]);
            if (!c) continue;
            auto v = view_of(*c, sol.trades[i], n);
            double sc = 0.0;
            for (size_t k = 0; k < c->assets.size(); ++k)
                sc = std::max(sc, scale[static_cast<size_t>(c->assets[k])]);
            if (v.trade_norm <= tol * sc) continue;  // no-trade CFMMs may sit off-market
            auto spot = post_spot(*c, v.post_fee, v.delta_local);
            if (!spot) continue;  // demand-defined rule: covered by independence
            for (size_t k = 0; k < c->assets.size(); ++k) {
                for (size_t l = k + 1; l < c->assets.size(); ++l) {
                    const double want = p[c->assets[k]] / p[c->assets[l]];
                    const double got = (*spot)[k] / (*spot)[l];
                    worst = std::max(worst, std::abs(got - want) / want);
                }
            }
        }
        report.push_back({"spot-alignment", worst <= tol, worst,
                          "max relative deviation of post-trade spot rates from batch rates"});
    }

    // offers respect their limit prices
    {
        double worst = 0.0;
        for (size_t i = 0; i < inst.participants.size(); ++i) {
            const auto& part = inst.participants[i];
            double sold = 0.0, cap = 0.0, rate = 0.0, limit = 0.0;
            if (const auto* s = std::get_if<limit_sell_offer>(&part)) {
                sold = -sol.trades[i][static_cast<size_t>(s->sell)];
                cap = s->amount;
                rate = rate_of(p, s->sell, s->buy);
                limit = s->min_price;
            } else if (const auto* b = std::get_if<limit_buy_offer>(&part)) {
                sold = -sol.trades[i][static_cast<size_t>(b->sell)];
                cap = b->endowment;
                rate = rate_of(p, b->sell, b->buy);
                limit = b->max_price;
            } else {
                continue;
            }
            if (sold > tol * std::max(1.0, cap) && rate < limit * (1.0 - tol))
                worst = std::max(worst, (limit - rate) / limit);
            if (sold < -tol * std::max(1.0, cap)) worst = std::max(worst, -sold / std::max(1.0, cap));
            if (sold > cap * (1.0 + tol)) worst = std::max(worst, (sold - cap) / std::max(1.0, cap));
        }
        report.push_back({"offer-rationality", worst <= tol, worst,
                          "violations of limit prices or fill bounds"});
    }

    return report;
}

check_result check_nobeyond(const batch_instance& inst, const batch_solution& sol, double tol) {
    const price_vector& p = sol.prices;
    double worst = 0.0;
    for (size_t i = 0; i < inst.participants.size(); ++i) {
        const auto* c = std::get_if<cfmm_decl>(&inst.participants[i]);
        if (!c || c->assets.size() != 2) continue;
        auto v = view_of(*c, sol.trades[i], inst.asset_count());
        std::optional<std::vector<double>> pre;
        try {
            pre = spot_valuations(c->fn, c->reserves);
        } catch (const error&) {
            continue;
        }
        auto post = post_spot(*c, v.post_fee, v.delta_local);
        if (!post) continue;
        const double r0 = (*pre)[0] / (*pre)[1];
        const double r1 = p[c->assets[0]] / p[c->assets[1]];
        const double r2 = (*post)[0] / (*post)[1];
        const double lo = std::min(r0, r1), hi = std::max(r0, r1);
        if (r2 < lo * (1.0 - tol)) worst = std::max(worst, (lo - r2) / lo);
        if (r2 > hi * (1.0 + tol)) worst = std::max(worst, (r2 - hi) / hi);
    }
    return {"no-beyond", worst <= tol, worst,
            "post-batch spot rates stay between pre-batch spot and batch rate"};
}

}  // namespace batchclear
