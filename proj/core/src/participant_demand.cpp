#include "participant_demand.hpp"

#include <cmath>

#include "batchclear/errors.hpp"

namespace batchclear::detail {

namespace {

bool within_window(double rate, double limit, double window) {
    return std::abs(rate - limit) <= window * limit;
}

void apply_fill(participant_response& r, const marginal_fill& m) {
    r.delta[static_cast<size_t>(m.sell)] -= m.chosen;
    r.delta[static_cast<size_t>(m.buy)] += m.rate * m.chosen;
}

}  // namespace

participant_response respond(const batch_instance& inst, int idx, const price_vector& p,
                             double marginal_window, bool allow_buy_offers) {
    const size_t n = static_cast<size_t>(inst.asset_count());
    participant_response r;
    r.delta.assign(n, 0.0);
    r.fee_withheld.assign(n, 0.0);
    const auto& part = inst.participants[static_cast<size_t>(idx)];

    if (const auto* s = std::get_if<limit_sell_offer>(&part)) {
        const double rate = p[s->sell] / p[s->buy];
        if (within_window(rate, s->min_price, marginal_window)) {
            marginal_fill m{idx, s->sell, s->buy, rate, 0.0, s->amount, 0.5 * s->amount};
            apply_fill(r, m);
            r.marginals.push_back(m);
        } else if (rate > s->min_price) {
            r.delta[static_cast<size_t>(s->sell)] -= s->amount;
            r.delta[static_cast<size_t>(s->buy)] += rate * s->amount;
        }
        return r;
    }
    if (const auto* b = std::get_if<limit_buy_offer>(&part)) {
        if (!allow_buy_offers)
            throw unsupported_participant("limit buy offers are not WGS; use the reference solver");
        const double rate = p[b->sell] / p[b->buy];
        const double cap_sold = std::min(b->target, b->endowment * rate) / rate;
        if (within_window(rate, b->max_price, marginal_window)) {
            marginal_fill m{idx, b->sell, b->buy, rate, 0.0, cap_sold, 0.5 * cap_sold};
            apply_fill(r, m);
            r.marginals.push_back(m);
        } else if (rate > b->max_price) {
            r.delta[static_cast<size_t>(b->sell)] -= cap_sold;
            r.delta[static_cast<size_t>(b->buy)] += rate * cap_sold;
        }
        return r;
    }

    const auto& c = std::get<cfmm_decl>(part);
    std::vector<double> local_p(c.assets.size());
    for (size_t k = 0; k < c.assets.size(); ++k) local_p[k] = p[c.assets[k]];
    trading_function fn = c.fee > 0.0 ? apply_fee_wrapper(c.fn, c.reserves, c.fee) : c.fn;

    // a constant-sum rule within the window of its rate is fully set-valued
    if (const auto* cs = c.fn.get_if<constant_sum>(); cs && c.fee == 0.0 && c.assets.size() == 2) {
        const double rate = local_p[0] / local_p[1];
        if (within_window(rate, cs->rate, marginal_window)) {
            marginal_fill m{idx, c.assets[0], c.assets[1], rate, 0.0, c.reserves[0],
                            0.5 * c.reserves[0]};
            apply_fill(r, m);
            r.marginals.push_back(m);
            return r;
        }
    }
    auto resp = compute_demand(fn, c.reserves, local_p);
    for (size_t k = 0; k < c.assets.size(); ++k) {
        r.delta[static_cast<size_t>(c.assets[k])] += resp.delta[k];
        r.fee_withheld[static_cast<size_t>(c.assets[k])] += resp.fee_withheld[k];
    }
    if (resp.sell_interval && resp.interval_asset && c.assets.size() == 2) {
        const int sl = *resp.interval_asset;
        const int bl = 1 - sl;
        const double rate = local_p[static_cast<size_t>(sl)] / local_p[static_cast<size_t>(bl)];
        const double mid = 0.5 * (resp.sell_interval->first + resp.sell_interval->second);
        // compute_demand already selected the midpoint; record the handle
        marginal_fill m{idx,  c.assets[static_cast<size_t>(sl)], c.assets[static_cast<size_t>(bl)],
                        rate, resp.sell_interval->first,         resp.sell_interval->second,
                        mid};
        r.marginals.push_back(m);
    }
    return r;
}

void resolve_marginal_fills(const batch_instance& inst,
                            std::vector<participant_response>& responses) {
    const size_t n = static_cast<size_t>(inst.asset_count());
    auto flows = [&]() {
        std::vector<double> z(n, 0.0);
        for (const auto& r : responses)
            for (size_t a = 0; a < n; ++a) z[a] += r.delta[a];
        return z;
    };
    for (int pass = 0; pass < 6; ++pass) {
        auto z = flows();
        bool adjusted = false;
        for (auto& r : responses) {
            for (auto& m : r.marginals) {
                const size_t sa = static_cast<size_t>(m.sell);
                // excess demand for the sell asset is absorbed by selling
                // more of it (z > 0 means overdemanded)
                const double want = m.chosen + z[sa];
                const double next = std::min(m.hi, std::max(m.lo, want));
                if (next != m.chosen) {
                    const double ds = next - m.chosen;
                    r.delta[sa] -= ds;
                    r.delta[static_cast<size_t>(m.buy)] += m.rate * ds;
                    z[sa] -= ds;
                    z[static_cast<size_t>(m.buy)] += m.rate * ds;
                    m.chosen = next;
                    adjusted = true;
                }
            }
        }
        if (!adjusted) break;
    }
}

}  // namespace batchclear::detail
