#include "batchclear/market.hpp"

#include <algorithm>
#include <cmath>

#include "batchclear/errors.hpp"

namespace batchclear {

price_vector normalize_prices(const price_vector& p) {
    if (p.values.empty()) throw invalid_prices("empty price vector");
    double mn = p.values.front();
    for (double v : p.values) {
        if (!(v > 0.0) || !std::isfinite(v)) throw invalid_prices("nonpositive price entry");
        mn = std::min(mn, v);
    }
    price_vector out = p;
    for (double& v : out.values) v /= mn;
    return out;
}

int batch_instance::asset_index(const std::string& symbol) const {
    for (int i = 0; i < asset_count(); ++i)
        if (assets[static_cast<size_t>(i)] == symbol) return i;
    return -1;
}

std::vector<double> batch_instance::total_endowment() const {
    std::vector<double> tot(static_cast<size_t>(asset_count()), 0.0);
    auto add = [&](int asset, double amount) {
        if (asset >= 0 && asset < asset_count()) tot[static_cast<size_t>(asset)] += amount;
    };
    for (const auto& part : participants) {
        if (const auto* s = std::get_if<limit_sell_offer>(&part)) {
            add(s->sell, s->amount);
        } else if (const auto* b = std::get_if<limit_buy_offer>(&part)) {
            add(b->sell, b->endowment);
        } else if (const auto* c = std::get_if<cfmm_decl>(&part)) {
            for (size_t k = 0; k < c->assets.size(); ++k)
                if (k < c->reserves.size()) add(c->assets[k], c->reserves[k]);
        }
    }
    return tot;
}

std::vector<validation_issue> validate_instance(const batch_instance& inst) {
    std::vector<validation_issue> issues;
    const int n = inst.asset_count();
    auto bad_asset = [&](int a) { return a < 0 || a >= n; };
    auto push = [&](std::string code, int idx, std::string detail, bool warning = false) {
        issues.push_back({std::move(code), idx, std::move(detail), warning});
    };

    if (inst.participants.empty()) push("empty", -1, "instance has no participants");
    for (int i = 0; i < static_cast<int>(inst.participants.size()); ++i) {
        const auto& part = inst.participants[static_cast<size_t>(i)];
        if (const auto* s = std::get_if<limit_sell_offer>(&part)) {
            if (bad_asset(s->sell) || bad_asset(s->buy)) push("unknown-asset", i, "sell offer references undeclared asset");
            if (s->sell == s->buy) push("self-trade", i, "sell offer trades an asset against itself");
            if (s->amount < 0.0) push("negative-amount", i, "sell offer amount < 0");
            if (!(s->min_price > 0.0)) push("negative-amount", i, "sell offer limit price must be > 0");
        } else if (const auto* b = std::get_if<limit_buy_offer>(&part)) {
            if (bad_asset(b->sell) || bad_asset(b->buy)) push("unknown-asset", i, "buy offer references undeclared asset");
            if (b->sell == b->buy) push("self-trade", i, "buy offer trades an asset against itself");
            if (b->endowment < 0.0 || b->target < 0.0) push("negative-amount", i, "buy offer amounts < 0");
            if (!(b->max_price > 0.0)) push("negative-amount", i, "buy offer limit price must be > 0");
        } else if (const auto* c = std::get_if<cfmm_decl>(&part)) {
            for (int a : c->assets)
                if (bad_asset(a)) push("unknown-asset", i, "cfmm references undeclared asset");
            if (c->reserves.size() != c->assets.size())
                push("arity", i, "cfmm reserves length does not match its asset list");
            for (double r : c->reserves)
                if (r < 0.0) push("negative-amount", i, "cfmm reserve < 0");
            {
                auto sorted = c->assets;
                std::sort(sorted.begin(), sorted.end());
                if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end())
                    push("self-trade", i, "cfmm lists an asset twice");
            }
            const int arity = c->fn.arity();
            if (arity > 0 && arity != static_cast<int>(c->assets.size()))
                push("arity", i, "trading function arity does not match cfmm asset list");
            if (arity == 0 && c->assets.size() != 2 && !c->fn.is<monomial>() && !c->fn.is<custom_function>())
                push("arity", i, "two-asset trading function on != 2 assets");
            if (c->assets.size() > 2 && c->fn.is<custom_function>())
                push("multi-asset-custom", i,
                     "3+-asset custom function: accepted, but rejected by the convex solver", true);
            if (c->fee < 0.0 || c->fee >= 1.0) push("negative-amount", i, "fee outside [0,1)");
        }
    }
    return issues;
}

std::vector<double> net_flows(const batch_instance& inst, const batch_solution& sol) {
    const size_t n = static_cast<size_t>(inst.asset_count());
    if (sol.trades.size() != inst.participants.size())
        throw trade_shape_error("solution trades do not cover every participant");
    std::vector<double> flows(n, 0.0);
    for (const auto& delta : sol.trades) {
        if (delta.size() != n) throw trade_shape_error("trade delta has wrong asset dimension");
        for (size_t a = 0; a < n; ++a) flows[a] += delta[a];
    }
    return flows;
}

}  // namespace batchclear
