#pragma once

// Shared instance builders and the random-instance generator used by the
// property and acceptance suites.

#include <random>
#include <string>
#include <vector>

#include "batchclear/market.hpp"

namespace fixtures {

using namespace batchclear;

// One LMSR market maker at reserves (1,1) and a 100-unit sell offer of A at
// limit 1/2: the equilibrium rate is exactly 1/2 with fill (2/3) ln 2.
inline batch_instance lmsr_instance() {
    batch_instance inst;
    inst.assets = {"A", "B"};
    limit_sell_offer s;
    s.sell = 0;
    s.buy = 1;
    s.amount = 100.0;
    s.min_price = 0.5;
    inst.participants.emplace_back(s);
    cfmm_decl c;
    c.id = "lmsr";
    c.assets = {0, 1};
    c.reserves = {1.0, 1.0};
    c.fn = trading_function(lmsr_rule{});
    inst.participants.emplace_back(std::move(c));
    return inst;
}

// The strict-constant degeneracy example: constant product (1,10), a 1 A
// sell at limit 1 and a 3 B sell at limit 1/6 A per B.
inline batch_instance degenerate_instance() {
    batch_instance inst;
    inst.assets = {"A", "B"};
    limit_sell_offer s1;
    s1.sell = 0;
    s1.buy = 1;
    s1.amount = 1.0;
    s1.min_price = 1.0;
    inst.participants.emplace_back(s1);
    limit_sell_offer s2;
    s2.sell = 1;
    s2.buy = 0;
    s2.amount = 3.0;
    s2.min_price = 1.0 / 6.0;
    inst.participants.emplace_back(s2);
    cfmm_decl c;
    c.id = "amm";
    c.assets = {0, 1};
    c.reserves = {1.0, 10.0};
    c.fn = trading_function(constant_product{});
    inst.participants.emplace_back(std::move(c));
    return inst;
}

// Two constant-product CFMMs with spots 4 and 9; rational equilibrium at
// rate 6.5.
inline batch_instance two_product_instance() {
    batch_instance inst;
    inst.assets = {"A", "B"};
    cfmm_decl c1;
    c1.id = "m1";
    c1.assets = {0, 1};
    c1.reserves = {1.0, 4.0};
    c1.fn = trading_function(constant_product{});
    inst.participants.emplace_back(std::move(c1));
    cfmm_decl c2;
    c2.id = "m2";
    c2.assets = {0, 1};
    c2.reserves = {1.0, 9.0};
    c2.fn = trading_function(constant_product{});
    inst.participants.emplace_back(std::move(c2));
    return inst;
}

struct generator_options {
    int max_assets = 6;
    int max_participants = 10;
    bool rational_only = false;  // restrict to constant product/sum + sells
    bool two_asset = false;
    bool with_lmsr = true;
};

// Random WGS batch: sell offers and two-asset CFMMs on a connected pair
// graph, built so that every asset appears in at least one participant.
inline batch_instance random_instance(std::mt19937& rng, const generator_options& opts = {}) {
    std::uniform_int_distribution<int> asset_count(2, opts.two_asset ? 2 : opts.max_assets);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::uniform_real_distribution<double> logu(-1.0, 1.0);

    batch_instance inst;
    const int n = asset_count(rng);
    for (int a = 0; a < n; ++a) inst.assets.push_back(std::string(1, static_cast<char>('A' + a)));

    std::uniform_int_distribution<int> participant_count(2, opts.max_participants);
    const int m = participant_count(rng);
    for (int i = 0; i < m; ++i) {
        // keep the pair graph connected: early participants chain the assets
        int a = i + 1 < n ? i : static_cast<int>(unit(rng) * n) % n;
        int b = i + 1 < n ? i + 1 : static_cast<int>(unit(rng) * n) % n;
        if (a == b) b = (a + 1) % n;
        const double kind = unit(rng);
        if (kind < 0.45) {
            limit_sell_offer s;
            s.sell = a;
            s.buy = b;
            s.amount = 1.0 + 20.0 * unit(rng);
            s.min_price = std::pow(10.0, 0.6 * logu(rng));
            inst.participants.emplace_back(s);
        } else {
            cfmm_decl c;
            c.id = "m" + std::to_string(i);
            c.assets = {a, b};
            c.reserves = {0.5 + 10.0 * unit(rng), 0.5 + 10.0 * unit(rng)};
            const double fk = unit(rng);
            if (opts.rational_only) {
                if (fk < 0.6)
                    c.fn = trading_function(constant_product{});
                else
                    c.fn = trading_function(constant_sum{std::pow(10.0, 0.5 * logu(rng))});
            } else if (fk < 0.4) {
                c.fn = trading_function(constant_product{});
            } else if (fk < 0.6) {
                c.fn = trading_function(weighted_product{0.5 + 2.0 * unit(rng), 0.5 + 2.0 * unit(rng)});
            } else if (fk < 0.8) {
                c.fn = trading_function(constant_sum{std::pow(10.0, 0.5 * logu(rng))});
            } else if (opts.with_lmsr) {
                c.fn = trading_function(lmsr_rule{});
                c.reserves = {0.5 + 2.0 * unit(rng), 0.5 + 2.0 * unit(rng)};
            } else {
                c.fn = trading_function(hspec{{1.0 + unit(rng), unit(rng)}});
            }
            inst.participants.emplace_back(std::move(c));
        }
    }
    return inst;
}

}  // namespace fixtures
