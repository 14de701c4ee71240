#pragma once

#include <optional>
#include <utility>

namespace batchclear {

// Sell up to `amount` units of `sell` for `buy`, requiring at least
// `min_price` units of buy per unit sold.  Utility r0*a + b.
struct limit_sell_offer {
    int sell = 0;
    int buy = 0;
    double amount = 0.0;
    double min_price = 1.0;
};

// Buy up to `target` units of `buy`, paying with `sell` (of which
// `endowment` is available), worth buying while the rate sell->buy exceeds
// `max_price`.  Utility r0*a + min(k, b).
struct limit_buy_offer {
    int sell = 0;
    int buy = 0;
    double endowment = 0.0;
    double target = 0.0;
    double max_price = 1.0;
};

struct offer_fill {
    double sold = 0.0;    // units of the sell asset given up
    double bought = 0.0;  // units of the buy asset received
    // Feasible sold amounts when the rate sits exactly at the limit price;
    // `sold` records the midpoint selection.
    std::optional<std::pair<double, double>> sold_interval;
};

offer_fill offer_demand(const limit_sell_offer& offer, double p_sell, double p_buy);
offer_fill offer_demand(const limit_buy_offer& offer, double p_sell, double p_buy);

}  // namespace batchclear
