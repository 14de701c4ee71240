#pragma once

// Internal: per-participant demand evaluation shared by the iterative
// solvers.  Not installed.

#include <optional>
#include <vector>

#include "batchclear/market.hpp"

namespace batchclear::detail {

// A set-valued fill at a limit price: the participant may sell any amount in
// [lo, hi] of `sell` at `rate` (buy units per sell unit).
struct marginal_fill {
    int participant = -1;
    int sell = 0;
    int buy = 0;
    double rate = 1.0;
    double lo = 0.0;
    double hi = 0.0;
    double chosen = 0.0;
};

struct participant_response {
    std::vector<double> delta;         // full asset dimension, market-facing
    std::vector<double> fee_withheld;  // full asset dimension
    std::vector<marginal_fill> marginals;
};

// Demand of one participant at valuations p.  Offers and constant-sum rules
// whose rate sits within `marginal_window` (relative) of their limit are
// reported as set-valued with the midpoint selected.  `allow_buy_offers`
// gates the non-WGS family.
participant_response respond(const batch_instance& inst, int participant_index,
                             const price_vector& p, double marginal_window,
                             bool allow_buy_offers);

// Adjust the chosen fills of `marginals` so per-asset net flows vanish where
// possible; returns the updated per-participant deltas through `responses`.
void resolve_marginal_fills(const batch_instance& inst,
                            std::vector<participant_response>& responses);

}  // namespace batchclear::detail
