#pragma once

#include <functional>
#include <string>

#include "batchclear/market.hpp"

namespace batchclear {

struct tatonnement_options {
    double initial_step = 0.1;
    double min_step = 1e-7;
    long max_iters = 200'000;
    double tol = 1e-6;  // relative excess-demand tolerance
    // Optional per-iteration sink: (iter, objective = max scaled excess,
    // grad_norm = ||Z||).  Same diagnostics contract as the convex solver.
    std::function<void(long, double, double)> diag;
};

// Aggregate excess demand Z(p): per-asset net amount demanded by all
// participants at valuations p, midpoint selection for set-valued fills.
// p . Z(p) == 0 (Walras aggregation).  Throws unsupported_participant for
// buy offers (non-WGS family).
std::vector<double> aggregate_demand(const batch_instance& inst, const price_vector& p);

// Multiplicative price adjustment p_a <- p_a (1 + step * clip(Z_a/scale_a))
// until max_a |Z_a|/scale_a <= tol, with a final feasibility pass that
// re-solves set-valued fills so clearing holds exactly at limit prices.
batch_solution solve_tatonnement(const batch_instance& inst, const tatonnement_options& opts = {});

}  // namespace batchclear
