#pragma once

#include <map>
#include <string>
#include <vector>

#include "batchclear/market.hpp"

namespace batchclear {

enum class sequence_solver { reference, convex, tatonnement };

struct sequence_options {
    // Accumulated fees re-enter CFMM reserves before the next batch when
    // true; otherwise they stay in the fee sink.
    bool carry_fee_deposit = false;
    sequence_solver solver = sequence_solver::reference;
    double tol = 1e-6;
};

struct cfmm_state {
    std::string id;
    std::vector<int> assets;
    std::vector<double> reserves;
};

struct sequence_result {
    std::vector<batch_solution> solutions;
    std::vector<cfmm_state> final_states;
    std::vector<double> fee_sink;  // per asset, global indices of batch 0
    std::vector<double> clearing_rates;  // rate of asset 0 vs asset 1 per batch (2-asset runs)
};

// Run batches in order, carrying every CFMM's post-batch reserves (keyed by
// its id) into the next batch.  Every batch must verify; total holdings per
// asset (fee sink included) are conserved across the sequence.
sequence_result run_sequence(const std::vector<batch_instance>& batches,
                             const sequence_options& opts = {});

}  // namespace batchclear
