#pragma once

#include <string>
#include <variant>
#include <vector>

#include "batchclear/offers.hpp"
#include "batchclear/trading_function.hpp"

namespace batchclear {

// Strictly positive per-asset valuations.  The exchange rate from asset a to
// asset b is values[a] / values[b].
struct price_vector {
    std::vector<double> values;

    double operator[](int i) const { return values[static_cast<size_t>(i)]; }
    double& operator[](int i) { return values[static_cast<size_t>(i)]; }
    int size() const { return static_cast<int>(values.size()); }
};

// Rescale so the minimum entry is exactly 1 (the convex program constrains
// p_j >= 1, so normalized prices are feasible by construction).
price_vector normalize_prices(const price_vector& p);

// A market-making declaration: reserves plus a trading rule, optionally
// charging fee epsilon on net inflows.
struct cfmm_decl {
    std::string id;
    std::vector<int> assets;  // global asset indices, order matches reserves
    std::vector<double> reserves;
    trading_function fn;
    double fee = 0.0;
};

using participant = std::variant<limit_sell_offer, limit_buy_offer, cfmm_decl>;

struct instance_options {
    double tol = 1e-8;  // relative verification tolerance
};

struct batch_instance {
    std::vector<std::string> assets;  // symbol table; index order is price order
    std::vector<participant> participants;
    instance_options options;

    int asset_count() const { return static_cast<int>(assets.size()); }
    int asset_index(const std::string& symbol) const;  // -1 when unknown
    // Total endowment per asset over all participants (the verification
    // scale).
    std::vector<double> total_endowment() const;
};

struct check_result {
    std::string name;
    bool pass = false;
    double residual = 0.0;
    std::string detail;
};

enum class solve_status { converged, not_converged, no_equilibrium_found };

struct batch_solution {
    price_vector prices;
    // Per-participant net asset deltas (full asset dimension, declaration
    // order).  Positive = received.
    std::vector<std::vector<double>> trades;
    double objective_value = 0.0;
    long iterations = 0;
    solve_status status = solve_status::converged;
    std::vector<check_result> verifier_report;
    // Per-asset fee withheld from fee-charging CFMMs (counted by the
    // sequencer's fee sink).
    std::vector<double> fee_withheld;
};

struct validation_issue {
    std::string code;  // "unknown-asset", "negative-amount", "self-trade", "arity", ...
    int participant = -1;
    std::string detail;
    bool warning = false;
};

// Structural checks; an empty report (ignoring warnings) means well-formed.
std::vector<validation_issue> validate_instance(const batch_instance& inst);

// Sum of all participant deltas per asset; ~0 at equilibrium (conservation).
std::vector<double> net_flows(const batch_instance& inst, const batch_solution& sol);

}  // namespace batchclear
