#pragma once

#include <optional>
#include <string>
#include <vector>

#include "batchclear/market.hpp"

namespace batchclear {

// An exact rational, carried as decimal strings so arbitrary precision does
// not leak into the public surface.
struct rational_value {
    std::string num;
    std::string den;
    double approx = 0.0;
};

enum class rational_status {
    ok,
    not_rational,      // a structurally irrational family (LMSR, ...) is active
    active_set_error,  // classification from the approximate solution is inconsistent
};

struct rational_solution {
    rational_status status = rational_status::not_rational;
    std::string detail;
    std::vector<rational_value> prices;           // per asset, min entry == 1 exactly
    std::vector<rational_value> volumes;          // y per half
    std::vector<std::vector<rational_value>> trades;  // per participant per asset
    // Exact per-asset clearing residual; all zero on success.
    bool clearing_exact = false;
};

// Exact equilibrium extraction for markets whose active halves have
// rational-linear p_A D(p_A/p_B) (constant product, constant sum, limit sell
// offers): classifies the active set from `approx_prices`, solves the
// resulting linear system in arbitrary-precision rationals, and verifies
// every inequality exactly.
rational_solution extract_rational(const batch_instance& inst, const price_vector& approx_prices);

}  // namespace batchclear
