#pragma once

#include <vector>

#include "batchclear/market.hpp"

namespace batchclear {

struct reference_options {
    double rate_tol = 1e-12;       // relative bisection tolerance on the rate
    long grid_points = 1'000'000;  // dense scan size when buy offers are present
    double rate_margin = 1e3;      // scan bounds = participant rate hull widened by this factor
};

struct rate_bracket {
    double lo = 0.0;
    double hi = 0.0;
    double rate = 0.0;  // refined crossing
};

struct reference_result {
    batch_solution solution;
    std::vector<rate_bracket> brackets;  // all sign changes found (grid scan)
};

// Two-asset ground truth: bisection on the rate when every participant is
// WGS-capable (sell offers, CFMMs), dense grid scan otherwise (buy offers
// break monotonicity).  The lowest-rate crossing is the canonical solution.
reference_result solve_two_asset(const batch_instance& inst, const reference_options& opts = {});

struct exact_constant_report {
    bool nonzero_trade_feasible = false;
    double rate = 0.0;       // a rate admitting a nonzero CFMM trade, if any
    double cfmm_fill = 0.0;  // the nonzero fill found (units of CFMM-bought asset)
    std::string detail;
};

// Legacy strict-equality mode: scans rates and CFMM fills under the
// f(x') == f(x) rule (offers take their full preferred fill, as in the
// degenerate-CFMM analysis) and reports whether any nonzero CFMM trade is
// consistent with uniform-rate clearing and conservation.
exact_constant_report legacy_exact_constant_check(const batch_instance& inst,
                                                  long rate_grid = 200'001);

}  // namespace batchclear
