#pragma once

#include <vector>

#include "batchclear/market.hpp"

namespace batchclear {

// Machine-checked axiom suite over (instance, solution) pairs.  Checks, with
// residuals relative to the per-asset total endowment:
//   walras            every participant's trade is priced at the batch rates
//   conservation      per-asset net flow ~ 0
//   function-monotone f(new reserves) >= f(old reserves) - tol per CFMM
//   independence      each CFMM trade recomputed from (reserves, fn, p) alone
//   spot-alignment    traded CFMMs' post spot valuations proportional to p
//   offer-rationality offers respect their limit prices
// Throws incomplete_solution when trades do not cover all participants.
std::vector<check_result> verify_solution(const batch_instance& inst, const batch_solution& sol,
                                          double tol);

inline bool all_pass(const std::vector<check_result>& report) {
    for (const auto& c : report)
        if (!c.pass) return false;
    return true;
}

// Post-batch spot rate r2 of every CFMM must lie in the closed interval
// between its pre-batch spot r0 and the batch rate r1, per traded pair.
check_result check_nobeyond(const batch_instance& inst, const batch_solution& sol,
                            double tol = 1e-7);

}  // namespace batchclear
