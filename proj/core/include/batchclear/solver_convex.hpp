#pragma once

#include <functional>
#include <memory>
#include <vector>

#include "batchclear/market.hpp"

namespace batchclear {

// The program's variables: valuations p_j >= 1 and valuation-weighted trade
// volumes y_i >= 0, one per CFMM half / offer, with per-asset flow
// conservation sum_{i:A_i=j} y_i == sum_{i:B_i=j} y_i.
struct program_state {
    std::vector<double> p;
    std::vector<double> y;
};

struct solve_options {
    long max_iters = 400'000;
    double step_c = 0.1;        // diminishing step envelope c/sqrt(t)
    double tol = 1e-9;          // terminal objective tolerance
    double projection_tol = 1e-9;
    std::function<void(long, double, double)> diag;  // iter, objective, grad norm
};

// The market decomposed into one-directional halves.  Sell offers become
// single-jump halves (the constant-sum correspondence); each two-asset CFMM
// contributes one half per direction with empty halves dropped.
class half_program;

struct convex_program {
    std::shared_ptr<const half_program> halves;

    int half_count() const;
    int asset_count() const;
    // Sell/buy asset of half i.
    int sell_asset(int i) const;
    int buy_asset(int i) const;
    // Cumulative sale density of half i at the given rate.
    double half_cumulative(int i, double rate) const;

    // Program objective; throws infeasible_state when the constraints are
    // violated beyond tolerance.  Always >= -1e-9 on feasible states.
    double objective(const program_state& state, double feas_tol = 1e-6) const;
    // Analytic (sub)gradient, left subgradient at the beta kinks.
    void gradient(const program_state& state, std::vector<double>& dp, std::vector<double>& dy) const;
    // Project y onto {F y = 0, y >= 0} (alternating null-space / clamp).
    void project_flows(std::vector<double>& y) const;
    // A feasible state with the given p (p clamped to >= 1) and y projected.
    program_state make_feasible(std::vector<double> p, std::vector<double> y) const;
    double flow_residual(const std::vector<double>& y) const;
};

// Build the half decomposition.  Throws unsupported_participant for buy
// offers and 3+-asset rules.
convex_program build_convex_program(const batch_instance& inst);

struct convex_result {
    batch_solution solution;
    program_state state;
    convex_program program;
};

// Projected (sub)gradient minimization to objective ~ 0; marginal jump
// rates detected after an initial phase are pinned into the projection so
// the method is not stalled by the objective kink at an offer's limit
// price.
convex_result solve_convex(const batch_instance& inst, const solve_options& opts = {});

}  // namespace batchclear
