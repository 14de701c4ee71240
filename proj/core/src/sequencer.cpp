#include "batchclear/sequencer.hpp"

#include <algorithm>
#include <cmath>

#include "batchclear/errors.hpp"
#include "batchclear/solver_convex.hpp"
#include "batchclear/solver_reference.hpp"
#include "batchclear/solver_tatonnement.hpp"
#include "batchclear/verifier.hpp"

namespace batchclear {

sequence_result run_sequence(const std::vector<batch_instance>& batches,
                             const sequence_options& opts) {
    sequence_result out;
    if (batches.empty()) return out;
    const auto& universe = batches.front().assets;
    out.fee_sink.assign(universe.size(), 0.0);

    std::vector<cfmm_state> states;
    auto find_state = [&](const std::string& id) -> cfmm_state* {
        for (auto& s : states)
            if (s.id == id) return &s;
        return nullptr;
    };

    for (const auto& declared : batches) {
        if (declared.assets != universe)
            throw unknown_cfmm("batches must share one asset universe");
        batch_instance inst = declared;
        // carry reserves into this batch
        for (auto& part : inst.participants) {
            auto* c = std::get_if<cfmm_decl>(&part);
            if (!c) continue;
            if (c->id.empty()) throw unknown_cfmm("sequenced CFMMs need a stable id");
            if (auto* st = find_state(c->id)) {
                if (st->assets != c->assets)
                    throw unknown_cfmm("CFMM '" + c->id + "' changed its asset list between batches");
                c->reserves = st->reserves;
            } else {
                states.push_back({c->id, c->assets, c->reserves});
            }
        }

        batch_solution sol;
        switch (opts.solver) {
            case sequence_solver::reference:
                sol = solve_two_asset(inst).solution;
                break;
            case sequence_solver::convex:
                sol = solve_convex(inst).solution;
                break;
            case sequence_solver::tatonnement:
                sol = solve_tatonnement(inst);
                break;
        }
        sol.verifier_report = verify_solution(inst, sol, opts.tol);

        // settle CFMM states and the fee sink
        for (size_t i = 0; i < inst.participants.size(); ++i) {
            const auto* c = std::get_if<cfmm_decl>(&inst.participants[i]);
            if (!c) continue;
            auto* st = find_state(c->id);
            for (size_t k = 0; k < c->assets.size(); ++k) {
                const double d = sol.trades[i][static_cast<size_t>(c->assets[k])];
                const double withheld = c->fee > 0.0 && d > 0.0 ? c->fee * d : 0.0;
                st->reserves[k] += opts.carry_fee_deposit ? d : d - withheld;
                if (!opts.carry_fee_deposit)
                    out.fee_sink[static_cast<size_t>(c->assets[k])] += withheld;
            }
        }
        if (inst.asset_count() >= 2) out.clearing_rates.push_back(sol.prices[0] / sol.prices[1]);
        out.solutions.push_back(std::move(sol));
    }
    out.final_states = std::move(states);
    return out;
}

}  // namespace batchclear
