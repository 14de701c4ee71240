#include "batchclear/solver_tatonnement.hpp"

#include <algorithm>
#include <cmath>

#include "batchclear/errors.hpp"
#include "participant_demand.hpp"

namespace batchclear {

namespace {

constexpr double kMarginalWindow = 1e-6;

struct demand_eval {
    std::vector<detail::participant_response> responses;
    std::vector<double> z;  // after marginal resolution
};

demand_eval evaluate(const batch_instance& inst, const price_vector& p, double window) {
    demand_eval out;
    out.responses.reserve(inst.participants.size());
    for (int i = 0; i < static_cast<int>(inst.participants.size()); ++i)
        out.responses.push_back(detail::respond(inst, i, p, window, /*allow_buy_offers=*/false));
    detail::resolve_marginal_fills(inst, out.responses);
    out.z.assign(static_cast<size_t>(inst.asset_count()), 0.0);
    for (const auto& r : out.responses)
        for (size_t a = 0; a < out.z.size(); ++a) out.z[a] += r.delta[a];
    return out;
}

}  // namespace

std::vector<double> aggregate_demand(const batch_instance& inst, const price_vector& p) {
    std::vector<double> z(static_cast<size_t>(inst.asset_count()), 0.0);
    for (int i = 0; i < static_cast<int>(inst.participants.size()); ++i) {
        auto r = detail::respond(inst, i, p, 0.0, /*allow_buy_offers=*/false);
        for (size_t a = 0; a < z.size(); ++a) z[a] += r.delta[a];
    }
    return z;
}

batch_solution solve_tatonnement(const batch_instance& inst, const tatonnement_options& opts) {
    const int n = inst.asset_count();
    auto scale = inst.total_endowment();
    for (auto& s : scale) s = std::max(s, 1.0);

    price_vector p;
    p.values.assign(static_cast<size_t>(n), 1.0);
    double step = opts.initial_step;
    double best_obj = std::numeric_limits<double>::infinity();
    price_vector best_p = p;
    std::vector<double> prev_z;

    long it = 0;
    for (; it < opts.max_iters; ++it) {
        auto ev = evaluate(inst, p, kMarginalWindow);
        double obj = 0.0, znorm = 0.0;
        for (size_t a = 0; a < ev.z.size(); ++a) {
            obj = std::max(obj, std::abs(ev.z[a]) / scale[a]);
            znorm += ev.z[a] * ev.z[a];
        }
        if (opts.diag) opts.diag(it, obj, std::sqrt(znorm));
        if (obj < best_obj) {
            best_obj = obj;
            best_p = p;
        }
        if (obj <= opts.tol) break;
        // oscillation (sign flip of the dominant excess) halves the step
        if (!prev_z.empty()) {
            for (size_t a = 0; a < ev.z.size(); ++a) {
                if (ev.z[a] * prev_z[a] < 0.0 &&
                    std::abs(ev.z[a]) / scale[a] > 0.25 * obj) {
                    step = std::max(opts.min_step, 0.5 * step);
                    break;
                }
            }
        }
        prev_z = ev.z;
        for (int a = 0; a < n; ++a) {
            const double adj = std::clamp(ev.z[static_cast<size_t>(a)] / scale[static_cast<size_t>(a)],
                                          -0.5, 0.5);
            p[a] *= 1.0 + step * adj;
        }
        p = normalize_prices(p);
    }

    auto ev = evaluate(inst, best_obj < opts.tol ? p : best_p, kMarginalWindow);
    batch_solution sol;
    sol.prices = normalize_prices(best_obj < opts.tol ? p : best_p);
    sol.iterations = it;
    double obj = 0.0;
    for (size_t a = 0; a < ev.z.size(); ++a) obj = std::max(obj, std::abs(ev.z[a]) / scale[a]);
    sol.objective_value = obj;
    sol.status = obj <= opts.tol ? solve_status::converged : solve_status::not_converged;
    sol.fee_withheld.assign(static_cast<size_t>(n), 0.0);
    for (auto& r : ev.responses) {
        for (size_t a = 0; a < static_cast<size_t>(n); ++a) sol.fee_withheld[a] += r.fee_withheld[a];
        sol.trades.push_back(std::move(r.delta));
    }
    return sol;
}

}  // namespace batchclear
