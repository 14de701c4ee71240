#include "batchclear/solver_convex.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>

#include "batchclear/errors.hpp"

namespace batchclear {

namespace {

struct half_record {
    half_density density;
    int sell = 0;         // global asset indices
    int buy = 0;
    int participant = -1;
    double fee = 0.0;     // epsilon of the owning CFMM (fee accounting only)
};

}  // namespace

class half_program {
  public:
    std::vector<half_record> halves;
    int assets = 0;
    std::vector<std::string> notes;

    Eigen::MatrixXd flow;    // assets x halves incidence (+1 sell, -1 buy)
    Eigen::MatrixXd y_proj;  // null-space projector of `flow`

    // pinned rate constraints p_sell == rate * p_buy
    struct pin {
        int sell = 0;
        int buy = 0;
        double rate = 1.0;
    };
    mutable std::vector<pin> pins;
    mutable Eigen::MatrixXd p_proj;
    mutable bool has_pins = false;

    void build_projectors() {
        const auto m = static_cast<Eigen::Index>(halves.size());
        flow = Eigen::MatrixXd::Zero(assets, m);
        for (Eigen::Index i = 0; i < m; ++i) {
            flow(halves[static_cast<size_t>(i)].sell, i) += 1.0;
            flow(halves[static_cast<size_t>(i)].buy, i) -= 1.0;
        }
        Eigen::MatrixXd gram = flow * flow.transpose();
        Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(gram);
        y_proj = Eigen::MatrixXd::Identity(m, m) - flow.transpose() * cod.pseudoInverse() * flow;
    }

    void set_pins(std::vector<pin> new_pins) const {
        pins = std::move(new_pins);
        has_pins = !pins.empty();
        if (!has_pins) return;
        Eigen::MatrixXd c = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(pins.size()), assets);
        for (Eigen::Index r = 0; r < static_cast<Eigen::Index>(pins.size()); ++r) {
            c(r, pins[static_cast<size_t>(r)].sell) = 1.0;
            c(r, pins[static_cast<size_t>(r)].buy) = -pins[static_cast<size_t>(r)].rate;
        }
        Eigen::MatrixXd gram = c * c.transpose();
        Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(gram);
        p_proj = Eigen::MatrixXd::Identity(assets, assets) -
                 c.transpose() * cod.pseudoInverse() * c;
    }

    void project_y(std::vector<double>& y) const {
        const auto m = static_cast<Eigen::Index>(halves.size());
        Eigen::Map<Eigen::VectorXd> v(y.data(), m);
        for (int pass = 0; pass < 8; ++pass) {
            v = y_proj * v;
            bool clamped = false;
            for (Eigen::Index i = 0; i < m; ++i) {
                if (v(i) < 0.0) {
                    v(i) = 0.0;
                    clamped = true;
                }
            }
            if (!clamped) break;
        }
    }

    void project_p(std::vector<double>& p) const {
        Eigen::Map<Eigen::VectorXd> v(p.data(), assets);
        for (int pass = 0; pass < (has_pins ? 8 : 1); ++pass) {
            if (has_pins) v = p_proj * v;
            bool clamped = false;
            for (Eigen::Index j = 0; j < assets; ++j) {
                if (v(j) < 1.0) {
                    v(j) = 1.0;
                    clamped = true;
                }
            }
            if (!clamped) break;
        }
    }
};

int convex_program::half_count() const { return static_cast<int>(halves->halves.size()); }
int convex_program::asset_count() const { return halves->assets; }
int convex_program::sell_asset(int i) const { return halves->halves[static_cast<size_t>(i)].sell; }
int convex_program::buy_asset(int i) const { return halves->halves[static_cast<size_t>(i)].buy; }
double convex_program::half_cumulative(int i, double rate) const {
    return halves->halves[static_cast<size_t>(i)].density.cumulative(rate);
}

double convex_program::flow_residual(const std::vector<double>& y) const {
    const auto& hp = *halves;
    Eigen::VectorXd v = Eigen::Map<const Eigen::VectorXd>(y.data(), static_cast<Eigen::Index>(y.size()));
    Eigen::VectorXd r = hp.flow * v;
    return r.lpNorm<Eigen::Infinity>();
}

double convex_program::objective(const program_state& state, double feas_tol) const {
    const auto& hp = *halves;
    double ymax = 1.0;
    for (double yi : state.y) {
        if (yi < -feas_tol) throw infeasible_state("y has a negative entry");
        ymax = std::max(ymax, std::abs(yi));
    }
    for (double pj : state.p)
        if (pj < 1.0 - feas_tol) throw infeasible_state("price below 1");
    if (flow_residual(state.y) > feas_tol * ymax)
        throw infeasible_state("flow conservation violated");

    double obj = 0.0;
    for (size_t i = 0; i < hp.halves.size(); ++i) {
        const auto& h = hp.halves[i];
        const double pa = state.p[static_cast<size_t>(h.sell)];
        const double pb = state.p[static_cast<size_t>(h.buy)];
        const double w = pa / pb;
        const double total = h.density.total();
        const double x = std::clamp(state.y[i] / pa, 0.0, total);
        obj += pa * (h.density.phi(w) - h.density.g_value(x));
    }
    return obj;
}

void convex_program::gradient(const program_state& state, std::vector<double>& dp,
                              std::vector<double>& dy) const {
    const auto& hp = *halves;
    dp.assign(state.p.size(), 0.0);
    dy.assign(state.y.size(), 0.0);
    for (size_t i = 0; i < hp.halves.size(); ++i) {
        const auto& h = hp.halves[i];
        const double pa = state.p[static_cast<size_t>(h.sell)];
        const double pb = state.p[static_cast<size_t>(h.buy)];
        const double w = pa / pb;
        const double total = h.density.total();
        const double x_raw = state.y[i] / pa;
        const double x = std::clamp(x_raw, 0.0, total);
        const double dw = h.density.cumulative(w);  // left value at jump rates
        const double gx = h.density.g_value(x);
        const double gpx = x_raw >= total ? 0.0 : h.density.g_derivative(x);
        dp[static_cast<size_t>(h.sell)] += h.density.phi(w) + dw - gx + x * gpx;
        dp[static_cast<size_t>(h.buy)] += -w * dw;
        dy[i] = -gpx;
    }
}

void convex_program::project_flows(std::vector<double>& y) const { halves->project_y(y); }

program_state convex_program::make_feasible(std::vector<double> p, std::vector<double> y) const {
    halves->project_p(p);
    halves->project_y(y);
    return {std::move(p), std::move(y)};
}

convex_program build_convex_program(const batch_instance& inst) {
    auto hp = std::make_shared<half_program>();
    hp->assets = inst.asset_count();
    for (int idx = 0; idx < static_cast<int>(inst.participants.size()); ++idx) {
        const auto& part = inst.participants[static_cast<size_t>(idx)];
        if (const auto* s = std::get_if<limit_sell_offer>(&part)) {
            if (s->amount <= 0.0) {
                hp->notes.push_back("dropping empty sell offer " + std::to_string(idx));
                continue;
            }
            half_record rec{half_density::from_jumps(s->sell, s->buy, {{s->min_price, s->amount}}),
                            s->sell, s->buy, idx, 0.0};
            hp->halves.push_back(std::move(rec));
        } else if (std::holds_alternative<limit_buy_offer>(part)) {
            throw unsupported_participant("buy offers are not WGS; the convex program rejects them");
        } else {
            const auto& c = std::get<cfmm_decl>(part);
            if (c.assets.size() != 2)
                throw unsupported_participant("the convex program integrates two-asset CFMMs only");
            trading_function fn = c.fee > 0.0 ? apply_fee_wrapper(c.fn, c.reserves, c.fee) : c.fn;
            auto [d0, d1] = density_from_function(fn, c.reserves);
            auto add = [&](half_density d, int sell_local) {
                if (d.total() <= 0.0) {
                    hp->notes.push_back("dropping empty half of cfmm participant " +
                                        std::to_string(idx));
                    return;
                }
                const int sell = c.assets[static_cast<size_t>(sell_local)];
                const int buy = c.assets[static_cast<size_t>(1 - sell_local)];
                hp->halves.push_back(half_record{std::move(d), sell, buy, idx, c.fee});
            };
            add(std::move(d0), 0);
            add(std::move(d1), 1);
        }
    }
    hp->build_projectors();
    convex_program prog;
    prog.halves = std::move(hp);
    return prog;
}

namespace {

// reconstruct per-participant trades from the program state
batch_solution assemble_solution(const batch_instance& inst, const convex_program& prog,
                                 const program_state& state, double objective, long iterations,
                                 solve_status status) {
    batch_solution sol;
    const double mn = *std::min_element(state.p.begin(), state.p.end());
    sol.prices.values = state.p;
    for (auto& v : sol.prices.values) v /= mn;
    sol.objective_value = objective / mn;
    sol.iterations = iterations;
    sol.status = status;
    const size_t n = static_cast<size_t>(inst.asset_count());
    sol.trades.assign(inst.participants.size(), std::vector<double>(n, 0.0));
    sol.fee_withheld.assign(n, 0.0);
    const auto& hp = *prog.halves;
    for (size_t i = 0; i < hp.halves.size(); ++i) {
        const auto& h = hp.halves[i];
        const double pa = state.p[static_cast<size_t>(h.sell)];
        const double pb = state.p[static_cast<size_t>(h.buy)];
        auto& tr = sol.trades[static_cast<size_t>(h.participant)];
        tr[static_cast<size_t>(h.sell)] -= state.y[i] / pa;
        tr[static_cast<size_t>(h.buy)] += state.y[i] / pb;
    }
    for (size_t idx = 0; idx < inst.participants.size(); ++idx) {
        const auto* c = std::get_if<cfmm_decl>(&inst.participants[idx]);
        if (!c || c->fee <= 0.0) continue;
        for (size_t k = 0; k < c->assets.size(); ++k) {
            const size_t a = static_cast<size_t>(c->assets[k]);
            sol.fee_withheld[a] += c->fee * std::max(0.0, sol.trades[idx][a]);
        }
    }
    return sol;
}

}  // namespace

convex_result solve_convex(const batch_instance& inst, const solve_options& opts) {
    convex_result out;
    out.program = build_convex_program(inst);
    const auto& prog = out.program;
    const int m = prog.half_count();
    const int n = prog.asset_count();

    program_state s;
    s.p.assign(static_cast<size_t>(n), 1.0);
    s.y.assign(static_cast<size_t>(m), 0.0);
    prog.halves->set_pins({});
    s = prog.make_feasible(std::move(s.p), std::move(s.y));

    double obj = prog.objective(s, opts.projection_tol * 1e3);
    std::vector<double> dp, dy;
    double good_step = opts.step_c;
    long stall = 0;
    bool pinned = false;
    long t = 1;

    auto try_pin = [&]() {
        if (pinned) return false;
        std::vector<half_program::pin> pins;
        for (int i = 0; i < m; ++i) {
            const auto& h = prog.halves->halves[static_cast<size_t>(i)];
            const double w = s.p[static_cast<size_t>(h.sell)] / s.p[static_cast<size_t>(h.buy)];
            for (const auto& j : h.density.jumps()) {
                if (std::abs(w - j.rate) <= 1e-3 * j.rate) {
                    pins.push_back({h.sell, h.buy, j.rate});
                }
            }
        }
        if (pins.empty()) return false;
        prog.halves->set_pins(std::move(pins));
        prog.halves->project_p(s.p);
        obj = prog.objective(s, opts.projection_tol * 1e3);
        pinned = true;
        return true;
    };

    for (; t <= opts.max_iters; ++t) {
        prog.gradient(s, dp, dy);
        double gnorm = 0.0;
        for (double v : dp) gnorm += v * v;
        for (double v : dy) gnorm += v * v;
        gnorm = std::sqrt(gnorm);
        if (opts.diag) opts.diag(t, obj, gnorm);
        if (obj <= opts.tol) break;

        const double envelope = opts.step_c / std::sqrt(static_cast<double>(t));
        double step = std::min(envelope, good_step * 2.0);
        bool moved = false;
        for (int bt = 0; bt < 45; ++bt) {
            program_state cand;
            cand.p.resize(s.p.size());
            cand.y.resize(s.y.size());
            for (size_t j = 0; j < s.p.size(); ++j) cand.p[j] = s.p[j] - step * dp[j];
            for (size_t i = 0; i < s.y.size(); ++i) cand.y[i] = s.y[i] - step * dy[i];
            prog.halves->project_p(cand.p);
            prog.halves->project_y(cand.y);
            const double cobj = prog.objective(cand, opts.projection_tol * 1e3);
            if (cobj < obj) {
                s = std::move(cand);
                obj = cobj;
                good_step = step;
                moved = true;
                break;
            }
            step *= 0.5;
        }
        if (!moved) {
            ++stall;
            if (try_pin()) {
                stall = 0;
                continue;
            }
            if (stall > 3) break;  // numerically at the floor
        } else {
            stall = 0;
        }
        // a marginal jump rate stalls plain subgradient steps; once the
        // iterate is close, pin the rate into the projection and continue
        // on the smooth branch
        if (!pinned && obj < 1e-5 && try_pin()) continue;
    }

    const solve_status status = obj <= opts.tol ? solve_status::converged
                                                : solve_status::not_converged;
    out.state = s;
    out.solution = assemble_solution(inst, prog, s, obj, t, status);
    return out;
}

}  // namespace batchclear
