#include "batchclear/rational_extract.hpp"

#include <boost/multiprecision/cpp_int.hpp>
#include <algorithm>
#include <cmath>
#include <sstream>

#include "batchclear/errors.hpp"

namespace batchclear {

namespace {

using rat = boost::multiprecision::cpp_rational;

std::string to_string(const boost::multiprecision::cpp_int& v) {
    std::ostringstream os;
    os << v;
    return os.str();
}

rational_value make_value(const rat& r) {
    rational_value v;
    v.num = to_string(boost::multiprecision::numerator(r));
    v.den = to_string(boost::multiprecision::denominator(r));
    v.approx = static_cast<double>(r);
    return v;
}

// One linear half: active means y = supply*pA - q*pB (reciprocal family) or
// y = size*pA (jump).  Jumps can also be marginal (rate pinned, fill free).
struct exact_half {
    int sell = 0;
    int buy = 0;
    int participant = -1;
    bool is_jump = false;
    rat supply;  // reciprocal: D = supply - q/z
    rat q;
    rat rate;  // jump rate
    rat size;  // jump size
};

enum class jump_class { inactive, marginal, full };
enum class pair_class { first_active, second_active, tie };

struct classification {
    // per reciprocal pair and per jump half, aligned with the build order
    std::vector<pair_class> pairs;
    std::vector<jump_class> jumps;
};

struct exact_model {
    std::vector<exact_half> halves;
    // reciprocal halves come in pairs: pair k is halves[pair_idx[k]] and
    // halves[pair_idx[k]+1]
    std::vector<size_t> pair_idx;
    std::vector<size_t> jump_idx;
};

// Gauss-Jordan over Q.  Returns false on inconsistency.  Free variables are
// assigned `free_value`.
bool solve_linear(std::vector<std::vector<rat>> rows, size_t vars, std::vector<rat>& out,
                  const std::vector<rat>& free_value) {
    size_t r = 0;
    std::vector<ptrdiff_t> pivot_of_col(vars, -1);
    for (size_t c = 0; c < vars && r < rows.size(); ++c) {
        size_t sel = r;
        while (sel < rows.size() && rows[sel][c] == 0) ++sel;
        if (sel == rows.size()) continue;
        std::swap(rows[r], rows[sel]);
        const rat piv = rows[r][c];
        for (size_t j = c; j <= vars; ++j) rows[r][j] /= piv;
        for (size_t i = 0; i < rows.size(); ++i) {
            if (i == r || rows[i][c] == 0) continue;
            const rat f = rows[i][c];
            for (size_t j = c; j <= vars; ++j) rows[i][j] -= f * rows[r][j];
        }
        pivot_of_col[c] = static_cast<ptrdiff_t>(r);
        ++r;
    }
    for (size_t i = r; i < rows.size(); ++i)
        if (rows[i][vars] != 0) return false;  // 0 == nonzero
    out.assign(vars, rat(0));
    // free variables first, then pivots in terms of them
    for (size_t c = 0; c < vars; ++c)
        if (pivot_of_col[c] < 0) out[c] = free_value[c];
    for (size_t c = 0; c < vars; ++c) {
        if (pivot_of_col[c] < 0) continue;
        const auto& row = rows[static_cast<size_t>(pivot_of_col[c])];
        rat v = row[vars];
        for (size_t j = c + 1; j < vars; ++j)
            if (row[j] != 0) v -= row[j] * out[j];
        out[c] = v;
    }
    return true;
}

}  // namespace

rational_solution extract_rational(const batch_instance& inst, const price_vector& approx) {
    rational_solution res;
    const int n = inst.asset_count();

    exact_model model;
    for (int idx = 0; idx < static_cast<int>(inst.participants.size()); ++idx) {
        const auto& part = inst.participants[static_cast<size_t>(idx)];
        if (const auto* s = std::get_if<limit_sell_offer>(&part)) {
            if (s->amount <= 0.0) continue;
            exact_half h;
            h.sell = s->sell;
            h.buy = s->buy;
            h.participant = idx;
            h.is_jump = true;
            h.rate = rat(s->min_price);
            h.size = rat(s->amount);
            model.jump_idx.push_back(model.halves.size());
            model.halves.push_back(std::move(h));
            continue;
        }
        if (std::holds_alternative<limit_buy_offer>(part)) {
            res.detail = "buy offers are outside the rational-linear class";
            return res;
        }
        const auto& c = std::get<cfmm_decl>(part);
        if (c.assets.size() != 2) {
            res.detail = "only two-asset CFMMs are supported";
            return res;
        }
        const rat fee_scale = c.fee > 0.0 ? rat(1) / (rat(1) - rat(c.fee)) : rat(1);
        const rat a0(c.reserves[0]), b0(c.reserves[1]);
        if (const auto* cs = c.fn.get_if<constant_sum>()) {
            auto put_jump = [&](int sl, const rat& rate, const rat& size) {
                if (size == 0) return;
                exact_half h;
                h.sell = c.assets[static_cast<size_t>(sl)];
                h.buy = c.assets[static_cast<size_t>(1 - sl)];
                h.participant = idx;
                h.is_jump = true;
                h.rate = rate * fee_scale;  // the inflow fee raises the break-even rate
                h.size = size;
                model.jump_idx.push_back(model.halves.size());
                model.halves.push_back(std::move(h));
            };
            const rat r(cs->rate);
            put_jump(0, r, a0);
            put_jump(1, rat(1) / r, b0);
            continue;
        }
        rat ca, cb;  // budget fractions spent on each asset
        if (c.fn.is<constant_product>()) {
            ca = rat(1, 2);
            cb = rat(1, 2);
        } else if (const auto* w = c.fn.get_if<weighted_product>()) {
            const rat wa(w->wa), wb(w->wb);
            ca = wa / (wa + wb);
            cb = wb / (wa + wb);
        } else if (const auto* mfn = c.fn.get_if<monomial>(); mfn && mfn->exponents.size() == 2) {
            const rat d0(mfn->exponents[0]), d1(mfn->exponents[1]);
            ca = d0 / (d0 + d1);
            cb = d1 / (d0 + d1);
        } else {
            res.detail = "structurally irrational trading function (no rational-linear density)";
            return res;
        }
        // selling asset k: y = (1-c_k) * p_k * r_k - c_k * feescale * p_other * r_other
        auto put_recip = [&](int sl, const rat& keep_frac, const rat& res_sell, const rat& res_buy) {
            exact_half h;
            h.sell = c.assets[static_cast<size_t>(sl)];
            h.buy = c.assets[static_cast<size_t>(1 - sl)];
            h.participant = idx;
            h.supply = (rat(1) - keep_frac) * res_sell;
            h.q = keep_frac * res_buy * fee_scale;
            model.halves.push_back(std::move(h));
        };
        model.pair_idx.push_back(model.halves.size());
        put_recip(0, ca, a0, b0);
        put_recip(1, cb, b0, a0);
    }

    const size_t m = model.halves.size();
    // classify from the approximate prices, tracking borderline cases
    auto w_of = [&](const exact_half& h) {
        return approx[h.sell] / approx[h.buy];
    };
    constexpr double kBand = 1e-5;
    std::vector<std::vector<pair_class>> pair_opts;
    for (size_t k : model.pair_idx) {
        const auto& h = model.halves[k];
        const double w = w_of(h);
        const double z0 = static_cast<double>(h.q / h.supply);
        if (w > z0 * (1.0 + kBand))
            pair_opts.push_back({pair_class::first_active});
        else if (w < z0 * (1.0 - kBand))
            pair_opts.push_back({pair_class::second_active});
        else
            pair_opts.push_back(
                {pair_class::tie, pair_class::first_active, pair_class::second_active});
    }
    std::vector<std::vector<jump_class>> jump_opts;
    for (size_t k : model.jump_idx) {
        const auto& h = model.halves[k];
        const double w = w_of(h);
        const double r = static_cast<double>(h.rate);
        if (w > r * (1.0 + kBand))
            jump_opts.push_back({jump_class::full});
        else if (w < r * (1.0 - kBand))
            jump_opts.push_back({jump_class::inactive});
        else
            jump_opts.push_back({jump_class::marginal, jump_class::full, jump_class::inactive});
    }

    // enumerate borderline combinations, most likely first
    std::vector<size_t> combo(pair_opts.size() + jump_opts.size(), 0);
    long combos = 1;
    for (const auto& o : pair_opts) combos *= static_cast<long>(o.size());
    for (const auto& o : jump_opts) combos *= static_cast<long>(o.size());
    if (combos > 729) combos = 729;

    const size_t vars = static_cast<size_t>(n) + m;
    auto var_p = [&](int a) { return static_cast<size_t>(a); };
    auto var_y = [&](size_t i) { return static_cast<size_t>(n) + i; };

    std::string last_error = "no consistent active set";
    for (long attempt = 0; attempt < combos; ++attempt) {
        // decode the attempt index into per-slot choices
        {
            long a = attempt;
            for (size_t s = 0; s < combo.size(); ++s) {
                const size_t sz = s < pair_opts.size() ? pair_opts[s].size()
                                                       : jump_opts[s - pair_opts.size()].size();
                combo[s] = static_cast<size_t>(a % static_cast<long>(sz));
                a /= static_cast<long>(sz);
            }
        }
        std::vector<std::vector<rat>> rows;
        auto add_row = [&]() -> std::vector<rat>& {
            rows.emplace_back(vars + 1, rat(0));
            return rows.back();
        };
        // flow conservation
        for (int a = 0; a < n; ++a) {
            auto& row = add_row();
            bool touched = false;
            for (size_t i = 0; i < m; ++i) {
                if (model.halves[i].sell == a) {
                    row[var_y(i)] += 1;
                    touched = true;
                }
                if (model.halves[i].buy == a) {
                    row[var_y(i)] -= 1;
                    touched = true;
                }
            }
            if (!touched) rows.pop_back();
        }
        std::vector<jump_class> jc(model.jump_idx.size());
        std::vector<pair_class> pc(model.pair_idx.size());
        for (size_t k = 0; k < model.pair_idx.size(); ++k) {
            pc[k] = pair_opts[k][combo[k]];
            const auto& h1 = model.halves[model.pair_idx[k]];
            const auto& h2 = model.halves[model.pair_idx[k] + 1];
            if (pc[k] == pair_class::first_active) {
                auto& r1 = add_row();
                r1[var_y(model.pair_idx[k])] = 1;
                r1[var_p(h1.sell)] = -h1.supply;
                r1[var_p(h1.buy)] = h1.q;
                auto& r2 = add_row();
                r2[var_y(model.pair_idx[k] + 1)] = 1;
            } else if (pc[k] == pair_class::second_active) {
                auto& r1 = add_row();
                r1[var_y(model.pair_idx[k])] = 1;
                auto& r2 = add_row();
                r2[var_y(model.pair_idx[k] + 1)] = 1;
                r2[var_p(h2.sell)] = -h2.supply;
                r2[var_p(h2.buy)] = h2.q;
            } else {  // tie: no trade, rate pinned at the first half's spot
                auto& r1 = add_row();
                r1[var_y(model.pair_idx[k])] = 1;
                auto& r2 = add_row();
                r2[var_y(model.pair_idx[k] + 1)] = 1;
                auto& r3 = add_row();
                r3[var_p(h1.sell)] = h1.supply;
                r3[var_p(h1.buy)] = -h1.q;
            }
        }
        for (size_t k = 0; k < model.jump_idx.size(); ++k) {
            jc[k] = jump_opts[k][combo[k]];
            const auto& h = model.halves[model.jump_idx[k]];
            if (jc[k] == jump_class::inactive) {
                auto& r1 = add_row();
                r1[var_y(model.jump_idx[k])] = 1;
            } else if (jc[k] == jump_class::full) {
                auto& r1 = add_row();
                r1[var_y(model.jump_idx[k])] = 1;
                r1[var_p(h.sell)] = -h.size;
            } else {  // marginal: rate pinned, fill free
                auto& r1 = add_row();
                r1[var_p(h.sell)] = 1;
                r1[var_p(h.buy)] = -h.rate;
            }
        }
        {
            auto& norm = add_row();
            norm[var_p(0)] = 1;
            norm[vars] = 1;
        }
        std::vector<rat> free_vals(vars, rat(0));
        for (int a = 0; a < n; ++a) free_vals[var_p(a)] = rat(1);
        std::vector<rat> sol;
        if (!solve_linear(std::move(rows), vars, sol, free_vals)) {
            last_error = "inconsistent linear system for the classified active set";
            continue;
        }
        // exact verification of every inequality
        bool ok = true;
        for (int a = 0; a < n && ok; ++a)
            if (sol[var_p(a)] <= 0) ok = false;
        for (size_t i = 0; i < m && ok; ++i)
            if (sol[var_y(i)] < 0) ok = false;
        for (size_t k = 0; k < model.pair_idx.size() && ok; ++k) {
            const auto& h1 = model.halves[model.pair_idx[k]];
            const auto& h2 = model.halves[model.pair_idx[k] + 1];
            const rat q1 = h1.supply * sol[var_p(h1.sell)] - h1.q * sol[var_p(h1.buy)];
            const rat q2 = h2.supply * sol[var_p(h2.sell)] - h2.q * sol[var_p(h2.buy)];
            if (pc[k] == pair_class::first_active) ok = q1 >= 0 && q2 <= 0;
            else if (pc[k] == pair_class::second_active) ok = q2 >= 0 && q1 <= 0;
            else ok = q1 == 0;
        }
        for (size_t k = 0; k < model.jump_idx.size() && ok; ++k) {
            const auto& h = model.halves[model.jump_idx[k]];
            const rat pa = sol[var_p(h.sell)], pb = sol[var_p(h.buy)];
            const rat y = sol[var_y(model.jump_idx[k])];
            if (jc[k] == jump_class::inactive) ok = pa <= h.rate * pb;
            else if (jc[k] == jump_class::full) ok = pa >= h.rate * pb;
            else ok = y >= 0 && y <= h.size * pa;
        }
        if (!ok) {
            last_error = "active-set inequalities violated by the exact solution";
            continue;
        }
        // success: normalize so min price == 1 exactly
        rat mn = sol[var_p(0)];
        for (int a = 1; a < n; ++a) mn = std::min(mn, sol[var_p(a)]);
        for (auto& v : sol) v /= mn;

        res.status = rational_status::ok;
        res.clearing_exact = true;
        res.detail = "exact equilibrium extracted";
        for (int a = 0; a < n; ++a) res.prices.push_back(make_value(sol[var_p(a)]));
        for (size_t i = 0; i < m; ++i) res.volumes.push_back(make_value(sol[var_y(i)]));
        res.trades.assign(inst.participants.size(), {});
        std::vector<std::vector<rat>> deltas(inst.participants.size(),
                                             std::vector<rat>(static_cast<size_t>(n), rat(0)));
        for (size_t i = 0; i < m; ++i) {
            const auto& h = model.halves[i];
            const rat y = sol[var_y(i)];
            deltas[static_cast<size_t>(h.participant)][static_cast<size_t>(h.sell)] -=
                y / sol[var_p(h.sell)];
            deltas[static_cast<size_t>(h.participant)][static_cast<size_t>(h.buy)] +=
                y / sol[var_p(h.buy)];
        }
        for (size_t pi = 0; pi < deltas.size(); ++pi)
            for (int a = 0; a < n; ++a)
                res.trades[pi].push_back(make_value(deltas[pi][static_cast<size_t>(a)]));
        return res;
    }
    res.status = rational_status::active_set_error;
    res.detail = last_error;
    return res;
}

}  // namespace batchclear
