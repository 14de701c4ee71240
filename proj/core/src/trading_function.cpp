#include "batchclear/trading_function.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "batchclear/errors.hpp"
#include "batchclear/offers.hpp"

namespace batchclear {

namespace {

constexpr double kGoldenTol = 1e-13;

double dot(std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

// Maximize a unimodal g on [lo, hi] by golden-section search.
double golden_max(const std::function<double(double)>& g, double lo, double hi, double rel_tol) {
    const double gr = (std::sqrt(5.0) - 1.0) / 2.0;
    double a = lo, b = hi;
    double c = b - gr * (b - a), d = a + gr * (b - a);
    double fc = g(c), fd = g(d);
    const double span = std::max(1.0, hi - lo);
    while (b - a > rel_tol * span) {
        if (fc > fd) {
            b = d;
            d = c;
            fd = fc;
            c = b - gr * (b - a);
            fc = g(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + gr * (b - a);
            fd = g(d);
        }
    }
    return 0.5 * (a + b);
}

// Two-asset black-box demand: golden section along the budget line with a
// coarse unimodality certificate.
std::vector<double> custom_demand_2(const custom_function& cf, std::span<const double> reserves,
                                    std::span<const double> prices) {
    const double budget = dot(prices, reserves);
    const double a_max = budget / prices[0];
    auto on_line = [&](double a) {
        double pt[2] = {a, (budget - prices[0] * a) / prices[1]};
        if (pt[1] < 0.0) pt[1] = 0.0;
        return cf.f(std::span<const double>(pt, 2));
    };
    constexpr int kScan = 65;
    int maxima = 0;
    double prev2 = on_line(0.0), prev = on_line(a_max / (kScan - 1));
    int best_idx = prev2 >= prev ? 0 : 1;
    double best = std::max(prev2, prev);
    for (int i = 2; i < kScan; ++i) {
        const double v = on_line(a_max * i / (kScan - 1));
        if (prev > prev2 + 1e-14 * std::abs(prev) && prev > v + 1e-14 * std::abs(prev)) ++maxima;
        if (v > best) {
            best = v;
            best_idx = i;
        }
        prev2 = prev;
        prev = v;
    }
    if (maxima > 1) throw non_concave_function("line search cannot certify a maximum: multimodal section");
    const double cell = a_max / (kScan - 1);
    const double lo = std::max(0.0, (best_idx - 1) * cell);
    const double hi = std::min(a_max, (best_idx + 1) * cell);
    const double a = golden_max(on_line, lo, hi, kGoldenTol);
    return {a, std::max(0.0, (budget - prices[0] * a) / prices[1])};
}

// Projected gradient ascent on the budget simplex {x >= 0, p.x = K} with
// deterministic vertex starts plus seeded random restarts; used for
// many-asset black boxes where no closed form applies.
std::vector<double> custom_demand_n(const custom_function& cf, std::span<const double> reserves,
                                    std::span<const double> prices) {
    const size_t n = reserves.size();
    const double budget = dot(prices, reserves);
    auto project = [&](std::vector<double>& x) {
        // scale onto the budget plane, then clamp and rescale
        for (int pass = 0; pass < 4; ++pass) {
            double v = dot(prices, x);
            if (v <= 0.0) break;
            const double s = budget / v;
            for (auto& xi : x) xi = std::max(0.0, xi * s);
        }
    };
    auto grad = [&](const std::vector<double>& x, std::vector<double>& g) {
        for (size_t i = 0; i < n; ++i) {
            std::vector<double> hi(x), lo(x);
            const double h = std::max(1e-6, 1e-6 * std::abs(x[i]));
            hi[i] += h;
            lo[i] = std::max(0.0, lo[i] - h);
            g[i] = (cf.f(hi) - cf.f(lo)) / (hi[i] - lo[i]);
        }
    };
    std::vector<std::vector<double>> starts;
    for (size_t i = 0; i < n; ++i) {
        std::vector<double> v(n, 0.0);
        v[i] = budget / prices[i];
        starts.push_back(std::move(v));
    }
    std::vector<double> center(n);
    for (size_t i = 0; i < n; ++i) center[i] = budget / (prices[i] * static_cast<double>(n));
    starts.push_back(center);
    std::mt19937 rng(12345);
    std::uniform_real_distribution<double> u(0.05, 1.0);
    for (int r = 0; r < 3; ++r) {
        std::vector<double> v(n);
        for (size_t i = 0; i < n; ++i) v[i] = u(rng) / prices[i];
        project(v);
        starts.push_back(std::move(v));
    }
    std::vector<double> best;
    double best_val = -std::numeric_limits<double>::infinity();
    std::vector<double> g(n);
    for (auto x : starts) {
        double step = 0.25 * budget;
        double fx = cf.f(x);
        for (int it = 0; it < 400; ++it) {
            grad(x, g);
            // remove the price-direction component (move inside the plane)
            const double gp = dot(prices, g) / dot(prices, prices);
            std::vector<double> cand(n);
            double gnorm = 0.0;
            for (size_t i = 0; i < n; ++i) {
                const double gi = g[i] - gp * prices[i];
                gnorm += gi * gi;
                cand[i] = x[i] + step * gi;
            }
            if (gnorm < 1e-24) break;
            project(cand);
            const double fc = cf.f(cand);
            if (fc > fx) {
                x = std::move(cand);
                fx = fc;
                step *= 1.3;
            } else {
                step *= 0.5;
                if (step < 1e-14 * budget) break;
            }
        }
        if (fx > best_val) {
            best_val = fx;
            best = std::move(x);
        }
    }
    return best;
}

std::vector<double> chi_map(std::span<const double> x, std::span<const double> anchor, double eps) {
    std::vector<double> u(x.size());
    for (size_t i = 0; i < x.size(); ++i)
        u[i] = x[i] <= anchor[i] ? x[i] : anchor[i] + (1.0 - eps) * (x[i] - anchor[i]);
    return u;
}

demand_response finish_response(std::span<const double> reserves, std::vector<double> new_reserves,
                                std::vector<double> spot_after) {
    demand_response r;
    r.delta.resize(reserves.size());
    for (size_t i = 0; i < reserves.size(); ++i) r.delta[i] = new_reserves[i] - reserves[i];
    r.new_reserves = std::move(new_reserves);
    r.spot_after = std::move(spot_after);
    r.fee_withheld.assign(reserves.size(), 0.0);
    return r;
}

demand_response budget_split_response(std::span<const double> reserves, std::span<const double> prices,
                                      std::span<const double> fractions) {
    const double budget = dot(prices, reserves);
    std::vector<double> nr(reserves.size());
    for (size_t i = 0; i < reserves.size(); ++i) nr[i] = budget * fractions[i] / prices[i];
    std::vector<double> spot(prices.begin(), prices.end());
    return finish_response(reserves, std::move(nr), std::move(spot));
}

demand_response lmsr_demand(std::span<const double> reserves, std::span<const double> prices) {
    const double budget = dot(prices, reserves);
    const double pa = prices[0], pb = prices[1];
    const double lnlam = -(budget + pa * std::log(pa) + pb * std::log(pb)) / (pa + pb);
    double a = -(lnlam + std::log(pa));
    double b = -(lnlam + std::log(pb));
    if (a < 0.0) {
        a = 0.0;
        b = budget / pb;
    } else if (b < 0.0) {
        b = 0.0;
        a = budget / pa;
    }
    return finish_response(reserves, {a, b}, {std::exp(-a), std::exp(-b)});
}

}  // namespace

double hspec::operator()(double t) const {
    double v = 0.0;
    for (size_t k = coeffs.size(); k-- > 0;) v = v * t + coeffs[k];
    return v;
}

int trading_function::arity() const {
    if (const auto* m = get_if<monomial>()) return static_cast<int>(m->exponents.size());
    if (is<custom_function>()) return 0;  // defined on whatever span it is given
    if (const auto* w = get_if<fee_wrapped>()) return w->base->arity();
    return 2;
}

bool trading_function::has_value_function() const {
    if (is<hspec>() || is<density_pair>()) return false;
    if (const auto* w = get_if<fee_wrapped>()) return w->base->has_value_function();
    return true;
}

std::optional<double> trading_function::value(std::span<const double> x) const {
    return std::visit(
        [&](const auto& rule) -> std::optional<double> {
            using T = std::decay_t<decltype(rule)>;
            if constexpr (std::is_same_v<T, constant_product>) {
                return x[0] * x[1];
            } else if constexpr (std::is_same_v<T, weighted_product>) {
                return std::pow(x[0], rule.wa) * std::pow(x[1], rule.wb);
            } else if constexpr (std::is_same_v<T, constant_sum>) {
                return rule.rate * x[0] + x[1];
            } else if constexpr (std::is_same_v<T, lmsr_rule>) {
                return 2.0 - std::exp(-x[0]) - std::exp(-x[1]);
            } else if constexpr (std::is_same_v<T, monomial>) {
                double v = 1.0;
                for (size_t i = 0; i < rule.exponents.size(); ++i) v *= std::pow(x[i], rule.exponents[i]);
                return v;
            } else if constexpr (std::is_same_v<T, custom_function>) {
                return rule.f(x);
            } else if constexpr (std::is_same_v<T, fee_wrapped>) {
                return rule.base->value(chi_map(x, rule.anchor, rule.epsilon));
            } else {
                return std::nullopt;  // hspec, density_pair: demand-defined
            }
        },
        rule_);
}

std::vector<double> spot_valuations(const trading_function& fn, std::span<const double> x) {
    if (const auto* cp = fn.get_if<constant_product>()) {
        (void)cp;
        if (x[0] <= 0.0 || x[1] <= 0.0) throw singular_spot("constant product spot needs positive reserves");
        return {x[1], x[0]};
    }
    if (const auto* w = fn.get_if<weighted_product>()) {
        if (x[0] <= 0.0 || x[1] <= 0.0) throw singular_spot("weighted product spot needs positive reserves");
        return {w->wa / x[0], w->wb / x[1]};
    }
    if (const auto* cs = fn.get_if<constant_sum>()) return {cs->rate, 1.0};
    if (fn.is<lmsr_rule>()) return {std::exp(-x[0]), std::exp(-x[1])};
    if (const auto* m = fn.get_if<monomial>()) {
        std::vector<double> g(m->exponents.size());
        for (size_t i = 0; i < g.size(); ++i) {
            if (x[i] <= 0.0) throw singular_spot("monomial spot needs positive reserves");
            g[i] = m->exponents[i] / x[i];
        }
        return g;
    }
    if (const auto* h = fn.get_if<hspec>()) {
        // no-trade rate: rho * a0 == b0 * (h(rho) - 1)
        const double a0 = x[0], b0 = x[1];
        auto excess = [&](double rho) { return rho * a0 - b0 * ((*h)(rho)-1.0); };
        double lo = 1e-15, hi = 1e15, flo = excess(lo);
        double prev = lo;
        double root = std::numeric_limits<double>::quiet_NaN();
        for (int i = 1; i <= 600; ++i) {
            const double r = lo * std::pow(hi / lo, i / 600.0);
            const double fr = excess(r);
            if (flo == 0.0) {
                root = prev;
                break;
            }
            if ((flo < 0.0) != (fr < 0.0)) {
                double a = prev, b = r;
                for (int k = 0; k < 200; ++k) {
                    const double mid = 0.5 * (a + b);
                    if ((excess(a) < 0.0) != (excess(mid) < 0.0))
                        b = mid;
                    else
                        a = mid;
                }
                root = 0.5 * (a + b);
                break;
            }
            prev = r;
            flo = fr;
        }
        if (!std::isfinite(root)) throw degenerate_spec("budget spec has no no-trade rate");
        return {root, 1.0};
    }
    if (const auto* dp = fn.get_if<density_pair>()) {
        const double hi = dp->sell_first->inverse(0.0);
        const double lo = 1.0 / dp->sell_second->inverse(0.0);
        return {std::sqrt(lo * hi), 1.0};
    }
    if (const auto* cf = fn.get_if<custom_function>()) {
        std::vector<double> g(x.size());
        for (size_t i = 0; i < x.size(); ++i) {
            std::vector<double> hi(x.begin(), x.end()), lo(x.begin(), x.end());
            const double h = std::max(1e-6, 1e-6 * std::abs(x[i]));
            hi[i] += h;
            lo[i] -= h;
            g[i] = (cf->f(hi) - cf->f(lo)) / (2.0 * h);
        }
        return g;
    }
    if (const auto* fw = fn.get_if<fee_wrapped>()) {
        auto u = chi_map(x, fw->anchor, fw->epsilon);
        auto g = spot_valuations(*fw->base, u);
        for (size_t i = 0; i < g.size(); ++i)
            if (x[i] > fw->anchor[i]) g[i] *= 1.0 - fw->epsilon;
        return g;
    }
    throw error("spot_valuations: unhandled rule");
}

demand_response hspec_demand(const hspec& h, std::span<const double> reserves,
                             std::span<const double> prices) {
    const double rho = prices[0] / prices[1];
    const double hv = h(rho);
    if (!(hv > 0.0)) throw degenerate_spec("h evaluates to zero");
    const double frac_b = std::min(1.0, 1.0 / hv);
    const double fr[2] = {1.0 - frac_b, frac_b};
    return budget_split_response(reserves, prices, std::span<const double>(fr, 2));
}

namespace {

demand_response density_pair_demand(const density_pair& dp, std::span<const double> reserves,
                                    std::span<const double> prices) {
    const double rho = prices[0] / prices[1];
    const double s_hi = dp.sell_first->inverse(0.0);
    const double s_lo = 1.0 / dp.sell_second->inverse(0.0);
    if (s_hi < s_lo * (1.0 - 1e-12))
        throw inconsistent_densities("crossing condition violated: densities admit self-arbitrage");
    demand_response r;
    std::vector<double> nr(reserves.begin(), reserves.end());
    if (rho > s_hi) {
        double sold = dp.sell_first->cumulative(rho);
        for (const auto& j : dp.sell_first->jumps()) {
            if (j.rate == rho) {
                r.sell_interval = {sold, sold + j.size};
                r.interval_asset = 0;
                sold += 0.5 * j.size;
            }
        }
        nr[0] -= sold;
        nr[1] += rho * sold;
    } else if (rho < s_lo) {
        const double v = 1.0 / rho;
        double sold = dp.sell_second->cumulative(v);
        for (const auto& j : dp.sell_second->jumps()) {
            if (j.rate == v) {
                r.sell_interval = {sold, sold + j.size};
                r.interval_asset = 1;
                sold += 0.5 * j.size;
            }
        }
        nr[1] -= sold;
        nr[0] += v * sold;
    }
    auto out = finish_response(reserves, std::move(nr), {prices[0], prices[1]});
    out.sell_interval = r.sell_interval;
    out.interval_asset = r.interval_asset;
    return out;
}

demand_response wrapped_demand(const fee_wrapped& fw, std::span<const double> reserves,
                               std::span<const double> prices);

demand_response dispatch_demand(const trading_function& fn, std::span<const double> reserves,
                                std::span<const double> prices) {
    if (fn.is<constant_product>()) {
        const double fr[2] = {0.5, 0.5};
        return budget_split_response(reserves, prices, std::span<const double>(fr, 2));
    }
    if (const auto* w = fn.get_if<weighted_product>()) {
        const double s = w->wa + w->wb;
        const double fr[2] = {w->wa / s, w->wb / s};
        return budget_split_response(reserves, prices, std::span<const double>(fr, 2));
    }
    if (const auto* m = fn.get_if<monomial>()) {
        double s = 0.0;
        for (double d : m->exponents) s += d;
        std::vector<double> fr(m->exponents.size());
        for (size_t i = 0; i < fr.size(); ++i) fr[i] = m->exponents[i] / s;
        return budget_split_response(reserves, prices, fr);
    }
    if (const auto* cs = fn.get_if<constant_sum>()) {
        const double rho = prices[0] / prices[1];
        const double budget = dot(prices, reserves);
        if (rho > cs->rate) {
            auto r = finish_response(reserves, {0.0, budget / prices[1]}, {cs->rate, 1.0});
            return r;
        }
        if (rho < cs->rate) {
            return finish_response(reserves, {budget / prices[0], 0.0}, {cs->rate, 1.0});
        }
        // knife edge: any split is optimal; report the selling interval
        // [0, A0] with the midpoint selection
        const double a0 = reserves[0];
        auto r = finish_response(reserves, {0.5 * a0, reserves[1] + rho * 0.5 * a0}, {cs->rate, 1.0});
        r.sell_interval = {0.0, a0};
        r.interval_asset = 0;
        return r;
    }
    if (fn.is<lmsr_rule>()) return lmsr_demand(reserves, prices);
    if (const auto* h = fn.get_if<hspec>()) return hspec_demand(*h, reserves, prices);
    if (const auto* dp = fn.get_if<density_pair>()) return density_pair_demand(*dp, reserves, prices);
    if (const auto* cf = fn.get_if<custom_function>()) {
        std::vector<double> nr = reserves.size() == 2 ? custom_demand_2(*cf, reserves, prices)
                                                      : custom_demand_n(*cf, reserves, prices);
        trading_function tf(*cf);
        auto spot = spot_valuations(tf, nr);
        return finish_response(reserves, std::move(nr), std::move(spot));
    }
    if (const auto* fw = fn.get_if<fee_wrapped>()) return wrapped_demand(*fw, reserves, prices);
    throw error("compute_demand: unhandled rule");
}

demand_response wrapped_demand(const fee_wrapped& fw, std::span<const double> reserves,
                               std::span<const double> prices) {
    const size_t n = reserves.size();
    const double eps = fw.epsilon;
    // Trade direction determines which asset pays the inflow fee; solve the
    // consumption problem under the correspondingly scaled prices and keep
    // the direction-consistent candidate.
    struct candidate {
        demand_response resp;
        bool valid = false;
        double value = -std::numeric_limits<double>::infinity();
    };
    auto try_direction = [&](size_t inflow) {
        candidate c;
        std::vector<double> q(prices.begin(), prices.end());
        q[inflow] /= 1.0 - eps;
        auto r = dispatch_demand(*fw.base, reserves, q);
        bool consistent = true;
        for (size_t i = 0; i < n; ++i) {
            if (i == inflow && r.new_reserves[i] < reserves[i] - 1e-12 * (1.0 + reserves[i]))
                consistent = false;
            if (i != inflow && r.new_reserves[i] > reserves[i] + 1e-12 * (1.0 + reserves[i]))
                consistent = false;
        }
        if (!consistent) return c;
        c.valid = true;
        if (auto v = fw.base->value(r.new_reserves)) c.value = *v;
        // u = chi(x*): map the consumption bundle back to the market trade
        demand_response out;
        out.new_reserves = r.new_reserves;  // post-fee image
        out.pre_fee_reserves = r.new_reserves;
        auto& pre = *out.pre_fee_reserves;
        pre[inflow] = reserves[inflow] + (r.new_reserves[inflow] - reserves[inflow]) / (1.0 - eps);
        out.delta.resize(n);
        out.fee_withheld.assign(n, 0.0);
        for (size_t i = 0; i < n; ++i) {
            out.delta[i] = pre[i] - reserves[i];
            out.fee_withheld[i] = pre[i] - out.new_reserves[i];
        }
        // effective one-sided spot at the post-trade state: the inflow
        // coordinate of grad f is scaled by (1-eps), restoring exact
        // proportionality to the batch valuations
        out.spot_after = r.spot_after;
        out.spot_after[inflow] *= 1.0 - eps;
        out.sell_interval = r.sell_interval;
        out.interval_asset = r.interval_asset;
        c.resp = std::move(out);
        return c;
    };
    if (n != 2) {
        // iterate the direction guess for many-asset rules
        auto guess = dispatch_demand(*fw.base, reserves, prices);
        std::vector<double> q(prices.begin(), prices.end());
        for (int pass = 0; pass < 8; ++pass) {
            std::vector<double> q2(prices.begin(), prices.end());
            for (size_t i = 0; i < n; ++i)
                if (guess.new_reserves[i] > reserves[i]) q2[i] /= 1.0 - eps;
            if (q2 == q) break;
            q = q2;
            guess = dispatch_demand(*fw.base, reserves, q);
        }
        demand_response out;
        out.new_reserves = guess.new_reserves;
        out.pre_fee_reserves = guess.new_reserves;
        out.delta.resize(n);
        out.fee_withheld.assign(n, 0.0);
        out.spot_after = guess.spot_after;
        auto& pre = *out.pre_fee_reserves;
        for (size_t i = 0; i < n; ++i) {
            if (guess.new_reserves[i] > reserves[i]) {
                pre[i] = reserves[i] + (guess.new_reserves[i] - reserves[i]) / (1.0 - eps);
                out.spot_after[i] *= 1.0 - eps;
            }
            out.delta[i] = pre[i] - reserves[i];
            out.fee_withheld[i] = pre[i] - out.new_reserves[i];
        }
        return out;
    }
    candidate c1 = try_direction(1);  // sells asset 0, asset 1 flows in
    candidate c0 = try_direction(0);
    if (c1.valid && c0.valid) {
        if (c1.value >= c0.value) return c1.resp;
        return c0.resp;
    }
    if (c1.valid) return c1.resp;
    if (c0.valid) return c0.resp;
    // spot sits inside the fee band: no trade
    demand_response out;
    out.new_reserves.assign(reserves.begin(), reserves.end());
    out.delta.assign(n, 0.0);
    out.fee_withheld.assign(n, 0.0);
    out.pre_fee_reserves = out.new_reserves;
    trading_function base_copy(*fw.base);
    out.spot_after = spot_valuations(base_copy, reserves);
    return out;
}

}  // namespace

demand_response compute_demand(const trading_function& fn, std::span<const double> reserves,
                               std::span<const double> prices) {
    for (double p : prices)
        if (!(p > 0.0)) throw invalid_prices("demand requires strictly positive prices");
    return dispatch_demand(fn, reserves, prices);
}

trading_function apply_fee_wrapper(const trading_function& fn, std::span<const double> reserves_hat,
                                   double epsilon) {
    if (!(epsilon >= 0.0) || epsilon >= 1.0) throw invalid_fee("fee must lie in [0,1)");
    fee_wrapped w;
    w.base = std::make_shared<trading_function>(fn);
    w.anchor.assign(reserves_hat.begin(), reserves_hat.end());
    w.epsilon = epsilon;
    return trading_function(std::move(w));
}

offer_fill offer_demand(const limit_sell_offer& offer, double p_sell, double p_buy) {
    const double rho = p_sell / p_buy;
    offer_fill fill;
    if (rho > offer.min_price) {
        fill.sold = offer.amount;
    } else if (rho == offer.min_price) {
        fill.sold_interval = {0.0, offer.amount};
        fill.sold = 0.5 * offer.amount;
    }
    fill.bought = rho * fill.sold;
    return fill;
}

offer_fill offer_demand(const limit_buy_offer& offer, double p_sell, double p_buy) {
    const double rho = p_sell / p_buy;
    offer_fill fill;
    const double reachable = std::min(offer.target, offer.endowment * rho);
    if (rho > offer.max_price) {
        fill.bought = reachable;
        fill.sold = fill.bought / rho;
    } else if (rho == offer.max_price) {
        fill.sold_interval = {0.0, reachable / rho};
        fill.sold = 0.5 * reachable / rho;
        fill.bought = rho * fill.sold;
    }
    return fill;
}

}  // namespace batchclear
