#include "batchclear/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "batchclear/errors.hpp"

namespace batchclear {

namespace {

double scale_of(std::span<const double> reserves) {
    double s = 1.0;
    for (double r : reserves) s = std::max(s, std::abs(r));
    return s;
}

// largest relative cross-ratio deviation between two positive vectors; zero
// when they are proportional
double direction_deviation(std::span<const double> a, std::span<const double> b) {
    double worst = 0.0;
    for (size_t i = 0; i < a.size(); ++i) {
        for (size_t j = i + 1; j < a.size(); ++j) {
            if (a[j] == 0.0 || b[j] == 0.0) {
                if (a[j] != b[j]) worst = std::max(worst, 1.0);
                continue;
            }
            const double ra = a[i] / a[j], rb = b[i] / b[j];
            worst = std::max(worst, std::abs(ra - rb) / std::max({std::abs(ra), std::abs(rb), 1e-300}));
        }
    }
    return worst;
}

}  // namespace

probe_verdict wgs_probe(const trading_function& fn, std::span<const double> reserves,
                        const probe_options& opts) {
    const size_t n = reserves.size();
    std::mt19937 rng(opts.seed);
    std::uniform_real_distribution<double> logu(-1.0, 1.0);
    std::uniform_real_distribution<double> raise(1.05, 2.0);
    std::uniform_int_distribution<size_t> coord(0, n - 1);
    const double slack = 1e-9 * scale_of(reserves);

    probe_verdict verdict;
    for (int s = 0; s < opts.samples; ++s) {
        std::vector<double> p(n);
        for (auto& v : p) v = std::pow(10.0, logu(rng));
        const size_t j = coord(rng);
        std::vector<double> p2 = p;
        p2[j] *= raise(rng);
        auto before = compute_demand(fn, reserves, p);
        auto after = compute_demand(fn, reserves, p2);
        for (size_t k = 0; k < n; ++k) {
            if (k == j) continue;
            if (after.delta[k] < before.delta[k] - slack) {
                verdict.pass = false;
                verdict.detail = "raising one price decreased demand for another asset";
                verdict.witness = wgs_witness{p, p2, static_cast<int>(j), static_cast<int>(k),
                                              before.delta[k], after.delta[k]};
                return verdict;
            }
        }
    }
    verdict.detail = "no WGS violation found in the sampled price pairs";
    return verdict;
}

probe_verdict budget_invariance_probe(const trading_function& fn, std::span<const double> reserves,
                                      const probe_options& opts) {
    const size_t n = reserves.size();
    std::mt19937 rng(opts.seed + 1);
    std::uniform_real_distribution<double> logu(-1.0, 1.0);
    std::uniform_real_distribution<double> alpha_dist(0.2, 5.0);
    constexpr double kTol = 1e-7;

    probe_verdict verdict;
    for (int s = 0; s < opts.samples; ++s) {
        std::vector<double> p(n);
        for (auto& v : p) v = std::pow(10.0, logu(rng));
        const double alpha = alpha_dist(rng);

        // (a) optimal bundles scale linearly with the budget
        auto base = compute_demand(fn, reserves, p);
        std::vector<double> scaled(n);
        for (size_t k = 0; k < n; ++k) scaled[k] = alpha * reserves[k];
        auto big = compute_demand(fn, scaled, p);
        std::vector<double> unscaled(n);
        for (size_t k = 0; k < n; ++k) unscaled[k] = big.new_reserves[k] / alpha;
        double dev = 0.0;
        double norm = 0.0;
        for (size_t k = 0; k < n; ++k) norm = std::max(norm, std::abs(base.new_reserves[k]));
        for (size_t k = 0; k < n; ++k)
            dev = std::max(dev, std::abs(unscaled[k] - base.new_reserves[k]) / std::max(norm, 1e-12));
        if (dev > kTol) {
            verdict.pass = false;
            verdict.detail = "optimal bundle does not scale linearly with the budget";
            verdict.witness = wgs_witness{p, p, -1, -1, 0.0, dev};
            return verdict;
        }

        // (b) gradient direction constant along rays, where a gradient exists
        if (fn.has_value_function()) {
            std::vector<double> pt(n), pt2(n);
            bool positive = true;
            for (size_t k = 0; k < n; ++k) {
                pt[k] = std::max(reserves[k], 1e-3);
                pt2[k] = alpha * pt[k];
                if (!(pt[k] > 0.0)) positive = false;
            }
            if (positive) {
                try {
                    auto g1 = spot_valuations(fn, pt);
                    auto g2 = spot_valuations(fn, pt2);
                    const double ang = direction_deviation(g1, g2);
                    if (ang > kTol) {
                        verdict.pass = false;
                        verdict.detail = "gradient direction varies along a ray from the origin";
                        verdict.witness = wgs_witness{pt, pt2, -1, -1, 0.0, ang};
                        return verdict;
                    }
                } catch (const error&) {
                }
            }
        }
    }
    verdict.detail = "bundle scaling and ray-gradient checks passed on all samples";
    return verdict;
}

std::vector<double> trading_rule_family(std::span<const double> spot, std::span<const double> prices,
                                        double alpha) {
    if (!(alpha >= 0.0 && alpha <= 1.0)) throw invalid_alpha("alpha must lie in [0,1]");
    std::vector<double> out(spot.size());
    for (size_t i = 0; i < spot.size(); ++i)
        out[i] = std::pow(spot[i], 1.0 - alpha) * std::pow(prices[i], alpha);
    return out;
}

probe_verdict family_identity_check(int samples, unsigned seed) {
    std::mt19937 rng(seed);
    std::uniform_real_distribution<double> logu(-1.0, 1.0);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    constexpr double kTol = 1e-12;
    probe_verdict verdict;
    for (int s = 0; s < samples; ++s) {
        double sv[3], pv[3], cv[3];
        for (int k = 0; k < 3; ++k) {
            sv[k] = std::pow(10.0, logu(rng));
            pv[k] = std::pow(10.0, logu(rng));
            cv[k] = std::pow(10.0, logu(rng));
        }
        const double alpha = unit(rng);
        auto F = [&](std::span<const double> a, std::span<const double> b) {
            return trading_rule_family(a, b, alpha);
        };
        // redenomination equivariance
        double s2[3], p2[3];
        for (int k = 0; k < 3; ++k) {
            s2[k] = cv[k] * sv[k];
            p2[k] = cv[k] * pv[k];
        }
        auto lhs = F(std::span<const double>(s2, 3), std::span<const double>(p2, 3));
        auto rhs = F(std::span<const double>(sv, 3), std::span<const double>(pv, 3));
        for (int k = 0; k < 3; ++k) {
            const double want = cv[k] * rhs[static_cast<size_t>(k)];
            if (std::abs(lhs[static_cast<size_t>(k)] - want) > kTol * std::abs(want)) {
                verdict.pass = false;
                verdict.detail = "redenomination equivariance violated";
                return verdict;
            }
        }
        // pairwise composition on ratios
        auto g = [&](double a, double b) { return std::pow(a, 1.0 - alpha) * std::pow(b, alpha); };
        const double lhs2 = g(sv[0] / sv[1], pv[0] / pv[1]) * g(sv[1] / sv[2], pv[1] / pv[2]);
        const double rhs2 = g(sv[0] / sv[2], pv[0] / pv[2]);
        if (std::abs(lhs2 - rhs2) > 1e-12 * std::abs(rhs2)) {
            verdict.pass = false;
            verdict.detail = "pairwise composition identity violated";
            return verdict;
        }
    }
    verdict.detail = "redenomination and composition identities hold on all sampled triples";
    return verdict;
}

demand_response family_demand(const trading_function& fn, std::span<const double> reserves,
                              std::span<const double> prices, double alpha) {
    if (!(alpha >= 0.0 && alpha <= 1.0)) throw invalid_alpha("alpha must lie in [0,1]");
    if (alpha == 1.0) return compute_demand(fn, reserves, prices);
    auto spot = spot_valuations(fn, reserves);
    auto target = trading_rule_family(spot, prices, alpha);
    if (reserves.size() != 2)
        throw unsupported_participant("family demand implemented for two-asset rules");
    const double sigma = target[0] / target[1];
    if (alpha == 0.0) {
        demand_response r;
        r.new_reserves.assign(reserves.begin(), reserves.end());
        r.delta.assign(reserves.size(), 0.0);
        r.fee_withheld.assign(reserves.size(), 0.0);
        r.spot_after = spot;
        return r;
    }
    // walk the budget line until the spot ratio matches the family target
    const double budget = prices[0] * reserves[0] + prices[1] * reserves[1];
    auto ratio_at = [&](double a) {
        const double b = (budget - prices[0] * a) / prices[1];
        double pt[2] = {a, b};
        auto g = spot_valuations(fn, std::span<const double>(pt, 2));
        return g[0] / g[1];
    };
    double lo = 1e-12 * budget / prices[0], hi = (1.0 - 1e-12) * budget / prices[0];
    for (int i = 0; i < 200; ++i) {
        const double mid = 0.5 * (lo + hi);
        // spot ratio falls as the holdings of asset 0 grow
        (ratio_at(mid) > sigma ? lo : hi) = mid;
    }
    const double a = 0.5 * (lo + hi);
    const double b = (budget - prices[0] * a) / prices[1];
    demand_response r;
    r.new_reserves = {a, b};
    r.delta = {a - reserves[0], b - reserves[1]};
    r.fee_withheld.assign(2, 0.0);
    double pt[2] = {a, b};
    r.spot_after = spot_valuations(fn, std::span<const double>(pt, 2));
    return r;
}

}  // namespace batchclear
