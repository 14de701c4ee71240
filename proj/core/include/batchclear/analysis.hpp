#pragma once

#include <optional>
#include <string>
#include <vector>

#include "batchclear/market.hpp"

namespace batchclear {

struct probe_options {
    int samples = 256;
    unsigned seed = 20220901;
};

struct wgs_witness {
    std::vector<double> prices;
    std::vector<double> raised_prices;
    int raised_asset = 0;    // coordinate that was raised
    int decreased_asset = 0; // other asset whose demand decreased
    double before = 0.0;
    double after = 0.0;
};

struct probe_verdict {
    bool pass = true;
    std::string detail;
    std::optional<wgs_witness> witness;
};

// Sampled falsification of weak gross substitutability: raising one price
// must not decrease net demand for any other asset (beyond 1e-9 of scale).
probe_verdict wgs_probe(const trading_function& fn, std::span<const double> reserves,
                        const probe_options& opts = {});

// Budget-invariance: optimal bundles scale linearly with the budget and the
// gradient direction is constant along rays t*x.
probe_verdict budget_invariance_probe(const trading_function& fn, std::span<const double> reserves,
                                      const probe_options& opts = {});

// The symmetric redenomination-invariant family F(s,p) = s^{1-alpha} p^alpha;
// alpha = 1 is the axiomatic rule, alpha = 0 never trades.  Throws
// invalid_alpha outside [0,1].
std::vector<double> trading_rule_family(std::span<const double> spot, std::span<const double> prices,
                                        double alpha);

// Random-triple identities of the family: redenomination equivariance
// F(c.s, c.p) = c.F(s,p) and pairwise composition
// g(s_A/s_B,.) g(s_B/s_C,.) = g(s_A/s_C,.), to 1e-12.
probe_verdict family_identity_check(int samples = 10'000, unsigned seed = 7);

// Demand through the alpha-family: trade at batch prices until the spot
// valuations equal F(s, p).  For alpha = 1 this is exactly compute_demand.
demand_response family_demand(const trading_function& fn, std::span<const double> reserves,
                              std::span<const double> prices, double alpha);

}  // namespace batchclear
