#pragma once

#include <memory>
#include <optional>
#include <span>
#include <utility>
#include <variant>
#include <vector>

#include "batchclear/density.hpp"

namespace batchclear {

// ---- trading rule families ----

struct constant_product {};

struct weighted_product {
    double wa = 1.0;
    double wb = 1.0;
};

struct constant_sum {
    double rate = 1.0;  // f(a,b) = rate*a + b
};

struct lmsr_rule {};  // f(a,b) = 2 - e^{-a} - e^{-b}

struct monomial {
    std::vector<double> exponents;  // f(x) = prod x_i^{d_i}, d_i > 0
};

// Budget-fraction specification: a two-asset rule that spends a
// 1/h(p_A/p_B) fraction of its budget on B, with h a polynomial with
// nonnegative coefficients (coeffs[k] multiplies t^k).
struct hspec {
    std::vector<double> coeffs;
    double operator()(double t) const;
};

// Two-asset rule defined directly by its pair of sale densities.
struct density_pair {
    std::shared_ptr<const half_density> sell_first;   // sells assets[0] for assets[1]
    std::shared_ptr<const half_density> sell_second;  // sells assets[1] for assets[0]
};

// Black-box quasi-concave f with numeric gradient.
struct custom_function {
    std::function<double(std::span<const double>)> f;
};

class trading_function;

// Fee wrapper x -> f(chi_{eps,anchor}(x)): a fraction eps of every asset
// that in net flows into the reserves is withheld.
struct fee_wrapped {
    std::shared_ptr<const trading_function> base;
    std::vector<double> anchor;
    double epsilon = 0.0;
};

class trading_function {
  public:
    using rule_type = std::variant<constant_product, weighted_product, constant_sum, lmsr_rule,
                                   monomial, hspec, density_pair, custom_function, fee_wrapped>;

    trading_function() : rule_(constant_product{}) {}
    trading_function(rule_type rule) : rule_(std::move(rule)) {}

    const rule_type& rule() const { return rule_; }

    template <class T>
    const T* get_if() const {
        return std::get_if<T>(&rule_);
    }
    template <class T>
    bool is() const {
        return std::holds_alternative<T>(rule_);
    }

    // Number of assets the rule is defined on; 2 unless monomial/custom.
    int arity() const;
    // f(reserves).  Unavailable for hspec and density_pair (demand-defined
    // rules with no explicit f); returns nullopt there.
    std::optional<double> value(std::span<const double> reserves) const;
    bool has_value_function() const;

  private:
    rule_type rule_;
};

// ---- demand machinery ----

struct demand_response {
    // Reserves the CFMM holds after the batch (post-fee image for wrapped
    // rules, chi_{eps,anchor}(x*)).
    std::vector<double> new_reserves;
    // Market-facing trade x* - reserves; p . delta == 0 within tolerance.
    std::vector<double> delta;
    // Spot valuations at the post-trade state, proportional to the batch
    // valuations for smooth rules.  For fee-wrapped rules this is the
    // effective (fee-adjusted) gradient, the one-sided spot on the traded
    // side of the kink.
    std::vector<double> spot_after;
    // Set-valued demand at a knife edge: feasible amounts of the sold asset,
    // with interval_asset the local index of that asset.  `delta` records
    // the midpoint selection.
    std::optional<std::pair<double, double>> sell_interval;
    std::optional<int> interval_asset;
    // Pre-fee image x* (reserves + delta) when the rule is fee-wrapped.
    std::optional<std::vector<double>> pre_fee_reserves;
    // Amount withheld per asset (x* - chi(x*)); zero when unwrapped.
    std::vector<double> fee_withheld;
};

// grad f at `reserves`, defined up to scale; ratio of entries is the spot
// exchange rate.  Demand-defined rules report their no-trade valuations.
std::vector<double> spot_valuations(const trading_function& fn, std::span<const double> reserves);

// Optimal response to batch valuations: maximize f over {x >= 0,
// p.x <= p.reserves}.  This is the unique axiomatic rule (trade at batch
// prices until spot == batch valuations).
demand_response compute_demand(const trading_function& fn, std::span<const double> reserves,
                               std::span<const double> prices);

// Budget-fraction demand; coincides with compute_demand for the equivalent
// trading function.
demand_response hspec_demand(const hspec& h, std::span<const double> reserves,
                             std::span<const double> prices);

// Wrap `fn` with the fee difference function chi anchored at reserves_hat.
trading_function apply_fee_wrapper(const trading_function& fn, std::span<const double> reserves_hat,
                                   double epsilon);

// The limit-order-collection view of a two-asset rule at the given reserve
// snapshot: one cumulative sale density per direction, sharing the spot rate
// as their common zero.  Closed forms for the built-in families, tabulation
// otherwise.
std::pair<half_density, half_density> density_from_function(const trading_function& fn,
                                                            std::span<const double> reserves);

// A trading rule defined directly by a density pair (demand semantics; no
// explicit f is reconstructed).  Throws inconsistent_densities when the
// crossing condition D1^{-1}(0) >= 1/D2^{-1}(0) fails.
trading_function density_cfmm(half_density sell_first, half_density sell_second);

}  // namespace batchclear
