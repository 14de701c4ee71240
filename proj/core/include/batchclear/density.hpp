#pragma once

#include <array>
#include <functional>
#include <optional>
#include <vector>

namespace batchclear {

// A jump discontinuity of the cumulative density: `size` units become
// available for sale exactly at `rate`.
struct density_jump {
    double rate = 0.0;
    double size = 0.0;
};

// One direction of a two-asset market participant viewed as a collection of
// limit sell offers: D(p) is the cumulative amount of the sell asset offered
// when the exchange rate (sell asset priced in buy asset) is p.
//
// D is nondecreasing, D(p) = 0 below the initial spot rate, and D(inf) is
// finite.  Closed forms are used for the reciprocal family (constant and
// weighted product), jump collections (limit offers, constant sum) and the
// LMSR; everything else is tabulated on a log-spaced grid.
class half_density {
  public:
    // D identically zero.
    static half_density empty(int sell_asset, int buy_asset);
    // Pure jump collection; jumps need not be sorted.
    static half_density from_jumps(int sell_asset, int buy_asset, std::vector<density_jump> jumps);
    // D(z) = max(0, supply - q / z).  Constant product: supply = a0/2,
    // q = b0/2.  Weighted product a^wa b^wb: supply = a0*wb/(wa+wb),
    // q = b0*wa/(wa+wb).
    static half_density reciprocal(int sell_asset, int buy_asset, double supply, double q);
    // LMSR half from reserves (a0 of the sell asset, b0 of the buy asset).
    // D(z) = ln(z/s0)/(1+z) on its increasing branch; past the peak the
    // monotone envelope (constant at the peak value) is used.
    static half_density lmsr(int sell_asset, int buy_asset, double a0, double b0);
    // Tabulated from an exact pointwise evaluator.  `cap` bounds D(inf)
    // (the sellable reserve).  Throws unbounded_density if the demand limit
    // exceeds any finite cap.
    static half_density tabulated(int sell_asset, int buy_asset,
                                  std::function<double(double)> exact, double cap);

    int sell_asset() const { return sell_; }
    int buy_asset() const { return buy_; }

    // D(rate); right-continuity is not prescribed: at a jump rate the
    // pre-jump value is returned, matching "A0 if p > r and 0 otherwise".
    double cumulative(double rate) const;
    // D^{-1}(x) = sup{p : D(p) <= x}; infinity when x >= total().
    double inverse(double x) const;
    // D(inf).
    double total() const;
    // Largest rate with D == 0 (the initial spot rate of this half).
    double spot() const;

    // g(x) = integral_0^{D^{-1}(x)} d(p) ln(1/p) dp with jump terms
    // min(c, .) ln(1/rate).  g(0) = 0, g concave, g'(x) = ln(1/D^{-1}(x)).
    double g_value(double x) const;
    double g_derivative(double x) const;

    // phi(w) = integral_0^w D(z)/z dz, the per-unit-valuation first term of
    // the convex program objective (the integrand of the paper's first term
    // vanishes for z >= p_A/p_B).
    double phi(double w) const;

    const std::vector<density_jump>& jumps() const { return jumps_; }
    // True when p_A * D(p_A/p_B) is a rational-linear function of (p_A,p_B)
    // wherever D > 0 (reciprocal and jump families).
    bool rational_linear() const;

    struct reciprocal_params {
        double supply = 0.0;
        double q = 0.0;
    };
    // Set for the reciprocal family, empty otherwise.
    std::optional<reciprocal_params> reciprocal_form() const;

    // rate, D(rate), d(rate) rows for plotting; d by central differences.
    std::vector<std::array<double, 3>> sample_curve(int points) const;

  private:
    enum class kind { empty, jumps, recip, lmsr, tabulated };

    half_density(kind k, int sell, int buy) : kind_(k), sell_(sell), buy_(buy) {}

    double smooth_cumulative(double rate) const;  // jump-free part
    double smooth_phi(double w) const;

    kind kind_;
    int sell_ = 0;
    int buy_ = 0;
    std::vector<density_jump> jumps_;  // sorted by rate

    // recip
    double supply_ = 0.0;
    double q_ = 0.0;

    // lmsr
    double lmsr_s0_ = 1.0;    // spot rate e^{b0-a0}
    double lmsr_peak_ = 0.0;  // argmax of ln(z/s0)/(1+z)
    double lmsr_cap_ = 0.0;   // D at the peak (monotone envelope)

    // tabulated
    std::function<double(double)> exact_;
    std::vector<double> grid_;      // log-spaced rates
    std::vector<double> grid_d_;    // monotone D values
    std::vector<double> grid_phi_;  // cumulative integral of D/z

    double spot_ = 0.0;
    double total_ = 0.0;
};

}  // namespace batchclear
