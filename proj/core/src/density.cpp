#include "batchclear/density.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "batchclear/errors.hpp"
#include "batchclear/trading_function.hpp"

namespace batchclear {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double simpson(const std::function<double(double)>& f, double a, double m, double b, double fa,
               double fm, double fb, double whole, double tol, int depth) {
    const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
    const double flm = f(lm), frm = f(rm);
    const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    if (depth <= 0 || std::abs(left + right - whole) <= 15.0 * tol)
        return left + right + (left + right - whole) / 15.0;
    return simpson(f, a, lm, m, fa, flm, fm, left, tol / 2.0, depth - 1) +
           simpson(f, m, rm, b, fm, frm, fb, right, tol / 2.0, depth - 1);
}

double adaptive_quad(const std::function<double(double)>& f, double a, double b, double tol = 1e-10) {
    if (b <= a) return 0.0;
    const double m = 0.5 * (a + b);
    const double fa = f(a), fm = f(m), fb = f(b);
    const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    return simpson(f, a, m, b, fa, fm, fb, whole, tol, 48);
}

// integral of the linear interpolant (d0 at z0, d1 at z1) of D divided by z
double linear_cell_integral(double z0, double z1, double d0, double d1) {
    if (z1 <= z0) return 0.0;
    const double m = (d1 - d0) / (z1 - z0);
    const double lr = std::log(z1 / z0);
    return (d0 - m * z0) * lr + m * (z1 - z0);
}

}  // namespace

half_density half_density::empty(int sell, int buy) {
    half_density h(kind::empty, sell, buy);
    h.spot_ = kInf;
    h.total_ = 0.0;
    return h;
}

half_density half_density::from_jumps(int sell, int buy, std::vector<density_jump> jumps) {
    half_density h(kind::jumps, sell, buy);
    std::erase_if(jumps, [](const density_jump& j) { return j.size <= 0.0; });
    std::sort(jumps.begin(), jumps.end(),
              [](const density_jump& a, const density_jump& b) { return a.rate < b.rate; });
    h.jumps_ = std::move(jumps);
    if (h.jumps_.empty()) return empty(sell, buy);
    for (const auto& j : h.jumps_) {
        if (!(j.rate > 0.0)) throw error("jump rate must be positive");
        h.total_ += j.size;
    }
    h.spot_ = h.jumps_.front().rate;
    return h;
}

half_density half_density::reciprocal(int sell, int buy, double supply, double q) {
    if (supply <= 0.0) return empty(sell, buy);
    half_density h(kind::recip, sell, buy);
    h.supply_ = supply;
    h.q_ = q;
    h.spot_ = q / supply;
    h.total_ = supply;
    return h;
}

half_density half_density::lmsr(int sell, int buy, double a0, double b0) {
    if (a0 <= 0.0) return empty(sell, buy);
    half_density h(kind::lmsr, sell, buy);
    const double s0 = std::exp(b0 - a0);
    h.lmsr_s0_ = s0;
    // end of the increasing branch of ln(z/s0)/(1+z): ln(z/s0) = 1 + 1/z
    double lo = s0 * std::exp(1.0), hi = s0 * 1e9;
    for (int i = 0; i < 200; ++i) {
        const double mid = std::sqrt(lo * hi);
        (std::log(mid / s0) < 1.0 + 1.0 / mid ? lo : hi) = mid;
    }
    double peak = std::sqrt(lo * hi);
    double cap = std::log(peak / s0) / (1.0 + peak);
    if (cap > a0) {
        // the sellable reserve binds first: stop where the branch reaches a0
        double zl = s0, zh = peak;
        for (int i = 0; i < 200; ++i) {
            const double mid = std::sqrt(zl * zh);
            (std::log(mid / s0) / (1.0 + mid) < a0 ? zl : zh) = mid;
        }
        peak = std::sqrt(zl * zh);
        cap = a0;
    }
    h.lmsr_peak_ = peak;
    h.lmsr_cap_ = cap;
    h.spot_ = s0;
    h.total_ = cap;
    // cumulative integral of D/z cached on a grid so the convex solver's
    // objective does not re-run the full quadrature per evaluation
    constexpr int kCells = 256;
    h.grid_.resize(kCells + 1);
    h.grid_phi_.resize(kCells + 1);
    h.grid_phi_[0] = 0.0;
    auto integrand = [&h](double z) { return h.smooth_cumulative(z) / z; };
    for (int i = 0; i <= kCells; ++i)
        h.grid_[static_cast<size_t>(i)] =
            s0 * std::pow(peak / s0, static_cast<double>(i) / kCells);
    for (int i = 1; i <= kCells; ++i) {
        const size_t k = static_cast<size_t>(i);
        h.grid_phi_[k] =
            h.grid_phi_[k - 1] + adaptive_quad(integrand, h.grid_[k - 1], h.grid_[k], 1e-13);
    }
    return h;
}

half_density half_density::tabulated(int sell, int buy, std::function<double(double)> exact,
                                     double cap) {
    if (!std::isfinite(cap)) throw unbounded_density("density cap must be finite");
    half_density h(kind::tabulated, sell, buy);
    // coarse scan to locate the spot rate and the demand limit
    constexpr int kScan = 481;
    const double zmin = 1e-9, zmax = 1e12;
    double run = 0.0, d_inf = 0.0;
    double spot_lo = zmin, spot_hi = -1.0;
    std::vector<double> scan_z(kScan), scan_d(kScan);
    for (int i = 0; i < kScan; ++i) {
        const double z = zmin * std::pow(zmax / zmin, static_cast<double>(i) / (kScan - 1));
        run = std::max(run, std::min(cap, std::max(0.0, exact(z))));
        scan_z[static_cast<size_t>(i)] = z;
        scan_d[static_cast<size_t>(i)] = run;
        d_inf = std::max(d_inf, run);
        if (run <= 1e-12 * std::max(1.0, cap)) spot_lo = z;
        if (spot_hi < 0.0 && run > 1e-12 * std::max(1.0, cap)) spot_hi = z;
    }
    if (d_inf <= 0.0) return empty(sell, buy);
    // refine the spot by bisection on the raw curve
    double lo = spot_lo, hi = spot_hi > 0.0 ? spot_hi : zmax;
    for (int i = 0; i < 120; ++i) {
        const double mid = std::sqrt(lo * hi);
        (std::max(0.0, exact(mid)) <= 1e-12 * std::max(1.0, d_inf) ? lo : hi) = mid;
    }
    const double spot = std::sqrt(lo * hi);
    // z_hi: first rate where D reaches 0.999 of the limit
    double zh = zmax;
    for (int i = 0; i < kScan; ++i) {
        if (scan_d[static_cast<size_t>(i)] >= 0.999 * d_inf) {
            zh = scan_z[static_cast<size_t>(i)];
            break;
        }
    }
    zh = std::max(zh, spot * 1.0001);
    constexpr int kGrid = 512;
    h.grid_.resize(kGrid);
    h.grid_d_.resize(kGrid);
    h.grid_phi_.resize(kGrid);
    double mono = 0.0;
    for (int i = 0; i < kGrid; ++i) {
        const double z = spot * std::pow(zh / spot, static_cast<double>(i) / (kGrid - 1));
        mono = std::max(mono, std::min(cap, std::max(0.0, exact(z))));
        h.grid_[static_cast<size_t>(i)] = z;
        h.grid_d_[static_cast<size_t>(i)] = i == 0 ? 0.0 : mono;
    }
    h.grid_phi_[0] = 0.0;
    for (int i = 1; i < kGrid; ++i) {
        const size_t k = static_cast<size_t>(i);
        h.grid_phi_[k] = h.grid_phi_[k - 1] +
                         linear_cell_integral(h.grid_[k - 1], h.grid_[k], h.grid_d_[k - 1], h.grid_d_[k]);
    }
    h.spot_ = spot;
    h.total_ = h.grid_d_.back();
    if (h.total_ <= 0.0) return empty(sell, buy);
    return h;
}

double half_density::smooth_cumulative(double rate) const {
    switch (kind_) {
        case kind::empty:
        case kind::jumps:
            return 0.0;
        case kind::recip:
            return rate <= spot_ ? 0.0 : supply_ - q_ / rate;
        case kind::lmsr: {
            if (rate <= spot_) return 0.0;
            if (rate >= lmsr_peak_) return lmsr_cap_;
            return std::log(rate / lmsr_s0_) / (1.0 + rate);
        }
        case kind::tabulated: {
            if (rate <= grid_.front()) return 0.0;
            if (rate >= grid_.back()) return grid_d_.back();
            const auto it = std::upper_bound(grid_.begin(), grid_.end(), rate);
            const size_t k = static_cast<size_t>(it - grid_.begin());
            const double t = (rate - grid_[k - 1]) / (grid_[k] - grid_[k - 1]);
            return grid_d_[k - 1] + t * (grid_d_[k] - grid_d_[k - 1]);
        }
    }
    return 0.0;
}

double half_density::cumulative(double rate) const {
    double d = smooth_cumulative(rate);
    for (const auto& j : jumps_)
        if (rate > j.rate) d += j.size;
    return d;
}

double half_density::total() const { return total_; }

double half_density::spot() const { return spot_; }

double half_density::inverse(double x) const {
    if (x < 0.0) throw out_of_range("inverse of negative cumulative amount");
    if (x >= total_) return kInf;
    switch (kind_) {
        case kind::empty:
            return kInf;
        case kind::jumps: {
            double cum = 0.0;
            for (const auto& j : jumps_) {
                cum += j.size;
                if (x < cum) return j.rate;
            }
            return kInf;
        }
        case kind::recip:
            return q_ / (supply_ - x);
        case kind::lmsr: {
            double lo = lmsr_s0_, hi = lmsr_peak_;
            for (int i = 0; i < 128; ++i) {
                const double mid = std::sqrt(lo * hi);
                (smooth_cumulative(mid) < x ? lo : hi) = mid;
                if (hi - lo <= 1e-12 * lo) break;
            }
            return 0.5 * (lo + hi);
        }
        case kind::tabulated: {
            const auto it = std::upper_bound(grid_d_.begin(), grid_d_.end(), x);
            if (it == grid_d_.begin()) return grid_.front();
            if (it == grid_d_.end()) return grid_.back();
            const size_t k = static_cast<size_t>(it - grid_d_.begin());
            const double lo_d = grid_d_[k - 1], hi_d = grid_d_[k];
            if (hi_d <= lo_d) return grid_[k];
            const double t = (x - lo_d) / (hi_d - lo_d);
            return grid_[k - 1] + t * (grid_[k] - grid_[k - 1]);
        }
    }
    return kInf;
}

double half_density::smooth_phi(double w) const {
    switch (kind_) {
        case kind::empty:
        case kind::jumps:
            return 0.0;
        case kind::recip: {
            if (w <= spot_) return 0.0;
            return supply_ * std::log(w / spot_) + q_ * (1.0 / w - 1.0 / spot_);
        }
        case kind::lmsr: {
            if (w <= spot_) return 0.0;
            const double wi = std::min(w, lmsr_peak_);
            const auto it = std::upper_bound(grid_.begin(), grid_.end(), wi);
            const size_t k = static_cast<size_t>(it - grid_.begin()) - 1;
            double v = grid_phi_[k] +
                       adaptive_quad([this](double z) { return smooth_cumulative(z) / z; },
                                     grid_[k], wi, 1e-13);
            if (w > lmsr_peak_) v += lmsr_cap_ * std::log(w / lmsr_peak_);
            return v;
        }
        case kind::tabulated: {
            if (w <= grid_.front()) return 0.0;
            if (w >= grid_.back())
                return grid_phi_.back() + grid_d_.back() * std::log(w / grid_.back());
            const auto it = std::upper_bound(grid_.begin(), grid_.end(), w);
            const size_t k = static_cast<size_t>(it - grid_.begin());
            const double dk = smooth_cumulative(w);
            return grid_phi_[k - 1] + linear_cell_integral(grid_[k - 1], w, grid_d_[k - 1], dk);
        }
    }
    return 0.0;
}

double half_density::phi(double w) const {
    if (!(w > 0.0)) return 0.0;
    double v = smooth_phi(w);
    for (const auto& j : jumps_)
        if (w > j.rate) v += j.size * std::log(w / j.rate);
    return v;
}

double half_density::g_value(double x) const {
    const double slack = 1e-9 * std::max(1.0, total_);
    if (x < -slack || x > total_ + slack) throw out_of_range("g outside [0, D(inf)]");
    x = std::clamp(x, 0.0, total_);
    if (x == 0.0) return 0.0;
    switch (kind_) {
        case kind::empty:
            return 0.0;
        case kind::jumps: {
            double v = 0.0, remaining = x;
            for (const auto& j : jumps_) {
                const double take = std::min(j.size, remaining);
                v += take * std::log(1.0 / j.rate);
                remaining -= take;
                if (remaining <= 0.0) break;
            }
            return v;
        }
        case kind::recip: {
            if (x >= supply_) return -supply_ * std::log(spot_) - supply_;
            const double p = q_ / (supply_ - x);
            return (supply_ - x) * std::log(p) - supply_ * std::log(spot_) - x;
        }
        case kind::lmsr:
        case kind::tabulated: {
            const double p = x >= total_ ? (kind_ == kind::lmsr ? lmsr_peak_ : grid_.back())
                                         : inverse(x);
            return smooth_phi(p) - x * std::log(p);
        }
    }
    return 0.0;
}

double half_density::g_derivative(double x) const {
    const double slack = 1e-9 * std::max(1.0, total_);
    if (x < -slack || x > total_ + slack) throw out_of_range("g' outside [0, D(inf)]");
    x = std::clamp(x, 0.0, total_ * (1.0 - 1e-15));
    if (kind_ == kind::jumps) {
        double cum = 0.0;
        for (const auto& j : jumps_) {
            cum += j.size;
            if (x < cum) return -std::log(j.rate);
        }
        return -std::log(jumps_.back().rate);
    }
    return -std::log(inverse(x));
}

bool half_density::rational_linear() const {
    return kind_ == kind::empty || kind_ == kind::jumps || kind_ == kind::recip;
}

std::optional<half_density::reciprocal_params> half_density::reciprocal_form() const {
    if (kind_ != kind::recip) return std::nullopt;
    return reciprocal_params{supply_, q_};
}

std::vector<std::array<double, 3>> half_density::sample_curve(int points) const {
    std::vector<std::array<double, 3>> rows;
    if (total_ <= 0.0 || points < 2) return rows;
    double lo = spot_ > 0.0 && std::isfinite(spot_) ? spot_ * 0.5 : 1e-6;
    double hi = inverse(std::min(total_ * 0.999, total_ - 1e-15));
    if (!std::isfinite(hi)) hi = (jumps_.empty() ? lo * 4.0 : jumps_.back().rate) * 2.0;
    hi = std::max(hi * 1.25, lo * 2.0);
    rows.reserve(static_cast<size_t>(points));
    for (int i = 0; i < points; ++i) {
        const double z = lo * std::pow(hi / lo, static_cast<double>(i) / (points - 1));
        const double h = z * 1e-6;
        const double d = (cumulative(z + h) - cumulative(z - h)) / (2.0 * h);
        rows.push_back({z, cumulative(z), d});
    }
    return rows;
}

// ---- builders bridging trading functions and densities ----

namespace {

half_density half_from_demand(const trading_function& fn, std::span<const double> reserves,
                              int local_sell) {
    const int other = 1 - local_sell;
    const double cap = reserves[static_cast<size_t>(local_sell)];
    if (!std::isfinite(cap)) throw unbounded_density("infinite sellable reserve");
    auto exact = [fn, r0 = reserves[0], r1 = reserves[1], local_sell, other](double z) {
        // price the sold asset at z relative to the bought asset
        double prices[2];
        prices[static_cast<size_t>(local_sell)] = z;
        prices[static_cast<size_t>(other)] = 1.0;
        const double res[2] = {r0, r1};
        auto resp = compute_demand(fn, std::span<const double>(res, 2),
                                   std::span<const double>(prices, 2));
        return res[static_cast<size_t>(local_sell)] - resp.new_reserves[static_cast<size_t>(local_sell)];
    };
    return half_density::tabulated(local_sell, other, exact, cap);
}

}  // namespace

std::pair<half_density, half_density> density_from_function(const trading_function& fn,
                                                            std::span<const double> reserves) {
    if (fn.arity() != 2 && !(fn.is<custom_function>() && reserves.size() == 2))
        throw wrong_arity("density view requires a two-asset trading function");
    const double a0 = reserves[0], b0 = reserves[1];
    if (!std::isfinite(a0) || !std::isfinite(b0)) throw unbounded_density("reserves must be finite");
    if (fn.is<constant_product>()) {
        return {half_density::reciprocal(0, 1, a0 / 2.0, b0 / 2.0),
                half_density::reciprocal(1, 0, b0 / 2.0, a0 / 2.0)};
    }
    if (const auto* w = fn.get_if<weighted_product>()) {
        const double s = w->wa + w->wb;
        return {half_density::reciprocal(0, 1, a0 * w->wb / s, b0 * w->wa / s),
                half_density::reciprocal(1, 0, b0 * w->wa / s, a0 * w->wb / s)};
    }
    if (const auto* m = fn.get_if<monomial>(); m && m->exponents.size() == 2) {
        const double s = m->exponents[0] + m->exponents[1];
        return {half_density::reciprocal(0, 1, a0 * m->exponents[1] / s, b0 * m->exponents[0] / s),
                half_density::reciprocal(1, 0, b0 * m->exponents[0] / s, a0 * m->exponents[1] / s)};
    }
    if (const auto* cs = fn.get_if<constant_sum>()) {
        return {half_density::from_jumps(0, 1, {{cs->rate, a0}}),
                half_density::from_jumps(1, 0, {{1.0 / cs->rate, b0}})};
    }
    if (fn.is<lmsr_rule>()) {
        return {half_density::lmsr(0, 1, a0, b0), half_density::lmsr(1, 0, b0, a0)};
    }
    if (const auto* dp = fn.get_if<density_pair>()) {
        return {*dp->sell_first, *dp->sell_second};
    }
    return {half_from_demand(fn, reserves, 0), half_from_demand(fn, reserves, 1)};
}

trading_function density_cfmm(half_density sell_first, half_density sell_second) {
    const double hi = sell_first.inverse(0.0);
    const double lo_inv = sell_second.inverse(0.0);
    if (std::isfinite(hi) && std::isfinite(lo_inv) && hi < (1.0 / lo_inv) * (1.0 - 1e-12))
        throw inconsistent_densities("crossing condition D1^{-1}(0) >= 1/D2^{-1}(0) violated");
    density_pair dp;
    dp.sell_first = std::make_shared<half_density>(std::move(sell_first));
    dp.sell_second = std::make_shared<half_density>(std::move(sell_second));
    return trading_function(std::move(dp));
}

}  // namespace batchclear
