#pragma once

#include <algorithm>
#include <optional>
#include <vector>

#include "acam/subcircuits.hpp"

namespace acam {

/// Subcircuit output cutoff levels as fractions of VDD.
struct Level {
    double p_lo = 0.4;
    double p_hi = 0.6;

    void validate() const {
        require(p_lo > 0.0 && p_lo < p_hi && p_hi < 1.0,
                "Level: need 0 < p_lo < p_hi < 1");
    }
};

enum class Side { LB, UB };

/// One LUT row: memristance plus the vdl crossings of the lo/hi output
/// levels. Ordering convention: LB has b_hi <= b_lo, UB has b_lo <= b_hi.
struct BoundTriple {
    double r = 0.0;
    double b_lo = 0.0;
    double b_hi = 0.0;
};

struct BoundsLut {
    Side side = Side::LB;
    std::vector<BoundTriple> entries;  // sorted by r descending

    bool empty() const { return entries.empty(); }
};

/// Per-memristance Monte Carlo bound statistics.
struct BoundStats {
    double r = 0.0;
    double mu_lo = 0.0, sigma_lo = 0.0;
    double mu_hi = 0.0, sigma_hi = 0.0;
    int n_valid = 0;
    int n_total = 0;
};

/// Guard-banded LUT: entries already carry the +-m*sigma shifted bounds.
struct GuardedBoundsLut {
    BoundsLut lut;
    double m = 0.0;
};

inline double kVdlSweepFloor = 0.1;  // paper-style DC sweep starts at 0.1 V

/// Output voltage of one side's subcircuit as the bound extraction sees it:
/// the effective G1 chain output for LB, the G2 node for UB.
inline double side_output(CellTag tag, Side side, const DeviceSet& dev,
                          const SupplyConfig& supply, double r, double vdl) {
    const CellDesign design = CellDesign::of(tag);
    if (side == Side::UB) return solve_ubs_node(dev, supply, r, vdl);
    CellConfig cfg{design, r, r};
    return cell_gate_voltages(cfg, dev, supply, vdl).first;
}

namespace detail {

/// vdl crossing of a monotone side output with a horizontal level, or
/// nullopt when the curve never reaches the level on the sweep range.
template <class Fn>
std::optional<double> crossing(Fn&& vg_of_vdl, double level, double vdl_min,
                               double vdl_max, double tol = 1e-4) {
    const double a = vg_of_vdl(vdl_min);
    const double b = vg_of_vdl(vdl_max);
    const double fa = a - level;
    const double fb = b - level;
    if (fa == 0.0) return vdl_min;
    if (fb == 0.0) return vdl_max;
    if ((fa > 0.0) == (fb > 0.0)) return std::nullopt;
    return solve_bracketed([&](double v) { return vg_of_vdl(v) - level; },
                           vdl_min, vdl_max, tol);
}

}  // namespace detail

/// Level targets actually applied per (design, side). The 8T2M LBS output
/// is inverted, so its lo/hi roles are exchanged and non-symmetric levels
/// map to [1 - p_lo, 1 - p_hi] of VDD.
inline std::pair<double, double> side_level_targets(CellTag tag, Side side,
                                                    const Level& level,
                                                    const SupplyConfig& supply) {
    if (side == Side::LB && CellDesign::of(tag).lbs_inverted())
        return {(1.0 - level.p_lo) * supply.vdd, (1.0 - level.p_hi) * supply.vdd};
    return {level.p_lo * supply.vdd, level.p_hi * supply.vdd};
}

/// Bound quadruple extraction for one memristance: vdl roots of the side
/// VTC against the lo/hi levels. Nullopt when a level is never crossed.
inline std::optional<BoundTriple> extract_bounds(CellTag tag, Side side, double r,
                                                 const Level& level,
                                                 const DeviceSet& dev,
                                                 const SupplyConfig& supply) {
    level.validate();
    auto vg = [&](double vdl) { return side_output(tag, side, dev, supply, r, vdl); };
    const auto [lvl_lo, lvl_hi] = side_level_targets(tag, side, level, supply);
    const auto lo = detail::crossing(vg, lvl_lo, kVdlSweepFloor, supply.vdd);
    const auto hi = detail::crossing(vg, lvl_hi, kVdlSweepFloor, supply.vdd);
    if (!lo || !hi) return std::nullopt;
    return BoundTriple{r, *lo, *hi};
}

/// Single cutoff-voltage crossing (the classic LB/UB definition where the
/// stored bound is the vdl that drives the output to a fixed cutoff).
inline std::optional<double> extract_cutoff_crossing(CellTag tag, Side side,
                                                     double r, double cutoff,
                                                     const DeviceSet& dev,
                                                     const SupplyConfig& supply) {
    auto vg = [&](double vdl) { return side_output(tag, side, dev, supply, r, vdl); };
    return detail::crossing(vg, cutoff, kVdlSweepFloor, supply.vdd);
}

/// Preparatory phase: bound triples for every memristance on the grid,
/// sorted by resistance in decreasing order. Entries without a crossing
/// are excluded.
inline BoundsLut build_lut(CellTag tag, Side side, std::vector<double> r_grid,
                           const Level& level, const DeviceSet& dev,
                           const SupplyConfig& supply) {
    std::sort(r_grid.begin(), r_grid.end(), std::greater<>());
    BoundsLut lut{side, {}};
    lut.entries.reserve(r_grid.size());
    for (double r : r_grid) {
        if (auto t = extract_bounds(tag, side, r, level, dev, supply))
            lut.entries.push_back(*t);
    }
    return lut;
}

/// Monte Carlo bound statistics for one memristance under device (and
/// optionally memristor) variations. Runs that lose a crossing are counted
/// but excluded from the moments. Deterministic given (seed, stream).
inline BoundStats mc_bound_statistics(CellTag tag, Side side, double r,
                                      const Level& level, const DeviceSet& dev,
                                      const SupplyConfig& supply,
                                      const VariationSpec& variation, int n_runs,
                                      std::uint64_t stream = 0) {
    require(n_runs >= 1, "mc_bound_statistics: n_runs must be >= 1");
    BoundStats st;
    st.r = r;
    st.n_total = n_runs;
    double s_lo = 0, s2_lo = 0, s_hi = 0, s2_hi = 0;
    RngStream rng(variation.seed, stream);
    for (int run = 0; run < n_runs; ++run) {
        const DeviceSet d = sample_variation(dev, variation, rng);
        const double r_run = sample_memristance(r, variation, rng);
        const auto t = extract_bounds(tag, side, r_run, level, d, supply);
        if (!t) continue;
        ++st.n_valid;
        s_lo += t->b_lo;
        s2_lo += t->b_lo * t->b_lo;
        s_hi += t->b_hi;
        s2_hi += t->b_hi * t->b_hi;
    }
    if (st.n_valid > 0) {
        const double n = st.n_valid;
        st.mu_lo = s_lo / n;
        st.mu_hi = s_hi / n;
        if (st.n_valid > 1) {
            st.sigma_lo = std::sqrt(std::max(0.0, (s2_lo - n * st.mu_lo * st.mu_lo) / (n - 1)));
            st.sigma_hi = std::sqrt(std::max(0.0, (s2_hi - n * st.mu_hi * st.mu_hi) / (n - 1)));
        }
    }
    return st;
}

/// Variability margining: shift each bound by m standard deviations so the
/// match window shrinks and the forbidden regions widen. Entries whose
/// guarded window inverts are dropped.
inline GuardedBoundsLut guarded_lut(Side side, const std::vector<BoundStats>& stats,
                                    double m) {
    require(m >= 0.0 && m <= 3.0, "guarded_lut: m must be in [0, 3]");
    GuardedBoundsLut out;
    out.m = m;
    out.lut.side = side;
    for (const BoundStats& st : stats) {
        if (st.n_valid == 0) continue;
        BoundTriple t;
        t.r = st.r;
        if (side == Side::LB) {
            t.b_lo = st.mu_lo + m * st.sigma_lo;
            t.b_hi = st.mu_hi - m * st.sigma_hi;
            if (t.b_hi > t.b_lo) continue;  // inverted forbidden region
        } else {
            t.b_lo = st.mu_lo - m * st.sigma_lo;
            t.b_hi = st.mu_hi + m * st.sigma_hi;
            if (t.b_lo > t.b_hi) continue;
        }
        out.lut.entries.push_back(t);
    }
    std::sort(out.lut.entries.begin(), out.lut.entries.end(),
              [](const BoundTriple& a, const BoundTriple& b) { return a.r > b.r; });
    return out;
}

/// Nominal stats (sigma = 0) so the guarded path can reuse a plain LUT.
inline std::vector<BoundStats> stats_from_lut(const BoundsLut& lut) {
    std::vector<BoundStats> out;
    out.reserve(lut.entries.size());
    for (const BoundTriple& t : lut.entries) {
        BoundStats st;
        st.r = t.r;
        st.mu_lo = t.b_lo;
        st.mu_hi = t.b_hi;
        st.n_valid = st.n_total = 1;
        out.push_back(st);
    }
    return out;
}

}  // namespace acam
