#pragma once

#include <cmath>
#include <optional>
#include <vector>

#include "acam/luts.hpp"

namespace acam {

enum class BoundCol { Lo, Hi };

inline double bound_value(const BoundTriple& t, BoundCol col) {
    return col == BoundCol::Lo ? t.b_lo : t.b_hi;
}

/// One packed interval: the match window [lb, ub], its level d, the
/// programmed memristor pair, and the flanking forbidden regions.
struct Interval {
    int idx = 0;
    double r_lb = 0.0;
    double r_ub = 0.0;
    double lb = 0.0;
    double ub = 0.0;
    double d = 0.0;
    double fr_left_lo = 0.0;   // [LB_hi, LB_lo]
    double fr_left_hi = 0.0;
    double fr_right_lo = 0.0;  // [UB_lo, UB_hi]
    double fr_right_hi = 0.0;
};

struct IntervalSet {
    CellTag tag = CellTag::D6T2M;
    Level level{};
    double m = 0.0;
    double w = 0.01;
    std::vector<Interval> intervals;

    int eta() const { return static_cast<int>(intervals.size()); }
    bool empty() const { return intervals.empty(); }
};

/// Memristance whose bound column matches `target`, by monotone piecewise
/// interpolation in log(r). Scans from the largest r so flat segments
/// resolve to the most conservative (largest) resistance. Nullopt when the
/// target falls outside the column's range.
inline std::optional<double> find_r_for_bound(const BoundsLut& lut, BoundCol col,
                                              double target) {
    const auto& e = lut.entries;
    if (e.empty()) return std::nullopt;
    if (e.size() == 1)
        return std::abs(bound_value(e[0], col) - target) <= 1e-12
                   ? std::optional<double>(e[0].r)
                   : std::nullopt;
    for (std::size_t i = 0; i + 1 < e.size(); ++i) {
        const double a = bound_value(e[i], col);
        const double b = bound_value(e[i + 1], col);
        if ((target - a) * (target - b) > 0.0) continue;
        if (a == b) return e[i].r;  // flat segment: keep the larger r
        const double f = (target - a) / (b - a);
        return std::exp(std::log(e[i].r) + f * (std::log(e[i + 1].r) - std::log(e[i].r)));
    }
    return std::nullopt;
}

/// Bound column value at memristance r (log-r linear interpolation).
inline std::optional<double> bound_at_r(const BoundsLut& lut, BoundCol col, double r) {
    const auto& e = lut.entries;
    if (e.empty()) return std::nullopt;
    if (r > e.front().r * (1.0 + 1e-9) || r < e.back().r * (1.0 - 1e-9))
        return std::nullopt;
    if (e.size() == 1) return bound_value(e[0], col);
    for (std::size_t i = 0; i + 1 < e.size(); ++i) {
        if (r <= e[i].r * (1.0 + 1e-12) && r >= e[i + 1].r * (1.0 - 1e-12)) {
            const double la = std::log(e[i].r), lb = std::log(e[i + 1].r);
            const double f = (std::log(r) - la) / (lb - la);
            return bound_value(e[i], col) +
                   f * (bound_value(e[i + 1], col) - bound_value(e[i], col));
        }
    }
    return bound_value(e.back(), col);
}

/// Greedy maximal interval packing: anchor the first interval at the lowest
/// reachable LB_lo, then derive each next interval from the previous upper
/// forbidden-region edge (next LB_hi = previous UB_hi). Terminates when a
/// lookup leaves the LUT range or the next window would exceed vdd - w.
inline IntervalSet build_intervals(const BoundsLut& lut_lb, const BoundsLut& lut_ub,
                                   double w, double vdd = 0.8) {
    require(w > 0.0, "build_intervals: w must be positive");
    IntervalSet set;
    set.w = w;
    if (lut_lb.empty() || lut_ub.empty()) return set;

    double r_lb = lut_lb.entries.front().r;
    double lb_lo = lut_lb.entries.front().b_lo;
    double lb_hi = lut_lb.entries.front().b_hi;
    double prev_lb = -1.0;

    while (true) {
        if (lb_lo > vdd - w) break;
        if (lb_lo <= prev_lb) break;  // interpolation degenerated
        double ub_lo = lb_lo + w;
        auto r_ub = find_r_for_bound(lut_ub, BoundCol::Lo, ub_lo);
        if (!r_ub) {
            // The UB curve may not reach down to lb_lo + w; widen the
            // interval to the lowest reachable upper bound instead.
            const BoundTriple* best = nullptr;
            for (const auto& t : lut_ub.entries)
                if (t.b_lo >= ub_lo && (!best || t.b_lo < best->b_lo)) best = &t;
            if (!best) break;
            r_ub = best->r;
            ub_lo = best->b_lo;
        }
        const auto ub_hi = bound_at_r(lut_ub, BoundCol::Hi, *r_ub);
        if (!ub_hi) break;

        Interval iv;
        iv.idx = set.eta() + 1;
        iv.r_lb = r_lb;
        iv.r_ub = *r_ub;
        iv.lb = lb_lo;
        iv.ub = ub_lo;
        iv.d = 0.5 * (lb_lo + ub_lo);
        iv.fr_left_lo = lb_hi;
        iv.fr_left_hi = lb_lo;
        iv.fr_right_lo = ub_lo;
        iv.fr_right_hi = *ub_hi;
        set.intervals.push_back(iv);
        prev_lb = lb_lo;

        const auto r_lb_next = find_r_for_bound(lut_lb, BoundCol::Hi, *ub_hi);
        if (!r_lb_next) break;
        const auto next_lo = bound_at_r(lut_lb, BoundCol::Lo, *r_lb_next);
        if (!next_lo) break;
        r_lb = *r_lb_next;
        lb_hi = *ub_hi;
        lb_lo = *next_lo;
    }
    return set;
}

/// Same packing on guard-banded curves. m is carried on the result.
inline IntervalSet build_intervals_guarded(const GuardedBoundsLut& lb,
                                           const GuardedBoundsLut& ub, double w,
                                           double vdd = 0.8) {
    require(lb.m == ub.m, "build_intervals_guarded: mismatched m");
    IntervalSet set = build_intervals(lb.lut, ub.lut, w, vdd);
    set.m = lb.m;
    return set;
}

/// Per-design guard-band multiplier: the largest m on a 0.05 grid whose
/// guarded packing still keeps at least `kappa` intervals, or -1 when even
/// m = 0 falls short. This is how the failure studies pick their m: the
/// widest guard band each design can afford at a given interval budget.
inline double max_guard_multiplier(const std::vector<BoundStats>& lb_stats,
                                   const std::vector<BoundStats>& ub_stats,
                                   double w, double vdd, int kappa,
                                   double m_max = 3.0, double step = 0.05) {
    const int steps = static_cast<int>(std::lround(m_max / step));
    for (int i = steps; i >= 0; --i) {
        const double m = i * step;
        const IntervalSet set =
            build_intervals_guarded(guarded_lut(Side::LB, lb_stats, m),
                                    guarded_lut(Side::UB, ub_stats, m), w, vdd);
        if (set.eta() >= kappa) return m;
    }
    return -1.0;
}

inline std::vector<double> discrete_levels(const IntervalSet& set) {
    std::vector<double> d;
    d.reserve(set.intervals.size());
    for (const Interval& iv : set.intervals) d.push_back(iv.d);
    return d;
}

struct IntervalViolation {
    int i = 0;  // programmed cell interval (1-based)
    int j = 0;  // applied input level
    double margin = 0.0;
};

struct ValidationReport {
    int checks = 0;
    std::vector<IntervalViolation> violations;

    bool ok() const { return violations.empty(); }
};

/// Brute-force oracle for the interval packing: re-simulate every (cell_i,
/// input d_j) pair and check the gate outputs against the level thresholds.
/// j == i must keep both outputs on the match side of VG_lo; j != i must
/// push at least one output past VG_hi (8T2M polarity handled).
inline ValidationReport validate_interval_set(const IntervalSet& set,
                                              const DeviceSet& dev,
                                              const SupplyConfig& supply) {
    ValidationReport rep;
    const CellDesign design = CellDesign::of(set.tag);
    const bool inv = design.lbs_inverted();
    const double vdd = supply.vdd;
    const double g1_match = (inv ? (1.0 - set.level.p_lo) : set.level.p_lo) * vdd;
    const double g1_mismatch = (inv ? (1.0 - set.level.p_hi) : set.level.p_hi) * vdd;
    const double g2_match = set.level.p_lo * vdd;
    const double g2_mismatch = set.level.p_hi * vdd;

    const auto d = discrete_levels(set);
    for (std::size_t i = 0; i < set.intervals.size(); ++i) {
        CellConfig cfg{design, set.intervals[i].r_lb, set.intervals[i].r_ub};
        for (std::size_t j = 0; j < d.size(); ++j) {
            ++rep.checks;
            const auto [vg1, vg2] = cell_gate_voltages(cfg, dev, supply, d[j]);
            const double m1 = inv ? (vg1 - g1_match) : (g1_match - vg1);
            const double m2 = g2_match - vg2;
            if (i == j) {
                const double margin = std::min(m1, m2);
                if (margin < 0.0)
                    rep.violations.push_back({static_cast<int>(i + 1),
                                              static_cast<int>(j + 1), margin});
            } else {
                const double s1 = inv ? (g1_mismatch - vg1) : (vg1 - g1_mismatch);
                const double s2 = vg2 - g2_mismatch;
                const double margin = std::max(s1, s2);
                if (margin < 0.0)
                    rep.violations.push_back({static_cast<int>(i + 1),
                                              static_cast<int>(j + 1), margin});
            }
        }
    }
    return rep;
}

}  // namespace acam
