#pragma once

#include <cmath>
#include <functional>
#include <limits>
#include <map>
#include <vector>

#include "acam/array.hpp"
#include "acam/intervals.hpp"

namespace acam {

inline constexpr double kNan = std::numeric_limits<double>::quiet_NaN();

struct IntervalDr {
    double v_fm = kNan;
    double v_1lbmm = kNan;  // mismatch cell stores the previous interval
    double v_1ubmm = kNan;  // mismatch cell stores the next interval
};

struct DrResult {
    std::vector<IntervalDr> per_interval;
    double dr = kNan;
};

struct FomResult {
    Level level{};
    int n = 0;
    int kappa = 0;
    double best_t = 0.0;
    double fom = 0.0;  // V/s
    double dr_at_best = 0.0;
    std::vector<int> subset;  // 0-based indices into the interval set
};

struct FailReport {
    int n_runs = 0;
    double v_ref = 0.0;
    long match_fails = 0;
    long mismatch_fails = 0;
    long decisions = 0;
    double p_f = 0.0;
};

namespace detail {

struct IntervalTraces {
    MatchLineTrace fm;
    MatchLineTrace lbmm;
    MatchLineTrace ubmm;
    bool has_lb = false;
    bool has_ub = false;
};

inline RowConfig make_row(const IntervalSet& set, int store_idx, int n,
                          double c_ml) {
    RowConfig row;
    row.design = CellDesign::of(set.tag);
    row.c_ml = c_ml;
    const Interval& iv = set.intervals[store_idx];
    row.cells.assign(n, CellConfig{row.design, iv.r_lb, iv.r_ub});
    return row;
}

/// Transients for every interval in `subset` under the fm / 1LBmm / 1UBmm
/// scenarios, with mismatch neighbors taken within the subset. Input is
/// always the probed interval's discrete level on all data lines.
inline std::vector<IntervalTraces> collect_traces(
    const IntervalSet& set, const std::vector<int>& subset, const DeviceSet& dev,
    const SupplyConfig& supply, int n, double c_ml, double t_max,
    double dt = 1e-12) {
    std::vector<IntervalTraces> out(subset.size());
    for (std::size_t p = 0; p < subset.size(); ++p) {
        const int i = subset[p];
        const double d_i = set.intervals[i].d;
        const std::vector<double> inputs(n, d_i);

        RowConfig row = make_row(set, i, n, c_ml);
        out[p].fm = ml_transient(row, dev, supply, inputs, t_max, dt);
        out[p].fm.scenario = "fm";
        if (p > 0) {
            RowConfig r2 = row;
            const Interval& nb = set.intervals[subset[p - 1]];
            r2.cells[0] = CellConfig{row.design, nb.r_lb, nb.r_ub};
            out[p].lbmm = ml_transient(r2, dev, supply, inputs, t_max, dt);
            out[p].lbmm.scenario = "1LBmm";
            out[p].has_lb = true;
        }
        if (p + 1 < subset.size()) {
            RowConfig r2 = row;
            const Interval& nb = set.intervals[subset[p + 1]];
            r2.cells[0] = CellConfig{row.design, nb.r_lb, nb.r_ub};
            out[p].ubmm = ml_transient(r2, dev, supply, inputs, t_max, dt);
            out[p].ubmm.scenario = "1UBmm";
            out[p].has_ub = true;
        }
    }
    return out;
}

inline DrResult dr_at(const std::vector<IntervalTraces>& traces, bool ts_polarity,
                      double t) {
    DrResult res;
    double worst_match = std::numeric_limits<double>::infinity();
    double worst_mismatch = -std::numeric_limits<double>::infinity();
    if (ts_polarity) std::swap(worst_match, worst_mismatch);
    for (const IntervalTraces& tr : traces) {
        IntervalDr d;
        d.v_fm = tr.fm.at(t);
        if (tr.has_lb) d.v_1lbmm = tr.lbmm.at(t);
        if (tr.has_ub) d.v_1ubmm = tr.ubmm.at(t);
        if (!ts_polarity) {
            worst_match = std::min(worst_match, d.v_fm);
            if (tr.has_lb) worst_mismatch = std::max(worst_mismatch, d.v_1lbmm);
            if (tr.has_ub) worst_mismatch = std::max(worst_mismatch, d.v_1ubmm);
        } else {
            worst_match = std::max(worst_match, d.v_fm);
            if (tr.has_lb) worst_mismatch = std::min(worst_mismatch, d.v_1lbmm);
            if (tr.has_ub) worst_mismatch = std::min(worst_mismatch, d.v_1ubmm);
        }
        res.per_interval.push_back(d);
    }
    res.dr = ts_polarity ? (worst_mismatch - worst_match)
                         : (worst_match - worst_mismatch);
    return res;
}

inline std::vector<int> all_indices(const IntervalSet& set) {
    std::vector<int> idx(set.intervals.size());
    for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = static_cast<int>(i);
    return idx;
}

}  // namespace detail

/// Worst-case separation between full match and one-mismatch across all
/// stored levels of the set, at row length n and sampling time t.
inline DrResult dynamic_range(const IntervalSet& set, const DeviceSet& dev,
                              const SupplyConfig& supply, int n, double t,
                              double c_ml = -1.0, double dt = 1e-12) {
    require(set.eta() >= 2, "dynamic_range: need at least 2 intervals");
    if (c_ml <= 0.0) c_ml = default_c_ml(n);
    const bool ts = CellDesign::of(set.tag).precharge_to_ground();
    const auto traces = detail::collect_traces(set, detail::all_indices(set), dev,
                                               supply, n, c_ml, t, dt);
    return detail::dr_at(traces, ts, t);
}

/// Best kappa-subset dynamic range from precomputed per-interval data.
/// Contiguous windows are always searched; all C(eta, kappa) subsets are
/// added when eta <= 15.
inline std::pair<std::vector<int>, double> best_kappa_dr(
    const std::vector<IntervalDr>& data, int kappa, bool ts_polarity = false) {
    const int eta = static_cast<int>(data.size());
    require(kappa >= 2 && kappa <= eta, "best_kappa_dr: need 2 <= kappa <= eta");

    auto subset_dr = [&](const std::vector<int>& s) {
        double match = std::numeric_limits<double>::infinity();
        double mism = -std::numeric_limits<double>::infinity();
        if (ts_polarity) std::swap(match, mism);
        for (int i : s) {
            const IntervalDr& d = data[i];
            double mm_worst;
            if (!ts_polarity) {
                match = std::min(match, d.v_fm);
                mm_worst = -std::numeric_limits<double>::infinity();
                if (!std::isnan(d.v_1lbmm)) mm_worst = std::max(mm_worst, d.v_1lbmm);
                if (!std::isnan(d.v_1ubmm)) mm_worst = std::max(mm_worst, d.v_1ubmm);
                mism = std::max(mism, mm_worst);
            } else {
                match = std::max(match, d.v_fm);
                mm_worst = std::numeric_limits<double>::infinity();
                if (!std::isnan(d.v_1lbmm)) mm_worst = std::min(mm_worst, d.v_1lbmm);
                if (!std::isnan(d.v_1ubmm)) mm_worst = std::min(mm_worst, d.v_1ubmm);
                mism = std::min(mism, mm_worst);
            }
        }
        return ts_polarity ? (mism - match) : (match - mism);
    };

    std::vector<int> best;
    double best_dr = -std::numeric_limits<double>::infinity();
    auto consider = [&](const std::vector<int>& s) {
        const double dr = subset_dr(s);
        if (dr > best_dr) {
            best_dr = dr;
            best = s;
        }
    };

    for (int start = 0; start + kappa <= eta; ++start) {
        std::vector<int> s(kappa);
        for (int j = 0; j < kappa; ++j) s[j] = start + j;
        consider(s);
    }
    if (eta <= 15) {
        std::vector<int> s(kappa);
        std::function<void(int, int)> rec = [&](int pos, int from) {
            if (pos == kappa) {
                consider(s);
                return;
            }
            for (int i = from; i <= eta - (kappa - pos); ++i) {
                s[pos] = i;
                rec(pos + 1, i + 1);
            }
        };
        rec(0, 0);
    }
    return {best, best_dr};
}

/// FOM(level, N, kappa) = max over T of DR_kappa / T on a log-T grid.
/// Ties resolve to the smallest T.
inline FomResult figure_of_merit(const IntervalSet& set, const DeviceSet& dev,
                                 const SupplyConfig& supply, int n, int kappa,
                                 double t_lo = 0.5e-9, double t_hi = 10e-9,
                                 int n_t = 40, double dt = 1e-12) {
    require(set.eta() >= kappa && kappa >= 2, "figure_of_merit: bad kappa");
    const bool ts = CellDesign::of(set.tag).precharge_to_ground();
    const double c_ml = default_c_ml(n);
    const auto traces = detail::collect_traces(set, detail::all_indices(set), dev,
                                               supply, n, c_ml, t_hi, dt);
    FomResult res;
    res.level = set.level;
    res.n = n;
    res.kappa = kappa;
    res.fom = -std::numeric_limits<double>::infinity();
    const auto t_grid = logspace(t_lo, t_hi, n_t);
    for (double t : t_grid) {
        const DrResult d = detail::dr_at(traces, ts, t);
        auto [subset, dr] = best_kappa_dr(d.per_interval, kappa, ts);
        const double fom = dr / t;
        if (fom > res.fom) {
            res.fom = fom;
            res.best_t = t;
            res.dr_at_best = dr;
            res.subset = subset;
        }
    }
    return res;
}

namespace detail {

/// First time at which DR(t) reaches target: grid scan with linear
/// refinement between samples. Throws DrUnreachable otherwise.
inline double first_dr_crossing(const std::vector<IntervalTraces>& traces, bool ts,
                                double dr_target, double t_max,
                                int n_scan = 400) {
    double best = -std::numeric_limits<double>::infinity();
    double prev_t = 0.0, prev_dr = dr_at(traces, ts, 0.0).dr;
    best = std::max(best, prev_dr);
    if (prev_dr >= dr_target) return 0.0;
    for (int i = 1; i <= n_scan; ++i) {
        const double t = t_max * i / n_scan;
        const double dr = dr_at(traces, ts, t).dr;
        best = std::max(best, dr);
        if (dr >= dr_target) {
            const double f = (dr_target - prev_dr) / (dr - prev_dr);
            return prev_t + f * (t - prev_t);
        }
        prev_t = t;
        prev_dr = dr;
    }
    throw DrUnreachable(best);
}

}  // namespace detail

/// Smallest sampling time at which the subset reaches the target DR.
inline double latency_at_dr(const IntervalSet& set, const std::vector<int>& subset,
                            const DeviceSet& dev, const SupplyConfig& supply, int n,
                            double dr_target, double t_max = 10e-9,
                            double dt = 1e-12) {
    const bool ts = CellDesign::of(set.tag).precharge_to_ground();
    const double c_ml = default_c_ml(n);
    const auto traces =
        detail::collect_traces(set, subset, dev, supply, n, c_ml, t_max, dt);
    return detail::first_dr_crossing(traces, ts, dr_target, t_max);
}

namespace detail {

/// Precomputed vdl -> (vg1_eff, vg2) map for one cell config, so the
/// parasitic transient does not re-solve the dividers every step.
struct GateTable {
    std::vector<double> vdl;
    std::vector<double> vg1;
    std::vector<double> vg2;

    static GateTable build(const CellConfig& cfg, const DeviceSet& dev,
                           const SupplyConfig& supply, double vdl_max,
                           int n_pts = 101) {
        GateTable tab;
        tab.vdl = linspace(0.0, vdl_max, n_pts);
        for (double v : tab.vdl) {
            const auto [g1, g2] = cell_gate_voltages(cfg, dev, supply, v);
            tab.vg1.push_back(g1);
            tab.vg2.push_back(g2);
        }
        return tab;
    }

    SolvedCell at(double v) const {
        if (v <= vdl.front()) return {vg1.front(), vg2.front()};
        if (v >= vdl.back()) return {vg1.back(), vg2.back()};
        const auto it = std::lower_bound(vdl.begin(), vdl.end(), v);
        const std::size_t i = static_cast<std::size_t>(it - vdl.begin());
        const double f = (v - vdl[i - 1]) / (vdl[i] - vdl[i - 1]);
        return {vg1[i - 1] + f * (vg1[i] - vg1[i - 1]),
                vg2[i - 1] + f * (vg2[i] - vg2[i - 1])};
    }
};

}  // namespace detail

/// Latency at the farthest row of an array whose VDL feed is an RC ladder
/// (column partitions first, then across the row). Input steps reach each
/// cell through the ladder; driving them `vdl_lead` time constants early
/// hides the feed delay. Smallest T with DR >= dr_target over the subset.
inline double array_latency(const IntervalSet& set, const std::vector<int>& subset,
                            const DeviceSet& dev, const SupplyConfig& supply, int n,
                            const ArrayParasitics& par, double dr_target,
                            double t_max = 10e-9, double dt = 1e-12) {
    require(!subset.empty(), "array_latency: empty subset");
    require(par.n_cols >= 1 && par.n_rows >= 0, "array_latency: bad partitions");
    const CellDesign design = CellDesign::of(set.tag);
    const bool ts = design.precharge_to_ground();
    const double c_ml = default_c_ml(n) + par.n_cols * par.c_seg;
    const double tau = ladder_tau(par);
    const double lead = par.vdl_lead * tau;

    // Cells spread across the row's column partitions; ladder node indices
    // are 1-based after the n_rows column-feed segments.
    std::vector<int> cell_node(n);
    for (int c = 0; c < n; ++c) {
        const int spread = (n > 1) ? (c * (par.n_cols - 1)) / (n - 1) : 0;
        cell_node[c] = par.n_rows + 1 + spread;
    }
    std::vector<int> nodes = cell_node;
    std::sort(nodes.begin(), nodes.end());
    nodes.erase(std::unique(nodes.begin(), nodes.end()), nodes.end());
    const auto step = ladder_step_response(par, nodes, t_max + lead, dt);
    std::vector<int> node_slot(n);
    for (int c = 0; c < n; ++c)
        node_slot[c] = static_cast<int>(
            std::lower_bound(nodes.begin(), nodes.end(), cell_node[c]) -
            nodes.begin());
    auto step_at = [&](int slot, double time) {
        const auto& u = step[slot];
        const double f = time / dt;
        if (f <= 0.0) return u.front();
        const auto i = static_cast<std::size_t>(f);
        if (i + 1 >= u.size()) return u.back();
        return u[i] + (f - i) * (u[i + 1] - u[i]);
    };

    std::vector<detail::IntervalTraces> traces(subset.size());
    auto make_row = [&](int store_idx) {
        RowConfig row;
        row.design = design;
        row.c_ml = c_ml;
        const Interval& iv = set.intervals[store_idx];
        row.cells.assign(n, CellConfig{design, iv.r_lb, iv.r_ub});
        return row;
    };
    auto simulate = [&](RowConfig row, double d_target) {
        detail::GateTable base =
            detail::GateTable::build(row.cells[1 % n], dev, supply, d_target);
        detail::GateTable first =
            detail::GateTable::build(row.cells[0], dev, supply, d_target);
        auto gates = [&](std::size_t c, double time) {
            const double v = std::clamp(
                d_target * step_at(node_slot[c], time + lead), 0.0, supply.vdd);
            return (c == 0 ? first : base).at(v);
        };
        return detail::integrate_ml(design,
                                    std::vector<DeviceSet>(n, dev), supply, gates,
                                    c_ml, t_max, dt);
    };
    for (std::size_t p = 0; p < subset.size(); ++p) {
        const double d_i = set.intervals[subset[p]].d;
        traces[p].fm = simulate(make_row(subset[p]), d_i);
        if (p > 0) {
            RowConfig row = make_row(subset[p]);
            const Interval& nb = set.intervals[subset[p - 1]];
            row.cells[0] = CellConfig{design, nb.r_lb, nb.r_ub};
            traces[p].lbmm = simulate(row, d_i);
            traces[p].has_lb = true;
        }
        if (p + 1 < subset.size()) {
            RowConfig row = make_row(subset[p]);
            const Interval& nb = set.intervals[subset[p + 1]];
            row.cells[0] = CellConfig{design, nb.r_lb, nb.r_ub};
            traces[p].ubmm = simulate(row, d_i);
            traces[p].has_ub = true;
        }
    }
    return detail::first_dr_crossing(traces, ts, dr_target, t_max);
}

/// Monte Carlo failure probability for a programmed subset at sampling
/// time t. Each run samples per-cell device variations, replays all
/// scenarios, and the best reference voltage is chosen on a 1 mV grid.
inline FailReport fail_probability(const IntervalSet& set,
                                   const std::vector<int>& subset,
                                   const DeviceSet& dev, const SupplyConfig& supply,
                                   int n, double t, const VariationSpec& variation,
                                   int n_runs = 1000, std::uint64_t stream = 900,
                                   double dt = 1e-12) {
    require(!subset.empty(), "fail_probability: empty subset");
    const bool ts = CellDesign::of(set.tag).precharge_to_ground();
    const double c_ml = default_c_ml(n);
    const CellDesign design = CellDesign::of(set.tag);

    std::vector<double> match_vals, mismatch_vals;
    for (int run = 0; run < n_runs; ++run) {
        RngStream rng(variation.seed, stream + static_cast<std::uint64_t>(run));
        std::vector<DeviceSet> devs(n);
        for (int c = 0; c < n; ++c) devs[c] = sample_variation(dev, variation, rng);

        for (std::size_t p = 0; p < subset.size(); ++p) {
            const Interval& iv = set.intervals[subset[p]];
            const std::vector<double> inputs(n, iv.d);
            auto run_row = [&](int store_first) {
                RowConfig row;
                row.design = design;
                row.c_ml = c_ml;
                row.cells.assign(n, CellConfig{design, iv.r_lb, iv.r_ub});
                const Interval& first = set.intervals[store_first];
                row.cells[0] = CellConfig{design, first.r_lb, first.r_ub};
                for (auto& cell : row.cells) {
                    cell.r_lb = sample_memristance(cell.r_lb, variation, rng);
                    cell.r_ub = sample_memristance(cell.r_ub, variation, rng);
                }
                return ml_transient(row, devs, supply, inputs, t, dt).v_ml.back();
            };
            match_vals.push_back(run_row(subset[p]));
            if (p > 0) mismatch_vals.push_back(run_row(subset[p - 1]));
            if (p + 1 < subset.size()) mismatch_vals.push_back(run_row(subset[p + 1]));
        }
    }

    // Best reference voltage: minimize total fails over a 1 mV grid.
    FailReport rep;
    rep.n_runs = n_runs;
    rep.decisions = static_cast<long>(match_vals.size() + mismatch_vals.size());
    long best_fails = rep.decisions + 1;
    std::vector<int> minimizers;
    const int grid_n = static_cast<int>(std::lround(supply.vdd / 1e-3));
    std::vector<long> fails_at(grid_n + 1, 0);
    for (int gi = 0; gi <= grid_n; ++gi) {
        const double vref = gi * 1e-3;
        long mf = 0, mmf = 0;
        for (double v : match_vals)
            if (ts ? (v > vref) : (v < vref)) ++mf;
        for (double v : mismatch_vals)
            if (ts ? (v < vref) : (v > vref)) ++mmf;
        fails_at[gi] = mf + mmf;
        if (fails_at[gi] < best_fails) best_fails = fails_at[gi];
    }
    for (int gi = 0; gi <= grid_n; ++gi)
        if (fails_at[gi] == best_fails) minimizers.push_back(gi);
    const int pick = minimizers[minimizers.size() / 2];
    rep.v_ref = pick * 1e-3;
    for (double v : match_vals)
        if (ts ? (v > rep.v_ref) : (v < rep.v_ref)) ++rep.match_fails;
    for (double v : mismatch_vals)
        if (ts ? (v < rep.v_ref) : (v > rep.v_ref)) ++rep.mismatch_fails;
    rep.p_f = static_cast<double>(rep.match_fails + rep.mismatch_fails) /
              static_cast<double>(rep.decisions);
    return rep;
}

// ---------------------------------------------------------------------------
// Design-space studies
// ---------------------------------------------------------------------------

/// MC bound statistics for a whole r grid on one side.
inline std::vector<BoundStats> mc_curve(CellTag tag, Side side,
                                        const std::vector<double>& r_grid,
                                        const Level& level, const DeviceSet& dev,
                                        const SupplyConfig& supply,
                                        const VariationSpec& variation, int n_runs,
                                        std::uint64_t stream_base = 0) {
    std::vector<BoundStats> out;
    out.reserve(r_grid.size());
    std::vector<double> sorted = r_grid;
    std::sort(sorted.begin(), sorted.end(), std::greater<>());
    for (std::size_t i = 0; i < sorted.size(); ++i) {
        out.push_back(mc_bound_statistics(tag, side, sorted[i], level, dev, supply,
                                          variation, n_runs, stream_base + i));
    }
    return out;
}

struct MultiplierRow {
    Level level{};
    double m = 0.0;
    int eta = 0;
};

/// eta(level, m) table from guard-banded curves (Monte Carlo per level,
/// shared across multipliers).
inline std::vector<MultiplierRow> intervals_vs_multiplier(
    CellTag tag, const DeviceSet& dev, const SupplyConfig& supply,
    const std::vector<Level>& levels, const std::vector<double>& m_grid,
    const VariationSpec& variation, int n_runs,
    const std::vector<double>& r_grid, double w) {
    std::vector<MultiplierRow> out;
    std::uint64_t stream = 1;
    for (const Level& level : levels) {
        const auto lb_stats = mc_curve(tag, Side::LB, r_grid, level, dev, supply,
                                       variation, n_runs, stream);
        stream += r_grid.size();
        const auto ub_stats = mc_curve(tag, Side::UB, r_grid, level, dev, supply,
                                       variation, n_runs, stream);
        stream += r_grid.size();
        for (double m : m_grid) {
            const auto glb = guarded_lut(Side::LB, lb_stats, m);
            const auto gub = guarded_lut(Side::UB, ub_stats, m);
            IntervalSet set = build_intervals_guarded(glb, gub, w, supply.vdd);
            set.tag = tag;
            set.level = level;
            out.push_back({level, m, set.eta()});
        }
    }
    return out;
}

/// eta per process corner with nominal (variation-free) LUT rebuilds.
inline std::map<Corner, int> corner_interval_counts(
    CellTag tag, const Level& level, const std::vector<Corner>& corners,
    const DeviceSet& dev, const SupplyConfig& supply,
    const std::vector<double>& r_grid, double w) {
    std::map<Corner, int> out;
    for (Corner c : corners) {
        const DeviceSet d = apply_corner(dev, c);
        const auto lut_lb = build_lut(tag, Side::LB, r_grid, level, d, supply);
        const auto lut_ub = build_lut(tag, Side::UB, r_grid, level, d, supply);
        IntervalSet set = build_intervals(lut_lb, lut_ub, w, supply.vdd);
        out[c] = set.eta();
    }
    return out;
}

}  // namespace acam
