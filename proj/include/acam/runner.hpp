#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "acam/config.hpp"
#include "acam/csv.hpp"

namespace acam {

inline std::string level_label(const Level& l) {
    const int lo = static_cast<int>(std::lround(l.p_lo * 100.0));
    const int hi = static_cast<int>(std::lround(l.p_hi * 100.0));
    return std::to_string(lo) + "-" + std::to_string(hi);
}

/// Executes one subcommand against a config and writes its CSV artifacts
/// plus a JSON run manifest. Outputs are staged in memory and committed
/// together, so a failing run leaves no partial files behind.
class Runner {
  public:
    Runner(ExperimentConfig cfg, std::string out_dir)
        : cfg_(std::move(cfg)), out_dir_(std::move(out_dir)) {}

    /// Returns the list of files written (relative to out_dir).
    std::vector<std::string> run(const std::string& subcommand) {
        staged_.clear();
        if (subcommand == "vtc") run_vtc();
        else if (subcommand == "lut") run_lut();
        else if (subcommand == "intervals") run_intervals();
        else if (subcommand == "row") run_row();
        else if (subcommand == "dr") run_dr();
        else if (subcommand == "fom") run_fom();
        else if (subcommand == "mc") run_mc();
        else if (subcommand == "corners") run_corners();
        else if (subcommand == "latency") run_latency();
        else if (subcommand == "energy") run_energy();
        else if (subcommand == "summary") run_summary();
        else throw ConfigError("unknown subcommand: " + subcommand);
        return commit(subcommand);
    }

  private:
    void stage(const std::string& name, const CsvTable& table) {
        staged_[name] = table.str();
    }

    std::vector<std::string> commit(const std::string& subcommand) {
        json manifest;
        manifest["subcommand"] = subcommand;
        char hash_hex[32];
        std::snprintf(hash_hex, sizeof(hash_hex), "%016llx",
                      static_cast<unsigned long long>(config_hash(cfg_)));
        manifest["config_hash"] = hash_hex;
        manifest["seed"] = cfg_.seed;
        manifest["versions"] = {{"acam", "1.0.0"}, {"csv_format", 1}};
        json files = json::array();
        for (const auto& [name, _] : staged_) files.push_back(name);
        manifest["files"] = files;
        staged_["manifest_" + subcommand + ".json"] = manifest.dump(2) + "\n";

        std::filesystem::create_directories(out_dir_);
        std::vector<std::string> written;
        for (const auto& [name, content] : staged_) {
            write_file((std::filesystem::path(out_dir_) / name).string(), content);
            written.push_back(name);
        }
        return written;
    }

    // --- shared pieces -----------------------------------------------------

    const IntervalSet& nominal_set(CellTag tag, std::size_t level_idx) {
        const auto key = std::make_pair(tag, level_idx);
        auto it = sets_.find(key);
        if (it != sets_.end()) return it->second;
        const Level& level = cfg_.levels[level_idx];
        const auto r = cfg_.r_points();
        const auto lb = build_lut(tag, Side::LB, r, level, cfg_.device, cfg_.supply);
        const auto ub = build_lut(tag, Side::UB, r, level, cfg_.device, cfg_.supply);
        IntervalSet set = build_intervals(lb, ub, cfg_.w, cfg_.supply.vdd);
        set.tag = tag;
        set.level = level;
        return sets_.emplace(key, std::move(set)).first->second;
    }

    /// Best kappa subset by DR at 1 ns (clamped to the set size).
    std::vector<int> kappa_subset(const IntervalSet& set, int n) {
        const int kappa = std::min<int>(cfg_.kappa, set.eta());
        const bool ts = CellDesign::of(set.tag).precharge_to_ground();
        const DrResult d =
            dynamic_range(set, cfg_.device, cfg_.supply, n, 1e-9);
        return best_kappa_dr(d.per_interval, kappa, ts).first;
    }

    // --- subcommands --------------------------------------------------------

    void run_vtc() {
        CsvTable t({"design", "r_ohm", "vdl_v", "vg1_v", "vg2_v"});
        const auto r_list = logspace(cfg_.r_grid.r_min, cfg_.r_grid.r_max, 5);
        const auto vdl = linspace(0.0, cfg_.supply.vdd, 81);
        for (CellTag tag : cfg_.designs) {
            for (double r : r_list) {
                CellConfig cell{CellDesign::of(tag), r, r};
                for (double v : vdl) {
                    const auto [g1, g2] =
                        cell_gate_voltages(cell, cfg_.device, cfg_.supply, v);
                    t.add(cell_name(tag)).add(r).add(v).add(g1).add(g2).endrow();
                }
            }
        }
        stage("vtc.csv", t);
    }

    void run_lut() {
        for (CellTag tag : cfg_.designs) {
            for (std::size_t li = 0; li < cfg_.levels.size(); ++li) {
                CsvTable t({"side", "r_ohm", "b_lo_v", "b_hi_v"});
                for (Side side : {Side::LB, Side::UB}) {
                    const auto lut = build_lut(tag, side, cfg_.r_points(),
                                               cfg_.levels[li], cfg_.device,
                                               cfg_.supply);
                    for (const BoundTriple& e : lut.entries)
                        t.add(side == Side::LB ? "LB" : "UB")
                            .add(e.r)
                            .add(e.b_lo)
                            .add(e.b_hi)
                            .endrow();
                }
                stage(std::string("lut_") + cell_name(tag) + "_" +
                          level_label(cfg_.levels[li]) + ".csv",
                      t);
            }
        }
    }

    void run_intervals() {
        for (CellTag tag : cfg_.designs) {
            for (std::size_t li = 0; li < cfg_.levels.size(); ++li) {
                const IntervalSet& set = nominal_set(tag, li);
                CsvTable t({"idx", "r_lb_ohm", "r_ub_ohm", "lb_v", "ub_v", "d_v",
                            "fr_left_lo_v", "fr_left_hi_v", "fr_right_lo_v",
                            "fr_right_hi_v"});
                for (const Interval& iv : set.intervals)
                    t.add(iv.idx)
                        .add(iv.r_lb)
                        .add(iv.r_ub)
                        .add(iv.lb)
                        .add(iv.ub)
                        .add(iv.d)
                        .add(iv.fr_left_lo)
                        .add(iv.fr_left_hi)
                        .add(iv.fr_right_lo)
                        .add(iv.fr_right_hi)
                        .endrow();
                stage(std::string("intervals_") + cell_name(tag) + "_" +
                          level_label(cfg_.levels[li]) + ".csv",
                      t);
            }
        }
    }

    void run_row() {
        const int n = cfg_.n_list.front();
        for (CellTag tag : cfg_.designs) {
            const IntervalSet& set = nominal_set(tag, 0);
            if (set.eta() < 2) continue;
            const int mid = set.eta() / 2;
            std::vector<int> subset;
            for (int i = std::max(0, mid - 1);
                 i <= std::min(set.eta() - 1, mid + 1); ++i)
                subset.push_back(i);
            const auto traces = detail::collect_traces(
                set, subset, cfg_.device, cfg_.supply, n, default_c_ml(n), 2e-9);
            CsvTable t({"scenario", "t_s", "v_ml_v"});
            auto dump = [&](const MatchLineTrace& tr) {
                for (std::size_t s = 0; s < tr.t.size(); s += 10)
                    t.add(tr.scenario).add(tr.t[s]).add(tr.v_ml[s]).endrow();
            };
            for (const auto& tr : traces) {
                dump(tr.fm);
                if (tr.has_lb) dump(tr.lbmm);
                if (tr.has_ub) dump(tr.ubmm);
            }
            stage(std::string("trace_") + cell_name(tag) + ".csv", t);
        }
    }

    void run_dr() {
        const int n = cfg_.n_list.front();
        CsvTable t({"design", "interval_idx", "v_fm_v", "v_1lbmm_v", "v_1ubmm_v",
                    "dr_v"});
        for (CellTag tag : cfg_.designs) {
            const IntervalSet& set = nominal_set(tag, 0);
            if (set.eta() < 2) continue;
            const DrResult d = dynamic_range(set, cfg_.device, cfg_.supply, n, 1e-9);
            for (std::size_t i = 0; i < d.per_interval.size(); ++i)
                t.add(cell_name(tag))
                    .add(static_cast<int>(i + 1))
                    .add(d.per_interval[i].v_fm)
                    .add(d.per_interval[i].v_1lbmm)
                    .add(d.per_interval[i].v_1ubmm)
                    .add(d.dr)
                    .endrow();
        }
        stage("dr.csv", t);
    }

    void run_fom() {
        const int n = cfg_.n_list.front();
        CsvTable t({"design", "p_lo", "p_hi", "n", "kappa", "best_t_s", "dr_v",
                    "fom_v_per_s"});
        for (CellTag tag : cfg_.designs) {
            for (std::size_t li = 0; li < cfg_.levels.size(); ++li) {
                const IntervalSet& set = nominal_set(tag, li);
                const int kappa = std::min<int>(cfg_.kappa, set.eta());
                if (kappa < 2) continue;
                const FomResult f = figure_of_merit(
                    set, cfg_.device, cfg_.supply, n, kappa, cfg_.t_range.lo,
                    cfg_.t_range.hi, cfg_.t_range.points);
                t.add(cell_name(tag))
                    .add(set.level.p_lo)
                    .add(set.level.p_hi)
                    .add(n)
                    .add(kappa)
                    .add(f.best_t)
                    .add(f.dr_at_best)
                    .add(f.fom)
                    .endrow();
            }
        }
        stage("fom.csv", t);
    }

    void run_mc() {
        CsvTable t({"design", "p_lo", "p_hi", "m", "eta"});
        for (CellTag tag : cfg_.designs) {
            const auto rows = intervals_vs_multiplier(
                tag, cfg_.device, cfg_.supply, cfg_.levels, cfg_.m_grid,
                cfg_.variation(), cfg_.mc.n_runs, cfg_.r_points(), cfg_.w);
            for (const MultiplierRow& r : rows)
                t.add(cell_name(tag))
                    .add(r.level.p_lo)
                    .add(r.level.p_hi)
                    .add(r.m)
                    .add(r.eta)
                    .endrow();
        }
        stage("eta_vs_m.csv", t);
    }

    void run_corners() {
        const std::vector<Corner> corners = {Corner::TT, Corner::SS, Corner::FF,
                                             Corner::SF, Corner::FS};
        CsvTable t({"design", "corner", "eta"});
        for (CellTag tag : cfg_.designs) {
            const auto counts = corner_interval_counts(
                tag, cfg_.levels.front(), corners, cfg_.device, cfg_.supply,
                cfg_.r_points(), cfg_.w);
            for (Corner c : corners)
                t.add(cell_name(tag)).add(corner_name(c)).add(counts.at(c)).endrow();
        }
        stage("corners.csv", t);
    }

    void run_latency() {
        const int n = cfg_.n_list.front();
        CsvTable t({"design", "columns", "vdl_lead", "latency_s"});
        for (CellTag tag : cfg_.designs) {
            const IntervalSet& set = nominal_set(tag, 0);
            if (set.eta() < 2) continue;
            const auto subset = kappa_subset(set, n);
            for (int cols : cfg_.column_list) {
                ArrayParasitics par = cfg_.parasitics;
                par.n_cols = cols;
                const double lat =
                    array_latency(set, subset, cfg_.device, cfg_.supply, n, par,
                                  cfg_.dr_target);
                t.add(cell_name(tag)).add(cols).add(par.vdl_lead).add(lat).endrow();
            }
        }
        stage("latency_vs_columns.csv", t);
    }

    void run_energy() {
        const int n = cfg_.n_list.front();
        CsvTable t({"design", "scenario", "precharge_j", "evaluate_j", "total_j"});
        for (CellTag tag : cfg_.designs) {
            const IntervalSet& set = nominal_set(tag, 0);
            if (set.empty()) continue;
            RowConfig row;
            row.design = CellDesign::of(tag);
            row.c_ml = default_c_ml(n);
            const Interval& iv = set.intervals.front();
            row.cells.assign(n, CellConfig{row.design, iv.r_lb, iv.r_ub});
            auto emit = [&](const char* scenario, double vdl) {
                const EnergyReport e = compare_energy(
                    row, cfg_.device, cfg_.supply, std::vector<double>(n, vdl), 1e-9);
                t.add(cell_name(tag))
                    .add(scenario)
                    .add(e.precharge)
                    .add(e.evaluate)
                    .add(e.total)
                    .endrow();
            };
            emit("fm", iv.d);
            // Full mismatch: drive every data line past the last interval.
            const double v_mm = std::min(cfg_.supply.vdd,
                                         set.intervals.back().fr_right_hi + 0.05);
            emit("full_mm", v_mm);
        }
        stage("energy.csv", t);
    }

    void run_summary() {
        const int n = cfg_.n_list.front();
        CsvTable t({"design", "eta", "dr_v", "latency_s", "energy_j", "p_f"});
        for (CellTag tag : cfg_.designs) {
            const IntervalSet& set = nominal_set(tag, 0);
            if (set.eta() < 2) continue;
            const bool ts = CellDesign::of(tag).precharge_to_ground();
            const auto subset = kappa_subset(set, n);
            const DrResult full =
                dynamic_range(set, cfg_.device, cfg_.supply, n, 1e-9);
            const double dr =
                best_kappa_dr(full.per_interval, static_cast<int>(subset.size()), ts)
                    .second;
            double latency = std::numeric_limits<double>::quiet_NaN();
            try {
                latency = latency_at_dr(set, subset, cfg_.device, cfg_.supply, n,
                                        cfg_.dr_target);
            } catch (const DrUnreachable&) {
                // reported as NaN: the design saturates below the target
            }

            // Energy per search: cells spread across the programmed subset,
            // full-mismatch input, evaluate window equal to the measured
            // latency (1 ns fallback when the DR target is unreachable).
            RowConfig row;
            row.design = CellDesign::of(tag);
            row.c_ml = default_c_ml(n);
            for (int c = 0; c < n; ++c) {
                const Interval& iv =
                    set.intervals[subset[static_cast<std::size_t>(c) %
                                         subset.size()]];
                row.cells.push_back(CellConfig{row.design, iv.r_lb, iv.r_ub});
            }
            const double v_mm = std::min(cfg_.supply.vdd,
                                         set.intervals.back().fr_right_hi + 0.05);
            const double t_ev = std::isnan(latency) ? 1e-9 : latency;
            const EnergyReport e = compare_energy(
                row, cfg_.device, cfg_.supply, std::vector<double>(n, v_mm), t_ev);

            // Fail study on the guarded set: the design's multiplier is the
            // largest one whose guarded packing still keeps kappa intervals.
            FailReport fr;
            const auto r = cfg_.r_points();
            const auto lb_stats =
                mc_curve(tag, Side::LB, r, set.level, cfg_.device, cfg_.supply,
                         cfg_.variation(), cfg_.mc.n_runs, 1);
            const auto ub_stats =
                mc_curve(tag, Side::UB, r, set.level, cfg_.device, cfg_.supply,
                         cfg_.variation(), cfg_.mc.n_runs, 1 + r.size());
            const double m = max_guard_multiplier(lb_stats, ub_stats, cfg_.w,
                                                  cfg_.supply.vdd, cfg_.kappa);
            if (m >= 0.0) {
                IntervalSet guarded = build_intervals_guarded(
                    guarded_lut(Side::LB, lb_stats, m),
                    guarded_lut(Side::UB, ub_stats, m), cfg_.w, cfg_.supply.vdd);
                guarded.tag = tag;
                guarded.level = set.level;
                const int kappa = std::min<int>(cfg_.kappa, guarded.eta());
                const DrResult gd =
                    dynamic_range(guarded, cfg_.device, cfg_.supply, n, 1e-9);
                const auto gsub = best_kappa_dr(gd.per_interval, kappa, ts).first;
                fr = fail_probability(guarded, gsub, cfg_.device, cfg_.supply, n,
                                      0.5e-9, cfg_.variation(), cfg_.mc.n_runs);
            }
            t.add(cell_name(tag))
                .add(set.eta())
                .add(dr)
                .add(latency)
                .add(e.total)
                .add(fr.p_f)
                .endrow();
        }
        stage("summary.csv", t);
    }

    ExperimentConfig cfg_;
    std::string out_dir_;
    std::map<std::string, std::string> staged_;
    std::map<std::pair<CellTag, std::size_t>, IntervalSet> sets_;
};

}  // namespace acam
