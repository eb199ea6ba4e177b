#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <string>
#include <vector>

#include "acam/intervals.hpp"
#include "acam/subcircuits.hpp"

namespace acam {

/// Effective row resistances for the full-match and one-mismatch states.
inline std::pair<double, double> effective_resistances(double r_m, double r_mm,
                                                       int n) {
    require(r_m > r_mm && r_mm > 0.0, "effective_resistances: need r_m > r_mm > 0");
    require(n >= 1, "effective_resistances: n >= 1");
    const double r_fm = r_m / n;
    const double r_1mm = r_m * r_mm / (r_m + (n - 1) * r_mm);
    return {r_fm, r_1mm};
}

struct RowConfig {
    CellDesign design{};
    std::vector<CellConfig> cells;
    double c_ml = 26e-15;  // F
};

/// Default ML capacitance: 1 fF per attached cell plus 10 fF sense overhead.
inline double default_c_ml(int n_cells, double per_cell = 1e-15,
                           double overhead = 10e-15) {
    return overhead + n_cells * per_cell;
}

struct MatchLineTrace {
    std::vector<double> t;
    std::vector<double> v_ml;
    std::string scenario;

    double at(double time) const {
        if (t.empty()) return 0.0;
        if (time <= t.front()) return v_ml.front();
        if (time >= t.back()) return v_ml.back();
        const auto it = std::lower_bound(t.begin(), t.end(), time);
        const std::size_t i = static_cast<std::size_t>(it - t.begin());
        const double f = (time - t[i - 1]) / (t[i] - t[i - 1]);
        return v_ml[i - 1] + f * (v_ml[i] - v_ml[i - 1]);
    }
};

struct ArrayParasitics {
    double r_seg = 1.0;      // ohm per partition
    double c_seg = 1e-15;    // F per partition
    int n_rows = 512;
    int n_cols = 1;
    double vdl_lead = 5.0;   // multiples of the feed-path time constant
};

/// Signed ML node current contributed by one cell with solved gate
/// voltages: negative discharges the precharged ML, positive charges it.
inline double cell_ml_current(const CellDesign& design, const DeviceSet& dev,
                              const SupplyConfig& supply, double vg1_eff,
                              double vg2, double v_ml) {
    switch (design.ml_switch) {
        case MlSwitch::NmosPulldown:
            return -dev.switch_scale * (mos_current(dev.nmos, vg1_eff, v_ml) +
                                        mos_current(dev.nmos, vg2, v_ml));
        case MlSwitch::PmosPulldownActiveLow: {
            const double vsg = std::max(0.0, v_ml - vg1_eff);
            return -(dev.switch_scale_p * mos_current(dev.pmos, vsg, v_ml) +
                     dev.switch_scale * mos_current(dev.nmos, vg2, v_ml));
        }
        case MlSwitch::TsPullup: {
            const double g = ts_conductance(dev.ts, vg1_eff) +
                             ts_conductance(dev.ts, vg2);
            return g * (supply.v_sl_hi - v_ml);
        }
    }
    return 0.0;
}

/// Total switch conductance a cell presents to the ML at the given input
/// and ML voltage (magnitude of the pull path).
inline double cell_switch_conductance(const CellConfig& cfg, const DeviceSet& dev,
                                      const SupplyConfig& supply, double vdl,
                                      double v_ml) {
    const auto [vg1, vg2] = cell_gate_voltages(cfg, dev, supply, vdl);
    if (cfg.design.ml_switch == MlSwitch::TsPullup)
        return ts_conductance(dev.ts, vg1) + ts_conductance(dev.ts, vg2);
    const double i = -cell_ml_current(cfg.design, dev, supply, vg1, vg2, v_ml);
    return i / std::max(v_ml, 1e-9);
}

namespace detail {

struct SolvedCell {
    double vg1 = 0.0;
    double vg2 = 0.0;
};

/// Heun (explicit trapezoidal) integration of c dV/dt = sum of cell
/// currents, with the gate voltages supplied per step by `gates`.
inline MatchLineTrace integrate_ml(
    const CellDesign& design, const std::vector<DeviceSet>& devs,
    const SupplyConfig& supply,
    const std::function<SolvedCell(std::size_t, double)>& gates, double c_ml,
    double t_end, double dt) {
    require(c_ml > 0.0 && dt > 0.0 && t_end > 0.0, "integrate_ml: bad step setup");
    const std::size_t n = devs.size();
    MatchLineTrace trace;
    const std::size_t steps = static_cast<std::size_t>(std::ceil(t_end / dt));
    trace.t.reserve(steps + 1);
    trace.v_ml.reserve(steps + 1);

    double v = design.precharge_to_ground() ? 0.0 : supply.vpc;
    double t = 0.0;
    trace.t.push_back(t);
    trace.v_ml.push_back(v);

    auto slope = [&](double vml, double time) {
        double i = 0.0;
        for (std::size_t c = 0; c < n; ++c) {
            const SolvedCell g = gates(c, time);
            i += cell_ml_current(design, devs[c], supply, g.vg1, g.vg2, vml);
        }
        return i / c_ml;
    };

    for (std::size_t s = 0; s < steps; ++s) {
        const double h = std::min(dt, t_end - t);
        const double k1 = slope(v, t);
        const double v_pred = std::clamp(v + h * k1, 0.0, supply.vdd);
        const double k2 = slope(v_pred, t + h);
        v = std::clamp(v + 0.5 * h * (k1 + k2), 0.0, supply.vdd);
        t += h;
        trace.t.push_back(t);
        trace.v_ml.push_back(v);
    }
    return trace;
}

}  // namespace detail

/// Match-line transient for a row with per-cell device sets (Monte Carlo
/// use) and fixed input voltages. Step size must be <= 1 ps.
inline MatchLineTrace ml_transient(const RowConfig& row,
                                   const std::vector<DeviceSet>& devs,
                                   const SupplyConfig& supply,
                                   const std::vector<double>& inputs, double t_end,
                                   double dt = 1e-12) {
    require(inputs.size() == row.cells.size(), "ml_transient: inputs length != N");
    require(devs.size() == row.cells.size(), "ml_transient: devices length != N");
    require(dt <= 1e-12 + 1e-18, "ml_transient: step must be <= 1 ps");
    std::vector<detail::SolvedCell> solved(row.cells.size());
    for (std::size_t c = 0; c < row.cells.size(); ++c) {
        const auto [vg1, vg2] =
            cell_gate_voltages(row.cells[c], devs[c], supply, inputs[c]);
        solved[c] = {vg1, vg2};
    }
    return detail::integrate_ml(
        row.design, devs, supply,
        [&solved](std::size_t c, double) { return solved[c]; }, row.c_ml, t_end, dt);
}

/// Shared-device convenience overload.
inline MatchLineTrace ml_transient(const RowConfig& row, const DeviceSet& dev,
                                   const SupplyConfig& supply,
                                   const std::vector<double>& inputs, double t_end,
                                   double dt = 1e-12) {
    return ml_transient(row, std::vector<DeviceSet>(row.cells.size(), dev), supply,
                        inputs, t_end, dt);
}

struct EnergyReport {
    double precharge = 0.0;
    double evaluate = 0.0;
    double total = 0.0;
};

/// Compare energy: precharge term (pull-down designs) plus the evaluate
/// integral of divider, inverter, and ML-rail power over [0, t_eval].
inline EnergyReport compare_energy(const RowConfig& row, const DeviceSet& dev,
                                   const SupplyConfig& supply,
                                   const std::vector<double>& inputs, double t_eval,
                                   double dt = 1e-12) {
    require(t_eval > 0.0, "compare_energy: t_eval must be positive");
    require(inputs.size() == row.cells.size(), "compare_energy: inputs length != N");
    EnergyReport rep;
    if (!row.design.precharge_to_ground())
        rep.precharge = 0.5 * row.c_ml * supply.vpc * supply.vpc;

    auto inverter_current = [&](double vin) {
        const double vout = inverter_transfer(dev.nmos, dev.pmos, supply, vin);
        return mos_current(dev.nmos, vin, vout);
    };

    double p_static = 0.0;
    for (std::size_t c = 0; c < row.cells.size(); ++c) {
        const CellConfig& cfg = row.cells[c];
        const double vdl = inputs[c];
        const double vg1_raw = solve_lbs_node(dev, supply, cfg.r_lb, vdl);
        p_static += supply.vdd * (supply.vdd - vg1_raw) / cfg.r_lb;
        // LBS chain inverters.
        if (cfg.design.chain == LbsChain::SingleInverter) {
            p_static += supply.vdd * inverter_current(vg1_raw);
        } else if (cfg.design.chain == LbsChain::DoubleInverter) {
            const double mid = inverter_transfer(dev.nmos, dev.pmos, supply, vg1_raw);
            p_static += supply.vdd * inverter_current(vg1_raw);
            p_static += supply.vdd * inverter_current(mid);
        }
        // UBS: input inverter plus the pull-up divider drawn from v_sl_hi.
        const double vg2 = solve_ubs_node(dev, supply, cfg.r_ub, vdl);
        p_static += supply.vdd * inverter_current(vdl);
        p_static += supply.v_sl_hi * vg2 / cfg.r_ub;
    }
    rep.evaluate = p_static * t_eval;

    if (row.design.ml_switch == MlSwitch::TsPullup) {
        // Charging the ML draws from the SL_HI rail through the switches.
        const MatchLineTrace tr = ml_transient(row, dev, supply, inputs, t_eval, dt);
        std::vector<detail::SolvedCell> solved(row.cells.size());
        for (std::size_t c = 0; c < row.cells.size(); ++c) {
            const auto [vg1, vg2] =
                cell_gate_voltages(row.cells[c], dev, supply, inputs[c]);
            solved[c] = {vg1, vg2};
        }
        double e_ml = 0.0;
        for (std::size_t s = 0; s + 1 < tr.t.size(); ++s) {
            auto rail_power = [&](double vml) {
                double i = 0.0;
                for (std::size_t c = 0; c < row.cells.size(); ++c)
                    i += cell_ml_current(row.design, dev, supply, solved[c].vg1,
                                         solved[c].vg2, vml);
                return supply.v_sl_hi * std::max(0.0, i);
            };
            e_ml += 0.5 * (rail_power(tr.v_ml[s]) + rail_power(tr.v_ml[s + 1])) *
                    (tr.t[s + 1] - tr.t[s]);
        }
        rep.evaluate += e_ml;
    }
    rep.total = rep.precharge + rep.evaluate;
    return rep;
}

// ---------------------------------------------------------------------------
// Interconnect parasitics
// ---------------------------------------------------------------------------

/// Expected RC time constant of the full feed ladder (Elmore sum).
inline double ladder_tau(const ArrayParasitics& par) {
    const long long k = par.n_rows + par.n_cols;
    return par.r_seg * par.c_seg * 0.5 * static_cast<double>(k) *
           static_cast<double>(k + 1);
}

/// Unit-step response of the K-node RC ladder, solved with backward Euler
/// (tridiagonal Thomas solve per step; L-stable, so segments much faster
/// than the step size cannot ring). Returns per-node samples on the grid
/// t = 0, dt, ..., t_end for the requested nodes.
inline std::vector<std::vector<double>> ladder_step_response(
    const ArrayParasitics& par, const std::vector<int>& nodes, double t_end,
    double dt) {
    const int k = par.n_rows + par.n_cols;
    const std::size_t steps = static_cast<std::size_t>(std::ceil(t_end / dt));
    std::vector<std::vector<double>> out(nodes.size());
    for (auto& v : out) v.reserve(steps + 1);

    if (par.r_seg <= 0.0 || par.c_seg <= 0.0 || k <= 0) {
        for (std::size_t s = 0; s <= steps; ++s)
            for (std::size_t j = 0; j < nodes.size(); ++j) out[j].push_back(1.0);
        return out;
    }

    const double g = 1.0 / par.r_seg;
    const double c = par.c_seg;
    const double a = dt / c;
    std::vector<double> v(k, 0.0), rhs(k), diag(k), cprime(k), dprime(k);

    auto record = [&]() {
        for (std::size_t j = 0; j < nodes.size(); ++j)
            out[j].push_back(v[nodes[j] - 1]);
    };
    record();

    for (std::size_t s = 0; s < steps; ++s) {
        // (I - a L) v' = v + a g e1 (unit drive at the head, with L the
        // ladder conductance Laplacian scaled by g).
        for (int i = 0; i < k; ++i) {
            const double gl = g;                    // toward node i-1 (or drive)
            const double gr = (i + 1 < k) ? g : 0;  // toward node i+1
            rhs[i] = v[i];
            if (i == 0) rhs[i] += a * g * 1.0;  // drive term
            diag[i] = 1.0 + a * (gl + gr);
        }
        // Thomas solve for the tridiagonal system with off-diagonals -a*g.
        const double off = -a * g;
        cprime[0] = off / diag[0];
        dprime[0] = rhs[0] / diag[0];
        for (int i = 1; i < k; ++i) {
            const double m = diag[i] - off * cprime[i - 1];
            cprime[i] = off / m;
            dprime[i] = (rhs[i] - off * dprime[i - 1]) / m;
        }
        v[k - 1] = dprime[k - 1];
        for (int i = k - 2; i >= 0; --i) v[i] = dprime[i] - cprime[i] * v[i + 1];
        record();
    }
    return out;
}

}  // namespace acam
