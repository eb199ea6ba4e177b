#pragma once

#include <utility>
#include <vector>

#include "acam/devices.hpp"
#include "acam/rootfind.hpp"

namespace acam {

enum class CellTag { D6T2M, D10T2M, D8T2M, D4T2M2S };

inline const char* cell_name(CellTag t) {
    switch (t) {
        case CellTag::D6T2M: return "6T2M";
        case CellTag::D10T2M: return "10T2M";
        case CellTag::D8T2M: return "8T2M";
        case CellTag::D4T2M2S: return "4T2M2S";
    }
    return "?";
}

enum class LbsChain { None, DoubleInverter, SingleInverter };
enum class MlSwitch { NmosPulldown, PmosPulldownActiveLow, TsPullup };

/// Cell topology: the lower-bound subcircuit post-processing chain and the
/// match-line switch type are both fixed by the design tag.
struct CellDesign {
    CellTag tag = CellTag::D6T2M;
    LbsChain chain = LbsChain::None;
    MlSwitch ml_switch = MlSwitch::NmosPulldown;

    static CellDesign of(CellTag t) {
        switch (t) {
            case CellTag::D6T2M:
                return {t, LbsChain::None, MlSwitch::NmosPulldown};
            case CellTag::D10T2M:
                return {t, LbsChain::DoubleInverter, MlSwitch::NmosPulldown};
            case CellTag::D8T2M:
                return {t, LbsChain::SingleInverter, MlSwitch::PmosPulldownActiveLow};
            case CellTag::D4T2M2S:
                return {t, LbsChain::None, MlSwitch::TsPullup};
        }
        return {};
    }

    /// 4T2M2S evaluates from a grounded ML; the others precharge high.
    bool precharge_to_ground() const { return ml_switch == MlSwitch::TsPullup; }

    /// The 8T2M lower-bound output is inverted: the effective G1 curve
    /// rises with vdl and a *high* G1 is the match side.
    bool lbs_inverted() const { return chain == LbsChain::SingleInverter; }
};

struct CellConfig {
    CellDesign design{};
    double r_lb = 1e5;  // ohm
    double r_ub = 1e5;  // ohm
};

enum class VtcWhich { G1, G2 };

struct VtcCurve {
    std::vector<double> vdl;
    std::vector<double> vg;
    VtcWhich which = VtcWhich::G1;
};

/// Raw lower-bound divider node: vdd feeds node G1 through r_lb, an NMOS
/// gated by vdl pulls it down. Solves the current balance to 10 uV.
inline double solve_lbs_node(const DeviceSet& dev, const SupplyConfig& supply,
                             double r_lb, double vdl) {
    require(r_lb > 0.0, "solve_lbs_node: r_lb must be positive");
    require(vdl >= -1e-12 && vdl <= supply.vdd + 1e-12,
            "solve_lbs_node: vdl outside [0, vdd]");
    auto balance = [&](double vg) {
        return (supply.vdd - vg) / r_lb - mos_current(dev.nmos, vdl, vg);
    };
    return solve_bracketed(balance, 0.0, supply.vdd, 1e-5);
}

/// Upper-bound divider node: an inverter on vdl gates a PMOS pull-up from
/// v_sl_hi into node G2, with r_ub from G2 to ground.
inline double solve_ubs_node(const DeviceSet& dev, const SupplyConfig& supply,
                             double r_ub, double vdl) {
    require(r_ub > 0.0, "solve_ubs_node: r_ub must be positive");
    require(vdl >= -1e-12 && vdl <= supply.vdd + 1e-12,
            "solve_ubs_node: vdl outside [0, vdd]");
    const double v_inv = inverter_transfer(dev.nmos, dev.pmos, supply, vdl);
    const double vsg = std::max(0.0, supply.v_sl_hi - v_inv);
    auto balance = [&](double vg2) {
        return mos_current(dev.pmos, vsg, supply.v_sl_hi - vg2) - vg2 / r_ub;
    };
    return solve_bracketed(balance, 0.0, supply.v_sl_hi, 1e-5);
}

/// Effective gate voltages (vg1_eff, vg2) seen by the ML switches for a
/// configured cell at input vdl. The LBS chain is applied to vg1.
inline std::pair<double, double> cell_gate_voltages(const CellConfig& cfg,
                                                    const DeviceSet& dev,
                                                    const SupplyConfig& supply,
                                                    double vdl) {
    double vg1 = solve_lbs_node(dev, supply, cfg.r_lb, vdl);
    switch (cfg.design.chain) {
        case LbsChain::None:
            break;
        case LbsChain::SingleInverter:
            vg1 = inverter_transfer(dev.nmos, dev.pmos, supply, vg1);
            break;
        case LbsChain::DoubleInverter:
            vg1 = inverter_transfer(dev.nmos, dev.pmos, supply, vg1);
            vg1 = inverter_transfer(dev.nmos, dev.pmos, supply, vg1);
            break;
    }
    const double vg2 = solve_ubs_node(dev, supply, cfg.r_ub, vdl);
    return {vg1, vg2};
}

/// Sampled VTC pair (effective G1 and G2) over a vdl grid.
inline std::pair<VtcCurve, VtcCurve> vtc_sweep(const CellConfig& cfg,
                                               const DeviceSet& dev,
                                               const SupplyConfig& supply,
                                               const std::vector<double>& grid) {
    VtcCurve g1{{}, {}, VtcWhich::G1};
    VtcCurve g2{{}, {}, VtcWhich::G2};
    g1.vdl = grid;
    g2.vdl = grid;
    g1.vg.reserve(grid.size());
    g2.vg.reserve(grid.size());
    for (double v : grid) {
        auto [vg1, vg2] = cell_gate_voltages(cfg, dev, supply, v);
        g1.vg.push_back(vg1);
        g2.vg.push_back(vg2);
    }
    return {std::move(g1), std::move(g2)};
}

/// Peak |dVG/dVDL| by central finite differences.
inline double gain(const VtcCurve& curve) {
    require(curve.vdl.size() >= 3 && curve.vdl.size() == curve.vg.size(),
            "gain: need at least 3 samples");
    double peak = 0.0;
    for (std::size_t i = 1; i + 1 < curve.vdl.size(); ++i) {
        const double dv = curve.vdl[i + 1] - curve.vdl[i - 1];
        require(dv > 0.0, "gain: vdl grid must be strictly increasing");
        peak = std::max(peak, std::abs((curve.vg[i + 1] - curve.vg[i - 1]) / dv));
    }
    return peak;
}

/// Cell conductance sensitivity proxy: gain / subthreshold swing.
inline double conductance_sensitivity(double gain_value, double ss_mv_per_dec) {
    require(gain_value > 0.0 && ss_mv_per_dec > 0.0,
            "conductance_sensitivity: args must be positive");
    return gain_value / ss_mv_per_dec;
}

inline std::vector<double> linspace(double lo, double hi, std::size_t n) {
    std::vector<double> v(n);
    for (std::size_t i = 0; i < n; ++i)
        v[i] = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(n - 1);
    return v;
}

inline std::vector<double> logspace(double lo, double hi, std::size_t n) {
    std::vector<double> v(n);
    const double llo = std::log(lo), lhi = std::log(hi);
    for (std::size_t i = 0; i < n; ++i)
        v[i] = std::exp(llo + (lhi - llo) * static_cast<double>(i) /
                                  static_cast<double>(n - 1));
    return v;
}

}  // namespace acam
