#pragma once

#include <algorithm>
#include <cmath>
#include <string>

#include "acam/common.hpp"
#include "acam/rng.hpp"
#include "acam/rootfind.hpp"

namespace acam {

enum class Polarity { Nmos, Pmos };

/// Analytic MOS compact model parameters. Voltages are source-referenced
/// magnitudes, so PMOS devices are evaluated with (vsg, vsd).
struct MosParams {
    Polarity polarity = Polarity::Nmos;
    double vth = 0.4;            // |threshold voltage|, V
    double k = 1e-4;             // transconductance factor, A/V^2
    double n_slope = 1.0;        // subthreshold ideality
    double ss = 90.0;            // subthreshold swing, mV/dec
    double lambda = 0.0;         // channel-length modulation, 1/V
    double i_leak_floor = 1e-12; // minimum on-path off current, A
    double width_scale = 1.0;

    double vchar() const { return n_slope * ss * 1e-3 / kLn10; }
};

/// Volatile threshold switch: memoryless steep conductance transition.
struct TsParams {
    double v_th_ts = 0.4;  // switching threshold, V
    double g_on = 1e-3;    // S
    double g_off = 1e-9;   // S
    double ss_ts = 1.0;    // transition swing, mV/dec
};

struct SupplyConfig {
    double vdd = 0.8;
    double vpc = 0.8;      // ML precharge voltage
    double v_sl_hi = 0.8;  // search-line high rail
};

enum class Corner { TT, SS, FF, SF, FS };

inline const char* corner_name(Corner c) {
    switch (c) {
        case Corner::TT: return "TT";
        case Corner::SS: return "SS";
        case Corner::FF: return "FF";
        case Corner::SF: return "SF";
        case Corner::FS: return "FS";
    }
    return "?";
}

enum class MemristorMode { None, Rel1Pct, Rel5Pct, ValueDependent };

struct VariationSpec {
    double sigma_vt = 0.05 / 3.0;  // per-device threshold std-dev, V
    bool pmos_width_scaling = true;
    MemristorMode memristor_mode = MemristorMode::None;
    std::uint64_t seed = 0;
};

/// Drain current of the blended subthreshold/square-law model.
/// Continuous and monotone non-decreasing in both vgs and vds.
inline double mos_current(const MosParams& p, double vgs, double vds) {
    if (!std::isfinite(vgs) || !std::isfinite(vds))
        throw std::invalid_argument("mos_current: non-finite input");
    if (vds < 0.0) vds = 0.0;

    const double vc = p.vchar();
    auto sqsoftplus = [](double x) {
        const double sp = (x > 60.0) ? 0.5 * x : std::log1p(std::exp(0.5 * x));
        return sp * sp;
    };
    const double ispec = 2.0 * p.k * vc * vc;
    const double i_fwd = sqsoftplus((vgs - p.vth) / vc);
    const double i_rev = sqsoftplus((vgs - p.vth - vds) / vc);
    double i = ispec * (i_fwd - i_rev) * (1.0 + p.lambda * vds);
    i += p.i_leak_floor * std::tanh(vds / 1e-4);
    return p.width_scale * i;
}

/// Channel conductance i/v at the operating point (leak-floor bounded).
inline double mos_conductance(const MosParams& p, double vgs, double vds) {
    if (vds <= 1e-9) vds = 1e-9;
    return mos_current(p, vgs, vds) / vds;
}

/// CMOS inverter static transfer: vout solving I_nmos(vin) = I_pmos(vin).
inline double inverter_transfer(const MosParams& nmos, const MosParams& pmos,
                                const SupplyConfig& supply, double vin) {
    require(vin >= -1e-12 && vin <= supply.vdd + 1e-12,
            "inverter_transfer: vin outside [0, vdd]");
    vin = std::clamp(vin, 0.0, supply.vdd);
    auto balance = [&](double vout) {
        const double i_n = mos_current(nmos, vin, vout);
        const double i_p = mos_current(pmos, supply.vdd - vin, supply.vdd - vout);
        return i_n - i_p;
    };
    return solve_bracketed(balance, 0.0, supply.vdd, 1e-5);
}

/// Conductance of the threshold switch at control voltage v_ctrl: a
/// log-domain ramp of slope 1/ss_ts decades per volt, clamped to the
/// [g_off, g_on] rails around the mid-conductance at v_th_ts.
inline double ts_conductance(const TsParams& p, double v_ctrl) {
    const double d_off = std::log10(p.g_off);
    const double d_on = std::log10(p.g_on);
    const double mid = 0.5 * (d_off + d_on);
    double dec = mid + (v_ctrl - p.v_th_ts) / (p.ss_ts * 1e-3);
    dec = std::clamp(dec, d_off, d_on);
    return std::pow(10.0, dec);
}

/// Threshold skew for process corners: S = +10% |vth|, F = -10%.
/// The first corner letter applies to NMOS, the second to PMOS.
inline MosParams apply_corner(const MosParams& params, Corner corner) {
    char tag = 'T';
    switch (corner) {
        case Corner::TT: tag = 'T'; break;
        case Corner::SS: tag = 'S'; break;
        case Corner::FF: tag = 'F'; break;
        case Corner::SF: tag = (params.polarity == Polarity::Nmos) ? 'S' : 'F'; break;
        case Corner::FS: tag = (params.polarity == Polarity::Nmos) ? 'F' : 'S'; break;
    }
    MosParams out = params;
    if (tag == 'S') out.vth = params.vth * 1.10;
    if (tag == 'F') out.vth = params.vth * 0.90;
    return out;
}

/// Threshold-voltage variation sample. PMOS sigma follows the width-based
/// area rule sigma / sqrt(width_scale).
inline MosParams sample_variation(const MosParams& params,
                                  const VariationSpec& spec, RngStream& rng) {
    double sigma = spec.sigma_vt;
    if (params.polarity == Polarity::Pmos && spec.pmos_width_scaling)
        sigma /= std::sqrt(std::max(params.width_scale, 1e-12));
    MosParams out = params;
    out.vth = rng.normal(params.vth, sigma);
    return out;
}

/// Relative memristance sigma for the value-dependent mode: grows with R
/// on a log scale and is capped at 30%.
inline double memristor_rel_sigma(MemristorMode mode, double r) {
    switch (mode) {
        case MemristorMode::None: return 0.0;
        case MemristorMode::Rel1Pct: return 0.01;
        case MemristorMode::Rel5Pct: return 0.05;
        case MemristorMode::ValueDependent: {
            const double span = std::log(2.5e6 / 5e3);
            double f = std::log(std::max(r, 5e3) / 5e3) / span;
            f = std::clamp(f, 0.0, 1.0);
            return std::min(0.30, 0.01 + 0.29 * f);
        }
    }
    return 0.0;
}

inline double sample_memristance(double r, const VariationSpec& spec,
                                 RngStream& rng) {
    const double sigma_rel = memristor_rel_sigma(spec.memristor_mode, r);
    if (sigma_rel <= 0.0) return r;
    return std::max(1.0, rng.normal(r, sigma_rel * r));
}

/// The device set a cell is built from: one NMOS and one PMOS flavor plus
/// the threshold switch used by the 4T2M2S design. The match-line switch
/// transistors share the divider devices' parameters but carry their own
/// width multipliers (sized independently of the divider devices).
struct DeviceSet {
    MosParams nmos{};
    MosParams pmos{Polarity::Pmos};
    TsParams ts{};
    double switch_scale = 1.0;    // NMOS ML-switch width multiplier
    double switch_scale_p = 1.0;  // PMOS ML-switch width multiplier
};

inline DeviceSet apply_corner(const DeviceSet& dev, Corner corner) {
    DeviceSet out = dev;
    out.nmos = apply_corner(dev.nmos, corner);
    out.pmos = apply_corner(dev.pmos, corner);
    return out;
}

inline DeviceSet sample_variation(const DeviceSet& dev, const VariationSpec& spec,
                                  RngStream& rng) {
    DeviceSet out = dev;
    out.nmos = sample_variation(dev.nmos, spec, rng);
    out.pmos = sample_variation(dev.pmos, spec, rng);
    // The threshold switch is a threshold device too: its switching point
    // carries the same per-device threshold spread as the transistors.
    out.ts.v_th_ts = rng.normal(dev.ts.v_th_ts, spec.sigma_vt);
    return out;
}

}  // namespace acam
