#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "acam/analysis.hpp"
#include "acam/presets.hpp"

namespace acam {

using nlohmann::json;

struct TimeRange {
    double lo = 0.5e-9;
    double hi = 10e-9;
    int points = 40;
};

struct McSpec {
    int n_runs = 200;
    double sigma_vt = 0.05 / 3.0;
    bool pmos_width_scaling = true;
    MemristorMode memristor_mode = MemristorMode::None;
};

struct RGridSpec {
    double r_min = 5e3;
    double r_max = 2.5e6;
    int points = 120;
};

/// Full experiment description. Defaults reproduce the reference setup
/// (vdd = 0.8 V, vtn = 0.4 V, w = 10 mV, R in [5 kOhm, 2.5 MOhm]).
struct ExperimentConfig {
    DeviceSet device = preset_devices();
    SupplyConfig supply = preset_supply();
    std::vector<CellTag> designs = {CellTag::D6T2M, CellTag::D10T2M,
                                    CellTag::D8T2M, CellTag::D4T2M2S};
    std::vector<Level> levels = {preset_level_wide()};
    double w = kPresetW;
    std::vector<int> n_list = {16, 32, 64};
    TimeRange t_range{};
    std::vector<double> m_grid = {0.0, 1.0, 1.5, 2.0, 2.5, 3.0};
    McSpec mc{};
    RGridSpec r_grid{};
    ArrayParasitics parasitics{};
    std::vector<int> column_list = {1, 16, 32, 64, 128};
    int kappa = 3;
    double dr_target = 0.1;
    std::uint64_t seed = 1;
    std::string out_dir = "out";

    std::vector<double> r_points() const {
        return logspace(r_grid.r_min, r_grid.r_max,
                        static_cast<std::size_t>(r_grid.points));
    }

    VariationSpec variation() const {
        VariationSpec v;
        v.sigma_vt = mc.sigma_vt;
        v.pmos_width_scaling = mc.pmos_width_scaling;
        v.memristor_mode = mc.memristor_mode;
        v.seed = seed;
        return v;
    }
};

inline CellTag parse_cell_tag(const std::string& s) {
    if (s == "6T2M") return CellTag::D6T2M;
    if (s == "10T2M") return CellTag::D10T2M;
    if (s == "8T2M") return CellTag::D8T2M;
    if (s == "4T2M2S") return CellTag::D4T2M2S;
    throw ConfigError("unknown design tag: " + s);
}

inline MemristorMode parse_memristor_mode(const std::string& s) {
    if (s == "none") return MemristorMode::None;
    if (s == "rel1pct") return MemristorMode::Rel1Pct;
    if (s == "rel5pct") return MemristorMode::Rel5Pct;
    if (s == "value_dependent") return MemristorMode::ValueDependent;
    throw ConfigError("unknown memristor mode: " + s);
}

inline const char* memristor_mode_name(MemristorMode m) {
    switch (m) {
        case MemristorMode::None: return "none";
        case MemristorMode::Rel1Pct: return "rel1pct";
        case MemristorMode::Rel5Pct: return "rel5pct";
        case MemristorMode::ValueDependent: return "value_dependent";
    }
    return "none";
}

namespace detail {

inline const json& at_path(const json& j, const std::string& path) {
    const json* cur = &j;
    std::size_t start = 0;
    while (true) {
        const std::size_t dot = path.find('.', start);
        const std::string key = path.substr(start, dot - start);
        if (!cur->is_object() || !cur->contains(key))
            throw ConfigError("missing required field: " + path);
        cur = &(*cur)[key];
        if (dot == std::string::npos) return *cur;
        start = dot + 1;
    }
}

inline double num_at(const json& j, const std::string& path) {
    const json& v = at_path(j, path);
    if (!v.is_number()) throw ConfigError("field is not a number: " + path);
    return v.get<double>();
}

inline bool bool_at(const json& j, const std::string& path) {
    const json& v = at_path(j, path);
    if (!v.is_boolean()) throw ConfigError("field is not a boolean: " + path);
    return v.get<bool>();
}

inline std::string str_at(const json& j, const std::string& path) {
    const json& v = at_path(j, path);
    if (!v.is_string()) throw ConfigError("field is not a string: " + path);
    return v.get<std::string>();
}

inline MosParams mos_from_json(const json& j, const std::string& p, Polarity pol) {
    MosParams m;
    m.polarity = pol;
    m.vth = num_at(j, p + ".vth");
    m.k = num_at(j, p + ".k");
    m.n_slope = num_at(j, p + ".n_slope");
    m.ss = num_at(j, p + ".ss");
    m.lambda = num_at(j, p + ".lambda");
    m.i_leak_floor = num_at(j, p + ".i_leak_floor");
    m.width_scale = num_at(j, p + ".width_scale");
    if (m.vth <= 0 || m.k <= 0 || m.ss <= 0 || m.width_scale <= 0)
        throw ConfigError("invalid device parameters under " + p);
    return m;
}

}  // namespace detail

inline json config_to_json(const ExperimentConfig& c) {
    auto mos = [](const MosParams& m) {
        return json{{"vth", m.vth},
                    {"k", m.k},
                    {"n_slope", m.n_slope},
                    {"ss", m.ss},
                    {"lambda", m.lambda},
                    {"i_leak_floor", m.i_leak_floor},
                    {"width_scale", m.width_scale}};
    };
    json designs = json::array();
    for (CellTag t : c.designs) designs.push_back(cell_name(t));
    json levels = json::array();
    for (const Level& l : c.levels)
        levels.push_back(json{{"p_lo", l.p_lo}, {"p_hi", l.p_hi}});
    return json{
        {"device",
         {{"nmos", mos(c.device.nmos)},
          {"pmos", mos(c.device.pmos)},
          {"ts",
           {{"v_th_ts", c.device.ts.v_th_ts},
            {"g_on", c.device.ts.g_on},
            {"g_off", c.device.ts.g_off},
            {"ss_ts", c.device.ts.ss_ts}}},
          {"switch_scale", c.device.switch_scale},
          {"switch_scale_p", c.device.switch_scale_p}}},
        {"supply",
         {{"vdd", c.supply.vdd}, {"vpc", c.supply.vpc}, {"v_sl_hi", c.supply.v_sl_hi}}},
        {"designs", designs},
        {"levels", levels},
        {"w", c.w},
        {"n_list", c.n_list},
        {"t_range",
         {{"lo", c.t_range.lo}, {"hi", c.t_range.hi}, {"points", c.t_range.points}}},
        {"m_grid", c.m_grid},
        {"mc",
         {{"n_runs", c.mc.n_runs},
          {"sigma_vt", c.mc.sigma_vt},
          {"pmos_width_scaling", c.mc.pmos_width_scaling},
          {"memristor_mode", memristor_mode_name(c.mc.memristor_mode)}}},
        {"r_grid",
         {{"r_min", c.r_grid.r_min},
          {"r_max", c.r_grid.r_max},
          {"points", c.r_grid.points}}},
        {"parasitics",
         {{"r_seg", c.parasitics.r_seg},
          {"c_seg", c.parasitics.c_seg},
          {"n_rows", c.parasitics.n_rows},
          {"vdl_lead", c.parasitics.vdl_lead}}},
        {"column_list", c.column_list},
        {"kappa", c.kappa},
        {"dr_target", c.dr_target},
        {"seed", c.seed}};
}

/// Parse a complete config object. Every field is required so that a typo
/// or omission fails loudly with the offending field path.
inline ExperimentConfig config_from_json(const json& j) {
    using detail::at_path;
    using detail::bool_at;
    using detail::num_at;
    using detail::str_at;
    ExperimentConfig c;
    c.device.nmos = detail::mos_from_json(j, "device.nmos", Polarity::Nmos);
    c.device.pmos = detail::mos_from_json(j, "device.pmos", Polarity::Pmos);
    c.device.ts.v_th_ts = num_at(j, "device.ts.v_th_ts");
    c.device.ts.g_on = num_at(j, "device.ts.g_on");
    c.device.ts.g_off = num_at(j, "device.ts.g_off");
    c.device.ts.ss_ts = num_at(j, "device.ts.ss_ts");
    c.device.switch_scale = num_at(j, "device.switch_scale");
    if (c.device.switch_scale <= 0)
        throw ConfigError("device.switch_scale must be positive");
    c.device.switch_scale_p = num_at(j, "device.switch_scale_p");
    if (c.device.switch_scale_p <= 0)
        throw ConfigError("device.switch_scale_p must be positive");
    c.supply.vdd = num_at(j, "supply.vdd");
    c.supply.vpc = num_at(j, "supply.vpc");
    c.supply.v_sl_hi = num_at(j, "supply.v_sl_hi");

    const json& designs = at_path(j, "designs");
    if (!designs.is_array() || designs.empty())
        throw ConfigError("designs must be a non-empty array");
    c.designs.clear();
    for (const auto& d : designs) c.designs.push_back(parse_cell_tag(d.get<std::string>()));

    const json& levels = at_path(j, "levels");
    if (!levels.is_array() || levels.empty())
        throw ConfigError("levels must be a non-empty array");
    c.levels.clear();
    for (const auto& l : levels) {
        Level lv{detail::num_at(l, "p_lo"), detail::num_at(l, "p_hi")};
        try {
            lv.validate();
        } catch (const std::invalid_argument& e) {
            throw ConfigError(std::string("levels: ") + e.what());
        }
        c.levels.push_back(lv);
    }

    c.w = num_at(j, "w");
    if (c.w <= 0) throw ConfigError("w must be positive");
    c.n_list = at_path(j, "n_list").get<std::vector<int>>();
    c.t_range.lo = num_at(j, "t_range.lo");
    c.t_range.hi = num_at(j, "t_range.hi");
    c.t_range.points = static_cast<int>(num_at(j, "t_range.points"));
    if (!(c.t_range.lo > 0 && c.t_range.lo < c.t_range.hi && c.t_range.points >= 2))
        throw ConfigError("t_range: need 0 < lo < hi and points >= 2");
    c.m_grid = at_path(j, "m_grid").get<std::vector<double>>();
    c.mc.n_runs = static_cast<int>(num_at(j, "mc.n_runs"));
    c.mc.sigma_vt = num_at(j, "mc.sigma_vt");
    c.mc.pmos_width_scaling = bool_at(j, "mc.pmos_width_scaling");
    c.mc.memristor_mode = parse_memristor_mode(str_at(j, "mc.memristor_mode"));
    if (c.mc.n_runs < 1) throw ConfigError("mc.n_runs must be >= 1");
    c.r_grid.r_min = num_at(j, "r_grid.r_min");
    c.r_grid.r_max = num_at(j, "r_grid.r_max");
    c.r_grid.points = static_cast<int>(num_at(j, "r_grid.points"));
    if (!(c.r_grid.r_min > 0 && c.r_grid.r_min < c.r_grid.r_max &&
          c.r_grid.points >= 2))
        throw ConfigError("r_grid: need 0 < r_min < r_max and points >= 2");
    c.parasitics.r_seg = num_at(j, "parasitics.r_seg");
    c.parasitics.c_seg = num_at(j, "parasitics.c_seg");
    c.parasitics.n_rows = static_cast<int>(num_at(j, "parasitics.n_rows"));
    c.parasitics.vdl_lead = num_at(j, "parasitics.vdl_lead");
    if (c.parasitics.r_seg < 0 || c.parasitics.c_seg < 0 ||
        c.parasitics.n_rows < 0 || c.parasitics.vdl_lead < 0)
        throw ConfigError("parasitics: fields must be non-negative");
    c.column_list = at_path(j, "column_list").get<std::vector<int>>();
    c.kappa = static_cast<int>(num_at(j, "kappa"));
    if (c.kappa < 2) throw ConfigError("kappa must be >= 2");
    c.dr_target = num_at(j, "dr_target");
    c.seed = static_cast<std::uint64_t>(num_at(j, "seed"));
    return c;
}

/// Apply a dotted-path override like "supply.vdd=0.9" onto a json tree.
/// Values parse as json when possible, else as strings.
inline void apply_override(json& j, const std::string& expr) {
    const std::size_t eq = expr.find('=');
    if (eq == std::string::npos)
        throw ConfigError("override must be path=value: " + expr);
    const std::string path = expr.substr(0, eq);
    const std::string raw = expr.substr(eq + 1);
    // bare tokens fall back to strings; a bracketed list of bare tokens
    // (e.g. "[10T2M]" after the shell strips quotes) falls back to an
    // array of json-or-string elements
    auto lenient = [](const std::string& s) {
        try {
            return json::parse(s);
        } catch (const json::parse_error&) {
            return json(s);
        }
    };
    json value;
    try {
        value = json::parse(raw);
    } catch (const json::parse_error&) {
        if (raw.size() >= 2 && raw.front() == '[' && raw.back() == ']') {
            value = json::array();
            const std::string body = raw.substr(1, raw.size() - 2);
            std::size_t start = 0;
            while (start <= body.size() && !body.empty()) {
                const std::size_t comma = body.find(',', start);
                const std::string tok =
                    body.substr(start, comma == std::string::npos
                                           ? std::string::npos
                                           : comma - start);
                value.push_back(lenient(tok));
                if (comma == std::string::npos) break;
                start = comma + 1;
            }
        } else {
            value = raw;
        }
    }
    json* cur = &j;
    std::size_t start = 0;
    while (true) {
        const std::size_t dot = path.find('.', start);
        const std::string key = path.substr(start, dot - start);
        if (key.empty()) throw ConfigError("bad override path: " + path);
        if (dot == std::string::npos) {
            (*cur)[key] = value;
            return;
        }
        cur = &(*cur)[key];
        start = dot + 1;
    }
}

/// FNV-1a over the canonical config serialization.
inline std::uint64_t config_hash(const ExperimentConfig& c) {
    const std::string s = config_to_json(c).dump();
    std::uint64_t h = 14695981039346656037ULL;
    for (unsigned char ch : s) {
        h ^= ch;
        h *= 1099511628211ULL;
    }
    return h;
}

}  // namespace acam
