#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "acam/array.hpp"
#include "acam/presets.hpp"

using namespace acam;

namespace {

CellConfig anchor_cell(CellTag tag) {
    // stored interval near the reference anchor point
    return CellConfig{CellDesign::of(tag), 619e3, 63.1e3};
}

}  // namespace

TEST_CASE("effective_resistances: closed forms") {
    {
        const auto [r_fm, r_1mm] = effective_resistances(1.6e6, 1e4, 16);
        CHECK(r_fm == Catch::Approx(1e5));
        CHECK(r_1mm == Catch::Approx(1.6e6 * 1e4 / (1.6e6 + 15 * 1e4)));
    }
    {
        // one cell: the row is just that cell
        const auto [r_fm, r_1mm] = effective_resistances(2e5, 5e3, 1);
        CHECK(r_fm == Catch::Approx(2e5));
        CHECK(r_1mm == Catch::Approx(5e3));
    }
    CHECK_THROWS(effective_resistances(1e4, 1e4, 16));
    CHECK_THROWS(effective_resistances(1e5, 1e4, 0));
}

TEST_CASE("default_c_ml: overhead plus per-cell load") {
    CHECK(default_c_ml(16) == Catch::Approx(26e-15));
    CHECK(default_c_ml(0) == Catch::Approx(10e-15));
}

TEST_CASE("constant-conductance charge transient matches the RC exponential") {
    // threshold switches with both gates pinned fully on present a constant
    // conductance, so the ML charge-up has an exact closed form
    const DeviceSet dev = preset_devices();
    const SupplyConfig sup = preset_supply();
    const CellDesign design = CellDesign::of(CellTag::D4T2M2S);
    const double g = 2.0 * ts_conductance(dev.ts, sup.vdd);
    const double c = 20e-15;
    const auto trace = detail::integrate_ml(
        design, {dev}, sup,
        [&](std::size_t, double) {
            return detail::SolvedCell{sup.vdd, sup.vdd};
        },
        c, 10e-9, 1e-12);
    const double tau = c / g;
    for (double t : {0.5e-9, 1e-9, 2e-9, 5e-9, 10e-9}) {
        const double exact = sup.v_sl_hi * (1.0 - std::exp(-t / tau));
        CHECK(trace.at(t) == Catch::Approx(exact).epsilon(0.01));
    }
}

TEST_CASE("initial discharge slopes match vpc over R_eff * c_ml") {
    const DeviceSet dev = preset_devices();
    const SupplyConfig sup = preset_supply();
    const int n = 16;
    RowConfig row;
    row.design = CellDesign::of(CellTag::D6T2M);
    row.c_ml = default_c_ml(n);
    row.cells.assign(n, anchor_cell(CellTag::D6T2M));

    const double v_match = 0.30;  // inside the stored interval
    const double v_mm = 0.55;     // above it
    const double g_match =
        cell_switch_conductance(row.cells[0], dev, sup, v_match, sup.vpc);
    const double g_mm =
        cell_switch_conductance(row.cells[0], dev, sup, v_mm, sup.vpc);
    REQUIRE(g_mm > g_match);
    const auto [r_fm, r_1mm] =
        effective_resistances(1.0 / g_match, 1.0 / g_mm, n);

    const double dt_meas = 10e-12;
    // full match: all cells at the matching input
    const auto fm = ml_transient(row, dev, sup,
                                 std::vector<double>(n, v_match), dt_meas);
    const double slope_fm = (sup.vpc - fm.v_ml.back()) / dt_meas;
    CHECK(slope_fm == Catch::Approx(sup.vpc / (r_fm * row.c_ml)).epsilon(0.05));

    // one mismatch: cell 0 sees the out-of-interval input
    std::vector<double> inputs(n, v_match);
    inputs[0] = v_mm;
    const auto mm = ml_transient(row, dev, sup, inputs, dt_meas);
    const double slope_mm = (sup.vpc - mm.v_ml.back()) / dt_meas;
    CHECK(slope_mm == Catch::Approx(sup.vpc / (r_1mm * row.c_ml)).epsilon(0.05));
}

TEST_CASE("full-match row barely moves; one mismatch discharges faster") {
    const DeviceSet dev = preset_devices();
    const SupplyConfig sup = preset_supply();
    const int n = 16;
    RowConfig row;
    row.design = CellDesign::of(CellTag::D6T2M);
    row.c_ml = default_c_ml(n);
    row.cells.assign(n, anchor_cell(CellTag::D6T2M));

    const auto fm =
        ml_transient(row, dev, sup, std::vector<double>(n, 0.30), 1e-9);
    CHECK(fm.v_ml.back() >= sup.vpc - 0.010);

    std::vector<double> inputs(n, 0.30);
    inputs[0] = 0.60;
    const auto mm = ml_transient(row, dev, sup, inputs, 1e-9);
    CHECK(mm.v_ml.back() < fm.v_ml.back() - 0.020);
}

TEST_CASE("matching 4T2M2S row stays near ground within the off-leak bound") {
    const DeviceSet dev = preset_devices();
    const SupplyConfig sup = preset_supply();
    const int n = 16;
    RowConfig row;
    row.design = CellDesign::of(CellTag::D4T2M2S);
    row.c_ml = default_c_ml(n);
    row.cells.assign(n, anchor_cell(CellTag::D4T2M2S));

    const double t_end = 1e-9;
    const auto fm =
        ml_transient(row, dev, sup, std::vector<double>(n, 0.30), t_end);
    // worst case: 2n off switches sourcing g_off * v_sl_hi the whole time
    const double bound = 2.0 * n * dev.ts.g_off * sup.v_sl_hi * t_end / row.c_ml;
    CHECK(fm.v_ml.back() <= 2.0 * bound + 1e-6);
    // and a mismatching row charges well past it
    const auto mm =
        ml_transient(row, dev, sup, std::vector<double>(n, 0.60), t_end);
    CHECK(mm.v_ml.back() > 0.05);
}

TEST_CASE("ml_transient rejects coarse steps and length mismatches") {
    const DeviceSet dev = preset_devices();
    const SupplyConfig sup = preset_supply();
    RowConfig row;
    row.design = CellDesign::of(CellTag::D6T2M);
    row.cells.assign(2, anchor_cell(CellTag::D6T2M));
    CHECK_THROWS(ml_transient(row, dev, sup, {0.3, 0.3}, 1e-9, 2e-12));
    CHECK_THROWS(ml_transient(row, dev, sup, {0.3}, 1e-9));
}

TEST_CASE("compare_energy: precharge term and time scaling") {
    const DeviceSet dev = preset_devices();
    const SupplyConfig sup = preset_supply();
    RowConfig row;
    row.design = CellDesign::of(CellTag::D6T2M);
    row.c_ml = 20e-15;
    row.cells.assign(4, anchor_cell(CellTag::D6T2M));
    const std::vector<double> in(4, 0.30);

    const EnergyReport e1 = compare_energy(row, dev, sup, in, 1e-9);
    CHECK(e1.precharge == Catch::Approx(0.5 * 20e-15 * 0.8 * 0.8));  // 6.4 fJ
    CHECK(e1.total == Catch::Approx(e1.precharge + e1.evaluate));

    // static evaluate power means energy is linear in the window
    const EnergyReport e2 = compare_energy(row, dev, sup, in, 2e-9);
    CHECK(e2.evaluate == Catch::Approx(2.0 * e1.evaluate).epsilon(1e-9));
    CHECK(e2.precharge == Catch::Approx(e1.precharge));

    // ground-precharged design pays no precharge energy
    RowConfig ts_row;
    ts_row.design = CellDesign::of(CellTag::D4T2M2S);
    ts_row.c_ml = 20e-15;
    ts_row.cells.assign(4, anchor_cell(CellTag::D4T2M2S));
    const EnergyReport e_ts = compare_energy(ts_row, dev, sup, in, 1e-9);
    CHECK(e_ts.precharge == 0.0);
    CHECK(e_ts.evaluate > 0.0);
}

TEST_CASE("compare_energy: lower memristance draws more divider power") {
    const DeviceSet dev = preset_devices();
    const SupplyConfig sup = preset_supply();
    auto one_cell_energy = [&](double r) {
        RowConfig row;
        row.design = CellDesign::of(CellTag::D6T2M);
        row.cells.assign(1, CellConfig{row.design, r, r});
        return compare_energy(row, dev, sup, {0.30}, 1e-9).evaluate;
    };
    CHECK(one_cell_energy(5e3) > one_cell_energy(2.5e6));
}

TEST_CASE("ladder_tau: Elmore sum closed form") {
    ArrayParasitics par;
    par.r_seg = 1.0;
    par.c_seg = 1e-15;
    par.n_rows = 512;
    par.n_cols = 1;
    CHECK(ladder_tau(par) == Catch::Approx(1e-15 * 0.5 * 513.0 * 514.0));
}

TEST_CASE("ladder_step_response: single node is an exact RC charge") {
    ArrayParasitics par;
    par.r_seg = 100.0;
    par.c_seg = 1e-12;
    par.n_rows = 1;
    par.n_cols = 0;
    const double tau = par.r_seg * par.c_seg;  // 100 ps
    const double dt = 1e-13;
    const auto resp = ladder_step_response(par, {1}, 5 * tau, dt);
    REQUIRE(resp.size() == 1);
    for (std::size_t s = 0; s < resp[0].size(); s += 50) {
        const double t = static_cast<double>(s) * dt;
        CHECK(resp[0][s] == Catch::Approx(1.0 - std::exp(-t / tau)).margin(0.005));
    }
}

TEST_CASE("ladder_step_response: zero parasitics pass the drive through") {
    ArrayParasitics par;
    par.r_seg = 0.0;
    par.c_seg = 0.0;
    par.n_rows = 8;
    par.n_cols = 4;
    const auto resp = ladder_step_response(par, {1, 12}, 1e-9, 1e-12);
    for (const auto& node : resp)
        for (double v : node) CHECK(v == 1.0);
}

TEST_CASE("ladder_step_response: deeper nodes lag shallower ones") {
    ArrayParasitics par;
    par.r_seg = 10.0;
    par.c_seg = 1e-13;
    par.n_rows = 16;
    par.n_cols = 0;
    const auto resp = ladder_step_response(par, {1, 8, 16}, 2e-9, 1e-12);
    for (std::size_t s = 1; s < resp[0].size(); ++s) {
        CHECK(resp[0][s] >= resp[1][s] - 1e-12);
        CHECK(resp[1][s] >= resp[2][s] - 1e-12);
    }
    // everything converges to the drive level
    CHECK(resp[2].back() == Catch::Approx(1.0).margin(0.02));
}
