#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include "acam/devices.hpp"
#include "acam/presets.hpp"

using namespace acam;

namespace {

MosParams ref_nmos() {
    MosParams p;
    p.polarity = Polarity::Nmos;
    p.vth = 0.4;
    p.k = 1e-4;
    p.n_slope = 1.0;
    p.ss = 90.0;
    p.lambda = 0.0;
    p.i_leak_floor = 1e-12;
    return p;
}

MosParams ref_pmos() {
    MosParams p = ref_nmos();
    p.polarity = Polarity::Pmos;
    return p;
}

SupplyConfig ref_supply() { return SupplyConfig{}; }

}  // namespace

TEST_CASE("mos_current: zero drain bias gives zero current") {
    const MosParams p = ref_nmos();
    for (double vgs : {0.0, 0.2, 0.4, 0.8})
        CHECK(mos_current(p, vgs, 0.0) == Catch::Approx(0.0).margin(1e-18));
}

TEST_CASE("mos_current: off-state current bounded near the leak floor") {
    const MosParams p = ref_nmos();
    const double vc = p.vchar();
    // subthreshold term at vgs=0 plus the leak floor
    const double ceiling =
        2.0 * p.k * vc * vc * std::exp(-p.vth / vc) * 2.0 + 2.0 * p.i_leak_floor;
    CHECK(mos_current(p, 0.0, 0.8) <= ceiling);
    CHECK(mos_current(p, 0.0, 0.8) >= p.i_leak_floor * 0.5);
}

TEST_CASE("mos_current: golden value at (0.8, 0.8)") {
    // frozen from an independent evaluation of the blended model formula
    const MosParams p = ref_nmos();
    CHECK(mos_current(p, 0.8, 0.8) ==
          Catch::Approx(8.018690430246306e-06).epsilon(1e-9));
}

TEST_CASE("mos_current: continuity across the blend region") {
    // steepest relative slope is the subthreshold one: d(ln I)/dVgs = 1/vc,
    // about 0.51% per 0.2 mV step here; allow 2x that and a tiny floor
    const MosParams p = ref_nmos();
    const double step_gain = 2.0 * (0.8 / 4000.0) / p.vchar();
    double prev = mos_current(p, 0.0, 0.4);
    for (int i = 1; i <= 4000; ++i) {
        const double vgs = 0.8 * i / 4000.0;
        const double cur = mos_current(p, vgs, 0.4);
        const double jump = std::abs(cur - prev);
        CHECK(jump <= step_gain * cur + 1e-15);
        prev = cur;
    }
}

TEST_CASE("mos_current: monotone in vgs and vds") {
    const MosParams p = ref_nmos();
    for (int i = 0; i < 200; ++i) {
        const double a = 0.8 * i / 199.0;
        double prev_g = -1.0, prev_d = -1.0;
        for (int j = 0; j < 200; ++j) {
            const double b = 0.8 * j / 199.0;
            const double ig = mos_current(p, b, a);  // sweep vgs at fixed vds
            const double id = mos_current(p, a, b);  // sweep vds at fixed vgs
            CHECK(ig >= prev_g - 1e-18);
            CHECK(id >= prev_d - 1e-18);
            prev_g = ig;
            prev_d = id;
        }
    }
}

TEST_CASE("mos_current: rejects non-finite inputs") {
    const MosParams p = ref_nmos();
    CHECK_THROWS(mos_current(p, std::nan(""), 0.1));
    CHECK_THROWS(mos_current(p, 0.1, std::numeric_limits<double>::infinity()));
}

TEST_CASE("inverter_transfer: rail behavior and monotonicity") {
    const MosParams n = ref_nmos();
    const MosParams p = ref_pmos();
    const SupplyConfig s = ref_supply();
    CHECK(inverter_transfer(n, p, s, 0.0) >= s.vdd - 0.010);
    CHECK(inverter_transfer(n, p, s, s.vdd) <= 0.010);
    double prev = s.vdd + 1e-9;
    for (int i = 0; i <= 200; ++i) {
        const double vout = inverter_transfer(n, p, s, s.vdd * i / 200.0);
        CHECK(vout <= prev + 1e-6);
        prev = vout;
    }
}

TEST_CASE("inverter_transfer: midpoint matches brute-force current balance") {
    const MosParams n = ref_nmos();
    const MosParams p = ref_pmos();
    const SupplyConfig s = ref_supply();
    const double vin = s.vdd / 2.0;
    // independent oracle: scan vout at 0.01 mV steps for the sign change
    double oracle = -1.0;
    double prev = mos_current(n, vin, 0.0) - mos_current(p, s.vdd - vin, s.vdd);
    for (int i = 1; i <= 80000; ++i) {
        const double vout = s.vdd * i / 80000.0;
        const double f = mos_current(n, vin, vout) -
                         mos_current(p, s.vdd - vin, s.vdd - vout);
        if ((f > 0.0) != (prev > 0.0)) {
            oracle = s.vdd * (i - 0.5) / 80000.0;
            break;
        }
        prev = f;
    }
    REQUIRE(oracle > 0.0);
    CHECK(inverter_transfer(n, p, s, vin) == Catch::Approx(oracle).margin(5e-5));
}

TEST_CASE("inverter_transfer: gain magnitude at vdd/2 exceeds 1") {
    const MosParams n = ref_nmos();
    const MosParams p = ref_pmos();
    const SupplyConfig s = ref_supply();
    const double h = 1e-3;
    const double g = (inverter_transfer(n, p, s, s.vdd / 2 + h) -
                      inverter_transfer(n, p, s, s.vdd / 2 - h)) /
                     (2 * h);
    CHECK(std::abs(g) > 1.0);
}

TEST_CASE("ts_conductance: rails, monotonicity, and decade slope") {
    TsParams ts;
    ts.v_th_ts = 0.4;
    ts.g_on = 1e-3;
    ts.g_off = 1e-9;
    ts.ss_ts = 1.0;
    CHECK(ts_conductance(ts, 0.0) == Catch::Approx(ts.g_off));
    CHECK(ts_conductance(ts, 0.8) == Catch::Approx(ts.g_on));
    // +-5mV around threshold at 1mV/dec travels min(g_on/g_off, 1e10) overall
    const double lo = ts_conductance(ts, ts.v_th_ts - 0.005);
    const double hi = ts_conductance(ts, ts.v_th_ts + 0.005);
    const double expected = std::min(ts.g_on / ts.g_off, 1e10);
    CHECK(hi / lo == Catch::Approx(expected).epsilon(1e-6));
    double prev = 0.0;
    for (int i = 0; i <= 400; ++i) {
        const double g = ts_conductance(ts, 0.8 * i / 400.0);
        CHECK(g >= prev);
        CHECK(g >= ts.g_off);
        CHECK(g <= ts.g_on);
        prev = g;
    }
}

TEST_CASE("apply_corner: threshold skew convention") {
    MosParams n = ref_nmos();
    MosParams p = ref_pmos();
    CHECK(apply_corner(n, Corner::TT).vth == Catch::Approx(0.4));
    CHECK(apply_corner(n, Corner::SS).vth == Catch::Approx(0.44));
    CHECK(apply_corner(n, Corner::FF).vth == Catch::Approx(0.36));
    // first letter is NMOS, second PMOS
    CHECK(apply_corner(n, Corner::SF).vth == Catch::Approx(0.44));
    CHECK(apply_corner(n, Corner::FS).vth == Catch::Approx(0.36));
    CHECK(apply_corner(p, Corner::SF).vth == Catch::Approx(0.36));
    CHECK(apply_corner(p, Corner::FS).vth == Catch::Approx(0.44));
}

TEST_CASE("sample_variation: zero variance is the identity") {
    MosParams n = ref_nmos();
    VariationSpec spec;
    spec.sigma_vt = 0.0;
    RngStream rng(1, 0);
    CHECK(sample_variation(n, spec, rng).vth == n.vth);
}

TEST_CASE("sample_variation: sample std tracks configured sigma") {
    MosParams n = ref_nmos();
    VariationSpec spec;
    spec.sigma_vt = 0.05 / 3.0;
    RngStream rng(42, 7);
    const int runs = 100000;
    double s = 0, s2 = 0;
    for (int i = 0; i < runs; ++i) {
        const double v = sample_variation(n, spec, rng).vth;
        s += v;
        s2 += v * v;
    }
    const double mean = s / runs;
    const double stdev = std::sqrt((s2 - runs * mean * mean) / (runs - 1));
    CHECK(stdev == Catch::Approx(spec.sigma_vt).epsilon(0.02));
    CHECK(mean == Catch::Approx(n.vth).margin(5e-4));
}

TEST_CASE("sample_variation: PMOS sigma scales with 1/sqrt(width)") {
    MosParams p = ref_pmos();
    p.width_scale = 4.0;
    VariationSpec spec;
    spec.sigma_vt = 0.02;
    RngStream rng(11, 3);
    const int runs = 60000;
    double s = 0, s2 = 0;
    for (int i = 0; i < runs; ++i) {
        const double v = sample_variation(p, spec, rng).vth;
        s += v;
        s2 += v * v;
    }
    const double mean = s / runs;
    const double stdev = std::sqrt((s2 - runs * mean * mean) / (runs - 1));
    CHECK(stdev == Catch::Approx(spec.sigma_vt / 2.0).epsilon(0.03));
}

TEST_CASE("sample_variation: reproducible under a fixed seed") {
    MosParams n = ref_nmos();
    VariationSpec spec;
    spec.sigma_vt = 0.01;
    RngStream a(99, 5), b(99, 5), c(99, 6);
    const double va = sample_variation(n, spec, a).vth;
    const double vb = sample_variation(n, spec, b).vth;
    const double vc = sample_variation(n, spec, c).vth;
    CHECK(va == vb);
    CHECK(va != vc);
}

TEST_CASE("sample_memristance: relative 5% mode") {
    VariationSpec spec;
    spec.memristor_mode = MemristorMode::Rel5Pct;
    RngStream rng(3, 0);
    const double r0 = 100e3;
    const int runs = 100000;
    double s = 0, s2 = 0;
    for (int i = 0; i < runs; ++i) {
        const double r = sample_memristance(r0, spec, rng);
        s += r;
        s2 += r * r;
    }
    const double mean = s / runs;
    const double stdev = std::sqrt((s2 - runs * mean * mean) / (runs - 1));
    CHECK(stdev == Catch::Approx(5e3).epsilon(0.02));
}

TEST_CASE("memristor_rel_sigma: value-dependent mode is monotone and capped") {
    double prev = 0.0;
    for (double r : {5e3, 2e4, 1e5, 5e5, 2.5e6, 1e7}) {
        const double s = memristor_rel_sigma(MemristorMode::ValueDependent, r);
        CHECK(s >= prev);
        CHECK(s <= 0.30);
        prev = s;
    }
    CHECK(memristor_rel_sigma(MemristorMode::None, 1e5) == 0.0);
    CHECK(memristor_rel_sigma(MemristorMode::Rel1Pct, 1e5) == Catch::Approx(0.01));
}
