#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "acam/intervals.hpp"
#include "acam/presets.hpp"

using namespace acam;

namespace {

// Synthetic linear LUTs: both bound curves rise linearly in log r from
// v0 over `span` volts, with constant forbidden-region width `fr`.
BoundsLut linear_lut(Side side, double v0, double span, double fr,
                     std::size_t n = 200) {
    BoundsLut lut{side, {}};
    const auto r = logspace(5e3, 2.5e6, n);
    for (std::size_t i = 0; i < n; ++i) {
        const double x = static_cast<double>(i) / static_cast<double>(n - 1);
        BoundTriple t;
        t.r = r[n - 1 - i];  // descending r
        const double v = v0 + span * x;
        if (side == Side::LB) {
            t.b_lo = v;
            t.b_hi = v - fr;
        } else {
            t.b_lo = v;
            t.b_hi = v + fr;
        }
        lut.entries.push_back(t);
    }
    return lut;
}

IntervalSet real_set(CellTag tag, const Level& lv) {
    const DeviceSet dev = preset_devices();
    const SupplyConfig sup = preset_supply();
    const auto r = preset_r_grid();
    const auto lb = build_lut(tag, Side::LB, r, lv, dev, sup);
    const auto ub = build_lut(tag, Side::UB, r, lv, dev, sup);
    IntervalSet set = build_intervals(lb, ub, kPresetW, sup.vdd);
    set.tag = tag;
    set.level = lv;
    return set;
}

}  // namespace

TEST_CASE("synthetic linear LUTs: exact 50 mV spacing and closed-form count") {
    const double fr = 0.020, w = 0.010;
    const auto lb = linear_lut(Side::LB, 0.10, 0.535, fr);
    const auto ub = linear_lut(Side::UB, 0.10, 0.535, fr);
    const IntervalSet set = build_intervals(lb, ub, w, 0.8);

    // each interval advances the lower bound by w + 2*fr = 50 mV; the count
    // is 1 + floor((reachable span - w) / (w + 2*fr))
    const int expected = 1 + static_cast<int>(std::floor((0.535 - w) / (w + 2 * fr)));
    REQUIRE(set.eta() == expected);
    for (int i = 0; i < set.eta(); ++i) {
        const Interval& iv = set.intervals[i];
        CHECK(iv.lb == Catch::Approx(0.10 + 0.05 * i).margin(1e-9));
        CHECK(iv.ub - iv.lb == Catch::Approx(w).margin(1e-9));
        CHECK(iv.d == Catch::Approx(iv.lb + w / 2).margin(1e-9));
    }
    for (int i = 1; i < set.eta(); ++i)
        CHECK(set.intervals[i].lb - set.intervals[i - 1].lb ==
              Catch::Approx(0.05).margin(1e-9));
}

TEST_CASE("packing is empty when no upper bound fits above lb + w") {
    const auto lb = linear_lut(Side::LB, 0.50, 0.30, 0.02);
    const auto ub = linear_lut(Side::UB, 0.10, 0.395, 0.02);  // tops out at 0.505
    const IntervalSet set = build_intervals(lb, ub, 0.010, 0.8);
    CHECK(set.empty());
}

TEST_CASE("find_r_for_bound: interpolation, flat segments, range limits") {
    BoundsLut lut{Side::LB, {}};
    lut.entries.push_back({1e6, 0.20, 0.18});
    lut.entries.push_back({1e5, 0.30, 0.28});
    lut.entries.push_back({1e4, 0.30, 0.28});  // flat tail
    const auto mid = find_r_for_bound(lut, BoundCol::Lo, 0.25);
    REQUIRE(mid.has_value());
    // log-r interpolation: halfway in voltage = halfway in log r
    CHECK(*mid == Catch::Approx(std::sqrt(1e6 * 1e5)).epsilon(1e-6));
    const auto flat = find_r_for_bound(lut, BoundCol::Lo, 0.30);
    REQUIRE(flat.has_value());
    CHECK(*flat == Catch::Approx(1e5));  // conservative: larger r wins
    CHECK_FALSE(find_r_for_bound(lut, BoundCol::Lo, 0.35).has_value());
    CHECK_FALSE(find_r_for_bound(lut, BoundCol::Lo, 0.15).has_value());
}

TEST_CASE("bound_at_r: interpolates inside, rejects outside") {
    BoundsLut lut{Side::UB, {}};
    lut.entries.push_back({1e6, 0.20, 0.22});
    lut.entries.push_back({1e4, 0.40, 0.42});
    const auto v = bound_at_r(lut, BoundCol::Lo, 1e5);
    REQUIRE(v.has_value());
    CHECK(*v == Catch::Approx(0.30).margin(1e-9));  // halfway in log r
    CHECK_FALSE(bound_at_r(lut, BoundCol::Lo, 3e6).has_value());
    CHECK_FALSE(bound_at_r(lut, BoundCol::Lo, 5e3).has_value());
}

TEST_CASE("real packing: adjacency rule UB_hi(i) == LB_hi(i+1)") {
    for (CellTag tag : {CellTag::D6T2M, CellTag::D10T2M, CellTag::D8T2M}) {
        const IntervalSet set = real_set(tag, preset_level_wide());
        REQUIRE(set.eta() >= 2);
        for (int i = 0; i + 1 < set.eta(); ++i)
            CHECK(set.intervals[i].fr_right_hi ==
                  Catch::Approx(set.intervals[i + 1].fr_left_lo).margin(1e-12));
    }
}

TEST_CASE("real packing: windows ordered, strictly increasing, width >= w") {
    const IntervalSet set = real_set(CellTag::D10T2M, preset_level_wide());
    REQUIRE(set.eta() >= 2);
    for (int i = 0; i < set.eta(); ++i) {
        const Interval& iv = set.intervals[i];
        CHECK(iv.idx == i + 1);
        CHECK(iv.ub - iv.lb >= set.w - 1e-9);
        CHECK(iv.lb < iv.d);
        CHECK(iv.d < iv.ub);
        if (i > 0) CHECK(iv.lb > set.intervals[i - 1].ub - 1e-9);
    }
    const auto d = discrete_levels(set);
    REQUIRE(static_cast<int>(d.size()) == set.eta());
    for (std::size_t i = 1; i < d.size(); ++i) CHECK(d[i] > d[i - 1]);
}

TEST_CASE("validate_interval_set: built sets pass the brute-force oracle") {
    const DeviceSet dev = preset_devices();
    const SupplyConfig sup = preset_supply();
    for (CellTag tag : {CellTag::D10T2M, CellTag::D8T2M, CellTag::D4T2M2S}) {
        const IntervalSet set = real_set(tag, preset_level_wide());
        REQUIRE(set.eta() >= 2);
        const ValidationReport rep = validate_interval_set(set, dev, sup);
        CHECK(rep.checks == set.eta() * set.eta());
        CHECK(rep.ok());
    }
}

TEST_CASE("validate_interval_set: detects a constructed overlap") {
    const DeviceSet dev = preset_devices();
    const SupplyConfig sup = preset_supply();
    IntervalSet set = real_set(CellTag::D10T2M, preset_level_wide());
    REQUIRE(set.eta() >= 2);
    // program cell 2 identically to cell 1: input d_1 can no longer
    // mismatch on cell 2
    set.intervals[1] = set.intervals[0];
    set.intervals[1].idx = 2;
    const ValidationReport rep = validate_interval_set(set, dev, sup);
    CHECK_FALSE(rep.ok());
}

TEST_CASE("build_intervals_guarded: m = 0 reproduces the nominal packing") {
    const DeviceSet dev = preset_devices();
    const SupplyConfig sup = preset_supply();
    const auto r = preset_r_grid();
    const auto lb =
        build_lut(CellTag::D10T2M, Side::LB, r, preset_level_wide(), dev, sup);
    const auto ub =
        build_lut(CellTag::D10T2M, Side::UB, r, preset_level_wide(), dev, sup);
    const IntervalSet nominal = build_intervals(lb, ub, kPresetW, sup.vdd);
    const IntervalSet guarded = build_intervals_guarded(
        guarded_lut(Side::LB, stats_from_lut(lb), 0.0),
        guarded_lut(Side::UB, stats_from_lut(ub), 0.0), kPresetW, sup.vdd);
    REQUIRE(guarded.eta() == nominal.eta());
    CHECK(guarded.m == 0.0);
    for (int i = 0; i < nominal.eta(); ++i) {
        CHECK(guarded.intervals[i].lb == Catch::Approx(nominal.intervals[i].lb));
        CHECK(guarded.intervals[i].ub == Catch::Approx(nominal.intervals[i].ub));
    }
    CHECK_THROWS(build_intervals_guarded(
        guarded_lut(Side::LB, stats_from_lut(lb), 0.0),
        guarded_lut(Side::UB, stats_from_lut(ub), 1.0), kPresetW, sup.vdd));
}

TEST_CASE("wider guard bands never add intervals") {
    // inflate synthetic stats with a constant sigma and compare m ladder
    const auto lb = linear_lut(Side::LB, 0.10, 0.535, 0.02);
    const auto ub = linear_lut(Side::UB, 0.10, 0.535, 0.02);
    auto lb_stats = stats_from_lut(lb);
    auto ub_stats = stats_from_lut(ub);
    for (auto* stats : {&lb_stats, &ub_stats})
        for (BoundStats& st : *stats) {
            st.sigma_lo = 0.004;
            st.sigma_hi = 0.004;
        }
    int prev = 1 << 20;
    for (double m : {0.0, 1.0, 1.5, 2.0, 2.5, 3.0}) {
        const IntervalSet set = build_intervals_guarded(
            guarded_lut(Side::LB, lb_stats, m), guarded_lut(Side::UB, ub_stats, m),
            0.010, 0.8);
        CHECK(set.eta() <= prev);
        prev = set.eta();
    }
}

TEST_CASE("build_intervals rejects non-positive window width") {
    const auto lb = linear_lut(Side::LB, 0.1, 0.5, 0.02);
    const auto ub = linear_lut(Side::UB, 0.1, 0.5, 0.02);
    CHECK_THROWS(build_intervals(lb, ub, 0.0, 0.8));
    CHECK(build_intervals(BoundsLut{}, ub, 0.01, 0.8).empty());
}
