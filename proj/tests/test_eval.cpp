#include <cmath>

#include "doctest.h"
#include "gcnref/errors.hpp"
#include "gcnref/eval.hpp"
#include "gcnref/rng.hpp"
#include "gcnref/volume.hpp"
#include "oracles.hpp"

using namespace gcnref;

namespace {

Volume mask_from(Dims dims, std::initializer_list<std::size_t> on) {
    Volume v(dims, VolumeKind::Binary, 0.0f);
    for (auto i : on) v.data[i] = 1.0f;
    return v;
}

}  // namespace

TEST_CASE("dice: hand values and edge cases") {
    Dims dims{4, 2, 1};
    const auto a = mask_from(dims, {0, 1, 2, 3});
    const auto b = mask_from(dims, {2, 3, 4, 5});
    // overlap 2, sizes 4 and 4 -> 2*2/8
    CHECK(dice(a, b) == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(dice(b, a) == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(dice(a, a) == 1.0);

    const auto empty = mask_from(dims, {});
    CHECK(dice(empty, empty) == 1.0);  // both empty counts as perfect agreement
    CHECK(dice(a, empty) == 0.0);
    CHECK(dice(empty, a) == 0.0);

    const auto c = mask_from(dims, {0});
    CHECK(dice(a, c) == doctest::Approx(0.4).epsilon(1e-15));  // 2*1/(4+1)

    Volume wrong({2, 2, 2}, VolumeKind::Binary, 0.0f);
    CHECK_THROWS_AS((void)dice(a, wrong), ValidationError);
}

TEST_CASE("dice is bounded and symmetric on random masks") {
    Rng rng(77);
    for (int t = 0; t < 10; ++t) {
        const auto a = oracles::random_mask({7, 6, 5}, 0.3, rng);
        const auto b = oracles::random_mask({7, 6, 5}, 0.3, rng);
        const double d = dice(a, b);
        CHECK(d >= 0.0);
        CHECK(d <= 1.0);
        CHECK(dice(b, a) == d);
    }
}

TEST_CASE("slicewise_dice skips doubly-empty slices") {
    Dims dims{2, 2, 4};
    Volume a(dims, VolumeKind::Binary, 0.0f);
    Volume b(dims, VolumeKind::Binary, 0.0f);
    // z=0: perfect match; z=1: disjoint; z=2: both empty (skipped);
    // z=3: a empty, b not (kept, dice 0)
    a.at(0, 0, 0) = b.at(0, 0, 0) = 1.0f;
    a.at(0, 0, 1) = 1.0f;
    b.at(1, 1, 1) = 1.0f;
    b.at(0, 1, 3) = 1.0f;

    const auto slices = slicewise_dice(a, b, Axis::Z);
    REQUIRE(slices.size() == 3);
    CHECK(slices[0] == 1.0);
    CHECK(slices[1] == 0.0);
    CHECK(slices[2] == 0.0);

    // all-empty volumes produce no slices at all
    Volume e1(dims, VolumeKind::Binary, 0.0f);
    Volume e2(dims, VolumeKind::Binary, 0.0f);
    CHECK(slicewise_dice(e1, e2, Axis::Z).empty());
}

TEST_CASE("slicewise_dice along each axis") {
    Dims dims{3, 4, 5};
    Rng rng(15);
    const auto a = oracles::random_mask(dims, 0.4, rng);
    const auto b = oracles::random_mask(dims, 0.4, rng);
    CHECK(slicewise_dice(a, b, Axis::X).size() <= 3);
    CHECK(slicewise_dice(a, b, Axis::Y).size() <= 4);
    CHECK(slicewise_dice(a, b, Axis::Z).size() <= 5);
    for (double d : slicewise_dice(a, b, Axis::Y)) {
        CHECK(d >= 0.0);
        CHECK(d <= 1.0);
    }
}

TEST_CASE("dice_report bundles volume and slice scores") {
    Dims dims{2, 2, 2};
    const auto a = mask_from(dims, {0, 1, 4});
    const auto b = mask_from(dims, {0, 4});
    const auto report = dice_report(a, b);
    CHECK(report.volume_dice == doctest::Approx(0.8).epsilon(1e-15));  // 2*2/(3+2)
    REQUIRE(report.slice_dice.size() == 2);
    CHECK(report.slice_dice[0] == doctest::Approx(2.0 / 3.0).epsilon(1e-12));
    CHECK(report.slice_dice[1] == 1.0);
}

TEST_CASE("ks_test: frozen reference values") {
    // quarter shift
    auto r = ks_test({1.0, 2.0, 3.0, 4.0}, {1.5, 2.5, 3.5, 4.5});
    CHECK(r.statistic == doctest::Approx(0.25).epsilon(1e-15));
    CHECK(r.p_value == doctest::Approx(0.9996332921577278).epsilon(1e-10));
    CHECK(r.n1 == 4);
    CHECK(r.n2 == 4);

    // disjoint supports: D is 1 yet tiny samples stay insignificant
    r = ks_test({0.0, 0.1, 0.2}, {5.0, 6.0, 7.0, 8.0});
    CHECK(r.statistic == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(r.p_value == doctest::Approx(0.06486426873885241).epsilon(1e-10));

    // ties across the samples
    r = ks_test({0.0, 0.5, 0.5, 1.0, 2.0}, {0.5, 1.0, 1.0, 3.0});
    CHECK(r.statistic == doctest::Approx(0.35).epsilon(1e-15));
    CHECK(r.p_value == doctest::Approx(0.9483081109654531).epsilon(1e-10));

    // identical samples
    r = ks_test({1.0, 2.0, 3.0}, {1.0, 2.0, 3.0});
    CHECK(r.statistic == 0.0);
    CHECK(r.p_value == 1.0);
}

TEST_CASE("ks_test matches the ECDF and series oracles on random data") {
    Rng rng(701);
    for (int t = 0; t < 6; ++t) {
        std::vector<double> a(150 + t * 40), b(170 + t * 30);
        for (auto& v : a) v = rng.next_double();
        for (auto& v : b) v = 0.08 + 0.9 * rng.next_double();
        const auto r = ks_test(a, b);
        CHECK(r.statistic ==
              doctest::Approx(oracles::ecdf_ks_statistic(a, b)).epsilon(1e-13));
        CHECK(r.p_value ==
              doctest::Approx(oracles::kolmogorov_series(
                                  r.statistic, a.size(), b.size()))
                  .epsilon(1e-10));
        CHECK(r.p_value >= 0.0);
        CHECK(r.p_value <= 1.0);
    }
}

TEST_CASE("ks_test separates clearly different distributions") {
    Rng rng(55);
    std::vector<double> a(400), b(350);
    for (auto& v : a) v = 0.6 + 0.3 * rng.next_double();
    for (auto& v : b) v = 0.3 + 0.4 * rng.next_double();
    const auto r = ks_test(a, b);
    CHECK(r.p_value < 0.01);
    CHECK(significance_stars(r.p_value) == "**");
}

TEST_CASE("ks_test input validation") {
    CHECK_THROWS_AS((void)ks_test({}, {1.0}), ValidationError);
    CHECK_THROWS_AS((void)ks_test({1.0}, {}), ValidationError);
}

TEST_CASE("relative_improvement: frozen values") {
    CHECK(relative_improvement(0.78, 0.75) == doctest::Approx(4.0000000000000036).epsilon(1e-14));
    CHECK(relative_improvement(0.75, 0.78) ==
          doctest::Approx(-3.8461538461538494).epsilon(1e-14));
    CHECK(relative_improvement(0.5, 0.5) == 0.0);
    CHECK_THROWS_AS((void)relative_improvement(0.5, 0.0), ValidationError);
}

TEST_CASE("significance_stars thresholds are strict") {
    CHECK(significance_stars(0.009) == "**");
    CHECK(significance_stars(0.01) == "*");    // boundary falls to the weaker tier
    CHECK(significance_stars(0.049) == "*");
    CHECK(significance_stars(0.05) == "");     // boundary is not significant
    CHECK(significance_stars(0.5) == "");
}
