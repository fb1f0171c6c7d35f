#include <cmath>

#include "doctest.h"
#include "gcnref/errors.hpp"
#include "gcnref/rng.hpp"
#include "gcnref/uncertainty.hpp"

using namespace gcnref;

namespace {

StochasticPassSet constant_passes(Dims dims, std::size_t count, float value) {
    StochasticPassSet set;
    for (std::size_t t = 0; t < count; ++t)
        set.passes.emplace_back(dims, VolumeKind::Probability, value);
    return set;
}

}  // namespace

TEST_CASE("binary_entropy: frozen reference values") {
    // H(p) = -p*log2(p) - (1-p)*log2(1-p), p clamped to [1e-6, 1-1e-6]
    CHECK(binary_entropy(0.5) == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(binary_entropy(0.25) == doctest::Approx(0.8112781244591328).epsilon(1e-14));
    // at the clamp boundary the value is tiny but strictly positive
    CHECK(binary_entropy(0.0) == doctest::Approx(2.137426288890686e-05).epsilon(1e-12));
    CHECK(binary_entropy(1.0) == doctest::Approx(2.137426288890686e-05).epsilon(1e-12));
    CHECK(binary_entropy(0.0) > 0.0);
    CHECK(binary_entropy(1e-7) == binary_entropy(0.0));  // clamp flattens below eps
}

TEST_CASE("binary_entropy: symmetry and range over a grid") {
    for (int i = 0; i <= 1000; ++i) {
        const double p = i / 1000.0;
        const double h = binary_entropy(p);
        CHECK(h >= 0.0);
        CHECK(h <= 1.0);
        CHECK(h == doctest::Approx(binary_entropy(1.0 - p)).epsilon(1e-12));
    }
    // maximum is at p = 0.5 and nowhere else on the grid
    CHECK(binary_entropy(0.499) < binary_entropy(0.5));
    CHECK(binary_entropy(0.501) < binary_entropy(0.5));
}

TEST_CASE("expectation is the voxelwise mean over passes") {
    StochasticPassSet set;
    Dims dims{2, 1, 1};
    for (float v : {0.0f, 0.25f, 0.5f, 1.0f}) {
        Volume pass(dims, VolumeKind::Probability);
        pass.data = {v, 1.0f - v};
        set.passes.push_back(pass);
    }
    const auto e = expectation(set);
    CHECK(e.kind == VolumeKind::Probability);
    CHECK(e.data[0] == doctest::Approx(0.4375).epsilon(1e-12));
    CHECK(e.data[1] == doctest::Approx(0.5625).epsilon(1e-12));
}

TEST_CASE("expectation accumulates in double precision") {
    // 20 passes of 0.1f: float32 running sum would drift; the mean must stay
    // within one float ulp of 0.1f
    const auto set = constant_passes({4, 4, 4}, 20, 0.1f);
    const auto e = expectation(set);
    for (float v : e.data) CHECK(v == 0.1f);
}

TEST_CASE("expectation input validation") {
    StochasticPassSet empty;
    CHECK_THROWS_AS((void)expectation(empty), ValidationError);

    StochasticPassSet mixed = constant_passes({2, 2, 2}, 3, 0.5f);
    mixed.passes.emplace_back(Dims{2, 2, 1}, VolumeKind::Probability, 0.5f);
    CHECK_THROWS_AS((void)expectation(mixed), ValidationError);

    StochasticPassSet bad_kind = constant_passes({2, 2, 2}, 2, 0.5f);
    bad_kind.passes[1].kind = VolumeKind::Intensity;
    CHECK_THROWS_AS((void)expectation(bad_kind), ValidationError);
}

TEST_CASE("entropy map and uncertain mask") {
    Volume e({4, 1, 1}, VolumeKind::Probability);
    e.data = {0.5f, 0.0f, 1.0f, 0.9f};
    const auto h = entropy(e);
    CHECK(h.data[0] == doctest::Approx(1.0).epsilon(1e-6));
    CHECK(h.data[1] == doctest::Approx(2.137426288890686e-05).epsilon(1e-6));
    CHECK(h.data[2] == doctest::Approx(2.137426288890686e-05).epsilon(1e-6));
    CHECK(h.data[3] == doctest::Approx(0.4689955935892812).epsilon(1e-6));

    // strict threshold: H == tau stays certain
    const auto mask = uncertain_mask(h, 1.0);
    CHECK(mask.count_nonzero() == 0);
    const auto loose = uncertain_mask(h, 0.4);
    CHECK(loose.count_nonzero() == 2);
    CHECK(loose.data[0] == 1.0f);
    CHECK(loose.data[3] == 1.0f);
}

TEST_CASE("uncertain mask shrinks as tau grows") {
    Rng rng(31);
    Volume e({8, 8, 8}, VolumeKind::Probability);
    for (auto& v : e.data) v = static_cast<float>(rng.next_double());
    const auto h = entropy(e);
    std::size_t prev = e.dims.voxel_count() + 1;
    for (double tau : {0.001, 0.3, 0.5, 0.8, 0.999}) {
        const auto count = uncertain_mask(h, tau).count_nonzero();
        CHECK(count <= prev);
        prev = count;
    }
}

TEST_CASE("make_bundle ties the pieces together") {
    StochasticPassSet set;
    Dims dims{3, 1, 1};
    Volume a(dims, VolumeKind::Probability);
    Volume b(dims, VolumeKind::Probability);
    a.data = {1.0f, 0.5f, 0.0f};
    b.data = {1.0f, 0.9f, 0.0f};
    set.passes = {a, b};

    const auto bundle = make_bundle(set, 0.5);
    CHECK(bundle.tau == 0.5);
    CHECK(bundle.expectation.data[0] == 1.0f);
    CHECK(bundle.expectation.data[1] == doctest::Approx(0.7).epsilon(1e-7));
    CHECK(bundle.uncertain_mask.data[0] == 0.0f);  // confident foreground
    CHECK(bundle.uncertain_mask.data[1] == 1.0f);  // H(0.7) ~ 0.88 > 0.5
    CHECK(bundle.uncertain_mask.data[2] == 0.0f);  // confident background

    CHECK_THROWS_AS((void)make_bundle(set, -0.1), ValidationError);
    CHECK_THROWS_AS((void)make_bundle(set, 1.1), ValidationError);
}
