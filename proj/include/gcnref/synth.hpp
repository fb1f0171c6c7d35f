#ifndef GCNREF_SYNTH_HPP
#define GCNREF_SYNTH_HPP

#include <cstdint>
#include <filesystem>
#include <vector>

#include "gcnref/uncertainty.hpp"
#include "gcnref/volume.hpp"

namespace gcnref {

// Ellipsoidal organ phantom with optional low-frequency boundary roughness.
struct PhantomSpec {
    Dims dims{48, 48, 48};
    double center[3] = {24.0, 24.0, 24.0};
    double radii[3] = {15.0, 13.0, 11.0};
    double roughness_amplitude = 0.0;  // radial perturbation, fraction of radius
    double interior_mean = 0.75;
    double exterior_mean = 0.25;
    double noise_std = 0.05;
    std::uint64_t seed = 0;
};

struct ErrorBlob {
    double center[3] = {0.0, 0.0, 0.0};
    double radius = 0.0;
    int polarity = +1;  // +1 injects a false positive, -1 carves a false negative
};

// Simulates an MCDO-equipped classifier: per-pass probability is a logistic
// of the signed distance to the corrupted boundary plus per-pass logit noise.
struct SimSpec {
    int passes = 20;
    double boundary_softness = 1.0;  // logistic width on the signed distance
    std::vector<ErrorBlob> error_blobs;
    double pass_noise_std = 0.0;
    std::uint64_t seed = 0;
};

struct Phantom {
    Volume intensity;
    Volume ground_truth;  // single 26-connected component
};

struct Simulation {
    StochasticPassSet passes;
    Volume prediction;  // expectation of the passes binarized at 0.5
};

Phantom make_phantom(const PhantomSpec& spec);

Simulation simulate_passes(const Volume& ground_truth, const SimSpec& spec);

// Signed Euclidean distance: positive inside the mask, negative outside,
// via two separable squared distance transforms.
std::vector<double> signed_distance(const Volume& mask);

// JSON (de)serialization of the synth case spec, used by the CLI.
struct SynthCaseSpec {
    PhantomSpec phantom;
    SimSpec sim;
};

SynthCaseSpec load_synth_spec(const std::filesystem::path& path);

// Writes volume.f32, gt.u8, prediction.u8, pass_***.f32 and a spec echo.
void write_case_directory(const SynthCaseSpec& spec, const std::filesystem::path& dir);

}  // namespace gcnref

#endif
