#ifndef GCNREF_UNCERTAINTY_HPP
#define GCNREF_UNCERTAINTY_HPP

#include <vector>

#include "gcnref/volume.hpp"

namespace gcnref {

// Probabilities are clamped to [kProbEps, 1-kProbEps] before any logarithm,
// both in entropy and in the edge diversity. Stored volumes are never mutated.
inline constexpr double kProbEps = 1e-6;

// T stochastic forward passes of one probability volume.
struct StochasticPassSet {
    std::vector<Volume> passes;

    std::size_t count() const { return passes.size(); }
};

// Throws ValidationError unless all passes are probability volumes of equal dims.
void validate(const StochasticPassSet& set);

struct UncertaintyBundle {
    Volume expectation;     // probability
    Volume entropy;         // [0,1], base-2 binary entropy of the expectation
    Volume uncertain_mask;  // binary, entropy > tau
    double tau = 0.5;
};

// Voxelwise arithmetic mean of the passes, accumulated at f64.
Volume expectation(const StochasticPassSet& passes);

// Base-2 binary entropy of a probability volume; spans [0,1], maximum 1 at p=0.5.
Volume entropy(const Volume& expectation);

// out(x) = 1 iff entropy(x) > tau (strict). make_bundle checks tau's range;
// this raw threshold does not.
Volume uncertain_mask(const Volume& entropy, double tau);

// Scalar versions used by the volume ops above and by the graph weighting.
double binary_entropy(double p);

UncertaintyBundle make_bundle(const StochasticPassSet& passes, double tau);
UncertaintyBundle make_bundle(Volume expectation, double tau);
UncertaintyBundle make_bundle(Volume expectation, Volume entropy, double tau);

}  // namespace gcnref

#endif
