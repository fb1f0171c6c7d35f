#include "gcnref/uncertainty.hpp"

#include <cmath>
#include <utility>

#include "gcnref/errors.hpp"

namespace gcnref {

void validate(const StochasticPassSet& set) {
    if (set.passes.empty()) throw ValidationError("pass set is empty");
    const Dims dims = set.passes.front().dims;
    for (const auto& pass : set.passes) {
        if (pass.dims != dims) throw ValidationError("pass dims differ across the set");
        if (pass.kind != VolumeKind::Probability)
            throw ValidationError("pass volumes must be probabilities");
        validate(pass);
    }
}

double binary_entropy(double p) {
    p = std::min(std::max(p, kProbEps), 1.0 - kProbEps);
    return -(p * std::log2(p) + (1.0 - p) * std::log2(1.0 - p));
}

Volume expectation(const StochasticPassSet& set) {
    validate(set);
    const Dims dims = set.passes.front().dims;
    const std::size_t n = dims.voxel_count();
    const double inv_t = 1.0 / static_cast<double>(set.passes.size());

    Volume out(dims, VolumeKind::Probability);
    std::vector<double> acc(n, 0.0);
    for (const auto& pass : set.passes)
        for (std::size_t i = 0; i < n; ++i) acc[i] += static_cast<double>(pass.data[i]);
    for (std::size_t i = 0; i < n; ++i)
        out.data[i] = static_cast<float>(std::min(1.0, std::max(0.0, acc[i] * inv_t)));
    return out;
}

Volume entropy(const Volume& e) {
    if (e.kind != VolumeKind::Probability)
        throw ValidationError("entropy input must be a probability volume");
    Volume out(e.dims, VolumeKind::Probability);
    for (std::size_t i = 0; i < e.data.size(); ++i)
        out.data[i] = static_cast<float>(binary_entropy(static_cast<double>(e.data[i])));
    return out;
}

Volume uncertain_mask(const Volume& h, double tau) {
    Volume out(h.dims, VolumeKind::Binary);
    for (std::size_t i = 0; i < h.data.size(); ++i)
        out.data[i] = static_cast<double>(h.data[i]) > tau ? 1.0f : 0.0f;
    return out;
}

UncertaintyBundle make_bundle(const StochasticPassSet& passes, double tau) {
    return make_bundle(expectation(passes), tau);
}

UncertaintyBundle make_bundle(Volume e, double tau) {
    Volume h = entropy(e);
    return make_bundle(std::move(e), std::move(h), tau);
}

UncertaintyBundle make_bundle(Volume e, Volume h, double tau) {
    if (!(tau >= 0.0 && tau <= 1.0)) throw ValidationError("tau must lie in [0,1]");
    if (e.dims != h.dims) throw ValidationError("expectation/entropy dims mismatch");
    UncertaintyBundle bundle;
    bundle.uncertain_mask = uncertain_mask(h, tau);
    bundle.expectation = std::move(e);
    bundle.entropy = std::move(h);
    bundle.tau = tau;
    return bundle;
}

}  // namespace gcnref
