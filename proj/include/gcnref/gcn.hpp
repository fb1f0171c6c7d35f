#ifndef GCNREF_GCN_HPP
#define GCNREF_GCN_HPP

#include <cstdint>
#include <filesystem>
#include <vector>

#include "gcnref/graph.hpp"
#include "gcnref/sparse.hpp"

namespace gcnref {

inline constexpr int kFeatureCount = 3;

// Two-layer GCN: sigmoid(A_hat * relu(A_hat * X * W0) * W1).
struct GcnModel {
    int hidden = 32;
    std::vector<double> w0;  // kFeatureCount x hidden, row-major
    std::vector<double> w1;  // hidden x 1
};

struct TrainConfig {
    int epochs = 200;
    double learning_rate = 1e-2;
    double adam_beta1 = 0.9;
    double adam_beta2 = 0.999;
    double adam_eps = 1e-8;
    int hidden = 32;
    std::uint64_t seed = 0;
};

struct TrainTrace {
    std::vector<double> loss_per_epoch;
};

// A_hat = D~^{-1/2} (A + I) D~^{-1/2} with D~ the row sums of A + I.
// Requires a symmetric input with empty diagonal and non-negative weights.
CsrMatrix renormalize_adjacency(const CsrMatrix& a);

// Returns per-node probabilities; x is N x kFeatureCount row-major.
std::vector<double> forward(const GcnModel& model, const CsrMatrix& a_hat,
                            const std::vector<double>& x);

// Pre-sigmoid outputs, used by the loss/gradient path.
std::vector<double> forward_logits(const GcnModel& model, const CsrMatrix& a_hat,
                                   const std::vector<double>& x);

// Mean binary cross-entropy (natural log) over labeled nodes, probabilities
// clamped away from 0 and 1. Unlabeled nodes never contribute.
double masked_bce(const std::vector<double>& probs, const std::vector<int>& labels);

// Same quantity evaluated from logits in overflow-safe form; this is the
// exact function the analytic gradients differentiate.
double masked_bce_from_logits(const std::vector<double>& logits,
                              const std::vector<int>& labels);

struct Gradients {
    std::vector<double> w0;
    std::vector<double> w1;
};

// Exact analytic gradients of masked_bce_from_logits(forward_logits(...)).
// ReLU subgradient at 0 is 0.
Gradients gradients(const GcnModel& model, const CsrMatrix& a_hat,
                    const std::vector<double>& x, const std::vector<int>& labels);

// Glorot-uniform weights for both layers, deterministic in the seed.
GcnModel init_model(int hidden, std::uint64_t seed);

// Full-batch Adam for cfg.epochs, Glorot-uniform init from cfg.seed.
// Deterministic; returns the final-epoch model.
GcnModel train(const RefinementGraph& graph, const TrainConfig& cfg,
               TrainTrace* trace = nullptr);

// Node label = 1 iff forward probability > 0.5 (strict).
std::vector<int> predict(const GcnModel& model, const RefinementGraph& graph);

// Checkpoint: dims header plus row-major f64 weights, little endian.
void save_model(const GcnModel& model, const std::filesystem::path& path);
GcnModel load_model(const std::filesystem::path& path);

}  // namespace gcnref

#endif
