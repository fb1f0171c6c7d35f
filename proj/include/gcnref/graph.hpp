#ifndef GCNREF_GRAPH_HPP
#define GCNREF_GRAPH_HPP

#include <cstdint>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "gcnref/sparse.hpp"
#include "gcnref/uncertainty.hpp"
#include "gcnref/volume.hpp"

namespace gcnref {

enum class Weighting { W1, W2, W3 };

std::string to_string(Weighting w);
Weighting weighting_from_string(const std::string& s);

struct GraphParams {
    double tau = 0.5;
    int k_random = 16;
    Weighting weighting = Weighting::W1;
    double lambda = 0.5;
    double beta = 1.0;
    double sigma1 = 0.1;   // intensity kernel width, on [0,1]-normalized intensity
    double sigma2 = 10.0;  // position kernel width, in voxel units
    int dilation_iterations = 2;
    std::uint64_t seed = 0;
};

inline constexpr int kLabelBackground = 0;
inline constexpr int kLabelForeground = 1;
inline constexpr int kUnlabeled = -1;

// Sparse, weighted, partially labeled voxel graph. Node order is ascending
// linear voxel index, which fixes feature rows and makes runs reproducible.
struct RefinementGraph {
    std::vector<VoxelCoord> coords;
    std::vector<double> features;  // N x 3 row-major: [norm. intensity, expectation, entropy]
    std::vector<int> labels;       // 0, 1 or kUnlabeled
    CsrMatrix adjacency;           // symmetric, non-negative, no self-loops
    Volume roi;

    int node_count() const { return static_cast<int>(coords.size()); }
    std::int64_t undirected_edge_count() const { return adjacency.nnz() / 2; }
};

// ROI = dilation(uncertain mask) U (expectation binarized at 0.5).
// Throws EmptyRoiError when the union is empty.
Volume build_roi(const UncertaintyBundle& bundle, const GraphParams& params);

// Per ROI voxel: prediction label when certain, kUnlabeled when uncertain.
// Throws DegenerateLabelsError when no labeled node exists or all labeled
// nodes share one class.
std::vector<int> assign_labels(const Volume& prediction, const UncertaintyBundle& bundle,
                               const Volume& roi);

// Undirected edges (i<j): in-ROI face neighbors plus k random in-ROI partners
// per node, drawn without replacement and skipping already-connected pairs.
// Deterministic for a given seed.
std::vector<std::pair<std::int32_t, std::int32_t>> connect(
    const std::vector<VoxelCoord>& coords, const Volume& roi, int k_random,
    std::uint64_t seed);

// Symmetrized KL divergence between the binary class distributions (p, 1-p)
// and (q, 1-q), base-2 logs, probabilities clamped to [kProbEps, 1-kProbEps].
double diversity(double p_i, double p_j);

// 1 - 2^{-div}, in [0, 1); norm_div + inv_div == 1 exactly.
double norm_div(double p_i, double p_j);

// 2^{-div}, in (0, 1]; equals 1 iff the clamped probabilities match.
double inv_div(double p_i, double p_j);

// lambda * <diversity variant> + beta * [intensity kernel + position kernel].
// Intensities are expected pre-normalized to [0,1].
double edge_weight(double v_i, double v_j, double p_i, double p_j,
                   const VoxelCoord& x_i, const VoxelCoord& x_j,
                   const GraphParams& params);

RefinementGraph build_graph(const Volume& intensity, const Volume& prediction,
                            const UncertaintyBundle& bundle, const GraphParams& params);

// Graph dump for inspection and cross-language diffing: a JSON manifest with
// counts and a params echo, plus a binary CSR triple next to it.
void save_graph(const RefinementGraph& graph, const GraphParams& params,
                const std::filesystem::path& json_path);
CsrMatrix load_graph_csr(const std::filesystem::path& csr_path);

}  // namespace gcnref

#endif
