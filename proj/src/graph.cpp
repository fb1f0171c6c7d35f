#include "gcnref/graph.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>
#include <unordered_set>

#include "gcnref/errors.hpp"
#include "gcnref/rng.hpp"
#include "json.hpp"

namespace gcnref {

namespace {

using nlohmann::json;

double clamp_prob(double p) {
    return std::min(std::max(p, kProbEps), 1.0 - kProbEps);
}

std::uint64_t pack_edge(std::int32_t i, std::int32_t j) {
    if (i > j) std::swap(i, j);
    return (static_cast<std::uint64_t>(static_cast<std::uint32_t>(i)) << 32) |
           static_cast<std::uint32_t>(j);
}

void check_params(const GraphParams& p) {
    if (!(p.tau >= 0.0 && p.tau <= 1.0)) throw ValidationError("tau must lie in [0,1]");
    if (p.k_random < 0) throw ValidationError("k_random must be >= 0");
    if (p.dilation_iterations < 0)
        throw ValidationError("dilation_iterations must be >= 0");
    if (p.sigma1 <= 0.0 || p.sigma2 <= 0.0)
        throw ValidationError("kernel widths must be positive");
    if (p.beta < 0.0 || p.lambda < 0.0)
        throw ValidationError("lambda and beta must be non-negative");
}

}  // namespace

std::string to_string(Weighting w) {
    switch (w) {
        case Weighting::W1: return "w1";
        case Weighting::W2: return "w2";
        case Weighting::W3: return "w3";
    }
    throw ValidationError("unknown weighting");
}

Weighting weighting_from_string(const std::string& s) {
    if (s == "w1") return Weighting::W1;
    if (s == "w2") return Weighting::W2;
    if (s == "w3") return Weighting::W3;
    throw ValidationError("unknown weighting '" + s + "'");
}

double diversity(double p_i, double p_j) {
    // ordered so the result is bit-identical under argument swap
    if (p_i > p_j) std::swap(p_i, p_j);
    const double p = clamp_prob(p_i);
    const double q = clamp_prob(p_j);
    return (p - q) * std::log2(p / q) + (q - p) * std::log2((1.0 - p) / (1.0 - q));
}

double inv_div(double p_i, double p_j) {
    return std::exp2(-diversity(p_i, p_j));
}

double norm_div(double p_i, double p_j) {
    return 1.0 - inv_div(p_i, p_j);
}

double edge_weight(double v_i, double v_j, double p_i, double p_j,
                   const VoxelCoord& x_i, const VoxelCoord& x_j,
                   const GraphParams& params) {
    double term;
    switch (params.weighting) {
        case Weighting::W1: term = diversity(p_i, p_j); break;
        case Weighting::W2: term = norm_div(p_i, p_j); break;
        default: term = inv_div(p_i, p_j); break;
    }
    const double dv = v_i - v_j;
    const double dx = static_cast<double>(x_i.x - x_j.x);
    const double dy = static_cast<double>(x_i.y - x_j.y);
    const double dz = static_cast<double>(x_i.z - x_j.z);
    const double dist2 = dx * dx + dy * dy + dz * dz;
    return params.lambda * term +
           params.beta * (std::exp(-dv * dv / (2.0 * params.sigma1)) +
                          std::exp(-dist2 / (2.0 * params.sigma2)));
}

Volume build_roi(const UncertaintyBundle& bundle, const GraphParams& params) {
    check_params(params);
    if (bundle.expectation.dims != bundle.uncertain_mask.dims ||
        bundle.expectation.dims != bundle.entropy.dims)
        throw ValidationError("bundle dims mismatch");

    const Volume grown = dilate(bundle.uncertain_mask, params.dilation_iterations);
    const Volume confident_fg = binarize(bundle.expectation, 0.5);
    Volume roi = mask_union(grown, confident_fg);
    if (roi.count_nonzero() == 0)
        throw EmptyRoiError("ROI is empty: no uncertain voxels and no confident foreground");
    return roi;
}

std::vector<int> assign_labels(const Volume& prediction, const UncertaintyBundle& bundle,
                               const Volume& roi) {
    if (prediction.dims != roi.dims || bundle.uncertain_mask.dims != roi.dims)
        throw ValidationError("assign_labels dims mismatch");

    std::vector<int> labels;
    labels.reserve(roi.count_nonzero());
    std::size_t fg = 0, bg = 0;
    for (std::size_t i = 0; i < roi.data.size(); ++i) {
        if (roi.data[i] == 0.0f) continue;
        if (bundle.uncertain_mask.data[i] != 0.0f) {
            labels.push_back(kUnlabeled);
        } else if (prediction.data[i] != 0.0f) {
            labels.push_back(kLabelForeground);
            ++fg;
        } else {
            labels.push_back(kLabelBackground);
            ++bg;
        }
    }
    if (fg == 0 || bg == 0)
        throw DegenerateLabelsError(
            "labeled nodes must cover both classes (foreground=" + std::to_string(fg) +
            ", background=" + std::to_string(bg) + ")");
    return labels;
}

std::vector<std::pair<std::int32_t, std::int32_t>> connect(
    const std::vector<VoxelCoord>& coords, const Volume& roi, int k_random,
    std::uint64_t seed) {
    const auto n = static_cast<std::int32_t>(coords.size());
    if (n == 0) throw ValidationError("connect needs at least one node");

    std::vector<std::int32_t> node_of(roi.dims.voxel_count(), -1);
    for (std::int32_t i = 0; i < n; ++i) node_of[roi.index(coords[i])] = i;

    std::vector<std::pair<std::int32_t, std::int32_t>> edges;
    std::unordered_set<std::uint64_t> present;
    present.reserve(static_cast<std::size_t>(n) * (k_random + 4));

    // face neighbors: +x/+y/+z point at larger linear indices, so i < j holds
    const int steps[3][3] = {{1, 0, 0}, {0, 1, 0}, {0, 0, 1}};
    for (std::int32_t i = 0; i < n; ++i) {
        const VoxelCoord c = coords[i];
        for (const auto& s : steps) {
            const int x = c.x + s[0], y = c.y + s[1], z = c.z + s[2];
            if (!roi.in_bounds(x, y, z)) continue;
            const std::int32_t j = node_of[roi.index(x, y, z)];
            if (j < 0) continue;
            edges.emplace_back(i, j);
            present.insert(pack_edge(i, j));
        }
    }

    if (k_random > 0 && n > 1) {
        Rng rng(seed);
        if (k_random >= n - 1) {
            // fewer peers than requested partners: connect every missing pair
            for (std::int32_t i = 0; i < n; ++i)
                for (std::int32_t j = i + 1; j < n; ++j)
                    if (present.insert(pack_edge(i, j)).second) edges.emplace_back(i, j);
        } else {
            for (std::int32_t i = 0; i < n; ++i) {
                int accepted = 0;
                // rejection bound only guards against near-complete rows
                int attempts = 64 * k_random + 256;
                while (accepted < k_random && attempts-- > 0) {
                    const auto j = static_cast<std::int32_t>(
                        rng.next_index(static_cast<std::uint64_t>(n)));
                    if (j == i) continue;
                    if (!present.insert(pack_edge(i, j)).second) continue;
                    edges.emplace_back(std::min(i, j), std::max(i, j));
                    ++accepted;
                }
            }
        }
    }
    return edges;
}

RefinementGraph build_graph(const Volume& intensity, const Volume& prediction,
                            const UncertaintyBundle& bundle, const GraphParams& params) {
    check_params(params);
    if (intensity.dims != prediction.dims || intensity.dims != bundle.expectation.dims)
        throw ValidationError("build_graph dims mismatch");

    RefinementGraph graph;
    graph.roi = build_roi(bundle, params);

    const std::size_t voxels = graph.roi.data.size();
    graph.coords.reserve(graph.roi.count_nonzero());
    for (std::size_t i = 0; i < voxels; ++i)
        if (graph.roi.data[i] != 0.0f) graph.coords.push_back(graph.roi.coord(i));

    graph.labels = assign_labels(prediction, bundle, graph.roi);

    // intensity min-max over the ROI; a flat window normalizes to 0.5
    float imin = std::numeric_limits<float>::max();
    float imax = std::numeric_limits<float>::lowest();
    for (const auto& c : graph.coords) {
        imin = std::min(imin, intensity.at(c));
        imax = std::max(imax, intensity.at(c));
    }
    const double span = static_cast<double>(imax) - static_cast<double>(imin);

    const auto n = graph.coords.size();
    graph.features.resize(n * 3);
    for (std::size_t i = 0; i < n; ++i) {
        const auto idx = graph.roi.index(graph.coords[i]);
        const double raw = static_cast<double>(intensity.data[idx]);
        graph.features[i * 3 + 0] =
            span > 0.0 ? (raw - static_cast<double>(imin)) / span : 0.5;
        graph.features[i * 3 + 1] = static_cast<double>(bundle.expectation.data[idx]);
        graph.features[i * 3 + 2] = static_cast<double>(bundle.entropy.data[idx]);
    }

    const auto edges = connect(graph.coords, graph.roi, params.k_random, params.seed);
    std::vector<double> weights(edges.size());
    for (std::size_t e = 0; e < edges.size(); ++e) {
        const auto [i, j] = edges[e];
        weights[e] = edge_weight(graph.features[static_cast<std::size_t>(i) * 3],
                                 graph.features[static_cast<std::size_t>(j) * 3],
                                 graph.features[static_cast<std::size_t>(i) * 3 + 1],
                                 graph.features[static_cast<std::size_t>(j) * 3 + 1],
                                 graph.coords[static_cast<std::size_t>(i)],
                                 graph.coords[static_cast<std::size_t>(j)], params);
    }
    graph.adjacency =
        CsrMatrix::from_undirected_edges(static_cast<int>(n), edges, weights);
    return graph;
}

void save_graph(const RefinementGraph& graph, const GraphParams& params,
                const std::filesystem::path& json_path) {
    auto csr_path = json_path;
    csr_path.replace_extension(".csr");

    std::size_t fg = 0, bg = 0, un = 0;
    for (int l : graph.labels) {
        if (l == kLabelForeground) ++fg;
        else if (l == kLabelBackground) ++bg;
        else ++un;
    }

    json j;
    j["nodes"] = graph.node_count();
    j["undirected_edges"] = graph.undirected_edge_count();
    j["labeled_foreground"] = fg;
    j["labeled_background"] = bg;
    j["unlabeled"] = un;
    j["csr"] = csr_path.filename().string();
    j["params"] = {{"tau", params.tau},
                   {"k_random", params.k_random},
                   {"weighting", to_string(params.weighting)},
                   {"lambda", params.lambda},
                   {"beta", params.beta},
                   {"sigma1", params.sigma1},
                   {"sigma2", params.sigma2},
                   {"dilation_iterations", params.dilation_iterations},
                   {"seed", params.seed}};
    std::ofstream out(json_path);
    if (!out) throw IoError("cannot write graph manifest: " + json_path.string());
    out << j.dump(2) << '\n';

    std::ofstream bin(csr_path, std::ios::binary);
    if (!bin) throw IoError("cannot write graph CSR: " + csr_path.string());
    const char magic[4] = {'G', 'C', 'S', 'R'};
    bin.write(magic, 4);
    const std::int64_t rows = graph.adjacency.rows;
    const std::int64_t nnz = graph.adjacency.nnz();
    bin.write(reinterpret_cast<const char*>(&rows), sizeof(rows));
    bin.write(reinterpret_cast<const char*>(&nnz), sizeof(nnz));
    bin.write(reinterpret_cast<const char*>(graph.adjacency.row_offsets.data()),
              static_cast<std::streamsize>(graph.adjacency.row_offsets.size() *
                                           sizeof(std::int64_t)));
    bin.write(reinterpret_cast<const char*>(graph.adjacency.col_indices.data()),
              static_cast<std::streamsize>(graph.adjacency.col_indices.size() *
                                           sizeof(std::int32_t)));
    bin.write(reinterpret_cast<const char*>(graph.adjacency.values.data()),
              static_cast<std::streamsize>(graph.adjacency.values.size() * sizeof(double)));
    if (!bin) throw IoError("short write on " + csr_path.string());
}

CsrMatrix load_graph_csr(const std::filesystem::path& csr_path) {
    std::ifstream in(csr_path, std::ios::binary);
    if (!in) throw IoError("cannot open graph CSR: " + csr_path.string());
    char magic[4];
    in.read(magic, 4);
    if (!in || std::memcmp(magic, "GCSR", 4) != 0)
        throw ValidationError("not a graph CSR file: " + csr_path.string());
    std::int64_t rows = 0, nnz = 0;
    in.read(reinterpret_cast<char*>(&rows), sizeof(rows));
    in.read(reinterpret_cast<char*>(&nnz), sizeof(nnz));
    if (!in || rows < 0 || nnz < 0)
        throw ValidationError("corrupt graph CSR header: " + csr_path.string());

    CsrMatrix m;
    m.rows = m.cols = static_cast<int>(rows);
    m.row_offsets.resize(static_cast<std::size_t>(rows) + 1);
    m.col_indices.resize(static_cast<std::size_t>(nnz));
    m.values.resize(static_cast<std::size_t>(nnz));
    in.read(reinterpret_cast<char*>(m.row_offsets.data()),
            static_cast<std::streamsize>(m.row_offsets.size() * sizeof(std::int64_t)));
    in.read(reinterpret_cast<char*>(m.col_indices.data()),
            static_cast<std::streamsize>(m.col_indices.size() * sizeof(std::int32_t)));
    in.read(reinterpret_cast<char*>(m.values.data()),
            static_cast<std::streamsize>(m.values.size() * sizeof(double)));
    if (!in) throw IoError("short read on " + csr_path.string());
    validate(m);
    return m;
}

}  // namespace gcnref
