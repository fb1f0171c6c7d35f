#ifndef GCNREF_REFINE_HPP
#define GCNREF_REFINE_HPP

#include <cstdint>
#include <filesystem>
#include <string>

#include "gcnref/gcn.hpp"
#include "gcnref/graph.hpp"
#include "gcnref/rng.hpp"
#include "gcnref/uncertainty.hpp"
#include "gcnref/volume.hpp"

namespace gcnref {

struct RefineConfig {
    GraphParams graph;
    TrainConfig train;
    bool post_lcc = false;  // largest-connected-component filter on the output
    std::uint64_t seed = 0;

    // One case seed feeds every random consumer through fixed salts.
    void derive_seeds() {
        graph.seed = mix_seed(seed, 1);
        train.seed = mix_seed(seed, 2);
    }
};

struct RefineManifest {
    std::string case_id;
    RefineConfig config;
    int node_count = 0;
    std::int64_t undirected_edges = 0;
    int labeled_nodes = 0;
    int unlabeled_nodes = 0;
    double loss_first = 0.0;
    double loss_last = 0.0;
    double loss_min = 0.0;
    std::size_t changed_in_roi = 0;
    std::size_t output_foreground = 0;
};

struct RefineResult {
    Volume refined;
    RefinementGraph graph;
    GcnModel model;
    RefineManifest manifest;
};

// Every ROI voxel takes the GCN output, everything else keeps the input
// prediction; optional largest-component post-filter. Inputs are not mutated.
RefineResult refine_volume(const Volume& intensity, const Volume& prediction,
                           const UncertaintyBundle& bundle, const RefineConfig& cfg,
                           const std::string& case_id = "");

RefineResult refine_volume(const Volume& intensity, const Volume& prediction,
                           const StochasticPassSet& passes, const RefineConfig& cfg,
                           const std::string& case_id = "");

void save_manifest(const RefineManifest& manifest, const std::filesystem::path& path);

}  // namespace gcnref

#endif
