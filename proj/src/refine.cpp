#include "gcnref/refine.hpp"

#include <algorithm>
#include <fstream>

#include "gcnref/errors.hpp"
#include "json.hpp"

namespace gcnref {

RefineResult refine_volume(const Volume& intensity, const Volume& prediction,
                           const UncertaintyBundle& bundle, const RefineConfig& cfg,
                           const std::string& case_id) {
    RefineConfig local = cfg;
    local.derive_seeds();

    RefineResult result;
    result.graph = build_graph(intensity, prediction, bundle, local.graph);

    TrainTrace trace;
    result.model = train(result.graph, local.train, &trace);
    const auto node_pred = predict(result.model, result.graph);

    result.refined = prediction;
    result.refined.kind = VolumeKind::Binary;
    for (std::size_t i = 0; i < node_pred.size(); ++i)
        result.refined.data[result.refined.index(result.graph.coords[i])] =
            node_pred[i] == kLabelForeground ? 1.0f : 0.0f;

    std::size_t changed = 0;
    for (std::size_t i = 0; i < result.refined.data.size(); ++i)
        if (result.graph.roi.data[i] != 0.0f &&
            result.refined.data[i] != prediction.data[i])
            ++changed;

    if (local.post_lcc) result.refined = largest_component(result.refined);

    auto& m = result.manifest;
    m.case_id = case_id;
    m.config = local;
    m.node_count = result.graph.node_count();
    m.undirected_edges = result.graph.undirected_edge_count();
    m.unlabeled_nodes = static_cast<int>(
        std::count(result.graph.labels.begin(), result.graph.labels.end(), kUnlabeled));
    m.labeled_nodes = m.node_count - m.unlabeled_nodes;
    m.loss_first = trace.loss_per_epoch.front();
    m.loss_last = trace.loss_per_epoch.back();
    m.loss_min = *std::min_element(trace.loss_per_epoch.begin(), trace.loss_per_epoch.end());
    m.changed_in_roi = changed;
    m.output_foreground = result.refined.count_nonzero();
    return result;
}

RefineResult refine_volume(const Volume& intensity, const Volume& prediction,
                           const StochasticPassSet& passes, const RefineConfig& cfg,
                           const std::string& case_id) {
    return refine_volume(intensity, prediction, make_bundle(passes, cfg.graph.tau), cfg,
                         case_id);
}

void save_manifest(const RefineManifest& manifest, const std::filesystem::path& path) {
    nlohmann::json j;
    j["case_id"] = manifest.case_id;
    j["config"] = {{"tau", manifest.config.graph.tau},
                   {"k_random", manifest.config.graph.k_random},
                   {"weighting", to_string(manifest.config.graph.weighting)},
                   {"lambda", manifest.config.graph.lambda},
                   {"beta", manifest.config.graph.beta},
                   {"sigma1", manifest.config.graph.sigma1},
                   {"sigma2", manifest.config.graph.sigma2},
                   {"dilation_iterations", manifest.config.graph.dilation_iterations},
                   {"epochs", manifest.config.train.epochs},
                   {"learning_rate", manifest.config.train.learning_rate},
                   {"hidden", manifest.config.train.hidden},
                   {"post_lcc", manifest.config.post_lcc},
                   {"seed", manifest.config.seed}};
    j["node_count"] = manifest.node_count;
    j["undirected_edges"] = manifest.undirected_edges;
    j["labeled_nodes"] = manifest.labeled_nodes;
    j["unlabeled_nodes"] = manifest.unlabeled_nodes;
    j["loss_first"] = manifest.loss_first;
    j["loss_last"] = manifest.loss_last;
    j["loss_min"] = manifest.loss_min;
    j["changed_in_roi"] = manifest.changed_in_roi;
    j["output_foreground"] = manifest.output_foreground;

    std::ofstream out(path);
    if (!out) throw IoError("cannot write manifest: " + path.string());
    out << j.dump(2) << '\n';
}

}  // namespace gcnref
