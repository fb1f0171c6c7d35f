#include "gcnref/cli.hpp"

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "gcnref/errors.hpp"
#include "gcnref/eval.hpp"
#include "gcnref/gcn.hpp"
#include "gcnref/graph.hpp"
#include "gcnref/refine.hpp"
#include "gcnref/synth.hpp"
#include "gcnref/uncertainty.hpp"
#include "gcnref/volume.hpp"
#include "json.hpp"

namespace gcnref::cli {

namespace {

namespace fs = std::filesystem;

// Every pass lives in one directory as pass_###.f32; anything else in the
// directory (volume, prediction, sidecars) is ignored.
StochasticPassSet load_passes(const fs::path& dir) {
    if (!fs::is_directory(dir)) throw IoError("not a pass directory: " + dir.string());
    std::vector<fs::path> files;
    for (const auto& entry : fs::directory_iterator(dir)) {
        if (!entry.is_regular_file()) continue;
        const auto name = entry.path().filename().string();
        if (name.rfind("pass_", 0) == 0 && entry.path().extension() == ".f32")
            files.push_back(entry.path());
    }
    std::sort(files.begin(), files.end());
    if (files.empty())
        throw ValidationError("no pass_*.f32 files in " + dir.string());

    StochasticPassSet set;
    set.passes.reserve(files.size());
    for (const auto& file : files) set.passes.push_back(load_volume(file));
    validate(set);
    return set;
}

Axis axis_from_string(const std::string& s) {
    if (s == "x") return Axis::X;
    if (s == "y") return Axis::Y;
    if (s == "z") return Axis::Z;
    throw ValidationError("axis must be x, y or z, got '" + s + "'");
}

std::string strip(const std::string& s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string::npos) return "";
    const auto last = s.find_last_not_of(" \t\r");
    return s.substr(first, last - first + 1);
}

double config_double(const std::string& key, const std::string& value) {
    try {
        std::size_t used = 0;
        const double d = std::stod(value, &used);
        if (used != value.size()) throw std::invalid_argument(value);
        return d;
    } catch (const std::exception&) {
        throw ValidationError("config value for '" + key + "' is not a number: " + value);
    }
}

int config_int(const std::string& key, const std::string& value) {
    try {
        std::size_t used = 0;
        const int i = std::stoi(value, &used);
        if (used != value.size()) throw std::invalid_argument(value);
        return i;
    } catch (const std::exception&) {
        throw ValidationError("config value for '" + key + "' is not an integer: " + value);
    }
}

std::uint64_t config_u64(const std::string& key, const std::string& value) {
    try {
        std::size_t used = 0;
        const std::uint64_t v = std::stoull(value, &used);
        if (used != value.size()) throw std::invalid_argument(value);
        return v;
    } catch (const std::exception&) {
        throw ValidationError("config value for '" + key + "' is not an integer: " + value);
    }
}

bool config_bool(const std::string& key, const std::string& value) {
    if (value == "true" || value == "1" || value == "yes") return true;
    if (value == "false" || value == "0" || value == "no") return false;
    throw ValidationError("config value for '" + key + "' is not a boolean: " + value);
}

struct GraphFlagSet {
    GraphParams params;
    std::string weighting = "w1";

    // Shared between refine and graph-stats so both expose the same knobs.
    void attach(CLI::App* cmd) {
        cmd->add_option("--tau", params.tau, "entropy threshold for the uncertain mask");
        cmd->add_option("--k-random", params.k_random, "random in-ROI partners per node");
        cmd->add_option("--weighting", weighting, "edge weighting: w1, w2 or w3");
        cmd->add_option("--lambda", params.lambda, "diversity term coefficient");
        cmd->add_option("--beta", params.beta, "kernel terms coefficient");
        cmd->add_option("--sigma1", params.sigma1, "intensity kernel width");
        cmd->add_option("--sigma2", params.sigma2, "position kernel width, voxels");
        cmd->add_option("--dilate", params.dilation_iterations,
                        "dilation iterations on the uncertain mask");
    }

    GraphParams resolve() const {
        GraphParams p = params;
        p.weighting = weighting_from_string(weighting);
        return p;
    }
};

int run_synth(const fs::path& spec_path, const fs::path& out_dir) {
    const auto spec = load_synth_spec(spec_path);
    write_case_directory(spec, out_dir);
    std::cout << "synth: wrote " << spec.sim.passes << " passes to " << out_dir.string()
              << "\n";
    return kExitOk;
}

int run_aggregate(const fs::path& passes_dir, const fs::path& out_dir, double tau) {
    const auto passes = load_passes(passes_dir);
    const auto bundle = make_bundle(passes, tau);
    fs::create_directories(out_dir);
    save_volume(bundle.expectation, out_dir / "expectation.f32");
    save_volume(bundle.entropy, out_dir / "entropy.f32");
    save_volume(bundle.uncertain_mask, out_dir / "uncertain.u8");
    std::cout << "aggregate: " << passes.count() << " passes, "
              << bundle.uncertain_mask.count_nonzero() << " uncertain voxels at tau=" << tau
              << "\n";
    return kExitOk;
}

// key=value lines with the same names as the refine flags. Applied only to
// options absent from the command line, so explicit flags keep precedence.
void apply_refine_config(const fs::path& path, const CLI::App* cmd, RefineConfig& cfg,
                         GraphFlagSet& graph_flags, std::string& case_id) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot read config: " + path.string());

    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const std::string entry = strip(line);
        if (entry.empty() || entry[0] == '#' || entry[0] == ';') continue;
        const auto eq = entry.find('=');
        if (eq == std::string::npos)
            throw ValidationError(path.string() + ":" + std::to_string(lineno) +
                                  ": expected key=value");
        const std::string key = strip(entry.substr(0, eq));
        const std::string value = strip(entry.substr(eq + 1));
        if (cmd->count("--" + key) > 0) continue;

        auto& params = graph_flags.params;
        if (key == "tau") params.tau = config_double(key, value);
        else if (key == "k-random") params.k_random = config_int(key, value);
        else if (key == "weighting") graph_flags.weighting = value;
        else if (key == "lambda") params.lambda = config_double(key, value);
        else if (key == "beta") params.beta = config_double(key, value);
        else if (key == "sigma1") params.sigma1 = config_double(key, value);
        else if (key == "sigma2") params.sigma2 = config_double(key, value);
        else if (key == "dilate") params.dilation_iterations = config_int(key, value);
        else if (key == "epochs") cfg.train.epochs = config_int(key, value);
        else if (key == "lr") cfg.train.learning_rate = config_double(key, value);
        else if (key == "hidden") cfg.train.hidden = config_int(key, value);
        else if (key == "seed") cfg.seed = config_u64(key, value);
        else if (key == "post-lcc") cfg.post_lcc = config_bool(key, value);
        else if (key == "case-id") case_id = value;
        else throw ValidationError("unknown config key '" + key + "'");
    }
}

int run_refine(const fs::path& volume_path, const fs::path& passes_dir,
               const fs::path& prediction_path, const fs::path& out_dir,
               const RefineConfig& cfg, const GraphFlagSet& graph_flags,
               std::string case_id, bool dump_graph) {
    RefineConfig resolved = cfg;
    resolved.graph = graph_flags.resolve();

    const auto intensity = load_volume(volume_path);
    const auto prediction = load_volume(prediction_path);
    const auto passes = load_passes(passes_dir);

    if (case_id.empty()) case_id = out_dir.filename().string();
    const auto result = refine_volume(intensity, prediction, passes, resolved, case_id);

    fs::create_directories(out_dir);
    save_volume(result.refined, out_dir / "refined.u8");
    save_manifest(result.manifest, out_dir / "manifest.json");
    save_model(result.model, out_dir / "model.ckpt");
    if (dump_graph)
        save_graph(result.graph, result.manifest.config.graph, out_dir / "graph.json");

    std::cout << "refine: " << result.manifest.node_count << " nodes, "
              << result.manifest.changed_in_roi << " voxels flipped, loss "
              << result.manifest.loss_first << " -> " << result.manifest.loss_last << "\n";
    return kExitOk;
}

int run_eval(const fs::path& prediction_path, const fs::path& reference_path,
             const fs::path& baseline_path, const fs::path& json_path, Axis axis) {
    const auto prediction = load_volume(prediction_path);
    const auto reference = load_volume(reference_path);
    const auto report = dice_report(prediction, reference, axis);

    nlohmann::json j;
    j["prediction"] = prediction_path.string();
    j["reference"] = reference_path.string();
    j["volume_dice"] = report.volume_dice;
    j["slice_dice"] = report.slice_dice;

    std::cout << "eval: dice " << report.volume_dice << " over " << report.slice_dice.size()
              << " slices\n";

    if (!baseline_path.empty()) {
        const auto baseline = load_volume(baseline_path);
        const auto base_report = dice_report(baseline, reference, axis);
        const auto ks = ks_test(report.slice_dice, base_report.slice_dice);
        const double improvement =
            relative_improvement(report.volume_dice, base_report.volume_dice);

        j["baseline"] = baseline_path.string();
        j["baseline_volume_dice"] = base_report.volume_dice;
        j["relative_improvement_pct"] = improvement;
        j["ks"] = {{"statistic", ks.statistic},
                   {"p_value", ks.p_value},
                   {"stars", significance_stars(ks.p_value)},
                   {"n1", ks.n1},
                   {"n2", ks.n2}};

        std::cout << "eval: baseline dice " << base_report.volume_dice << ", improvement "
                  << improvement << "% , KS p " << ks.p_value
                  << significance_stars(ks.p_value) << "\n";
    }

    if (!json_path.empty()) {
        std::ofstream out(json_path);
        if (!out) throw IoError("cannot write report: " + json_path.string());
        out << j.dump(2) << '\n';
    }
    return kExitOk;
}

int run_graph_stats(const fs::path& volume_path, const fs::path& passes_dir,
                    const fs::path& prediction_path, const fs::path& out_dir,
                    const GraphFlagSet& graph_flags) {
    const GraphParams params = graph_flags.resolve();
    const auto intensity = load_volume(volume_path);
    const auto prediction = load_volume(prediction_path);
    const auto passes = load_passes(passes_dir);
    const auto bundle = make_bundle(passes, params.tau);
    const auto graph = build_graph(intensity, prediction, bundle, params);

    fs::create_directories(out_dir);
    save_graph(graph, params, out_dir / "graph.json");
    std::cout << "graph-stats: " << graph.node_count() << " nodes, "
              << graph.undirected_edge_count() << " undirected edges\n";
    return kExitOk;
}

}  // namespace

int run(const std::vector<std::string>& args) {
    CLI::App app{"uncertainty-guided GCN refinement of volumetric segmentations"};
    app.require_subcommand(1);

    // synth
    auto* synth = app.add_subcommand("synth", "generate a synthetic case directory");
    fs::path synth_spec, synth_out;
    synth->add_option("--spec", synth_spec, "case spec JSON")->required();
    synth->add_option("--out", synth_out, "output directory")->required();

    // aggregate
    auto* aggregate =
        app.add_subcommand("aggregate", "expectation, entropy and uncertain mask");
    fs::path agg_passes, agg_out;
    double agg_tau = 0.5;
    aggregate->add_option("--passes", agg_passes, "directory with pass_*.f32")->required();
    aggregate->add_option("--out", agg_out, "output directory")->required();
    aggregate->add_option("--tau", agg_tau, "entropy threshold");

    // refine
    auto* refine = app.add_subcommand("refine", "train a GCN on the ROI graph and stitch");
    fs::path ref_volume, ref_passes, ref_prediction, ref_out;
    refine->add_option("--volume", ref_volume, "intensity volume")->required();
    refine->add_option("--passes", ref_passes, "directory with pass_*.f32")->required();
    refine->add_option("--prediction", ref_prediction, "binary prediction")->required();
    refine->add_option("--out", ref_out, "output directory")->required();

    RefineConfig ref_cfg;
    GraphFlagSet ref_graph;
    ref_graph.attach(refine);
    refine->add_option("--epochs", ref_cfg.train.epochs, "training epochs");
    refine->add_option("--lr", ref_cfg.train.learning_rate, "Adam learning rate");
    refine->add_option("--hidden", ref_cfg.train.hidden, "hidden layer width");
    refine->add_option("--seed", ref_cfg.seed, "case seed");
    refine->add_flag("--post-lcc", ref_cfg.post_lcc,
                     "keep only the largest component of the result");
    std::string ref_case_id;
    bool ref_dump_graph = false;
    fs::path ref_config_path;
    refine->add_option("--case-id", ref_case_id, "identifier echoed in the manifest");
    refine->add_flag("--dump-graph", ref_dump_graph, "also write graph.json / graph.csr");
    refine->add_option("--config", ref_config_path, "key=value file; flags take precedence");

    // eval
    auto* eval = app.add_subcommand("eval", "dice report, optionally against a baseline");
    fs::path eval_prediction, eval_reference, eval_baseline, eval_json;
    std::string eval_axis = "z";
    eval->add_option("--prediction", eval_prediction, "binary prediction")->required();
    eval->add_option("--reference", eval_reference, "binary reference")->required();
    eval->add_option("--baseline", eval_baseline, "binary baseline prediction");
    eval->add_option("--json", eval_json, "write the report here");
    eval->add_option("--axis", eval_axis, "slice axis: x, y or z");

    // graph-stats
    auto* gstats = app.add_subcommand("graph-stats", "build the ROI graph and dump it");
    fs::path gs_volume, gs_passes, gs_prediction, gs_out;
    gstats->add_option("--volume", gs_volume, "intensity volume")->required();
    gstats->add_option("--passes", gs_passes, "directory with pass_*.f32")->required();
    gstats->add_option("--prediction", gs_prediction, "binary prediction")->required();
    gstats->add_option("--out", gs_out, "output directory")->required();
    GraphFlagSet gs_graph;
    gs_graph.attach(gstats);

    int code = kExitOk;
    synth->callback([&] { code = run_synth(synth_spec, synth_out); });
    aggregate->callback([&] { code = run_aggregate(agg_passes, agg_out, agg_tau); });
    refine->callback([&] {
        if (!ref_config_path.empty())
            apply_refine_config(ref_config_path, refine, ref_cfg, ref_graph, ref_case_id);
        code = run_refine(ref_volume, ref_passes, ref_prediction, ref_out, ref_cfg,
                          ref_graph, ref_case_id, ref_dump_graph);
    });
    eval->callback([&] {
        code = run_eval(eval_prediction, eval_reference, eval_baseline, eval_json,
                        axis_from_string(eval_axis));
    });
    gstats->callback(
        [&] { code = run_graph_stats(gs_volume, gs_passes, gs_prediction, gs_out, gs_graph); });

    try {
        // CLI11 consumes the vector back to front.
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(reversed);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? kExitOk : kExitValidation;
    } catch (const EmptyRoiError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitEmptyRoi;
    } catch (const DegenerateLabelsError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitDegenerateLabels;
    } catch (const ValidationError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitValidation;
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << "\n";
        return kExitInternal;
    }
    return code;
}

}  // namespace gcnref::cli
