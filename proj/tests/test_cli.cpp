#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "doctest.h"
#include "gcnref/cli.hpp"
#include "gcnref/eval.hpp"
#include "gcnref/volume.hpp"

using namespace gcnref;
namespace fs = std::filesystem;

namespace {

fs::path fresh_dir(const char* tag) {
    auto dir = fs::temp_directory_path() / (std::string("gcnref_cli_") + tag);
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

void write_small_spec(const fs::path& path, const char* blob_extra = "") {
    std::ofstream out(path);
    out << R"({
      "phantom": {
        "dims": [22, 22, 22],
        "center": [11.0, 11.0, 11.0],
        "radii": [7.0, 6.5, 6.0],
        "interior_mean": 0.75,
        "exterior_mean": 0.25,
        "noise_std": 0.05,
        "seed": 41
      },
      "sim": {
        "passes": 8,
        "boundary_softness": 1.2,
        "pass_noise_std": 1.5,
        "seed": 42)"
        << blob_extra << R"(
      }
    })";
}

std::string slurp(const fs::path& path) {
    std::ifstream in(path);
    std::stringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

// Builds a synth case once; most CLI tests run on top of it.
const fs::path& shared_case() {
    static fs::path dir = [] {
        auto d = fresh_dir("shared_case");
        write_small_spec(d / "spec.json",
                         R"(,
        "error_blobs": [{"center": [3.5, 3.5, 11.0], "radius": 2.5, "polarity": 1}])");
        REQUIRE(cli::run({"synth", "--spec", (d / "spec.json").string(), "--out",
                          (d / "case").string()}) == cli::kExitOk);
        return d;
    }();
    return dir;
}

}  // namespace

TEST_CASE("cli: help and argument errors") {
    CHECK(cli::run({"--help"}) == cli::kExitOk);
    CHECK(cli::run({}) == cli::kExitValidation);
    CHECK(cli::run({"frobnicate"}) == cli::kExitValidation);
    CHECK(cli::run({"refine"}) == cli::kExitValidation);  // required flags missing
    CHECK(cli::run({"eval", "--prediction", "/no/such.u8", "--reference",
                    "/no/such2.u8"}) == cli::kExitValidation);
}

TEST_CASE("cli synth: writes a loadable case directory") {
    const auto& dir = shared_case();
    const auto case_dir = dir / "case";
    CHECK(fs::exists(case_dir / "volume.f32"));
    CHECK(fs::exists(case_dir / "gt.u8"));
    CHECK(fs::exists(case_dir / "prediction.u8"));
    CHECK(fs::exists(case_dir / "pass_000.f32"));
    CHECK(fs::exists(case_dir / "pass_007.f32"));
    CHECK(fs::exists(case_dir / "spec.json"));

    const auto vol = load_volume(case_dir / "volume.f32");
    CHECK(vol.dims == Dims{22, 22, 22});
    const auto gt = load_volume(case_dir / "gt.u8");
    CHECK(gt.count_nonzero() > 0);
}

TEST_CASE("cli aggregate: expectation, entropy and uncertain mask") {
    const auto& dir = shared_case();
    const auto out = dir / "agg";
    CHECK(cli::run({"aggregate", "--passes", (dir / "case").string(), "--out",
                    out.string(), "--tau", "0.5"}) == cli::kExitOk);

    const auto e = load_volume(out / "expectation.f32");
    const auto h = load_volume(out / "entropy.f32");
    const auto u = load_volume(out / "uncertain.u8");
    CHECK(e.kind == VolumeKind::Probability);
    CHECK(u.kind == VolumeKind::Binary);
    CHECK(e.dims == Dims{22, 22, 22});
    CHECK(u.count_nonzero() > 0);

    // spot-check the aggregation against a manual mean of the passes
    std::vector<Volume> passes;
    for (int t = 0; t < 8; ++t) {
        char name[32];
        std::snprintf(name, sizeof(name), "pass_%03d.f32", t);
        passes.push_back(load_volume(dir / "case" / name));
    }
    const std::size_t probe = e.dims.index(11, 11, 11);
    double mean = 0.0;
    for (const auto& p : passes) mean += p.data[probe];
    mean /= 8.0;
    CHECK(e.data[probe] == doctest::Approx(mean).epsilon(1e-6));
    CHECK(h.data[probe] >= 0.0f);
    CHECK(h.data[probe] <= 1.0f);
}

TEST_CASE("cli refine: end-to-end run with artifacts") {
    const auto& dir = shared_case();
    const auto case_dir = dir / "case";
    const auto out = dir / "refined";

    const int code = cli::run({"refine",
                               "--volume", (case_dir / "volume.f32").string(),
                               "--passes", case_dir.string(),
                               "--prediction", (case_dir / "prediction.u8").string(),
                               "--out", out.string(),
                               "--epochs", "60", "--hidden", "8", "--seed", "11"});
    CHECK(code == cli::kExitOk);
    CHECK(fs::exists(out / "refined.u8"));
    CHECK(fs::exists(out / "manifest.json"));
    CHECK(fs::exists(out / "model.ckpt"));

    const auto refined = load_volume(out / "refined.u8");
    CHECK(refined.kind == VolumeKind::Binary);
    CHECK(refined.dims == Dims{22, 22, 22});

    // identical invocation reproduces the refined volume bit for bit
    const auto out2 = dir / "refined_again";
    CHECK(cli::run({"refine",
                    "--volume", (case_dir / "volume.f32").string(),
                    "--passes", case_dir.string(),
                    "--prediction", (case_dir / "prediction.u8").string(),
                    "--out", out2.string(),
                    "--epochs", "60", "--hidden", "8", "--seed", "11"}) == cli::kExitOk);
    CHECK(slurp(out / "refined.u8") == slurp(out2 / "refined.u8"));

    const auto manifest = slurp(out / "manifest.json");
    CHECK(manifest.find("\"node_count\"") != std::string::npos);
    CHECK(manifest.find("\"tau\": 0.5") != std::string::npos);
}

TEST_CASE("cli refine: config file values and flag overrides") {
    const auto& dir = shared_case();
    const auto case_dir = dir / "case";

    {
        std::ofstream cfg(dir / "run.cfg");
        cfg << "tau=0.3\n"
            << "epochs=40\n"
            << "hidden=8\n"
            << "seed=11\n";
    }

    const auto out = dir / "cfg_out";
    CHECK(cli::run({"refine",
                    "--volume", (case_dir / "volume.f32").string(),
                    "--passes", case_dir.string(),
                    "--prediction", (case_dir / "prediction.u8").string(),
                    "--out", out.string(),
                    "--config", (dir / "run.cfg").string()}) == cli::kExitOk);
    auto manifest = slurp(out / "manifest.json");
    CHECK(manifest.find("\"tau\": 0.3") != std::string::npos);
    CHECK(manifest.find("\"epochs\": 40") != std::string::npos);

    // an explicit flag wins over the config file
    const auto out2 = dir / "cfg_out2";
    CHECK(cli::run({"refine",
                    "--volume", (case_dir / "volume.f32").string(),
                    "--passes", case_dir.string(),
                    "--prediction", (case_dir / "prediction.u8").string(),
                    "--out", out2.string(),
                    "--config", (dir / "run.cfg").string(),
                    "--tau", "0.8"}) == cli::kExitOk);
    manifest = slurp(out2 / "manifest.json");
    CHECK(manifest.find("\"tau\": 0.8") != std::string::npos);
}

TEST_CASE("cli eval: reports dice and writes JSON") {
    const auto& dir = shared_case();
    const auto case_dir = dir / "case";
    const auto report_path = dir / "eval.json";

    CHECK(cli::run({"eval",
                    "--prediction", (case_dir / "prediction.u8").string(),
                    "--reference", (case_dir / "gt.u8").string(),
                    "--json", report_path.string()}) == cli::kExitOk);
    const auto report = slurp(report_path);
    CHECK(report.find("\"volume_dice\"") != std::string::npos);
    CHECK(report.find("\"slice_dice\"") != std::string::npos);

    // with a baseline the report adds the comparison block
    CHECK(cli::run({"eval",
                    "--prediction", (case_dir / "prediction.u8").string(),
                    "--baseline", (case_dir / "prediction.u8").string(),
                    "--reference", (case_dir / "gt.u8").string(),
                    "--json", report_path.string()}) == cli::kExitOk);
    const auto compare = slurp(report_path);
    CHECK(compare.find("\"relative_improvement_pct\"") != std::string::npos);
    CHECK(compare.find("\"ks\"") != std::string::npos);
    // identical inputs: zero improvement, D = 0, p = 1
    CHECK(compare.find("\"statistic\": 0.0") != std::string::npos);
}

TEST_CASE("cli graph-stats: counts and dump") {
    const auto& dir = shared_case();
    const auto case_dir = dir / "case";
    const auto out = dir / "gstats";

    CHECK(cli::run({"graph-stats",
                    "--volume", (case_dir / "volume.f32").string(),
                    "--passes", case_dir.string(),
                    "--prediction", (case_dir / "prediction.u8").string(),
                    "--out", out.string()}) == cli::kExitOk);
    CHECK(fs::exists(out / "graph.json"));
    CHECK(fs::exists(out / "graph.csr"));
    const auto stats = slurp(out / "graph.json");
    CHECK(stats.find("\"nodes\"") != std::string::npos);
    CHECK(stats.find("\"undirected_edges\"") != std::string::npos);
}

TEST_CASE("cli exit codes for graph degeneracies") {
    const auto dir = fresh_dir("degenerate");

    // all-background passes: expectation 0 everywhere -> empty ROI
    Dims dims{8, 8, 8};
    for (int t = 0; t < 3; ++t) {
        char name[32];
        std::snprintf(name, sizeof(name), "pass_%03d.f32", t);
        save_volume(Volume(dims, VolumeKind::Probability, 0.0f), dir / name);
    }
    save_volume(Volume(dims, VolumeKind::Intensity, 1.0f), dir / "volume.f32");
    save_volume(Volume(dims, VolumeKind::Binary, 0.0f), dir / "prediction.u8");
    CHECK(cli::run({"refine",
                    "--volume", (dir / "volume.f32").string(),
                    "--passes", dir.string(),
                    "--prediction", (dir / "prediction.u8").string(),
                    "--out", (dir / "out").string()}) == cli::kExitEmptyRoi);

    // all-foreground passes: ROI is the whole grid, every label foreground
    const auto dir2 = fresh_dir("degenerate2");
    for (int t = 0; t < 3; ++t) {
        char name[32];
        std::snprintf(name, sizeof(name), "pass_%03d.f32", t);
        save_volume(Volume(dims, VolumeKind::Probability, 1.0f), dir2 / name);
    }
    save_volume(Volume(dims, VolumeKind::Intensity, 1.0f), dir2 / "volume.f32");
    save_volume(Volume(dims, VolumeKind::Binary, 1.0f), dir2 / "prediction.u8");
    CHECK(cli::run({"refine",
                    "--volume", (dir2 / "volume.f32").string(),
                    "--passes", dir2.string(),
                    "--prediction", (dir2 / "prediction.u8").string(),
                    "--out", (dir2 / "out").string()}) == cli::kExitDegenerateLabels);
}

TEST_CASE("cli validation failures exit with code 2") {
    const auto dir = fresh_dir("badargs");
    write_small_spec(dir / "spec.json");

    // malformed spec file
    {
        std::ofstream bad(dir / "broken.json");
        bad << "{";
    }
    CHECK(cli::run({"synth", "--spec", (dir / "broken.json").string(), "--out",
                    (dir / "x").string()}) == cli::kExitValidation);

    // tau outside its range
    const auto& shared = shared_case();
    CHECK(cli::run({"aggregate", "--passes", (shared / "case").string(), "--out",
                    (dir / "agg").string(), "--tau", "1.5"}) == cli::kExitValidation);
}
