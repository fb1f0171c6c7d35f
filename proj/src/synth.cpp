#include "gcnref/synth.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>

#include "gcnref/errors.hpp"
#include "gcnref/rng.hpp"
#include "json.hpp"

namespace gcnref {

namespace {

using nlohmann::json;

constexpr double kInf = 1e20;

void check_phantom(const PhantomSpec& spec) {
    if (spec.dims.nx <= 0 || spec.dims.ny <= 0 || spec.dims.nz <= 0)
        throw ValidationError("phantom dims must be positive");
    for (double r : spec.radii)
        if (r <= 0.0) throw ValidationError("phantom radii must be positive");
    if (spec.roughness_amplitude < 0.0 || spec.roughness_amplitude >= 1.0)
        throw ValidationError("roughness amplitude must lie in [0,1)");
    if (spec.noise_std < 0.0) throw ValidationError("noise std must be >= 0");
}

void check_sim(const SimSpec& spec) {
    if (spec.passes < 1) throw ValidationError("simulation needs at least one pass");
    if (spec.passes > 999) throw ValidationError("at most 999 passes are supported");
    if (spec.boundary_softness <= 0.0)
        throw ValidationError("boundary softness must be positive");
    if (spec.pass_noise_std < 0.0) throw ValidationError("pass noise std must be >= 0");
    for (const auto& blob : spec.error_blobs) {
        if (blob.radius < 0.0) throw ValidationError("blob radius must be >= 0");
        if (blob.polarity != 1 && blob.polarity != -1)
            throw ValidationError("blob polarity must be +1 or -1");
    }
}

// Smooth direction-dependent boundary perturbation: a fixed small bank of
// seeded sinusoids over the unit direction, normalized into [-1, 1]. Keeping
// the perturbation a function of direction alone keeps the shape star-convex,
// hence 26-connected.
struct Roughness {
    double freq[4][3];
    double phase[4];

    explicit Roughness(std::uint64_t seed) {
        Rng rng(mix_seed(seed, 53));
        for (auto& f : freq)
            for (double& c : f) c = rng.uniform(-2.0, 2.0);
        for (double& p : phase) p = rng.uniform(0.0, 6.283185307179586);
    }

    double at(double ux, double uy, double uz) const {
        double s = 0.0;
        for (int k = 0; k < 4; ++k)
            s += std::sin(freq[k][0] * ux + freq[k][1] * uy + freq[k][2] * uz + phase[k]);
        return s / 4.0;
    }
};

// 1D squared distance transform (lower envelope of parabolas)
void dt1d(std::vector<double>& f, std::vector<int>& v, std::vector<double>& z,
          std::vector<double>& out, int n) {
    int k = 0;
    v[0] = 0;
    z[0] = -kInf;
    z[1] = kInf;
    for (int q = 1; q < n; ++q) {
        double s = ((f[q] + static_cast<double>(q) * q) -
                    (f[v[k]] + static_cast<double>(v[k]) * v[k])) /
                   (2.0 * q - 2.0 * v[k]);
        while (s <= z[k]) {
            --k;
            s = ((f[q] + static_cast<double>(q) * q) -
                 (f[v[k]] + static_cast<double>(v[k]) * v[k])) /
                (2.0 * q - 2.0 * v[k]);
        }
        ++k;
        v[k] = q;
        z[k] = s;
        z[k + 1] = kInf;
    }
    k = 0;
    for (int q = 0; q < n; ++q) {
        while (z[k + 1] < q) ++k;
        const double dq = q - v[k];
        out[q] = dq * dq + f[v[k]];
    }
}

// squared Euclidean distance to the nearest seed voxel, three separable passes
std::vector<double> squared_edt(const Volume& mask, bool seeds_are_foreground) {
    const Dims d = mask.dims;
    std::vector<double> dist(d.voxel_count());
    for (std::size_t i = 0; i < dist.size(); ++i) {
        const bool fg = mask.data[i] != 0.0f;
        dist[i] = (fg == seeds_are_foreground) ? 0.0 : kInf;
    }

    const int nmax = std::max({d.nx, d.ny, d.nz});
    std::vector<double> f(nmax), out(nmax), z(nmax + 1);
    std::vector<int> v(nmax);

    for (int zz = 0; zz < d.nz; ++zz)
        for (int y = 0; y < d.ny; ++y) {
            for (int x = 0; x < d.nx; ++x) f[x] = dist[mask.index(x, y, zz)];
            dt1d(f, v, z, out, d.nx);
            for (int x = 0; x < d.nx; ++x) dist[mask.index(x, y, zz)] = out[x];
        }
    for (int zz = 0; zz < d.nz; ++zz)
        for (int x = 0; x < d.nx; ++x) {
            for (int y = 0; y < d.ny; ++y) f[y] = dist[mask.index(x, y, zz)];
            dt1d(f, v, z, out, d.ny);
            for (int y = 0; y < d.ny; ++y) dist[mask.index(x, y, zz)] = out[y];
        }
    for (int y = 0; y < d.ny; ++y)
        for (int x = 0; x < d.nx; ++x) {
            for (int zz = 0; zz < d.nz; ++zz) f[zz] = dist[mask.index(x, y, zz)];
            dt1d(f, v, z, out, d.nz);
            for (int zz = 0; zz < d.nz; ++zz) dist[mask.index(x, y, zz)] = out[zz];
        }
    return dist;
}

Volume apply_blobs(const Volume& gt, const std::vector<ErrorBlob>& blobs) {
    Volume out = gt;
    for (const auto& blob : blobs) {
        const double r2 = blob.radius * blob.radius;
        const int x0 = std::max(0, static_cast<int>(std::floor(blob.center[0] - blob.radius)));
        const int x1 = std::min(gt.dims.nx - 1,
                                static_cast<int>(std::ceil(blob.center[0] + blob.radius)));
        const int y0 = std::max(0, static_cast<int>(std::floor(blob.center[1] - blob.radius)));
        const int y1 = std::min(gt.dims.ny - 1,
                                static_cast<int>(std::ceil(blob.center[1] + blob.radius)));
        const int z0 = std::max(0, static_cast<int>(std::floor(blob.center[2] - blob.radius)));
        const int z1 = std::min(gt.dims.nz - 1,
                                static_cast<int>(std::ceil(blob.center[2] + blob.radius)));
        for (int z = z0; z <= z1; ++z)
            for (int y = y0; y <= y1; ++y)
                for (int x = x0; x <= x1; ++x) {
                    const double dx = x - blob.center[0];
                    const double dy = y - blob.center[1];
                    const double dz = z - blob.center[2];
                    if (dx * dx + dy * dy + dz * dz > r2) continue;
                    out.at(x, y, z) = blob.polarity > 0 ? 1.0f : 0.0f;
                }
    }
    return out;
}

PhantomSpec phantom_from_json(const json& j) {
    PhantomSpec spec;
    if (j.contains("dims")) {
        const auto& d = j.at("dims");
        spec.dims = Dims{d.at(0).get<int>(), d.at(1).get<int>(), d.at(2).get<int>()};
    }
    auto triple = [&](const char* key, double* out) {
        if (!j.contains(key)) return;
        const auto& a = j.at(key);
        for (int i = 0; i < 3; ++i) out[i] = a.at(i).get<double>();
    };
    triple("center", spec.center);
    triple("radii", spec.radii);
    spec.roughness_amplitude = j.value("roughness_amplitude", spec.roughness_amplitude);
    spec.interior_mean = j.value("interior_mean", spec.interior_mean);
    spec.exterior_mean = j.value("exterior_mean", spec.exterior_mean);
    spec.noise_std = j.value("noise_std", spec.noise_std);
    spec.seed = j.value("seed", spec.seed);
    return spec;
}

SimSpec sim_from_json(const json& j) {
    SimSpec spec;
    spec.passes = j.value("passes", spec.passes);
    spec.boundary_softness = j.value("boundary_softness", spec.boundary_softness);
    spec.pass_noise_std = j.value("pass_noise_std", spec.pass_noise_std);
    spec.seed = j.value("seed", spec.seed);
    if (j.contains("error_blobs")) {
        for (const auto& b : j.at("error_blobs")) {
            ErrorBlob blob;
            const auto& c = b.at("center");
            for (int i = 0; i < 3; ++i) blob.center[i] = c.at(i).get<double>();
            blob.radius = b.at("radius").get<double>();
            blob.polarity = b.value("polarity", 1);
            spec.error_blobs.push_back(blob);
        }
    }
    return spec;
}

json phantom_to_json(const PhantomSpec& spec) {
    return json{{"dims", {spec.dims.nx, spec.dims.ny, spec.dims.nz}},
                {"center", {spec.center[0], spec.center[1], spec.center[2]}},
                {"radii", {spec.radii[0], spec.radii[1], spec.radii[2]}},
                {"roughness_amplitude", spec.roughness_amplitude},
                {"interior_mean", spec.interior_mean},
                {"exterior_mean", spec.exterior_mean},
                {"noise_std", spec.noise_std},
                {"seed", spec.seed}};
}

json sim_to_json(const SimSpec& spec) {
    json blobs = json::array();
    for (const auto& b : spec.error_blobs)
        blobs.push_back(json{{"center", {b.center[0], b.center[1], b.center[2]}},
                             {"radius", b.radius},
                             {"polarity", b.polarity}});
    return json{{"passes", spec.passes},
                {"boundary_softness", spec.boundary_softness},
                {"pass_noise_std", spec.pass_noise_std},
                {"seed", spec.seed},
                {"error_blobs", blobs}};
}

}  // namespace

Phantom make_phantom(const PhantomSpec& spec) {
    check_phantom(spec);
    const Roughness rough(spec.seed);

    Phantom phantom;
    phantom.ground_truth = Volume(spec.dims, VolumeKind::Binary);
    phantom.intensity = Volume(spec.dims, VolumeKind::Intensity);

    for (int z = 0; z < spec.dims.nz; ++z)
        for (int y = 0; y < spec.dims.ny; ++y)
            for (int x = 0; x < spec.dims.nx; ++x) {
                const double ex = (x - spec.center[0]) / spec.radii[0];
                const double ey = (y - spec.center[1]) / spec.radii[1];
                const double ez = (z - spec.center[2]) / spec.radii[2];
                const double rho = std::sqrt(ex * ex + ey * ey + ez * ez);
                double limit = 1.0;
                if (spec.roughness_amplitude > 0.0 && rho > 0.0) {
                    limit += spec.roughness_amplitude *
                             rough.at(ex / rho, ey / rho, ez / rho);
                }
                phantom.ground_truth.at(x, y, z) = rho <= limit ? 1.0f : 0.0f;
            }

    Rng noise(mix_seed(spec.seed, 71));
    for (std::size_t i = 0; i < phantom.intensity.data.size(); ++i) {
        const double mean =
            phantom.ground_truth.data[i] != 0.0f ? spec.interior_mean : spec.exterior_mean;
        phantom.intensity.data[i] =
            static_cast<float>(mean + spec.noise_std * noise.next_normal());
    }
    return phantom;
}

std::vector<double> signed_distance(const Volume& mask) {
    validate(mask);
    const std::size_t fg = mask.count_nonzero();
    if (fg == 0 || fg == mask.data.size())
        throw ValidationError("signed distance needs both foreground and background");

    const auto to_bg = squared_edt(mask, false);  // distance from fg voxels to bg
    const auto to_fg = squared_edt(mask, true);
    std::vector<double> sd(mask.data.size());
    for (std::size_t i = 0; i < sd.size(); ++i)
        sd[i] = mask.data[i] != 0.0f ? std::sqrt(to_bg[i]) : -std::sqrt(to_fg[i]);
    return sd;
}

Simulation simulate_passes(const Volume& ground_truth, const SimSpec& spec) {
    check_sim(spec);
    validate(ground_truth);
    if (ground_truth.kind != VolumeKind::Binary)
        throw ValidationError("simulate_passes expects a binary ground truth");

    const Volume corrupted = apply_blobs(ground_truth, spec.error_blobs);
    const auto sd = signed_distance(corrupted);
    const double inv_soft = 1.0 / spec.boundary_softness;

    Simulation sim;
    Rng rng(mix_seed(spec.seed, 19));
    for (int t = 0; t < spec.passes; ++t) {
        Volume pass(ground_truth.dims, VolumeKind::Probability);
        for (std::size_t i = 0; i < pass.data.size(); ++i) {
            double logit = sd[i] * inv_soft;
            if (spec.pass_noise_std > 0.0)
                logit += spec.pass_noise_std * rng.next_normal();
            pass.data[i] = static_cast<float>(1.0 / (1.0 + std::exp(-logit)));
        }
        sim.passes.passes.push_back(std::move(pass));
    }
    sim.prediction = binarize(expectation(sim.passes), 0.5);
    return sim;
}

SynthCaseSpec load_synth_spec(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open synth spec: " + path.string());
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw ValidationError("bad synth spec " + path.string() + ": " + e.what());
    }
    SynthCaseSpec spec;
    try {
        if (j.contains("phantom")) spec.phantom = phantom_from_json(j.at("phantom"));
        if (j.contains("sim")) spec.sim = sim_from_json(j.at("sim"));
    } catch (const json::exception& e) {
        throw ValidationError("bad synth spec " + path.string() + ": " + e.what());
    }
    check_phantom(spec.phantom);
    check_sim(spec.sim);
    return spec;
}

void write_case_directory(const SynthCaseSpec& spec, const std::filesystem::path& dir) {
    check_phantom(spec.phantom);
    check_sim(spec.sim);
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw IoError("cannot create case directory " + dir.string());

    const Phantom phantom = make_phantom(spec.phantom);
    const Simulation sim = simulate_passes(phantom.ground_truth, spec.sim);

    save_volume(phantom.intensity, dir / "volume.f32");
    save_volume(phantom.ground_truth, dir / "gt.u8");
    save_volume(sim.prediction, dir / "prediction.u8");
    for (int t = 0; t < spec.sim.passes; ++t) {
        char name[32];
        std::snprintf(name, sizeof(name), "pass_%03d.f32", t);
        save_volume(sim.passes.passes[static_cast<std::size_t>(t)], dir / name);
    }

    json echo;
    echo["phantom"] = phantom_to_json(spec.phantom);
    echo["sim"] = sim_to_json(spec.sim);
    std::ofstream out(dir / "spec.json");
    if (!out) throw IoError("cannot write spec echo in " + dir.string());
    out << echo.dump(2) << '\n';
}

}  // namespace gcnref
