#include "gcnref/volume.hpp"

#include <algorithm>
#include <cstring>
#include <fstream>
#include <queue>
#include <utility>

#include "gcnref/errors.hpp"
#include "json.hpp"

namespace gcnref {

namespace {

using nlohmann::json;

const char* dtype_for(VolumeKind kind) {
    return kind == VolumeKind::Binary ? "u8" : "f32";
}

json read_sidecar(const std::filesystem::path& data_path) {
    const auto sidecar = data_path.string() + ".json";
    std::ifstream in(sidecar);
    if (!in) throw IoError("cannot open volume header: " + sidecar);
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw ValidationError("bad volume header " + sidecar + ": " + e.what());
    }
    return j;
}

Volume load_single(const std::filesystem::path& path) {
    const auto j = read_sidecar(path);
    Dims dims;
    std::string dtype, kind_name;
    try {
        const auto& d = j.at("dims");
        dims = Dims{d.at(0).get<int>(), d.at(1).get<int>(), d.at(2).get<int>()};
        dtype = j.at("dtype").get<std::string>();
        kind_name = j.at("kind").get<std::string>();
    } catch (const json::exception& e) {
        throw ValidationError("bad volume header " + path.string() + ".json: " + e.what());
    }
    if (dims.nx <= 0 || dims.ny <= 0 || dims.nz <= 0)
        throw ValidationError("non-positive dims in " + path.string() + ".json");
    if (dtype != "u8" && dtype != "f32")
        throw ValidationError("unsupported dtype '" + dtype + "' in " + path.string() + ".json");

    Volume v(dims, volume_kind_from_string(kind_name));
    std::ifstream data(path, std::ios::binary);
    if (!data) throw IoError("cannot open volume data: " + path.string());
    data.seekg(0, std::ios::end);
    const auto bytes = static_cast<std::size_t>(data.tellg());
    data.seekg(0, std::ios::beg);

    const std::size_t n = dims.voxel_count();
    if (dtype == "u8") {
        if (bytes != n)
            throw ValidationError(path.string() + ": expected " + std::to_string(n) +
                                  " bytes, found " + std::to_string(bytes));
        std::vector<std::uint8_t> raw(n);
        data.read(reinterpret_cast<char*>(raw.data()), static_cast<std::streamsize>(n));
        for (std::size_t i = 0; i < n; ++i) v.data[i] = static_cast<float>(raw[i]);
    } else {
        if (bytes != n * sizeof(float))
            throw ValidationError(path.string() + ": expected " +
                                  std::to_string(n * sizeof(float)) + " bytes, found " +
                                  std::to_string(bytes));
        data.read(reinterpret_cast<char*>(v.data.data()),
                  static_cast<std::streamsize>(n * sizeof(float)));
    }
    if (!data) throw IoError("short read on " + path.string());
    validate(v);
    return v;
}

}  // namespace

std::string to_string(VolumeKind kind) {
    switch (kind) {
        case VolumeKind::Intensity: return "intensity";
        case VolumeKind::Probability: return "probability";
        case VolumeKind::Binary: return "binary";
    }
    throw ValidationError("unknown volume kind");
}

VolumeKind volume_kind_from_string(const std::string& s) {
    if (s == "intensity") return VolumeKind::Intensity;
    if (s == "probability") return VolumeKind::Probability;
    if (s == "binary") return VolumeKind::Binary;
    throw ValidationError("unknown volume kind '" + s + "'");
}

std::size_t Volume::count_nonzero() const {
    std::size_t n = 0;
    for (float v : data)
        if (v != 0.0f) ++n;
    return n;
}

void validate(const Volume& v) {
    if (v.dims.nx <= 0 || v.dims.ny <= 0 || v.dims.nz <= 0)
        throw ValidationError("volume dims must be positive");
    if (v.data.size() != v.dims.voxel_count())
        throw ValidationError("volume data size does not match dims");
    if (v.kind == VolumeKind::Probability) {
        for (float x : v.data)
            if (!(x >= 0.0f && x <= 1.0f))
                throw ValidationError("probability volume has values outside [0,1]");
    } else if (v.kind == VolumeKind::Binary) {
        for (float x : v.data)
            if (x != 0.0f && x != 1.0f)
                throw ValidationError("binary volume has values outside {0,1}");
    } else {
        for (float x : v.data)
            if (!std::isfinite(x)) throw ValidationError("intensity volume has non-finite values");
    }
}

Volume load_volume(const std::filesystem::path& path) {
    std::error_code ec;
    if (std::filesystem::is_directory(path, ec)) {
        // slice stack: every regular file with a sidecar is one nz=1 slice,
        // stacked in filename order
        std::vector<std::filesystem::path> files;
        for (const auto& entry : std::filesystem::directory_iterator(path)) {
            if (!entry.is_regular_file()) continue;
            if (entry.path().extension() == ".json") continue;
            if (std::filesystem::exists(entry.path().string() + ".json"))
                files.push_back(entry.path());
        }
        if (files.empty())
            throw IoError("no volume slices found in directory " + path.string());
        std::sort(files.begin(), files.end());

        Volume first = load_single(files[0]);
        if (first.dims.nz != 1)
            throw ValidationError("slice files must have nz == 1: " + files[0].string());
        Volume out({first.dims.nx, first.dims.ny, static_cast<int>(files.size())}, first.kind);
        const std::size_t stride = first.dims.voxel_count();
        std::copy(first.data.begin(), first.data.end(), out.data.begin());
        for (std::size_t z = 1; z < files.size(); ++z) {
            const Volume slice = load_single(files[z]);
            if (slice.dims.nx != first.dims.nx || slice.dims.ny != first.dims.ny ||
                slice.dims.nz != 1 || slice.kind != first.kind)
                throw ValidationError("slice " + files[z].string() +
                                      " disagrees with the first slice");
            std::copy(slice.data.begin(), slice.data.end(), out.data.begin() + z * stride);
        }
        return out;
    }
    return load_single(path);
}

void save_volume(const Volume& v, const std::filesystem::path& path) {
    validate(v);
    std::ofstream data(path, std::ios::binary);
    if (!data) throw IoError("cannot write volume data: " + path.string());

    const std::size_t n = v.data.size();
    if (v.kind == VolumeKind::Binary) {
        std::vector<std::uint8_t> raw(n);
        for (std::size_t i = 0; i < n; ++i) raw[i] = v.data[i] != 0.0f ? 1 : 0;
        data.write(reinterpret_cast<const char*>(raw.data()), static_cast<std::streamsize>(n));
    } else {
        data.write(reinterpret_cast<const char*>(v.data.data()),
                   static_cast<std::streamsize>(n * sizeof(float)));
    }
    if (!data) throw IoError("short write on " + path.string());

    json j;
    j["dims"] = {v.dims.nx, v.dims.ny, v.dims.nz};
    j["dtype"] = dtype_for(v.kind);
    j["kind"] = to_string(v.kind);
    std::ofstream hdr(path.string() + ".json");
    if (!hdr) throw IoError("cannot write volume header: " + path.string() + ".json");
    hdr << j.dump(2) << '\n';
}

Volume binarize(const Volume& v, double threshold) {
    Volume out(v.dims, VolumeKind::Binary);
    for (std::size_t i = 0; i < v.data.size(); ++i)
        out.data[i] = static_cast<double>(v.data[i]) > threshold ? 1.0f : 0.0f;
    return out;
}

Volume dilate(const Volume& mask, int iterations) {
    if (iterations < 0) throw ValidationError("dilation iterations must be >= 0");
    const Dims d = mask.dims;
    Volume cur = mask;
    cur.kind = VolumeKind::Binary;
    Volume tmp(d, VolumeKind::Binary);

    // the 3x3x3 cube separates into one max filter per axis
    auto sweep_x = [&](const Volume& src, Volume& dst) {
        for (int z = 0; z < d.nz; ++z)
            for (int y = 0; y < d.ny; ++y)
                for (int x = 0; x < d.nx; ++x) {
                    float m = src.at(x, y, z);
                    if (x > 0) m = std::max(m, src.at(x - 1, y, z));
                    if (x + 1 < d.nx) m = std::max(m, src.at(x + 1, y, z));
                    dst.at(x, y, z) = m;
                }
    };
    auto sweep_y = [&](const Volume& src, Volume& dst) {
        for (int z = 0; z < d.nz; ++z)
            for (int y = 0; y < d.ny; ++y)
                for (int x = 0; x < d.nx; ++x) {
                    float m = src.at(x, y, z);
                    if (y > 0) m = std::max(m, src.at(x, y - 1, z));
                    if (y + 1 < d.ny) m = std::max(m, src.at(x, y + 1, z));
                    dst.at(x, y, z) = m;
                }
    };
    auto sweep_z = [&](const Volume& src, Volume& dst) {
        for (int z = 0; z < d.nz; ++z)
            for (int y = 0; y < d.ny; ++y)
                for (int x = 0; x < d.nx; ++x) {
                    float m = src.at(x, y, z);
                    if (z > 0) m = std::max(m, src.at(x, y, z - 1));
                    if (z + 1 < d.nz) m = std::max(m, src.at(x, y, z + 1));
                    dst.at(x, y, z) = m;
                }
    };

    for (int it = 0; it < iterations; ++it) {
        sweep_x(cur, tmp);
        sweep_y(tmp, cur);
        sweep_z(cur, tmp);
        std::swap(cur, tmp);
    }
    return cur;
}

Volume largest_component(const Volume& mask) {
    const Dims d = mask.dims;
    const std::size_t n = d.voxel_count();
    std::vector<std::int32_t> label(n, -1);

    std::size_t best_size = 0;
    std::int32_t best_label = -1;
    std::int32_t next = 0;
    std::vector<std::size_t> stack;

    // scan in ascending linear order: the first voxel of each component is
    // its smallest index, so the first maximal component wins ties
    for (std::size_t seed = 0; seed < n; ++seed) {
        if (mask.data[seed] == 0.0f || label[seed] >= 0) continue;
        const std::int32_t id = next++;
        std::size_t size = 0;
        stack.assign(1, seed);
        label[seed] = id;
        while (!stack.empty()) {
            const std::size_t cur = stack.back();
            stack.pop_back();
            ++size;
            const VoxelCoord c = mask.coord(cur);
            for (int dz = -1; dz <= 1; ++dz)
                for (int dy = -1; dy <= 1; ++dy)
                    for (int dx = -1; dx <= 1; ++dx) {
                        if (dx == 0 && dy == 0 && dz == 0) continue;
                        const int x = c.x + dx, y = c.y + dy, z = c.z + dz;
                        if (!mask.in_bounds(x, y, z)) continue;
                        const std::size_t idx = mask.index(x, y, z);
                        if (mask.data[idx] == 0.0f || label[idx] >= 0) continue;
                        label[idx] = id;
                        stack.push_back(idx);
                    }
        }
        if (size > best_size) {
            best_size = size;
            best_label = id;
        }
    }

    Volume out(d, VolumeKind::Binary);
    if (best_label < 0) return out;
    for (std::size_t i = 0; i < n; ++i)
        out.data[i] = label[i] == best_label ? 1.0f : 0.0f;
    return out;
}

Volume mask_union(const Volume& a, const Volume& b) {
    if (a.dims != b.dims) throw ValidationError("mask_union dims mismatch");
    Volume out(a.dims, VolumeKind::Binary);
    for (std::size_t i = 0; i < a.data.size(); ++i)
        out.data[i] = (a.data[i] != 0.0f || b.data[i] != 0.0f) ? 1.0f : 0.0f;
    return out;
}

}  // namespace gcnref
