#ifndef GCNREF_VOLUME_HPP
#define GCNREF_VOLUME_HPP

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace gcnref {

enum class VolumeKind { Intensity, Probability, Binary };

std::string to_string(VolumeKind kind);
VolumeKind volume_kind_from_string(const std::string& s);

struct Dims {
    int nx = 0;
    int ny = 0;
    int nz = 0;

    std::size_t voxel_count() const {
        return static_cast<std::size_t>(nx) * static_cast<std::size_t>(ny) *
               static_cast<std::size_t>(nz);
    }
    std::size_t index(int x, int y, int z) const {
        return static_cast<std::size_t>(x) +
               static_cast<std::size_t>(nx) *
                   (static_cast<std::size_t>(y) +
                    static_cast<std::size_t>(ny) * static_cast<std::size_t>(z));
    }
    bool operator==(const Dims&) const = default;
};

struct VoxelCoord {
    int x = 0;
    int y = 0;
    int z = 0;
    bool operator==(const VoxelCoord&) const = default;
};

// Dense 3D scalar grid, x-fastest row-major. Binary volumes store 0/1 in
// float; they are written to disk as u8, everything else as little-endian f32.
struct Volume {
    Dims dims;
    VolumeKind kind = VolumeKind::Intensity;
    std::vector<float> data;

    Volume() = default;
    Volume(Dims d, VolumeKind k, float fill = 0.0f)
        : dims(d), kind(k), data(d.voxel_count(), fill) {}

    std::size_t index(int x, int y, int z) const { return dims.index(x, y, z); }
    std::size_t index(const VoxelCoord& c) const { return index(c.x, c.y, c.z); }
    VoxelCoord coord(std::size_t linear) const {
        const auto nx = static_cast<std::size_t>(dims.nx);
        const auto ny = static_cast<std::size_t>(dims.ny);
        return VoxelCoord{static_cast<int>(linear % nx),
                          static_cast<int>((linear / nx) % ny),
                          static_cast<int>(linear / (nx * ny))};
    }

    float at(int x, int y, int z) const { return data[index(x, y, z)]; }
    float& at(int x, int y, int z) { return data[index(x, y, z)]; }
    float at(const VoxelCoord& c) const { return data[index(c)]; }

    bool in_bounds(int x, int y, int z) const {
        return x >= 0 && x < dims.nx && y >= 0 && y < dims.ny && z >= 0 && z < dims.nz;
    }

    std::size_t count_nonzero() const;
    bool operator==(const Volume&) const = default;
};

// Throws ValidationError if the kind invariants do not hold
// (probability values in [0,1], binary values in {0,1}, size match).
void validate(const Volume& v);

// File format: raw little-endian scalars at `path` plus a JSON sidecar at
// `path`.json carrying {dims, dtype, kind}. `load_volume` also accepts a
// directory of per-slice volume files (nz=1 each) ordered by filename.
Volume load_volume(const std::filesystem::path& path);
void save_volume(const Volume& v, const std::filesystem::path& path);

// out(x) = 1 iff v(x) > threshold (strict: an exactly-0.5 expectation voxel
// binarized at 0.5 counts as background).
Volume binarize(const Volume& v, double threshold);

// Morphological dilation with a 3x3x3 full-cube structuring element,
// applied `iterations` times. Out-of-bounds neighbors are background.
Volume dilate(const Volume& mask, int iterations);

// Keeps only the largest 26-connected foreground component; ties go to the
// component whose first voxel has the smallest linear index.
Volume largest_component(const Volume& mask);

// Voxelwise OR of two binary volumes with matching dims.
Volume mask_union(const Volume& a, const Volume& b);

}  // namespace gcnref

#endif
