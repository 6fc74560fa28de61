#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "pano/common.hpp"
#include "pano/transform.hpp"

namespace pano {

enum class VectorFormat { fvecs, ivecs, bvecs };

/// Parses a format name ("fvecs"/"ivecs"/"bvecs") or deduces it from a
/// path extension.
VectorFormat vector_format_from_name(const std::string& name);

/// Reads an ANN-benchmark vector file: per record a little-endian i32
/// dimension then d payload elements (f32 / i32 / u8). All records must
/// share the dimension. ivecs/bvecs payloads are widened to float.
MatrixF read_vectors(const std::filesystem::path& path, VectorFormat format);

/// Integer records (ground-truth id lists).
std::vector<std::vector<idx_t>> read_ivecs_ids(const std::filesystem::path& path);

void write_vectors(const std::filesystem::path& path, const MatrixF& data, VectorFormat format);
void write_ivecs_ids(const std::filesystem::path& path, const std::vector<std::vector<idx_t>>& rows);

/// Transform file format PNRM1: magic, then little-endian u32 d, f32 gamma,
/// d*d f32 composed matrix, d*d f32 warm-start matrix, u64 training seed.
/// The reader validates the magic and the orthogonality invariant.
void save_transform(const std::filesystem::path& path, const TransformModel& model);
TransformModel load_transform(const std::filesystem::path& path);

// little-endian binary stream helpers shared by the index file formats
namespace wire {

struct Writer {
    std::vector<std::uint8_t> bytes;
    void u8(std::uint8_t v);
    void u32(std::uint32_t v);
    void u64(std::uint64_t v);
    void f32(float v);
    void f64(double v);
    void f32_span(std::span<const float> v);
    void f64_span(std::span<const double> v);
    void magic(const char tag[5]);
    void to_file(const std::filesystem::path& path) const;
};

struct Reader {
    std::vector<std::uint8_t> bytes;
    std::size_t pos = 0;
    explicit Reader(const std::filesystem::path& path);
    std::uint8_t u8();
    std::uint32_t u32();
    std::uint64_t u64();
    float f32();
    double f64();
    void f32_span(std::span<float> out);
    void expect_magic(const char tag[5], const char* what);
    bool at_end() const { return pos == bytes.size(); }
};

}  // namespace wire

}  // namespace pano
