#include "pano/io.hpp"

#include <algorithm>
#include <cstring>
#include <fstream>

namespace pano {

namespace {

std::vector<std::uint8_t> slurp(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    PANO_REQUIRE(in.good(), "io: cannot open " + path.string());
    std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                    std::istreambuf_iterator<char>());
    return bytes;
}

std::uint32_t read_u32le(const std::uint8_t* p) {
    return static_cast<std::uint32_t>(p[0]) | static_cast<std::uint32_t>(p[1]) << 8 |
           static_cast<std::uint32_t>(p[2]) << 16 | static_cast<std::uint32_t>(p[3]) << 24;
}

std::size_t element_size(VectorFormat f) {
    switch (f) {
        case VectorFormat::fvecs:
        case VectorFormat::ivecs:
            return 4;
        case VectorFormat::bvecs:
            return 1;
    }
    return 4;
}

}  // namespace

VectorFormat vector_format_from_name(const std::string& name) {
    std::string s = name;
    if (auto dot = s.rfind('.'); dot != std::string::npos) {
        s = s.substr(dot + 1);
    }
    if (s == "fvecs") return VectorFormat::fvecs;
    if (s == "ivecs") return VectorFormat::ivecs;
    if (s == "bvecs") return VectorFormat::bvecs;
    PANO_REQUIRE(false, "io: unknown vector format '" + name + "'");
    return VectorFormat::fvecs;
}

MatrixF read_vectors(const std::filesystem::path& path, VectorFormat format) {
    std::vector<std::uint8_t> bytes = slurp(path);
    const std::size_t elem = element_size(format);
    MatrixF out;
    std::size_t pos = 0;
    while (pos < bytes.size()) {
        PANO_REQUIRE(pos + 4 <= bytes.size(), "io: truncated record header in " + path.string());
        auto d_raw = static_cast<std::int32_t>(read_u32le(bytes.data() + pos));
        PANO_REQUIRE(d_raw > 0, "io: non-positive dimensionality in " + path.string());
        auto d = static_cast<std::size_t>(d_raw);
        pos += 4;
        PANO_REQUIRE(pos + d * elem <= bytes.size(), "io: truncated record in " + path.string());
        if (out.rows == 0) {
            out.cols = d;
        } else {
            PANO_REQUIRE(d == out.cols, "io: inconsistent dimensionality in " + path.string());
        }
        for (std::size_t j = 0; j < d; ++j) {
            float value = 0.0f;
            switch (format) {
                case VectorFormat::fvecs: {
                    std::uint32_t u = read_u32le(bytes.data() + pos + j * 4);
                    std::memcpy(&value, &u, 4);
                    break;
                }
                case VectorFormat::ivecs: {
                    auto iv = static_cast<std::int32_t>(read_u32le(bytes.data() + pos + j * 4));
                    value = static_cast<float>(iv);
                    break;
                }
                case VectorFormat::bvecs:
                    value = static_cast<float>(bytes[pos + j]);
                    break;
            }
            out.values.push_back(value);
        }
        pos += d * elem;
        ++out.rows;
    }
    return out;
}

std::vector<std::vector<idx_t>> read_ivecs_ids(const std::filesystem::path& path) {
    std::vector<std::uint8_t> bytes = slurp(path);
    std::vector<std::vector<idx_t>> out;
    std::size_t pos = 0;
    while (pos < bytes.size()) {
        PANO_REQUIRE(pos + 4 <= bytes.size(), "io: truncated record header in " + path.string());
        auto d = static_cast<std::int32_t>(read_u32le(bytes.data() + pos));
        PANO_REQUIRE(d > 0, "io: non-positive record length in " + path.string());
        pos += 4;
        PANO_REQUIRE(pos + static_cast<std::size_t>(d) * 4 <= bytes.size(),
                     "io: truncated record in " + path.string());
        std::vector<idx_t> row(static_cast<std::size_t>(d));
        for (std::size_t j = 0; j < row.size(); ++j) {
            row[j] = static_cast<std::int32_t>(read_u32le(bytes.data() + pos + j * 4));
        }
        pos += row.size() * 4;
        out.push_back(std::move(row));
    }
    return out;
}

void write_vectors(const std::filesystem::path& path, const MatrixF& data, VectorFormat format) {
    wire::Writer w;
    for (std::size_t i = 0; i < data.rows; ++i) {
        w.u32(static_cast<std::uint32_t>(data.cols));
        auto row = data.row(i);
        for (float v : row) {
            switch (format) {
                case VectorFormat::fvecs:
                    w.f32(v);
                    break;
                case VectorFormat::ivecs:
                    w.u32(static_cast<std::uint32_t>(static_cast<std::int32_t>(v)));
                    break;
                case VectorFormat::bvecs:
                    w.u8(static_cast<std::uint8_t>(v));
                    break;
            }
        }
    }
    w.to_file(path);
}

void write_ivecs_ids(const std::filesystem::path& path,
                     const std::vector<std::vector<idx_t>>& rows) {
    wire::Writer w;
    for (const auto& row : rows) {
        w.u32(static_cast<std::uint32_t>(row.size()));
        for (idx_t id : row) {
            w.u32(static_cast<std::uint32_t>(static_cast<std::int32_t>(id)));
        }
    }
    w.to_file(path);
}

namespace wire {

void Writer::u8(std::uint8_t v) { bytes.push_back(v); }

void Writer::u32(std::uint32_t v) {
    bytes.push_back(static_cast<std::uint8_t>(v));
    bytes.push_back(static_cast<std::uint8_t>(v >> 8));
    bytes.push_back(static_cast<std::uint8_t>(v >> 16));
    bytes.push_back(static_cast<std::uint8_t>(v >> 24));
}

void Writer::u64(std::uint64_t v) {
    u32(static_cast<std::uint32_t>(v));
    u32(static_cast<std::uint32_t>(v >> 32));
}

void Writer::f32(float v) {
    std::uint32_t u;
    std::memcpy(&u, &v, 4);
    u32(u);
}

void Writer::f64(double v) {
    std::uint64_t u;
    std::memcpy(&u, &v, 8);
    u64(u);
}

void Writer::f32_span(std::span<const float> v) {
    for (float x : v) {
        f32(x);
    }
}

void Writer::f64_span(std::span<const double> v) {
    for (double x : v) {
        f64(x);
    }
}

void Writer::magic(const char tag[5]) {
    for (int i = 0; i < 5; ++i) {
        bytes.push_back(static_cast<std::uint8_t>(tag[i]));
    }
}

void Writer::to_file(const std::filesystem::path& path) const {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    PANO_REQUIRE(out.good(), "io: cannot write " + path.string());
    out.write(reinterpret_cast<const char*>(bytes.data()),
              static_cast<std::streamsize>(bytes.size()));
    PANO_ASSERT(out.good(), "io: short write to " + path.string());
}

Reader::Reader(const std::filesystem::path& path) : bytes(slurp(path)) {}

std::uint8_t Reader::u8() {
    PANO_REQUIRE(pos + 1 <= bytes.size(), "io: truncated file");
    return bytes[pos++];
}

std::uint32_t Reader::u32() {
    PANO_REQUIRE(pos + 4 <= bytes.size(), "io: truncated file");
    std::uint32_t v = read_u32le(bytes.data() + pos);
    pos += 4;
    return v;
}

std::uint64_t Reader::u64() {
    std::uint64_t lo = u32();
    std::uint64_t hi = u32();
    return lo | (hi << 32);
}

float Reader::f32() {
    std::uint32_t u = u32();
    float v;
    std::memcpy(&v, &u, 4);
    return v;
}

double Reader::f64() {
    std::uint64_t u = u64();
    double v;
    std::memcpy(&v, &u, 8);
    return v;
}

void Reader::f32_span(std::span<float> out) {
    for (float& v : out) {
        v = f32();
    }
}

void Reader::expect_magic(const char tag[5], const char* what) {
    PANO_REQUIRE(pos + 5 <= bytes.size(), std::string("io: truncated ") + what + " file");
    bool ok = std::equal(tag, tag + 5, bytes.begin() + static_cast<std::ptrdiff_t>(pos));
    PANO_REQUIRE(ok, std::string("io: bad magic; not a ") + what + " file");
    pos += 5;
}

}  // namespace wire

void save_transform(const std::filesystem::path& path, const TransformModel& model) {
    wire::Writer w;
    w.magic("PNRM1");
    w.u32(static_cast<std::uint32_t>(model.dim));
    w.f32(static_cast<float>(model.gamma));
    w.f32_span(model.matrix.values);
    w.f32_span(model.warm_start.values);
    w.u64(model.seed);
    w.to_file(path);
}

TransformModel load_transform(const std::filesystem::path& path) {
    wire::Reader r(path);
    r.expect_magic("PNRM1", "transform");
    TransformModel model;
    model.dim = r.u32();
    PANO_REQUIRE(model.dim >= 1, "transform file: bad dimension");
    model.gamma = static_cast<double>(r.f32());
    model.matrix = MatrixF(model.dim, model.dim);
    r.f32_span(model.matrix.values);
    model.warm_start = MatrixF(model.dim, model.dim);
    r.f32_span(model.warm_start.values);
    model.seed = r.u64();
    model.skew = SkewParams::zeros(model.dim);  // parameters are not persisted
    PANO_REQUIRE(model.orthogonality_error() <= 1e-4,
                 "transform file: matrix failed the orthogonality check");
    return model;
}

}  // namespace pano
