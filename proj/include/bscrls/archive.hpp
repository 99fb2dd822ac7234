#pragma once

// Single-file model persistence. The format is a magic string, a version
// field, then tagged sections (u16 tag, u64 byte length, payload) so fields
// can be added without breaking old readers: unknown tags are skipped,
// missing required tags and truncated payloads are errors. All integers and
// floats are little-endian; matrices are row-major float64.

#include <bit>
#include <cstdint>
#include <fstream>
#include <stdexcept>
#include <string>

#include "bscrls/dataio.hpp"
#include "bscrls/matrix.hpp"
#include "bscrls/model.hpp"

namespace bscrls {

struct ModelArchive {
    std::uint32_t format_version = 1;
    BroadModel model;
    TrainingTrace trace;
    Normalization normalization;
    std::uint64_t rng_cursor = 0;  // random-stream position after training, for later increments
};

namespace detail {

constexpr char kArchiveMagic[8] = {'B', 'S', 'C', 'R', 'L', 'S', 'A', 'R'};
constexpr std::uint32_t kArchiveVersion = 1;

enum ArchiveTag : std::uint16_t {
    kTagConfig = 1,
    kTagFeatureGroups = 2,
    kTagLayers = 3,
    kTagNormalization = 4,
    kTagTrace = 5,
    kTagRngCursor = 6,
    kTagOutputDim = 7,
};

struct ByteWriter {
    std::string buf;

    void u8(std::uint8_t v) { buf.push_back(static_cast<char>(v)); }
    void u16(std::uint16_t v) {
        for (int i = 0; i < 2; ++i) buf.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
    }
    void u32(std::uint32_t v) {
        for (int i = 0; i < 4; ++i) buf.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
    }
    void u64(std::uint64_t v) {
        for (int i = 0; i < 8; ++i) buf.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
    }
    void f64(double v) { u64(std::bit_cast<std::uint64_t>(v)); }
    void matrix(const Matrix& m) {
        u64(m.rows());
        u64(m.cols());
        for (std::size_t i = 0; i < m.size(); ++i) f64(m.data()[i]);
    }
};

struct ByteReader {
    const std::string& buf;
    std::size_t pos = 0;

    void require(std::size_t n) const {
        if (pos + n > buf.size())
            throw std::runtime_error("load_model: truncated or corrupt archive");
    }
    std::uint8_t u8() {
        require(1);
        return static_cast<std::uint8_t>(buf[pos++]);
    }
    std::uint16_t u16() {
        require(2);
        std::uint16_t v = 0;
        for (int i = 0; i < 2; ++i) v |= static_cast<std::uint16_t>(static_cast<std::uint8_t>(buf[pos++])) << (8 * i);
        return v;
    }
    std::uint32_t u32() {
        require(4);
        std::uint32_t v = 0;
        for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(static_cast<std::uint8_t>(buf[pos++])) << (8 * i);
        return v;
    }
    std::uint64_t u64() {
        require(8);
        std::uint64_t v = 0;
        for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(static_cast<std::uint8_t>(buf[pos++])) << (8 * i);
        return v;
    }
    double f64() { return std::bit_cast<double>(u64()); }
    Matrix matrix() {
        const std::uint64_t rows = u64();
        const std::uint64_t cols = u64();
        if (rows == 0 || cols == 0 || rows > (1u << 24) || cols > (1u << 24))
            throw std::runtime_error("load_model: corrupt matrix shape");
        require(static_cast<std::size_t>(rows * cols) * 8);
        Matrix m(rows, cols);
        for (std::size_t i = 0; i < m.size(); ++i) m.data()[i] = f64();
        return m;
    }
};

inline void write_section(ByteWriter& out, std::uint16_t tag, const std::string& payload) {
    out.u16(tag);
    out.u64(payload.size());
    out.buf += payload;
}

} // namespace detail

inline void save_model(const ModelArchive& archive, const std::string& path) {
    using namespace detail;
    ByteWriter out;
    out.buf.append(kArchiveMagic, sizeof(kArchiveMagic));
    out.u32(kArchiveVersion);

    {
        ByteWriter w;
        const ModelConfig& c = archive.model.config;
        w.u64(c.n_feature_groups);
        w.u64(c.nodes_per_group);
        w.u64(c.n_layers);
        w.u64(c.enhancement_per_layer);
        w.f64(c.gamma);
        w.u64(c.gamma_schedule.size());
        for (double g : c.gamma_schedule) w.f64(g);
        w.f64(c.lambda);
        w.u8(static_cast<std::uint8_t>(c.activation));
        w.u64(c.random.seed);
        w.f64(c.random.low);
        w.f64(c.random.high);
        w.u64(c.max_retries);
        w.u8(static_cast<std::uint8_t>(c.supervisory_mode));
        w.u8(c.use_exact_pinv ? 1 : 0);
        write_section(out, kTagConfig, w.buf);
    }
    {
        ByteWriter w;
        w.u64(archive.model.feature_groups.size());
        for (const FeatureGroup& g : archive.model.feature_groups) {
            w.matrix(g.w_e);
            w.matrix(g.beta_e);
            w.u8(static_cast<std::uint8_t>(g.activation));
        }
        write_section(out, kTagFeatureGroups, w.buf);
    }
    {
        ByteWriter w;
        w.u64(archive.model.layers.size());
        for (const ResidualLayer& layer : archive.model.layers) {
            w.matrix(layer.enhancement.w_h);
            w.matrix(layer.enhancement.beta_h);
            w.u8(static_cast<std::uint8_t>(layer.enhancement.activation));
            w.matrix(layer.w_out);
            w.u64(layer.feature_groups_used);
            w.u64(layer.leading_begin);
            w.u64(layer.leading_end);
        }
        write_section(out, kTagLayers, w.buf);
    }
    {
        ByteWriter w;
        w.u64(archive.normalization.shift.size());
        for (double v : archive.normalization.shift) w.f64(v);
        for (double v : archive.normalization.scale) w.f64(v);
        write_section(out, kTagNormalization, w.buf);
    }
    {
        ByteWriter w;
        w.f64(archive.trace.initial_residual_norm);
        w.u64(archive.trace.layers.size());
        for (const LayerRecord& r : archive.trace.layers) {
            w.f64(r.residual_norm_before);
            w.f64(r.residual_norm_after);
            w.f64(r.contraction_ratio);
            w.f64(r.mu);
            w.u64(r.retries_used);
            w.u8(r.accepted ? 1 : 0);
            w.f64(r.wall_time_s);
        }
        write_section(out, kTagTrace, w.buf);
    }
    {
        ByteWriter w;
        w.u64(archive.rng_cursor);
        write_section(out, kTagRngCursor, w.buf);
    }
    {
        ByteWriter w;
        w.u64(archive.model.output_dim);
        write_section(out, kTagOutputDim, w.buf);
    }

    std::ofstream file(path, std::ios::binary | std::ios::trunc);
    if (!file) throw std::runtime_error("save_model: cannot open " + path);
    file.write(out.buf.data(), static_cast<std::streamsize>(out.buf.size()));
    if (!file) throw std::runtime_error("save_model: write failed for " + path);
}

inline ModelArchive load_model(const std::string& path) {
    using namespace detail;
    std::ifstream file(path, std::ios::binary);
    if (!file) throw std::runtime_error("load_model: cannot open " + path);
    std::string buf((std::istreambuf_iterator<char>(file)), std::istreambuf_iterator<char>());

    ByteReader in{buf};
    in.require(sizeof(kArchiveMagic));
    if (std::string_view(buf.data(), sizeof(kArchiveMagic)) !=
        std::string_view(kArchiveMagic, sizeof(kArchiveMagic)))
        throw std::runtime_error("load_model: " + path + " is not a model archive");
    in.pos = sizeof(kArchiveMagic);
    const std::uint32_t version = in.u32();
    if (version != kArchiveVersion)
        throw std::runtime_error("load_model: unsupported archive version " +
                                 std::to_string(version));

    ModelArchive archive;
    archive.format_version = version;
    bool have_config = false, have_features = false, have_layers = false, have_output = false;

    while (in.pos < buf.size()) {
        const std::uint16_t tag = in.u16();
        const std::uint64_t length = in.u64();
        in.require(static_cast<std::size_t>(length));
        const std::size_t section_end = in.pos + static_cast<std::size_t>(length);

        switch (tag) {
            case kTagConfig: {
                ModelConfig& c = archive.model.config;
                c.n_feature_groups = in.u64();
                c.nodes_per_group = in.u64();
                c.n_layers = in.u64();
                c.enhancement_per_layer = in.u64();
                c.gamma = in.f64();
                const std::uint64_t sched = in.u64();
                c.gamma_schedule.resize(sched);
                for (std::uint64_t i = 0; i < sched; ++i) c.gamma_schedule[i] = in.f64();
                c.lambda = in.f64();
                c.activation = static_cast<Activation>(in.u8());
                c.random.seed = in.u64();
                c.random.low = in.f64();
                c.random.high = in.f64();
                c.max_retries = in.u64();
                c.supervisory_mode = static_cast<SupervisoryMode>(in.u8());
                c.use_exact_pinv = in.u8() != 0;
                have_config = true;
                break;
            }
            case kTagFeatureGroups: {
                const std::uint64_t count = in.u64();
                for (std::uint64_t i = 0; i < count; ++i) {
                    FeatureGroup g;
                    g.w_e = in.matrix();
                    g.beta_e = in.matrix();
                    g.activation = static_cast<Activation>(in.u8());
                    archive.model.feature_groups.push_back(std::move(g));
                }
                have_features = true;
                break;
            }
            case kTagLayers: {
                const std::uint64_t count = in.u64();
                for (std::uint64_t i = 0; i < count; ++i) {
                    ResidualLayer layer;
                    layer.enhancement.w_h = in.matrix();
                    layer.enhancement.beta_h = in.matrix();
                    layer.enhancement.activation = static_cast<Activation>(in.u8());
                    layer.w_out = in.matrix();
                    layer.feature_groups_used = in.u64();
                    layer.leading_begin = in.u64();
                    layer.leading_end = in.u64();
                    archive.model.layers.push_back(std::move(layer));
                }
                have_layers = true;
                break;
            }
            case kTagNormalization: {
                const std::uint64_t count = in.u64();
                archive.normalization.shift.resize(count);
                archive.normalization.scale.resize(count);
                for (std::uint64_t i = 0; i < count; ++i) archive.normalization.shift[i] = in.f64();
                for (std::uint64_t i = 0; i < count; ++i) archive.normalization.scale[i] = in.f64();
                break;
            }
            case kTagTrace: {
                archive.trace.initial_residual_norm = in.f64();
                const std::uint64_t count = in.u64();
                for (std::uint64_t i = 0; i < count; ++i) {
                    LayerRecord r;
                    r.residual_norm_before = in.f64();
                    r.residual_norm_after = in.f64();
                    r.contraction_ratio = in.f64();
                    r.mu = in.f64();
                    r.retries_used = in.u64();
                    r.accepted = in.u8() != 0;
                    r.wall_time_s = in.f64();
                    archive.trace.layers.push_back(r);
                }
                break;
            }
            case kTagRngCursor:
                archive.rng_cursor = in.u64();
                break;
            case kTagOutputDim:
                archive.model.output_dim = in.u64();
                have_output = true;
                break;
            default:
                break;  // unknown section from a newer writer
        }
        if (in.pos > section_end)
            throw std::runtime_error("load_model: truncated or corrupt archive");
        in.pos = section_end;
    }

    if (!have_config || !have_features || !have_layers || !have_output)
        throw std::runtime_error("load_model: archive is missing required sections");
    return archive;
}

} // namespace bscrls
