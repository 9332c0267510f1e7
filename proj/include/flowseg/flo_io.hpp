#pragma once

// Middlebury-convention flow file I/O.
//
// Layout, all little-endian:
//   float32 202021.25      sanity tag, reads as "PIEH" in ASCII
//   int32   width
//   int32   height
//   float32 u, v pairs, row-major, top row first
//
// Dimensions outside (0, 32768] are rejected, as are non-finite components.
// Reading then writing reproduces a valid file byte for byte.

#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <istream>
#include <ostream>

#include "flowseg/core.hpp"

namespace flowseg {

namespace detail {

constexpr float kFlowTag = 202021.25f;

inline bool read_u32_le(std::istream& in, std::uint32_t& out) {
    unsigned char b[4];
    if (!in.read(reinterpret_cast<char*>(b), 4)) return false;
    out = std::uint32_t(b[0]) | (std::uint32_t(b[1]) << 8) |
          (std::uint32_t(b[2]) << 16) | (std::uint32_t(b[3]) << 24);
    return true;
}

inline void write_u32_le(std::ostream& out, std::uint32_t v) {
    const unsigned char b[4] = {
        static_cast<unsigned char>(v & 0xff),
        static_cast<unsigned char>((v >> 8) & 0xff),
        static_cast<unsigned char>((v >> 16) & 0xff),
        static_cast<unsigned char>((v >> 24) & 0xff),
    };
    out.write(reinterpret_cast<const char*>(b), 4);
}

inline bool read_f32_le(std::istream& in, float& out) {
    std::uint32_t bits;
    if (!read_u32_le(in, bits)) return false;
    std::memcpy(&out, &bits, 4);
    return true;
}

inline void write_f32_le(std::ostream& out, float v) {
    std::uint32_t bits;
    std::memcpy(&bits, &v, 4);
    write_u32_le(out, bits);
}

}  // namespace detail

// interval_k only stamps the in-memory field; the file format does not carry it.
inline FlowField read_flow(std::istream& in, int interval_k = 0) {
    float tag;
    if (!detail::read_f32_le(in, tag)) throw TruncatedFile("flow file shorter than its tag");
    if (tag != detail::kFlowTag) throw BadMagic("flow file tag mismatch");

    std::uint32_t wraw, hraw;
    if (!detail::read_u32_le(in, wraw) || !detail::read_u32_le(in, hraw))
        throw TruncatedFile("flow file shorter than its header");
    const auto w = static_cast<std::int32_t>(wraw);
    const auto h = static_cast<std::int32_t>(hraw);
    if (w <= 0 || h <= 0 || w > detail::kMaxDim || h > detail::kMaxDim)
        throw DimensionOverflow("flow dimensions outside (0, 32768]");

    FlowField field(w, h, interval_k);
    for (FlowVec& f : field.vectors) {
        if (!detail::read_f32_le(in, f.u) || !detail::read_f32_le(in, f.v))
            throw TruncatedFile("flow file shorter than its pixel payload");
        if (!std::isfinite(f.u) || !std::isfinite(f.v))
            throw NonFinite("flow component not finite");
    }
    return field;
}

inline void write_flow(const FlowField& field, std::ostream& out) {
    detail::write_f32_le(out, detail::kFlowTag);
    detail::write_u32_le(out, static_cast<std::uint32_t>(field.width));
    detail::write_u32_le(out, static_cast<std::uint32_t>(field.height));
    for (const FlowVec& f : field.vectors) {
        detail::write_f32_le(out, f.u);
        detail::write_f32_le(out, f.v);
    }
}

inline FlowField read_flow_file(const std::filesystem::path& path, int interval_k = 0) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw TruncatedFile("cannot open flow file: " + path.string());
    return read_flow(in, interval_k);
}

inline void write_flow_file(const FlowField& field, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot create flow file: " + path.string());
    write_flow(field, out);
    out.flush();
    if (!out) throw Error("short write on flow file: " + path.string());
}

}  // namespace flowseg
