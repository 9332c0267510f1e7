#pragma once

// Binary PGM (P5, maxval 255) mask I/O. On read, sample values >= 128 count
// as foreground; on write, foreground is 255 and background 0, so writing a
// freshly read mask yields the canonical two-level form.

#include <cctype>
#include <filesystem>
#include <fstream>
#include <istream>
#include <ostream>
#include <string>

#include "flowseg/core.hpp"

namespace flowseg {

namespace detail {

// Next whitespace-delimited header token; '#' starts a comment to end of line.
inline std::string pgm_token(std::istream& in) {
    std::string tok;
    int c;
    while ((c = in.get()) != EOF) {
        if (c == '#') {
            while ((c = in.get()) != EOF && c != '\n') {}
            continue;
        }
        if (std::isspace(c)) {
            if (!tok.empty()) return tok;
            continue;
        }
        tok.push_back(static_cast<char>(c));
    }
    if (tok.empty()) throw TruncatedFile("mask file ended inside its header");
    return tok;
}

inline long pgm_number(std::istream& in) {
    const std::string tok = pgm_token(in);
    std::size_t used = 0;
    long value = 0;
    try {
        value = std::stol(tok, &used);
    } catch (const std::exception&) {
        throw BadHeader("mask header field is not a number: " + tok);
    }
    if (used != tok.size()) throw BadHeader("mask header field is not a number: " + tok);
    return value;
}

}  // namespace detail

inline ForegroundMask read_mask(std::istream& in) {
    char p, five;
    if (!in.get(p) || !in.get(five)) throw TruncatedFile("mask file shorter than its magic");
    if (p != 'P' || five != '5') throw BadHeader("mask file is not binary PGM (P5)");

    const long w = detail::pgm_number(in);
    const long h = detail::pgm_number(in);
    const long maxval = detail::pgm_number(in);
    if (w <= 0 || h <= 0 || w > detail::kMaxDim || h > detail::kMaxDim)
        throw BadHeader("mask dimensions outside (0, 32768]");
    if (maxval != 255) throw BadHeader("mask maxval must be 255");
    // Exactly one whitespace byte separates the header from the raster.

    ForegroundMask mask(static_cast<int>(w), static_cast<int>(h));
    for (std::uint8_t& label : mask.labels) {
        const int c = in.get();
        if (c == EOF) throw TruncatedFile("mask file shorter than its raster");
        label = (c >= 128) ? 1 : 0;
    }
    return mask;
}

inline void write_mask(const ForegroundMask& mask, std::ostream& out) {
    out << "P5\n" << mask.width << ' ' << mask.height << "\n255\n";
    for (std::uint8_t label : mask.labels)
        out.put(label ? static_cast<char>(0xff) : static_cast<char>(0x00));
}

inline ForegroundMask read_mask_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw TruncatedFile("cannot open mask file: " + path.string());
    return read_mask(in);
}

inline void write_mask_file(const ForegroundMask& mask, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot create mask file: " + path.string());
    write_mask(mask, out);
    out.flush();
    if (!out) throw Error("short write on mask file: " + path.string());
}

}  // namespace flowseg
