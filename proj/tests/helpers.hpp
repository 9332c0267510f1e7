#pragma once

// Shared scaffolding for the test binaries: little-endian byte-string
// builders (independent of the library's writer), random field generators,
// scratch directories, and a runner for the installed CLI.

#include <cstdint>
#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <sys/wait.h>
#include <vector>

#include "flowseg/flowseg.hpp"

namespace th {

// Bytes of a float/int assembled by hand, low byte first.
inline void push_u32_le(std::string& s, std::uint32_t v) {
    s.push_back(static_cast<char>(v & 0xff));
    s.push_back(static_cast<char>((v >> 8) & 0xff));
    s.push_back(static_cast<char>((v >> 16) & 0xff));
    s.push_back(static_cast<char>((v >> 24) & 0xff));
}

inline void push_f32_le(std::string& s, float f) {
    std::uint32_t bits;
    std::memcpy(&bits, &f, 4);
    push_u32_le(s, bits);
}

// A flow file image built without the library writer.
inline std::string flo_bytes(float tag, std::int32_t w, std::int32_t h,
                             const std::vector<float>& comps) {
    std::string s;
    push_f32_le(s, tag);
    push_u32_le(s, static_cast<std::uint32_t>(w));
    push_u32_le(s, static_cast<std::uint32_t>(h));
    for (float c : comps) push_f32_le(s, c);
    return s;
}

inline flowseg::FlowField random_field(int w, int h, int k, flowseg::Rng& rng,
                                       double amp = 50.0) {
    flowseg::FlowField f(w, h, k);
    for (flowseg::FlowVec& v : f.vectors) {
        v.u = static_cast<float>(rng.uniform_in(-amp, amp));
        v.v = static_cast<float>(rng.uniform_in(-amp, amp));
    }
    return f;
}

inline flowseg::ForegroundMask random_mask(int w, int h, flowseg::Rng& rng,
                                           double fg_prob = 0.3) {
    flowseg::ForegroundMask m(w, h);
    for (std::uint8_t& l : m.labels) l = (rng.uniform() < fg_prob) ? 1 : 0;
    return m;
}

// Scratch directory removed on destruction.
struct TempDir {
    std::filesystem::path path;

    TempDir() {
        std::string templ =
            (std::filesystem::temp_directory_path() / "flowseg_test_XXXXXX").string();
        char* raw = templ.data();
        if (!mkdtemp(raw)) throw std::runtime_error("mkdtemp failed");
        path = raw;
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path, ec);
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;
};

inline std::string read_file_bytes(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

inline void write_file_bytes(const std::filesystem::path& p, const std::string& bytes) {
    std::ofstream out(p, std::ios::binary | std::ios::trunc);
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
}

struct CliResult {
    int exit_code = -1;
    std::string out;
    std::string err;
};

// Runs the binary named by FLOWSEG_CLI (or the given path) with the argument
// string as-is, capturing both streams.
inline CliResult run_cli(const std::string& args, const char* binary = nullptr) {
    const char* bin = binary ? binary : std::getenv("FLOWSEG_CLI");
    if (!bin) throw std::runtime_error("FLOWSEG_CLI is not set");
    TempDir scratch;
    const std::filesystem::path out_file = scratch.path / "out.txt";
    const std::filesystem::path err_file = scratch.path / "err.txt";
    const std::string cmd = std::string("\"") + bin + "\" " + args + " > \"" +
                            out_file.string() + "\" 2> \"" + err_file.string() + "\"";
    const int raw = std::system(cmd.c_str());
    CliResult r;
    r.exit_code = WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
    r.out = read_file_bytes(out_file);
    r.err = read_file_bytes(err_file);
    return r;
}

// Rows of a CSV string, header included; no quoting support needed here.
inline std::vector<std::vector<std::string>> parse_csv(const std::string& text) {
    std::vector<std::vector<std::string>> rows;
    std::istringstream ss(text);
    std::string line;
    while (std::getline(ss, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        std::vector<std::string> row;
        std::string cell;
        std::istringstream ls(line);
        while (std::getline(ls, cell, ',')) row.push_back(cell);
        if (!line.empty() && line.back() == ',') row.push_back("");
        rows.push_back(std::move(row));
    }
    return rows;
}

}  // namespace th
