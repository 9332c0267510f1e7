#pragma once

// Flat "key = value" file support shared by the run config and the scene
// script. Lines are independent; '#' starts a comment; blank lines are
// skipped; keys must be unique. Consumers pull typed values out and then
// call reject_unknown() so typos fail loudly.

#include <cstdint>
#include <istream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "flowseg/core.hpp"

namespace flowseg {

struct ConfigError : Error { using Error::Error; };

namespace detail {

inline std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

}  // namespace detail

class KeyValueFile {
public:
    static KeyValueFile parse(std::istream& in) {
        KeyValueFile kv;
        std::string line;
        int line_no = 0;
        while (std::getline(in, line)) {
            ++line_no;
            const auto hash = line.find('#');
            if (hash != std::string::npos) line.resize(hash);
            const std::string stripped = detail::trim(line);
            if (stripped.empty()) continue;
            const auto eq = stripped.find('=');
            if (eq == std::string::npos)
                throw ConfigError("line " + std::to_string(line_no) + ": expected key = value");
            const std::string key = detail::trim(stripped.substr(0, eq));
            const std::string value = detail::trim(stripped.substr(eq + 1));
            if (key.empty())
                throw ConfigError("line " + std::to_string(line_no) + ": empty key");
            for (const auto& e : kv.entries_)
                if (e.key == key) throw ConfigError("duplicate key: " + key);
            kv.entries_.push_back({key, value});
        }
        return kv;
    }

    bool has(const std::string& key) const {
        for (const auto& e : entries_)
            if (e.key == key) return true;
        return false;
    }

    // Keys matching "prefix.N.suffix"; returns the distinct N values in order.
    std::vector<int> numbered_groups(const std::string& prefix) const {
        std::set<int> ids;
        for (const auto& e : entries_) {
            if (e.key.rfind(prefix + ".", 0) != 0) continue;
            const std::string rest = e.key.substr(prefix.size() + 1);
            const auto dot = rest.find('.');
            if (dot == std::string::npos) continue;
            try {
                std::size_t used = 0;
                const int id = std::stoi(rest.substr(0, dot), &used);
                if (used == dot) ids.insert(id);
            } catch (const std::exception&) {
            }
        }
        return {ids.begin(), ids.end()};
    }

    std::string get_string(const std::string& key) {
        for (const auto& e : entries_)
            if (e.key == key) {
                consumed_.insert(key);
                return e.value;
            }
        throw ConfigError("missing key: " + key);
    }

    std::string get_string(const std::string& key, const std::string& fallback) {
        return has(key) ? get_string(key) : fallback;
    }

    double get_double(const std::string& key) { return parse_double(key, get_string(key)); }
    double get_double(const std::string& key, double fallback) {
        return has(key) ? get_double(key) : fallback;
    }

    long long get_int(const std::string& key) { return parse_int(key, get_string(key)); }
    long long get_int(const std::string& key, long long fallback) {
        return has(key) ? get_int(key) : fallback;
    }

    std::uint64_t get_u64(const std::string& key, std::uint64_t fallback) {
        if (!has(key)) return fallback;
        const std::string v = get_string(key);
        try {
            std::size_t used = 0;
            const std::uint64_t out = std::stoull(v, &used);
            if (used != v.size()) throw ConfigError("");
            return out;
        } catch (const std::exception&) {
            throw ConfigError("key " + key + ": not an unsigned integer: " + v);
        }
    }

    // Two whitespace-separated numbers.
    Vec2 get_vec2(const std::string& key) {
        const std::string v = get_string(key);
        std::istringstream ss(v);
        Vec2 out;
        std::string extra;
        if (!(ss >> out.x >> out.y) || (ss >> extra))
            throw ConfigError("key " + key + ": expected two numbers, got: " + v);
        return out;
    }
    Vec2 get_vec2(const std::string& key, Vec2 fallback) {
        return has(key) ? get_vec2(key) : fallback;
    }

    std::array<double, 4> get_four(const std::string& key) {
        const std::string v = get_string(key);
        std::istringstream ss(v);
        std::array<double, 4> out{};
        std::string extra;
        if (!(ss >> out[0] >> out[1] >> out[2] >> out[3]) || (ss >> extra))
            throw ConfigError("key " + key + ": expected four numbers, got: " + v);
        return out;
    }

    void reject_unknown() const {
        for (const auto& e : entries_)
            if (consumed_.find(e.key) == consumed_.end())
                throw ConfigError("unknown key: " + e.key);
    }

private:
    struct Entry {
        std::string key;
        std::string value;
    };

    double parse_double(const std::string& key, const std::string& v) const {
        try {
            std::size_t used = 0;
            const double out = std::stod(v, &used);
            if (used != v.size()) throw ConfigError("");
            return out;
        } catch (const std::exception&) {
            throw ConfigError("key " + key + ": not a number: " + v);
        }
    }

    long long parse_int(const std::string& key, const std::string& v) const {
        try {
            std::size_t used = 0;
            const long long out = std::stoll(v, &used);
            if (used != v.size()) throw ConfigError("");
            return out;
        } catch (const std::exception&) {
            throw ConfigError("key " + key + ": not an integer: " + v);
        }
    }

    std::vector<Entry> entries_;
    std::set<std::string> consumed_;
};

}  // namespace flowseg
