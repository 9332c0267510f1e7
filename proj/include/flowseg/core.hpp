#pragma once

// Core value types shared by every stage: dense flow fields, binary masks,
// normalized 3x3 homographies, and the error taxonomy.

#include <array>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

namespace flowseg {

// ---------------------------------------------------------------- errors ---

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// File ingestion.
struct BadMagic : Error { using Error::Error; };
struct BadHeader : Error { using Error::Error; };
struct TruncatedFile : Error { using Error::Error; };
struct NonFinite : Error { using Error::Error; };
struct DimensionOverflow : Error { using Error::Error; };

// Cross-container shape disagreement.
struct DimensionMismatch : Error { using Error::Error; };

// Homography construction with a vanishing scale entry.
struct SingularHomography : Error { using Error::Error; };

// ----------------------------------------------------------------- types ---

struct PixelCoord {
    int x = 0;
    int y = 0;
    friend bool operator==(const PixelCoord&, const PixelCoord&) = default;
};

struct Vec2 {
    double x = 0.0;
    double y = 0.0;
    friend bool operator==(const Vec2&, const Vec2&) = default;
};

struct FlowVec {
    float u = 0.0f;
    float v = 0.0f;
    friend bool operator==(const FlowVec&, const FlowVec&) = default;
};

// Dense per-pixel displacement field, row-major, top row first.
// Components are stored as float32 to match the on-disk format exactly.
// interval_k records how many source frames the displacements span.
struct FlowField {
    int width = 0;
    int height = 0;
    int interval_k = 0;
    std::vector<FlowVec> vectors;

    FlowField() = default;
    FlowField(int w, int h, int k = 0)
        : width(w), height(h), interval_k(k),
          vectors(static_cast<std::size_t>(w) * static_cast<std::size_t>(h)) {
        if (w <= 0 || h <= 0) throw std::invalid_argument("FlowField: nonpositive dimensions");
    }

    std::size_t index(int x, int y) const {
        return static_cast<std::size_t>(y) * static_cast<std::size_t>(width) +
               static_cast<std::size_t>(x);
    }
    const FlowVec& at(int x, int y) const { return vectors[index(x, y)]; }
    FlowVec& at(int x, int y) { return vectors[index(x, y)]; }
    bool in_bounds(int x, int y) const { return x >= 0 && x < width && y >= 0 && y < height; }
    std::size_t pixel_count() const { return vectors.size(); }
    bool finite_at(int x, int y) const {
        const FlowVec& f = at(x, y);
        return std::isfinite(f.u) && std::isfinite(f.v);
    }
    bool same_shape(const FlowField& o) const { return width == o.width && height == o.height; }
};

// Binary foreground labeling, one byte per pixel, 0 background / 1 foreground.
struct ForegroundMask {
    int width = 0;
    int height = 0;
    std::vector<std::uint8_t> labels;

    ForegroundMask() = default;
    ForegroundMask(int w, int h)
        : width(w), height(h),
          labels(static_cast<std::size_t>(w) * static_cast<std::size_t>(h), 0) {
        if (w <= 0 || h <= 0) throw std::invalid_argument("ForegroundMask: nonpositive dimensions");
    }

    std::size_t index(int x, int y) const {
        return static_cast<std::size_t>(y) * static_cast<std::size_t>(width) +
               static_cast<std::size_t>(x);
    }
    bool is_foreground(int x, int y) const { return labels[index(x, y)] != 0; }
    void set(int x, int y, bool fg) { labels[index(x, y)] = fg ? 1 : 0; }
    std::size_t foreground_count() const {
        std::size_t n = 0;
        for (std::uint8_t v : labels) n += (v != 0);
        return n;
    }
    bool same_shape(const ForegroundMask& o) const {
        return width == o.width && height == o.height;
    }
    friend bool operator==(const ForegroundMask&, const ForegroundMask&) = default;
};

// Result of pushing a point through a homography; finite is false when the
// projective scale vanished (point at infinity for this map).
struct MappedPoint {
    double x = 0.0;
    double y = 0.0;
    bool finite = true;
};

// Plane-projective map, row-major, kept normalized so h33 == 1.
// Element access uses 1-based (row, col), so h(1,3) and h(2,3) are the
// translation entries.
class Homography {
public:
    Homography() : m_{1, 0, 0, 0, 1, 0, 0, 0, 1} {}

    // Normalizes by m[8]; rejects a vanishing or non-finite scale entry.
    static Homography from_row_major(const std::array<double, 9>& m) {
        for (double v : m)
            if (!std::isfinite(v)) throw NonFinite("homography entry not finite");
        if (std::abs(m[8]) < 1e-12)
            throw SingularHomography("homography scale entry below 1e-12");
        Homography h;
        for (int i = 0; i < 9; ++i) h.m_[i] = m[i] / m[8];
        return h;
    }

    double operator()(int row, int col) const {
        return m_[static_cast<std::size_t>(row - 1) * 3 + static_cast<std::size_t>(col - 1)];
    }
    const std::array<double, 9>& row_major() const { return m_; }

    MappedPoint apply(double x, double y) const {
        const double w = m_[6] * x + m_[7] * y + m_[8];
        if (std::abs(w) < 1e-12) return {0.0, 0.0, false};
        return {(m_[0] * x + m_[1] * y + m_[2]) / w,
                (m_[3] * x + m_[4] * y + m_[5]) / w, true};
    }

    friend bool operator==(const Homography&, const Homography&) = default;

private:
    std::array<double, 9> m_;
};

// Raw 3x3 product, row-major, no normalization.
inline std::array<double, 9> mat3_mul(const std::array<double, 9>& a,
                                      const std::array<double, 9>& b) {
    std::array<double, 9> c{};
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j)
            c[i * 3 + j] = a[i * 3 + 0] * b[0 * 3 + j] +
                           a[i * 3 + 1] * b[1 * 3 + j] +
                           a[i * 3 + 2] * b[2 * 3 + j];
    return c;
}

// ---------------------------------------------------------- scalar field ---

struct ScalarField {
    int width = 0;
    int height = 0;
    std::vector<float> values;

    ScalarField() = default;
    ScalarField(int w, int h)
        : width(w), height(h),
          values(static_cast<std::size_t>(w) * static_cast<std::size_t>(h), 0.0f) {
        if (w <= 0 || h <= 0) throw std::invalid_argument("ScalarField: nonpositive dimensions");
    }

    std::size_t index(int x, int y) const {
        return static_cast<std::size_t>(y) * static_cast<std::size_t>(width) +
               static_cast<std::size_t>(x);
    }
    float at(int x, int y) const { return values[index(x, y)]; }
    float& at(int x, int y) { return values[index(x, y)]; }
};

// Per-pixel Euclidean norm of the flow vectors.
inline ScalarField flow_magnitude(const FlowField& field) {
    ScalarField out(field.width, field.height);
    for (std::size_t i = 0; i < field.vectors.size(); ++i) {
        const FlowVec& f = field.vectors[i];
        out.values[i] = std::hypot(f.u, f.v);
    }
    return out;
}

// ------------------------------------------------------------ formatting ---

namespace detail {

// Shared cap on raster dimensions, applied at every file boundary.
constexpr std::int32_t kMaxDim = 32768;  // 2^15

// Shortest decimal form that round-trips the exact double; keeps CSV output
// byte-stable across runs.
inline std::string fmt(double v) {
    char buf[40];
    auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

inline std::string fmt(float v) {
    char buf[40];
    auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

}  // namespace detail

}  // namespace flowseg
