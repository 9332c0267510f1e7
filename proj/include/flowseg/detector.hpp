#pragma once

// Per-frame foreground detection against an estimated global motion.
//
// The estimated homography predicts, for every pixel, the flow the pixel
// would have if it belonged to the rigid background. Pixels are then judged
// against that prediction in one of two modes:
//   magnitude: flag when |flow - predicted| exceeds an adaptive threshold
//              that grows with the camera translation encoded in the map;
//   cosine:    flag when the direction disagrees (cos below a bound), used
//              while the camera zooms, when magnitudes diverge radially and
//              a fixed magnitude bound would misfire.
// Zooming is recognized by a flow-derived vanishing point landing inside the
// frame together with a large mean gradient of the predicted magnitudes.

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "flowseg/core.hpp"
#include "flowseg/homography_fit.hpp"

namespace flowseg {

struct TooFewSamples : Error { using Error::Error; };
struct FrameFailed : Error { using Error::Error; };

struct DetectorConfig {
    int interval_k = 5;        // frame gap the flow fields span
    double a1_per_frame = 0.1; // base magnitude tolerance per spanned frame
    double a2 = 0.3;           // growth of the tolerance with camera shift
    double t_g = 0.032;        // mean magnitude-gradient bound for zoom
    double t_c = 0.99;         // direction-agreement bound
    double eps_mag = 0.1;      // below this norm, direction is unreliable
    RansacConfig ransac;

    friend bool operator==(const DetectorConfig&, const DetectorConfig&) = default;

    void validate() const {
        if (interval_k < 1) throw std::invalid_argument("interval_k must be >= 1");
        if (!(a1_per_frame > 0.0)) throw std::invalid_argument("a1_per_frame must be > 0");
        if (!(a2 >= 0.0)) throw std::invalid_argument("a2 must be >= 0");
        if (!(t_g > 0.0)) throw std::invalid_argument("t_g must be > 0");
        if (!(t_c > -1.0 && t_c <= 1.0)) throw std::invalid_argument("t_c must be in (-1, 1]");
        if (!(eps_mag >= 0.0)) throw std::invalid_argument("eps_mag must be >= 0");
        ransac.validate();
    }
};

enum class JudgeMode { Magnitude, Cosine };

inline const char* to_string(JudgeMode m) {
    return m == JudgeMode::Magnitude ? "magnitude" : "cosine";
}

struct FlowSample {
    PixelCoord p;
    FlowVec f;
};

struct ModeDecision {
    JudgeMode mode = JudgeMode::Magnitude;
    std::optional<Vec2> vanishing_point;
    double magnitude_gradient = 0.0;
};

struct FrameDetection {
    ForegroundMask mask;
    Homography homography;
    ModeDecision decision;
    double threshold_used = 0.0;  // adaptive magnitude bound, or t_c in cosine mode
};

// Flow each pixel would carry if it moved with the estimated global map:
// H(p) - p. Pixels the map sends to infinity get non-finite components and
// are treated as background by the judges.
inline FlowField ideal_background_flow(const Homography& h, int width, int height) {
    FlowField ideal(width, height);
    const float nanf = std::numeric_limits<float>::quiet_NaN();
    for (int y = 0; y < height; ++y)
        for (int x = 0; x < width; ++x) {
            const MappedPoint m = h.apply(double(x), double(y));
            FlowVec& f = ideal.at(x, y);
            if (!m.finite) {
                f.u = nanf;
                f.v = nanf;
            } else {
                f.u = static_cast<float>(m.x - double(x));
                f.v = static_cast<float>(m.y - double(y));
            }
        }
    return ideal;
}

// Magnitude tolerance for the whole frame: a fixed part proportional to the
// spanned interval plus a part growing with the translation the map encodes.
inline double adaptive_threshold(const Homography& h, const DetectorConfig& cfg) {
    const double shift = std::hypot(h(1, 3), h(2, 3));
    return cfg.a1_per_frame * cfg.interval_k + cfg.a2 * shift;
}

// Foreground where the deviation from the predicted flow exceeds t_a.
inline ForegroundMask magnitude_mask(const FlowField& flow, const FlowField& ideal,
                                     double t_a) {
    if (!flow.same_shape(ideal))
        throw DimensionMismatch("flow and predicted flow differ in shape");
    ForegroundMask mask(flow.width, flow.height);
    for (std::size_t i = 0; i < flow.vectors.size(); ++i) {
        const FlowVec& f = flow.vectors[i];
        const FlowVec& g = ideal.vectors[i];
        if (!std::isfinite(g.u) || !std::isfinite(g.v)) continue;  // stays background
        const double dv = std::hypot(double(f.u) - double(g.u), double(f.v) - double(g.v));
        mask.labels[i] = (dv > t_a) ? 1 : 0;
    }
    return mask;
}

// Least-squares intersection of the lines through each sample point along its
// flow vector. Every sample contributes the constraint v*x - u*y = v*px - u*py.
// Returns nothing when the normal system is near-singular, which covers
// parallel flow (translation) and all-zero flow.
inline std::optional<Vec2> vanishing_point(std::span<const FlowSample> samples) {
    if (samples.size() < 2) throw TooFewSamples("vanishing point needs >= 2 samples");
    double suu = 0.0, svv = 0.0, suv = 0.0, bu = 0.0, bv = 0.0;
    for (const FlowSample& s : samples) {
        const double u = s.f.u, v = s.f.v;
        const double rhs = v * double(s.p.x) - u * double(s.p.y);
        svv += v * v;
        suu += u * u;
        suv += u * v;
        bv += v * rhs;
        bu += u * rhs;
    }
    // Normal system of A x = B with rows (v, -u): N = [[svv, -suv], [-suv, suu]].
    const double det = svv * suu - suv * suv;
    const double trace = svv + suu;
    if (trace <= 0.0 || det < 1e-9 * trace * trace) return std::nullopt;
    const double x = (suu * bv - suv * bu) / det;
    const double y = (suv * bv - svv * bu) / det;
    return Vec2{x, y};
}

// Mean over pixels of |gradient of the flow-magnitude image|, central
// differences inside, one-sided at the borders. Non-finite pixels are skipped.
inline double magnitude_gradient(const FlowField& field) {
    const ScalarField m = flow_magnitude(field);
    double sum = 0.0;
    std::size_t used = 0;
    for (int y = 0; y < field.height; ++y)
        for (int x = 0; x < field.width; ++x) {
            const int xl = std::max(x - 1, 0), xr = std::min(x + 1, field.width - 1);
            const int yl = std::max(y - 1, 0), yr = std::min(y + 1, field.height - 1);
            const double dx =
                xr == xl ? 0.0 : (double(m.at(xr, y)) - double(m.at(xl, y))) / double(xr - xl);
            const double dy =
                yr == yl ? 0.0 : (double(m.at(x, yr)) - double(m.at(x, yl))) / double(yr - yl);
            const double g = std::hypot(dx, dy);
            if (!std::isfinite(g)) continue;
            sum += g;
            ++used;
        }
    return used ? sum / double(used) : 0.0;
}

// Cosine mode requires both zoom signatures at once: a vanishing point inside
// the frame (borders included) and magnitudes changing fast across it.
inline ModeDecision zoom_indicator(const std::optional<Vec2>& vp, double grad,
                                   int width, int height, double t_g) {
    ModeDecision d;
    d.vanishing_point = vp;
    d.magnitude_gradient = grad;
    const bool inside = vp && vp->x >= 0.0 && vp->x <= double(width) && vp->y >= 0.0 &&
                        vp->y <= double(height);
    d.mode = (inside && grad > t_g) ? JudgeMode::Cosine : JudgeMode::Magnitude;
    return d;
}

// Foreground where the direction disagrees with the prediction. Pixels where
// either vector is shorter than eps_mag carry no usable direction and fall
// back to the magnitude rule with the supplied t_a.
inline ForegroundMask cosine_mask(const FlowField& flow, const FlowField& ideal,
                                  double t_c, double eps_mag, double t_a) {
    if (!flow.same_shape(ideal))
        throw DimensionMismatch("flow and predicted flow differ in shape");
    ForegroundMask mask(flow.width, flow.height);
    for (std::size_t i = 0; i < flow.vectors.size(); ++i) {
        const FlowVec& f = flow.vectors[i];
        const FlowVec& g = ideal.vectors[i];
        if (!std::isfinite(g.u) || !std::isfinite(g.v)) continue;
        const double fu = f.u, fv = f.v, gu = g.u, gv = g.v;
        const double nf = std::hypot(fu, fv);
        const double ng = std::hypot(gu, gv);
        if (nf < eps_mag || ng < eps_mag) {
            const double dv = std::hypot(fu - gu, fv - gv);
            mask.labels[i] = (dv > t_a) ? 1 : 0;
            continue;
        }
        double c = (fu * gu + fv * gv) / (nf * ng);
        c = std::clamp(c, -1.0, 1.0);
        mask.labels[i] = (c < t_c) ? 1 : 0;
    }
    return mask;
}

// Full per-frame pipeline: estimate the global map, predict background flow,
// pick the judge mode from the winning sample's flow, apply the judge.
inline FrameDetection detect_frame(const FlowField& flow, const DetectorConfig& cfg) {
    cfg.validate();
    if (flow.interval_k != cfg.interval_k)
        throw std::invalid_argument("flow interval does not match the configuration");

    RansacResult fit;
    try {
        fit = ransac_estimate(flow, cfg.ransac);
    } catch (const NoValidHypothesis& e) {
        throw FrameFailed(std::string("global motion estimation failed: ") + e.what());
    }

    const FlowField ideal = ideal_background_flow(fit.homography, flow.width, flow.height);

    std::vector<FlowSample> samples;
    samples.reserve(fit.sample_points.size());
    for (const PixelCoord& p : fit.sample_points) samples.push_back({p, flow.at(p.x, p.y)});
    const std::optional<Vec2> vp = vanishing_point(samples);
    const double grad = magnitude_gradient(ideal);
    const ModeDecision decision =
        zoom_indicator(vp, grad, flow.width, flow.height, cfg.t_g);

    const double t_a = adaptive_threshold(fit.homography, cfg);
    FrameDetection out;
    out.homography = fit.homography;
    out.decision = decision;
    if (decision.mode == JudgeMode::Magnitude) {
        out.mask = magnitude_mask(flow, ideal, t_a);
        out.threshold_used = t_a;
    } else {
        out.mask = cosine_mask(flow, ideal, cfg.t_c, cfg.eps_mag, t_a);
        out.threshold_used = cfg.t_c;
    }
    return out;
}

}  // namespace flowseg
