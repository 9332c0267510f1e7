#pragma once

// Segmentation quality scores. The per-video figure averages per-frame
// F-measures rather than pooling pixels, so a short burst of bad frames is
// not drowned out by easy ones; the success-rate curve then reports, for each
// threshold, the share of frames scoring strictly above it.

#include <cmath>
#include <ostream>
#include <span>
#include <vector>

#include "flowseg/core.hpp"

namespace flowseg {

struct EmptySequence : Error { using Error::Error; };

struct FrameScore {
    long long tp = 0;
    long long fp = 0;
    long long fn = 0;
    long long tn = 0;
    double precision = 0.0;
    double recall = 0.0;
    double f_measure = 0.0;
};

namespace detail {

inline double f_measure_of(double precision, double recall) {
    const double s = precision + recall;
    return s > 0.0 ? 2.0 * precision * recall / s : 0.0;
}

}  // namespace detail

// Pixel confusion counts plus precision/recall/F. Conventions for empty
// cases: nothing to find and nothing claimed scores 1.0 across the board;
// otherwise an undefined ratio drops to 0.
inline FrameScore frame_score(const ForegroundMask& pred, const ForegroundMask& gt) {
    if (!pred.same_shape(gt)) throw DimensionMismatch("prediction and truth differ in shape");
    FrameScore s;
    for (std::size_t i = 0; i < pred.labels.size(); ++i) {
        const bool p = pred.labels[i] != 0;
        const bool g = gt.labels[i] != 0;
        s.tp += (p && g);
        s.fp += (p && !g);
        s.fn += (!p && g);
        s.tn += (!p && !g);
    }
    if (s.tp + s.fp + s.fn == 0) {
        s.precision = s.recall = s.f_measure = 1.0;
        return s;
    }
    s.precision = (s.tp + s.fp) > 0 ? double(s.tp) / double(s.tp + s.fp) : 0.0;
    s.recall = (s.tp + s.fn) > 0 ? double(s.tp) / double(s.tp + s.fn) : 0.0;
    s.f_measure = detail::f_measure_of(s.precision, s.recall);
    return s;
}

// Mean of the per-frame F-measures.
inline double video_f_measure(std::span<const FrameScore> scores) {
    if (scores.empty()) throw EmptySequence("no frames to average");
    double sum = 0.0;
    for (const FrameScore& s : scores) sum += s.f_measure;
    return sum / double(scores.size());
}

struct SRCurve {
    std::vector<double> thresholds;
    std::vector<double> rates;
};

// Share of frames whose F-measure strictly exceeds each threshold.
inline SRCurve success_rate_curve(std::span<const double> frame_f_measures,
                                  std::span<const double> thresholds) {
    if (frame_f_measures.empty()) throw EmptySequence("no frames to rate");
    for (double t : thresholds)
        if (!(t >= 0.0 && t <= 1.0))
            throw std::invalid_argument("thresholds must lie in [0, 1]");
    SRCurve curve;
    curve.thresholds.assign(thresholds.begin(), thresholds.end());
    curve.rates.reserve(thresholds.size());
    for (double t : thresholds) {
        std::size_t hits = 0;
        for (double fm : frame_f_measures) hits += (fm > t);
        curve.rates.push_back(double(hits) / double(frame_f_measures.size()));
    }
    return curve;
}

// 0, step, ..., 1 built as integer fractions so the endpoints are exact and
// the decimals print clean.
inline std::vector<double> uniform_thresholds(double step = 0.01) {
    if (!(step > 0.0 && step <= 1.0)) throw std::invalid_argument("step must be in (0, 1]");
    const double inv = 1.0 / step;
    const auto n = static_cast<long long>(std::llround(inv));
    std::vector<double> out;
    if (n >= 1 && std::abs(inv - double(n)) < 1e-9) {
        out.reserve(static_cast<std::size_t>(n) + 1);
        for (long long i = 0; i <= n; ++i) out.push_back(double(i) / double(n));
    } else {
        for (double t = 0.0; t < 1.0; t += step) out.push_back(t);
        out.push_back(1.0);
    }
    return out;
}

// One row per frame, then a "video" summary row: pooled counts, pooled
// precision/recall, the frame-averaged F in f_measure, and the pooled-pixel
// F in the trailing column that per-frame rows leave empty.
inline void write_report_csv(std::ostream& out, std::span<const FrameScore> scores,
                             std::span<const int> frame_ids = {}) {
    out << "frame,tp,fp,fn,tn,precision,recall,f_measure,pooled_fm\n";
    FrameScore pooled;
    for (std::size_t i = 0; i < scores.size(); ++i) {
        const FrameScore& s = scores[i];
        const long long id = frame_ids.empty() ? static_cast<long long>(i)
                                               : static_cast<long long>(frame_ids[i]);
        out << id << ',' << s.tp << ',' << s.fp << ',' << s.fn << ',' << s.tn << ','
            << detail::fmt(s.precision) << ',' << detail::fmt(s.recall) << ','
            << detail::fmt(s.f_measure) << ",\n";
        pooled.tp += s.tp;
        pooled.fp += s.fp;
        pooled.fn += s.fn;
        pooled.tn += s.tn;
    }
    double ppr = 1.0, pre = 1.0, pfm = 1.0;
    if (pooled.tp + pooled.fp + pooled.fn > 0) {
        ppr = (pooled.tp + pooled.fp) > 0 ? double(pooled.tp) / double(pooled.tp + pooled.fp)
                                          : 0.0;
        pre = (pooled.tp + pooled.fn) > 0 ? double(pooled.tp) / double(pooled.tp + pooled.fn)
                                          : 0.0;
        pfm = detail::f_measure_of(ppr, pre);
    }
    out << "video," << pooled.tp << ',' << pooled.fp << ',' << pooled.fn << ',' << pooled.tn
        << ',' << detail::fmt(ppr) << ',' << detail::fmt(pre) << ','
        << detail::fmt(video_f_measure(scores)) << ',' << detail::fmt(pfm) << '\n';
}

inline void write_curve_csv(std::ostream& out, const SRCurve& curve) {
    out << "t_fm,success_rate\n";
    for (std::size_t i = 0; i < curve.thresholds.size(); ++i)
        out << detail::fmt(curve.thresholds[i]) << ',' << detail::fmt(curve.rates[i]) << '\n';
}

}  // namespace flowseg
