#pragma once

// Global-motion estimation between frame t and frame t-k.
//
// Each pixel p with flow f votes for the correspondence p -> p + f, since the
// flow over the interval points from the current frame into the earlier one.
// A homography is fit to such pairs by the inhomogeneous DLT (h33 fixed at 1,
// 8 unknowns, 2 equations per pair) with Hartley-style normalization of both
// point sets. RANSAC draws its minimal samples from distinct cells of a
// coarse grid so the hypotheses cover the frame instead of clustering.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <span>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/SVD>

#include "flowseg/core.hpp"
#include "flowseg/rng.hpp"

namespace flowseg {

struct TooFewPairs : Error { using Error::Error; };
struct DegenerateSample : Error { using Error::Error; };
struct NoValidHypothesis : Error { using Error::Error; };

struct PointPair {
    PixelCoord p;  // pixel in the current frame
    Vec2 q;        // matched position in the earlier frame
};

struct RansacConfig {
    int sample_n = 4;        // pairs per hypothesis, minimal for a homography
    int iterations = 50;     // hypothesis rounds, all of them always run
    int grid_rows = 4;
    int grid_cols = 4;
    double inlier_tol = 1.0;  // reprojection residual bound, pixels
    int eval_stride = 8;      // subsampling step of the scoring grid
    std::uint64_t rng_seed = 0x5eed;

    friend bool operator==(const RansacConfig&, const RansacConfig&) = default;

    void validate() const {
        if (sample_n < 4) throw std::invalid_argument("sample_n must be >= 4");
        if (iterations < 1) throw std::invalid_argument("iterations must be >= 1");
        if (grid_rows < 1 || grid_cols < 1)
            throw std::invalid_argument("grid dimensions must be >= 1");
        if (static_cast<long long>(grid_rows) * grid_cols < sample_n)
            throw std::invalid_argument("grid has fewer cells than sample_n");
        if (!(inlier_tol > 0.0)) throw std::invalid_argument("inlier_tol must be > 0");
        if (eval_stride < 1) throw std::invalid_argument("eval_stride must be >= 1");
    }
};

struct RansacResult {
    Homography homography;
    double inlier_fraction = 0.0;  // share of scoring-grid points within tolerance
    int iterations_used = 0;
    std::vector<PixelCoord> sample_points;  // winning minimal sample, frame-t side
};

// Success model for unguided sampling: each round independently hits an
// all-background sample with probability (1/2)^n under a half-contaminated
// worst case, so p = 1 - (1 - 2^-n)^iterations.
inline double ideal_success_rate(int sample_n, int iterations) {
    if (sample_n < 1) throw std::invalid_argument("sample_n must be >= 1");
    if (iterations < 1) throw std::invalid_argument("iterations must be >= 1");
    const double clean = std::pow(0.5, sample_n);
    return 1.0 - std::pow(1.0 - clean, iterations);
}

namespace detail {

// Similarity that centers the points and scales mean distance to sqrt(2).
struct Similarity {
    double scale = 1.0;
    double cx = 0.0;
    double cy = 0.0;
};

template <class GetX, class GetY>
Similarity normalizing_similarity(std::size_t n, GetX gx, GetY gy) {
    double cx = 0.0, cy = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        cx += gx(i);
        cy += gy(i);
    }
    cx /= double(n);
    cy /= double(n);
    double mean_dist = 0.0;
    for (std::size_t i = 0; i < n; ++i)
        mean_dist += std::hypot(gx(i) - cx, gy(i) - cy);
    mean_dist /= double(n);
    if (mean_dist < 1e-12) throw DegenerateSample("all points coincide");
    return {std::sqrt(2.0) / mean_dist, cx, cy};
}

inline double triangle_area(double ax, double ay, double bx, double by, double cx, double cy) {
    return 0.5 * std::abs((bx - ax) * (cy - ay) - (cx - ax) * (by - ay));
}

}  // namespace detail

// Least-squares homography through the given correspondences; exact when
// given exactly four pairs in general position. Collinear source triples in
// a minimal sample, coincident point sets, and rank-deficient systems all
// throw DegenerateSample.
inline Homography solve_homography(std::span<const PointPair> pairs) {
    const std::size_t n = pairs.size();
    if (n < 4) throw TooFewPairs("homography needs at least 4 pairs");

    if (n == 4) {
        for (int a = 0; a < 4; ++a)
            for (int b = a + 1; b < 4; ++b)
                for (int c = b + 1; c < 4; ++c) {
                    const double area = detail::triangle_area(
                        pairs[a].p.x, pairs[a].p.y, pairs[b].p.x, pairs[b].p.y,
                        pairs[c].p.x, pairs[c].p.y);
                    if (area < 1e-6) throw DegenerateSample("collinear minimal sample");
                }
    }

    const detail::Similarity tp = detail::normalizing_similarity(
        n, [&](std::size_t i) { return double(pairs[i].p.x); },
        [&](std::size_t i) { return double(pairs[i].p.y); });
    const detail::Similarity tq = detail::normalizing_similarity(
        n, [&](std::size_t i) { return pairs[i].q.x; },
        [&](std::size_t i) { return pairs[i].q.y; });

    Eigen::MatrixXd A(2 * n, 8);
    Eigen::VectorXd b(2 * n);
    for (std::size_t i = 0; i < n; ++i) {
        const double px = (pairs[i].p.x - tp.cx) * tp.scale;
        const double py = (pairs[i].p.y - tp.cy) * tp.scale;
        const double qx = (pairs[i].q.x - tq.cx) * tq.scale;
        const double qy = (pairs[i].q.y - tq.cy) * tq.scale;
        A.row(2 * i) << px, py, 1.0, 0.0, 0.0, 0.0, -qx * px, -qx * py;
        b(2 * i) = qx;
        A.row(2 * i + 1) << 0.0, 0.0, 0.0, px, py, 1.0, -qy * px, -qy * py;
        b(2 * i + 1) = qy;
    }

    Eigen::JacobiSVD<Eigen::MatrixXd> svd(A, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const auto& sv = svd.singularValues();
    if (sv(0) < 1e-12 || sv(7) < 1e-12 * sv(0))
        throw DegenerateSample("rank-deficient correspondence system");
    const Eigen::VectorXd h = svd.solve(b);

    // Undo both similarities: H = Tq^-1 * Hn * Tp.
    const std::array<double, 9> hn = {h(0), h(1), h(2), h(3), h(4), h(5), h(6), h(7), 1.0};
    const std::array<double, 9> tpm = {tp.scale, 0.0, -tp.scale * tp.cx,
                                       0.0, tp.scale, -tp.scale * tp.cy,
                                       0.0, 0.0, 1.0};
    const double inv_s = 1.0 / tq.scale;
    const std::array<double, 9> tqinv = {inv_s, 0.0, tq.cx, 0.0, inv_s, tq.cy, 0.0, 0.0, 1.0};
    try {
        return Homography::from_row_major(mat3_mul(tqinv, mat3_mul(hn, tpm)));
    } catch (const SingularHomography&) {
        throw DegenerateSample("denormalized homography has vanishing scale");
    }
}

// Euclidean distance between H(p) and q; +inf when p maps to infinity.
inline double reprojection_residual(const Homography& h, const PointPair& pair) {
    const MappedPoint m = h.apply(pair.p.x, pair.p.y);
    if (!m.finite) return std::numeric_limits<double>::infinity();
    return std::hypot(m.x - pair.q.x, m.y - pair.q.y);
}

// sample_n pairs drawn from distinct cells of a grid_rows x grid_cols
// partition, one uniform pixel per chosen cell. Draw order is fixed, so a
// given rng state always yields the same sample.
inline std::vector<PointPair> stratified_sample(const FlowField& field,
                                                const RansacConfig& cfg, Rng& rng) {
    cfg.validate();
    if (field.width < cfg.grid_cols || field.height < cfg.grid_rows)
        throw std::invalid_argument("field smaller than the sampling grid");

    const int cells = cfg.grid_rows * cfg.grid_cols;
    std::vector<int> order(static_cast<std::size_t>(cells));
    for (int i = 0; i < cells; ++i) order[static_cast<std::size_t>(i)] = i;
    // Partial Fisher-Yates: the first sample_n entries become the chosen cells.
    for (int i = 0; i < cfg.sample_n; ++i) {
        const auto j = i + static_cast<int>(rng.uniform_below(std::uint64_t(cells - i)));
        std::swap(order[static_cast<std::size_t>(i)], order[static_cast<std::size_t>(j)]);
    }

    std::vector<PointPair> sample;
    sample.reserve(static_cast<std::size_t>(cfg.sample_n));
    for (int i = 0; i < cfg.sample_n; ++i) {
        const int cell = order[static_cast<std::size_t>(i)];
        const int row = cell / cfg.grid_cols;
        const int col = cell % cfg.grid_cols;
        const int x0 = (field.width * col) / cfg.grid_cols;
        const int x1 = (field.width * (col + 1)) / cfg.grid_cols;
        const int y0 = (field.height * row) / cfg.grid_rows;
        const int y1 = (field.height * (row + 1)) / cfg.grid_rows;
        const int x = x0 + static_cast<int>(rng.uniform_below(std::uint64_t(x1 - x0)));
        const int y = y0 + static_cast<int>(rng.uniform_below(std::uint64_t(y1 - y0)));
        const FlowVec& f = field.at(x, y);
        sample.push_back({{x, y}, {x + double(f.u), y + double(f.v)}});
    }
    return sample;
}

// Fixed-round RANSAC over stratified minimal samples, scored on a subsampled
// pixel grid, followed by a least-squares refit on the winner's inliers.
// Round r draws from its own rng stream (rng_seed, r), so results do not
// depend on how many rounds preceded a given one.
inline RansacResult ransac_estimate(const FlowField& field, const RansacConfig& cfg) {
    cfg.validate();
    if (field.width < cfg.grid_cols || field.height < cfg.grid_rows)
        throw std::invalid_argument("field smaller than the sampling grid");

    // Scoring grid: every eval_stride-th pixel in both directions.
    std::vector<PointPair> eval;
    eval.reserve((std::size_t(field.width / cfg.eval_stride) + 1) *
                 (std::size_t(field.height / cfg.eval_stride) + 1));
    for (int y = 0; y < field.height; y += cfg.eval_stride)
        for (int x = 0; x < field.width; x += cfg.eval_stride) {
            if (!field.finite_at(x, y)) continue;
            const FlowVec& f = field.at(x, y);
            eval.push_back({{x, y}, {x + double(f.u), y + double(f.v)}});
        }
    if (eval.empty()) throw NoValidHypothesis("no finite pixels on the scoring grid");

    const auto count_inliers = [&](const Homography& h) {
        std::size_t inliers = 0;
        for (const PointPair& pp : eval)
            inliers += (reprojection_residual(h, pp) < cfg.inlier_tol);
        return inliers;
    };

    bool have_best = false;
    Homography best_h;
    std::vector<PointPair> best_sample;
    std::size_t best_inliers = 0;
    for (int round = 0; round < cfg.iterations; ++round) {
        Rng rng(cfg.rng_seed, static_cast<std::uint64_t>(round));
        std::vector<PointPair> sample;
        Homography h;
        try {
            sample = stratified_sample(field, cfg, rng);
            h = solve_homography(sample);
        } catch (const DegenerateSample&) {
            continue;  // round consumed, not retried
        }
        const std::size_t inliers = count_inliers(h);
        if (!have_best || inliers > best_inliers) {
            have_best = true;
            best_h = h;
            best_sample = std::move(sample);
            best_inliers = inliers;
        }
    }
    if (!have_best) throw NoValidHypothesis("every hypothesis round degenerated");

    std::vector<PointPair> consensus;
    consensus.reserve(best_inliers);
    for (const PointPair& pp : eval)
        if (reprojection_residual(best_h, pp) < cfg.inlier_tol) consensus.push_back(pp);

    Homography final_h = best_h;
    if (consensus.size() >= 4) {
        try {
            final_h = solve_homography(consensus);
        } catch (const DegenerateSample&) {
            final_h = best_h;  // keep the winning hypothesis
        }
    }

    RansacResult result;
    result.homography = final_h;
    result.inlier_fraction = double(count_inliers(final_h)) / double(eval.size());
    result.iterations_used = cfg.iterations;
    result.sample_points.reserve(best_sample.size());
    for (const PointPair& pp : best_sample) result.sample_points.push_back(pp.p);
    return result;
}

}  // namespace flowseg
