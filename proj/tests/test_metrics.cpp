#include <catch2/catch_amalgamated.hpp>

#include <sstream>

#include "flowseg/flowseg.hpp"
#include "helpers.hpp"

using namespace flowseg;
using Catch::Approx;

namespace {

ForegroundMask mask_of(int w, int h, const std::vector<PixelCoord>& fg) {
    ForegroundMask m(w, h);
    for (const PixelCoord& p : fg) m.set(p.x, p.y, true);
    return m;
}

}  // namespace

TEST_CASE("frame score: perfect match is all ones") {
    const ForegroundMask m = mask_of(10, 10, {{1, 1}, {2, 3}, {7, 9}});
    const FrameScore s = frame_score(m, m);
    REQUIRE(s.tp == 3);
    REQUIRE(s.fp == 0);
    REQUIRE(s.fn == 0);
    REQUIRE(s.tn == 97);
    REQUIRE(s.precision == 1.0);
    REQUIRE(s.recall == 1.0);
    REQUIRE(s.f_measure == 1.0);
}

TEST_CASE("frame score: half coverage gives two-thirds F") {
    ForegroundMask gt(10, 10);
    ForegroundMask pred(10, 10);
    for (int x = 0; x < 8; ++x) gt.set(x, 0, true);
    for (int x = 0; x < 4; ++x) pred.set(x, 0, true);
    const FrameScore s = frame_score(pred, gt);
    REQUIRE(s.precision == 1.0);
    REQUIRE(s.recall == 0.5);
    REQUIRE(s.f_measure == Approx(2.0 / 3.0).margin(1e-12));
}

TEST_CASE("frame score: empty-versus-empty counts as success") {
    const ForegroundMask empty(6, 4);
    const FrameScore s = frame_score(empty, empty);
    REQUIRE(s.precision == 1.0);
    REQUIRE(s.recall == 1.0);
    REQUIRE(s.f_measure == 1.0);
    REQUIRE(s.tn == 24);
}

TEST_CASE("frame score: claiming pixels against empty truth scores zero") {
    const ForegroundMask empty(6, 4);
    const FrameScore s = frame_score(mask_of(6, 4, {{0, 0}, {5, 3}}), empty);
    REQUIRE(s.precision == 0.0);
    REQUIRE(s.recall == 0.0);
    REQUIRE(s.f_measure == 0.0);
}

TEST_CASE("frame score: missing everything scores zero") {
    const ForegroundMask empty(6, 4);
    const FrameScore s = frame_score(empty, mask_of(6, 4, {{2, 2}}));
    REQUIRE(s.precision == 0.0);
    REQUIRE(s.recall == 0.0);
    REQUIRE(s.f_measure == 0.0);
}

TEST_CASE("frame score: counts re-derived independently on random masks") {
    Rng rng(61);
    for (int trial = 0; trial < 30; ++trial) {
        const int w = 2 + int(rng.uniform_below(20));
        const int h = 2 + int(rng.uniform_below(20));
        const ForegroundMask pred = th::random_mask(w, h, rng, 0.4);
        const ForegroundMask gt = th::random_mask(w, h, rng, 0.3);
        const FrameScore s = frame_score(pred, gt);

        long long tp = 0, fp = 0, fn = 0, tn = 0;
        for (int y = 0; y < h; ++y)
            for (int x = 0; x < w; ++x) {
                const bool p = pred.is_foreground(x, y), g = gt.is_foreground(x, y);
                if (p && g) ++tp;
                if (p && !g) ++fp;
                if (!p && g) ++fn;
                if (!p && !g) ++tn;
            }
        REQUIRE(s.tp == tp);
        REQUIRE(s.fp == fp);
        REQUIRE(s.fn == fn);
        REQUIRE(s.tn == tn);
        REQUIRE(s.tp + s.fp + s.fn + s.tn == w * h);
        if (tp + fp > 0) REQUIRE(s.precision == Approx(double(tp) / (tp + fp)).margin(1e-12));
        if (tp + fn > 0) REQUIRE(s.recall == Approx(double(tp) / (tp + fn)).margin(1e-12));
        // Swapping the roles swaps precision and recall.
        const FrameScore sw = frame_score(gt, pred);
        REQUIRE(sw.precision == s.recall);
        REQUIRE(sw.recall == s.precision);
        REQUIRE(sw.f_measure == Approx(s.f_measure).margin(1e-12));
    }
}

TEST_CASE("frame score: harmonic mean identity when both ratios are positive") {
    Rng rng(62);
    for (int trial = 0; trial < 20; ++trial) {
        const ForegroundMask pred = th::random_mask(15, 15, rng, 0.5);
        const ForegroundMask gt = th::random_mask(15, 15, rng, 0.5);
        const FrameScore s = frame_score(pred, gt);
        if (s.precision > 0.0 && s.recall > 0.0)
            REQUIRE(s.f_measure ==
                    Approx(2.0 / (1.0 / s.precision + 1.0 / s.recall)).margin(1e-12));
        REQUIRE(s.f_measure >= 0.0);
        REQUIRE(s.f_measure <= 1.0);
    }
}

TEST_CASE("frame score: shape mismatch is rejected") {
    REQUIRE_THROWS_AS(frame_score(ForegroundMask(3, 3), ForegroundMask(3, 4)),
                      DimensionMismatch);
}

TEST_CASE("video score: plain average of frame F-measures") {
    std::vector<FrameScore> scores(3);
    scores[0].f_measure = 1.0;
    scores[1].f_measure = 1.0;
    scores[2].f_measure = 1.0;
    REQUIRE(video_f_measure(scores) == 1.0);
    scores.resize(2);
    scores[1].f_measure = 0.0;
    REQUIRE(video_f_measure(scores) == 0.5);
    REQUIRE_THROWS_AS(video_f_measure({}), EmptySequence);
}

TEST_CASE("video score: frame averaging differs from pixel pooling by design") {
    // One easy frame found perfectly, one tiny object missed entirely.
    ForegroundMask big_gt(40, 40), big_pred(40, 40);
    for (int y = 0; y < 25; ++y)
        for (int x = 0; x < 40; ++x) {
            big_gt.set(x, y, true);
            big_pred.set(x, y, true);
        }
    const ForegroundMask small_gt = mask_of(40, 40, {{0, 30}, {1, 30}, {2, 30}});
    const ForegroundMask small_pred(40, 40);

    const std::vector<FrameScore> scores = {frame_score(big_pred, big_gt),
                                            frame_score(small_pred, small_gt)};
    REQUIRE(video_f_measure(scores) == Approx(0.5).margin(1e-12));

    const long long tp = scores[0].tp + scores[1].tp;
    const long long fp = scores[0].fp + scores[1].fp;
    const long long fn = scores[0].fn + scores[1].fn;
    const double pooled_pr = double(tp) / double(tp + fp);
    const double pooled_re = double(tp) / double(tp + fn);
    const double pooled_fm = 2.0 * pooled_pr * pooled_re / (pooled_pr + pooled_re);
    REQUIRE(pooled_fm > 0.99);  // pooling hides the failed frame
}

TEST_CASE("success rate: counts frames strictly above the threshold") {
    const std::vector<double> fms = {0.9, 0.4, 0.6};
    const std::vector<double> ts = {0.5};
    const SRCurve c = success_rate_curve(fms, ts);
    REQUIRE(c.rates.size() == 1);
    REQUIRE(c.rates[0] == Approx(2.0 / 3.0).margin(1e-12));
}

TEST_CASE("success rate: endpoints behave") {
    const std::vector<double> ones = {1.0, 1.0, 1.0};
    const std::vector<double> ts = {0.0, 0.99, 1.0};
    const SRCurve c = success_rate_curve(ones, ts);
    REQUIRE(c.rates[0] == 1.0);
    REQUIRE(c.rates[1] == 1.0);
    REQUIRE(c.rates[2] == 0.0);  // strictly above 1 is impossible
}

TEST_CASE("success rate: non-increasing along ascending thresholds") {
    Rng rng(63);
    std::vector<double> fms;
    for (int i = 0; i < 50; ++i) fms.push_back(rng.uniform());
    const std::vector<double> ts = uniform_thresholds(0.01);
    const SRCurve c = success_rate_curve(fms, ts);
    for (std::size_t i = 1; i < c.rates.size(); ++i) REQUIRE(c.rates[i] <= c.rates[i - 1]);
    REQUIRE(c.rates.front() <= 1.0);
    REQUIRE(c.rates.back() == 0.0);
}

TEST_CASE("success rate: input validation") {
    REQUIRE_THROWS_AS(success_rate_curve({}, std::vector<double>{0.5}), EmptySequence);
    const std::vector<double> fms = {0.5};
    REQUIRE_THROWS_AS(success_rate_curve(fms, std::vector<double>{1.5}),
                      std::invalid_argument);
    REQUIRE_THROWS_AS(success_rate_curve(fms, std::vector<double>{-0.1}),
                      std::invalid_argument);
}

TEST_CASE("threshold ladder: hundredths from zero to one") {
    const std::vector<double> ts = uniform_thresholds(0.01);
    REQUIRE(ts.size() == 101);
    REQUIRE(ts.front() == 0.0);
    REQUIRE(ts.back() == 1.0);
    for (std::size_t i = 1; i < ts.size(); ++i) REQUIRE(ts[i] > ts[i - 1]);
    REQUIRE(detail::fmt(ts[6]) == "0.06");
    REQUIRE(detail::fmt(ts[50]) == "0.5");

    const std::vector<double> quarters = uniform_thresholds(0.25);
    REQUIRE(quarters == std::vector<double>{0.0, 0.25, 0.5, 0.75, 1.0});
    REQUIRE_THROWS_AS(uniform_thresholds(0.0), std::invalid_argument);
}

TEST_CASE("report file: one row per frame plus a pooled summary row") {
    ForegroundMask gt(4, 4), pred(4, 4);
    gt.set(0, 0, true);
    gt.set(1, 0, true);
    pred.set(0, 0, true);
    const std::vector<FrameScore> scores = {frame_score(pred, gt), frame_score(gt, gt)};
    std::ostringstream out;
    write_report_csv(out, scores);
    const auto rows = th::parse_csv(out.str());
    REQUIRE(rows.size() == 4);  // header + 2 frames + summary
    REQUIRE(rows[0] == std::vector<std::string>{"frame", "tp", "fp", "fn", "tn", "precision",
                                                "recall", "f_measure", "pooled_fm"});
    REQUIRE(rows[1][0] == "0");
    REQUIRE(rows[1][1] == "1");   // tp
    REQUIRE(rows[1][3] == "1");   // fn
    REQUIRE(rows[1][8] == "");    // per-frame rows leave the pooled column empty
    REQUIRE(rows[3][0] == "video");
    REQUIRE(rows[3][1] == "3");   // pooled tp
    REQUIRE(std::stod(rows[3][7]) ==
            Approx((scores[0].f_measure + scores[1].f_measure) / 2.0).margin(1e-12));
    const double ppr = 3.0 / 3.0, pre = 3.0 / 4.0;
    REQUIRE(std::stod(rows[3][8]) ==
            Approx(2.0 * ppr * pre / (ppr + pre)).margin(1e-12));
}

TEST_CASE("curve file: threshold and rate per row") {
    SRCurve c;
    c.thresholds = {0.0, 0.5, 1.0};
    c.rates = {1.0, 1.0, 0.0};
    std::ostringstream out;
    write_curve_csv(out, c);
    REQUIRE(out.str() == "t_fm,success_rate\n0,1\n0.5,1\n1,0\n");
}
