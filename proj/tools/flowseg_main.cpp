// flowseg: moving-object masks from dense flow of a moving camera.
//
//   flowseg detect --flows DIR --out DIR [--config FILE]
//   flowseg eval   --pred DIR --gt DIR --report FILE --curve FILE [--config FILE]
//   flowseg synth  --script FILE --out DIR
//   flowseg bench  --flows DIR [--config FILE] [--reps N]
//
// Exit codes: 0 success, 1 usage or configuration problem, 2 data problem.

#include <algorithm>
#include <cctype>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "flowseg/flowseg.hpp"

namespace fs = std::filesystem;
using namespace flowseg;

namespace {

RunConfig load_config(const std::string& path) {
    if (path.empty()) return {};
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file: " + path);
    return parse_run_config(in);
}

std::vector<fs::path> sorted_files(const fs::path& dir, const std::string& ext) {
    if (!fs::is_directory(dir)) throw Error("not a directory: " + dir.string());
    std::vector<fs::path> out;
    for (const auto& entry : fs::directory_iterator(dir))
        if (entry.is_regular_file() && entry.path().extension() == ext)
            out.push_back(entry.path());
    std::sort(out.begin(), out.end(),
              [](const fs::path& a, const fs::path& b) { return a.filename() < b.filename(); });
    return out;
}

// Leading digits of the stem, or the fallback when there are none.
long long frame_id_of(const fs::path& p, long long fallback) {
    const std::string stem = p.stem().string();
    std::size_t i = 0;
    while (i < stem.size() && std::isdigit(static_cast<unsigned char>(stem[i]))) ++i;
    if (i == 0) return fallback;
    return std::stoll(stem.substr(0, i));
}

void telemetry_header(std::ostream& out) {
    out << "frame,h11,h12,h13,h21,h22,h23,h31,h32,h33,"
           "mode,vp_x,vp_y,magnitude_gradient,threshold_used,foreground_pixels\n";
}

void telemetry_row(std::ostream& out, long long frame, const FrameDetection& det) {
    out << frame;
    for (double v : det.homography.row_major()) out << ',' << detail::fmt(v);
    out << ',' << to_string(det.decision.mode);
    if (det.decision.vanishing_point)
        out << ',' << detail::fmt(det.decision.vanishing_point->x) << ','
            << detail::fmt(det.decision.vanishing_point->y);
    else
        out << ",,";
    out << ',' << detail::fmt(det.decision.magnitude_gradient) << ','
        << detail::fmt(det.threshold_used) << ',' << det.mask.foreground_count() << '\n';
}

void telemetry_failed_row(std::ostream& out, long long frame) {
    out << frame << ",,,,,,,,,,failed,,,,,0\n";
}

std::uint64_t fnv1a(std::uint64_t h, const std::uint8_t* data, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) {
        h ^= data[i];
        h *= 1099511628211ULL;
    }
    return h;
}

int cmd_detect(const std::string& flows_dir, const std::string& out_dir,
               const std::string& config_path) {
    const RunConfig cfg = load_config(config_path);
    const std::vector<fs::path> files = sorted_files(flows_dir, ".flo");
    if (files.empty()) {
        std::cerr << "no flow files in " << flows_dir << '\n';
        return 2;
    }
    fs::create_directories(out_dir);
    std::ofstream telem(fs::path(out_dir) / "telemetry.csv", std::ios::binary | std::ios::trunc);
    if (!telem) throw Error("cannot create telemetry.csv");
    telemetry_header(telem);

    for (std::size_t i = 0; i < files.size(); ++i) {
        const FlowField flow = read_flow_file(files[i], cfg.detector.interval_k);
        const long long frame = frame_id_of(files[i], static_cast<long long>(i));
        const fs::path mask_path =
            fs::path(out_dir) / (files[i].stem().string() + ".pgm");
        try {
            const FrameDetection det = detect_frame(flow, cfg.detector);
            write_mask_file(det.mask, mask_path);
            telemetry_row(telem, frame, det);
        } catch (const FrameFailed& e) {
            std::cerr << "frame " << frame << " failed: " << e.what() << '\n';
            write_mask_file(ForegroundMask(flow.width, flow.height), mask_path);
            telemetry_failed_row(telem, frame);
        }
    }
    telem.flush();
    if (!telem) throw Error("short write on telemetry.csv");
    return 0;
}

int cmd_eval(const std::string& pred_dir, const std::string& gt_dir,
             const std::string& report_path, const std::string& curve_path,
             const std::string& config_path) {
    const RunConfig cfg = load_config(config_path);
    const std::vector<fs::path> preds = sorted_files(pred_dir, ".pgm");
    const std::vector<fs::path> gts = sorted_files(gt_dir, ".pgm");
    if (preds.empty() || gts.empty()) {
        std::cerr << "no masks to compare\n";
        return 2;
    }
    if (preds.size() != gts.size()) {
        std::cerr << "mask count mismatch: " << preds.size() << " predictions vs "
                  << gts.size() << " references\n";
        return 2;
    }

    std::vector<FrameScore> scores;
    std::vector<double> fms;
    std::vector<int> ids;
    scores.reserve(preds.size());
    for (std::size_t i = 0; i < preds.size(); ++i) {
        const ForegroundMask p = read_mask_file(preds[i]);
        const ForegroundMask g = read_mask_file(gts[i]);
        if (!p.same_shape(g))
            throw DimensionMismatch("mask shapes differ: " + preds[i].filename().string() +
                                    " vs " + gts[i].filename().string());
        scores.push_back(frame_score(p, g));
        fms.push_back(scores.back().f_measure);
        ids.push_back(static_cast<int>(frame_id_of(preds[i], static_cast<long long>(i))));
    }

    std::ofstream report(report_path, std::ios::binary | std::ios::trunc);
    if (!report) throw Error("cannot create report file: " + report_path);
    write_report_csv(report, scores, ids);
    report.flush();
    if (!report) throw Error("short write on report file");

    const SRCurve curve = success_rate_curve(fms, uniform_thresholds(cfg.curve_step));
    std::ofstream curve_out(curve_path, std::ios::binary | std::ios::trunc);
    if (!curve_out) throw Error("cannot create curve file: " + curve_path);
    write_curve_csv(curve_out, curve);
    curve_out.flush();
    if (!curve_out) throw Error("short write on curve file");

    std::size_t above_half = 0;
    for (double fm : fms) above_half += (fm > 0.5);
    std::cout << "frames = " << fms.size() << '\n'
              << "video_f_measure = " << detail::fmt(video_f_measure(scores)) << '\n'
              << "success_rate_at_0.5 = "
              << detail::fmt(double(above_half) / double(fms.size())) << '\n';
    return 0;
}

int cmd_synth(const std::string& script_path, const std::string& out_dir) {
    std::ifstream in(script_path);
    if (!in) throw ConfigError("cannot open script file: " + script_path);
    const SceneScript script = parse_scene_script(in);
    write_sequence(script, out_dir);
    std::cout << "frames = " << (script.num_frames - script.interval_k) << '\n'
              << "resolution = " << script.width << 'x' << script.height << '\n';
    return 0;
}

double median_of(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    const std::size_t n = v.size();
    return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

double percentile95_of(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    const std::size_t n = v.size();
    const std::size_t idx = std::min(n - 1, static_cast<std::size_t>(std::ceil(0.95 * n)) - 1);
    return v[idx];
}

int cmd_bench(const std::string& flows_dir, const std::string& config_path, int reps) {
    if (reps < 1) throw ConfigError("reps must be >= 1");
    const RunConfig cfg = load_config(config_path);
    const std::vector<fs::path> files = sorted_files(flows_dir, ".flo");
    if (files.empty()) {
        std::cerr << "no flow files in " << flows_dir << '\n';
        return 2;
    }

    std::vector<FlowField> flows;
    flows.reserve(files.size());
    for (const fs::path& f : files) flows.push_back(read_flow_file(f, cfg.detector.interval_k));

    using clock = std::chrono::steady_clock;
    const auto run_once = [&](const FlowField& flow, const DetectorConfig& dc,
                              std::uint64_t* digest) {
        const auto t0 = clock::now();
        try {
            const FrameDetection det = detect_frame(flow, dc);
            if (digest)
                *digest = fnv1a(*digest, det.mask.labels.data(), det.mask.labels.size());
        } catch (const FrameFailed&) {
            if (digest) {
                const std::uint8_t zero = 0;
                for (std::size_t i = 0; i < flow.pixel_count(); ++i)
                    *digest = fnv1a(*digest, &zero, 1);
            }
        }
        return std::chrono::duration<double, std::milli>(clock::now() - t0).count();
    };

    std::vector<double> times;
    times.reserve(flows.size() * static_cast<std::size_t>(reps));
    std::uint64_t first_digest = 0;
    bool digests_agree = true;
    for (int rep = 0; rep < reps; ++rep) {
        std::uint64_t digest = 1469598103934665603ULL;  // FNV offset basis
        for (const FlowField& flow : flows)
            times.push_back(run_once(flow, cfg.detector, &digest));
        if (rep == 0)
            first_digest = digest;
        else
            digests_agree = digests_agree && (digest == first_digest);
    }
    if (!digests_agree) {
        std::cerr << "mask digests differ between repetitions\n";
        return 2;
    }

    std::cout << "frames = " << flows.size() << '\n'
              << "resolution = " << flows.front().width << 'x' << flows.front().height << '\n'
              << "reps = " << reps << '\n'
              << "median_ms = " << detail::fmt(median_of(times)) << '\n'
              << "p95_ms = " << detail::fmt(percentile95_of(times)) << '\n';
    {
        char hex[17];
        std::snprintf(hex, sizeof hex, "%016llx",
                      static_cast<unsigned long long>(first_digest));
        std::cout << "mask_digest = " << hex << '\n';
    }

    // Cost versus hypothesis rounds; everything else held fixed.
    std::cout << "iterations,median_ms\n";
    std::vector<double> xs, ys;
    for (int iters = 10; iters <= 100; iters += 10) {
        DetectorConfig dc = cfg.detector;
        dc.ransac.iterations = iters;
        std::vector<double> sweep;
        sweep.reserve(flows.size() * 2);
        for (int rep = 0; rep < 2; ++rep)
            for (const FlowField& flow : flows) sweep.push_back(run_once(flow, dc, nullptr));
        const double med = median_of(sweep);
        xs.push_back(iters);
        ys.push_back(med);
        std::cout << iters << ',' << detail::fmt(med) << '\n';
    }

    // Least-squares line and its coefficient of determination.
    const double n = double(xs.size());
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        sx += xs[i];
        sy += ys[i];
        sxx += xs[i] * xs[i];
        sxy += xs[i] * ys[i];
    }
    const double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    const double intercept = (sy - slope * sx) / n;
    double ss_res = 0, ss_tot = 0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        const double fit = slope * xs[i] + intercept;
        ss_res += (ys[i] - fit) * (ys[i] - fit);
        ss_tot += (ys[i] - sy / n) * (ys[i] - sy / n);
    }
    const double r2 = ss_tot > 0 ? 1.0 - ss_res / ss_tot : 1.0;
    std::cout << "fit_slope_ms_per_iteration = " << detail::fmt(slope) << '\n'
              << "fit_intercept_ms = " << detail::fmt(intercept) << '\n'
              << "fit_r_squared = " << detail::fmt(r2) << '\n';
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"moving-object detection from dense optical flow"};
    app.require_subcommand(1);

    std::string flows_dir, out_dir, config_path, pred_dir, gt_dir;
    std::string report_path, curve_path, script_path;
    int reps = 5;

    CLI::App* detect = app.add_subcommand("detect", "detect foreground masks per flow field");
    detect->add_option("--flows", flows_dir, "directory of .flo inputs")->required();
    detect->add_option("--out", out_dir, "output directory for masks + telemetry")->required();
    detect->add_option("--config", config_path, "key = value run configuration");

    CLI::App* eval = app.add_subcommand("eval", "score predicted masks against references");
    eval->add_option("--pred", pred_dir, "directory of predicted .pgm masks")->required();
    eval->add_option("--gt", gt_dir, "directory of reference .pgm masks")->required();
    eval->add_option("--report", report_path, "per-frame score CSV to write")->required();
    eval->add_option("--curve", curve_path, "success-rate curve CSV to write")->required();
    eval->add_option("--config", config_path, "key = value run configuration");

    CLI::App* synth = app.add_subcommand("synth", "generate a scripted ground-truth sequence");
    synth->add_option("--script", script_path, "scene script file")->required();
    synth->add_option("--out", out_dir, "output directory")->required();

    CLI::App* bench = app.add_subcommand("bench", "time detection over a flow directory");
    bench->add_option("--flows", flows_dir, "directory of .flo inputs")->required();
    bench->add_option("--config", config_path, "key = value run configuration");
    bench->add_option("--reps", reps, "repetitions over the sequence");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 1;
    }

    try {
        if (detect->parsed()) return cmd_detect(flows_dir, out_dir, config_path);
        if (eval->parsed()) return cmd_eval(pred_dir, gt_dir, report_path, curve_path, config_path);
        if (synth->parsed()) return cmd_synth(script_path, out_dir);
        if (bench->parsed()) return cmd_bench(flows_dir, config_path, reps);
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return 1;
    } catch (const std::invalid_argument& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }
    return 1;
}
