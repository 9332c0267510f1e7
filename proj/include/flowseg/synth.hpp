#pragma once

// Scripted ground-truth sequences: a rigid camera motion repeated every
// frame, plus independently moving objects stamped on top.
//
// Conventions, chosen once and used everywhere:
//   - flow points from frame t into frame t-k, p_earlier = p + f;
//   - the scripted camera parameters directly describe that backward
//     per-frame map, composed as translation * zoom * rotation;
//   - over an interval of k frames the background map is the k-fold product
//     and an object displaces by k * velocity, which is exactly the flow
//     written inside its region;
//   - the region itself drifts by +velocity per frame, objects overwrite
//     the background flow, and noise lands on every pixel afterward.

#include <array>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "flowseg/core.hpp"
#include "flowseg/detector.hpp"
#include "flowseg/flo_io.hpp"
#include "flowseg/kvfile.hpp"
#include "flowseg/pgm_io.hpp"
#include "flowseg/rng.hpp"

namespace flowseg {

struct NonInvertibleComposition : Error { using Error::Error; };

struct CameraMotion {
    Vec2 translation{0.0, 0.0};  // pixels per frame
    double rotation_deg = 0.0;   // per frame, about the image center
    double zoom = 1.0;           // scale per frame
    Vec2 zoom_center{0.0, 0.0};
    friend bool operator==(const CameraMotion&, const CameraMotion&) = default;
};

struct SceneObject {
    enum class Shape { Rectangle, Ellipse };
    Shape shape = Shape::Rectangle;
    // rectangle: x, y, w, h; ellipse: cx, cy, rx, ry
    std::array<double, 4> geom{};
    Vec2 velocity{0.0, 0.0};  // pixels per frame, same sign convention as flow

    bool contains(int px, int py, int frame) const {
        const double sx = geom[0] + velocity.x * frame;
        const double sy = geom[1] + velocity.y * frame;
        if (shape == Shape::Rectangle)
            return px >= sx && px < sx + geom[2] && py >= sy && py < sy + geom[3];
        const double dx = (px - sx) / geom[2];
        const double dy = (py - sy) / geom[3];
        return dx * dx + dy * dy <= 1.0;
    }

    friend bool operator==(const SceneObject&, const SceneObject&) = default;
};

struct SceneScript {
    int width = 320;
    int height = 240;
    int num_frames = 30;
    int interval_k = 5;
    double noise_sigma = 0.0;
    std::uint64_t rng_seed = 0;
    CameraMotion camera;
    std::vector<SceneObject> objects;

    friend bool operator==(const SceneScript&, const SceneScript&) = default;

    void validate() const {
        if (width < 8 || height < 8) throw ConfigError("scene dimensions must be >= 8");
        if (width > detail::kMaxDim || height > detail::kMaxDim)
            throw ConfigError("scene dimensions above 32768");
        if (interval_k < 1) throw ConfigError("interval_k must be >= 1");
        if (num_frames <= interval_k)
            throw ConfigError("num_frames must exceed interval_k");
        if (num_frames > 9999) throw ConfigError("num_frames above 9999");
        if (!(noise_sigma >= 0.0)) throw ConfigError("noise_sigma must be >= 0");
        if (!(camera.zoom > 0.0)) throw ConfigError("camera.zoom must be > 0");
        for (std::size_t i = 0; i < objects.size(); ++i) {
            const SceneObject& o = objects[i];
            if (!(o.geom[2] > 0.0) || !(o.geom[3] > 0.0))
                throw ConfigError("object " + std::to_string(i + 1) + ": nonpositive extent");
            // Motion is linear, so checking the first and last frame suffices.
            for (const int t : {0, num_frames - 1}) {
                const double sx = o.geom[0] + o.velocity.x * t;
                const double sy = o.geom[1] + o.velocity.y * t;
                double lo_x, hi_x, lo_y, hi_y;
                if (o.shape == SceneObject::Shape::Rectangle) {
                    lo_x = sx; hi_x = sx + o.geom[2];
                    lo_y = sy; hi_y = sy + o.geom[3];
                } else {
                    lo_x = sx - o.geom[2]; hi_x = sx + o.geom[2];
                    lo_y = sy - o.geom[3]; hi_y = sy + o.geom[3];
                }
                if (lo_x < 0.0 || hi_x > width || lo_y < 0.0 || hi_y > height)
                    throw ConfigError("object " + std::to_string(i + 1) +
                                      " leaves the frame at frame " + std::to_string(t));
            }
        }
    }
};

struct GroundTruthFrame {
    int frame_index = 0;
    FlowField flow;
    ForegroundMask gt_mask;
    Homography gt_homography;
};

// The scripted backward map for one frame step.
inline Homography per_frame_homography(const SceneScript& s) {
    const double cx = s.width / 2.0, cy = s.height / 2.0;
    const double th = s.camera.rotation_deg * (3.14159265358979323846 / 180.0);
    const double c = std::cos(th), si = std::sin(th);
    const std::array<double, 9> rot = {c, -si, cx - c * cx + si * cy,
                                       si, c, cy - si * cx - c * cy,
                                       0.0, 0.0, 1.0};
    const double z = s.camera.zoom;
    const Vec2 zc = s.camera.zoom_center;
    const std::array<double, 9> zoom = {z, 0.0, (1.0 - z) * zc.x,
                                        0.0, z, (1.0 - z) * zc.y,
                                        0.0, 0.0, 1.0};
    const std::array<double, 9> trans = {1.0, 0.0, s.camera.translation.x,
                                         0.0, 1.0, s.camera.translation.y,
                                         0.0, 0.0, 1.0};
    return Homography::from_row_major(mat3_mul(trans, mat3_mul(zoom, rot)));
}

// Product of per-step maps, first element applied first. The scale entry is
// renormalized at the end; if it collapses the chain is rejected.
inline Homography compose_homographies(std::span<const Homography> steps) {
    if (steps.empty()) throw std::invalid_argument("nothing to compose");
    std::array<double, 9> acc = {1, 0, 0, 0, 1, 0, 0, 0, 1};
    for (const Homography& h : steps) acc = mat3_mul(h.row_major(), acc);
    try {
        return Homography::from_row_major(acc);
    } catch (const SingularHomography&) {
        throw NonInvertibleComposition("composed map has vanishing scale entry");
    }
}

// The scripted map across a whole interval, k applications of the same step.
inline Homography interval_homography(const SceneScript& s) {
    const Homography step = per_frame_homography(s);
    const std::vector<Homography> steps(static_cast<std::size_t>(s.interval_k), step);
    return compose_homographies(steps);
}

// Frames t = interval_k .. num_frames-1, each with its flow field, its exact
// foreground mask, and the background map the flow was built from.
inline std::vector<GroundTruthFrame> generate_sequence(const SceneScript& script) {
    script.validate();
    const Homography h = interval_homography(script);
    const int k = script.interval_k;

    std::vector<GroundTruthFrame> frames;
    frames.reserve(static_cast<std::size_t>(script.num_frames - k));
    for (int t = k; t < script.num_frames; ++t) {
        GroundTruthFrame gt;
        gt.frame_index = t;
        gt.flow = ideal_background_flow(h, script.width, script.height);
        gt.flow.interval_k = k;
        gt.gt_mask = ForegroundMask(script.width, script.height);
        gt.gt_homography = h;

        for (const SceneObject& obj : script.objects) {
            const FlowVec of = {static_cast<float>(obj.velocity.x * k),
                                static_cast<float>(obj.velocity.y * k)};
            for (int y = 0; y < script.height; ++y)
                for (int x = 0; x < script.width; ++x)
                    if (obj.contains(x, y, t)) {
                        gt.flow.at(x, y) = of;
                        gt.gt_mask.set(x, y, true);
                    }
        }

        if (script.noise_sigma > 0.0) {
            Rng rng(script.rng_seed, static_cast<std::uint64_t>(t));
            for (FlowVec& f : gt.flow.vectors) {
                f.u += static_cast<float>(rng.normal(script.noise_sigma));
                f.v += static_cast<float>(rng.normal(script.noise_sigma));
            }
        }
        frames.push_back(std::move(gt));
    }
    return frames;
}

// ------------------------------------------------------------ script I/O ---

inline SceneScript parse_scene_script(std::istream& in) {
    KeyValueFile kv = KeyValueFile::parse(in);
    SceneScript s;
    s.width = static_cast<int>(kv.get_int("width"));
    s.height = static_cast<int>(kv.get_int("height"));
    s.num_frames = static_cast<int>(kv.get_int("num_frames"));
    s.interval_k = static_cast<int>(kv.get_int("interval_k"));
    s.noise_sigma = kv.get_double("noise_sigma", 0.0);
    s.rng_seed = kv.get_u64("rng_seed", 0);
    s.camera.translation = kv.get_vec2("camera.translation", {0.0, 0.0});
    s.camera.rotation_deg = kv.get_double("camera.rotation_deg", 0.0);
    s.camera.zoom = kv.get_double("camera.zoom", 1.0);
    s.camera.zoom_center = kv.get_vec2("camera.zoom_center", {s.width / 2.0, s.height / 2.0});

    for (const int id : kv.numbered_groups("object")) {
        const std::string base = "object." + std::to_string(id) + ".";
        SceneObject o;
        const std::string shape = kv.get_string(base + "shape");
        if (shape == "rectangle") {
            o.shape = SceneObject::Shape::Rectangle;
            o.geom = kv.get_four(base + "rect");
        } else if (shape == "ellipse") {
            o.shape = SceneObject::Shape::Ellipse;
            o.geom = kv.get_four(base + "ellipse");
        } else {
            throw ConfigError(base + "shape must be rectangle or ellipse");
        }
        if (kv.has(base + "velocity")) o.velocity = kv.get_vec2(base + "velocity");
        s.objects.push_back(o);
    }
    kv.reject_unknown();
    s.validate();
    return s;
}

inline std::string serialize_scene_script(const SceneScript& s) {
    std::ostringstream out;
    out << "width = " << s.width << '\n'
        << "height = " << s.height << '\n'
        << "num_frames = " << s.num_frames << '\n'
        << "interval_k = " << s.interval_k << '\n'
        << "noise_sigma = " << detail::fmt(s.noise_sigma) << '\n'
        << "rng_seed = " << s.rng_seed << '\n'
        << "camera.translation = " << detail::fmt(s.camera.translation.x) << ' '
        << detail::fmt(s.camera.translation.y) << '\n'
        << "camera.rotation_deg = " << detail::fmt(s.camera.rotation_deg) << '\n'
        << "camera.zoom = " << detail::fmt(s.camera.zoom) << '\n'
        << "camera.zoom_center = " << detail::fmt(s.camera.zoom_center.x) << ' '
        << detail::fmt(s.camera.zoom_center.y) << '\n';
    for (std::size_t i = 0; i < s.objects.size(); ++i) {
        const SceneObject& o = s.objects[i];
        const std::string base = "object." + std::to_string(i + 1) + ".";
        const bool rect = o.shape == SceneObject::Shape::Rectangle;
        out << base << "shape = " << (rect ? "rectangle" : "ellipse") << '\n'
            << base << (rect ? "rect = " : "ellipse = ") << detail::fmt(o.geom[0]) << ' '
            << detail::fmt(o.geom[1]) << ' ' << detail::fmt(o.geom[2]) << ' '
            << detail::fmt(o.geom[3]) << '\n'
            << base << "velocity = " << detail::fmt(o.velocity.x) << ' '
            << detail::fmt(o.velocity.y) << '\n';
    }
    return out.str();
}

inline std::string frame_stem(int frame_index) {
    char buf[8];
    std::snprintf(buf, sizeof buf, "%04d", frame_index);
    return buf;
}

// NNNN.flo + NNNN_gt.pgm per frame, the per-frame map table, and an echo of
// the script itself.
inline void write_sequence(const SceneScript& script, const std::filesystem::path& dir) {
    std::filesystem::create_directories(dir);
    const std::vector<GroundTruthFrame> frames = generate_sequence(script);

    std::ofstream hcsv(dir / "homographies.csv", std::ios::binary | std::ios::trunc);
    if (!hcsv) throw Error("cannot create homographies.csv");
    hcsv << "frame,h11,h12,h13,h21,h22,h23,h31,h32,h33\n";
    for (const GroundTruthFrame& gt : frames) {
        const std::string stem = frame_stem(gt.frame_index);
        write_flow_file(gt.flow, dir / (stem + ".flo"));
        write_mask_file(gt.gt_mask, dir / (stem + "_gt.pgm"));
        hcsv << stem;
        for (double v : gt.gt_homography.row_major()) hcsv << ',' << detail::fmt(v);
        hcsv << '\n';
    }
    hcsv.flush();
    if (!hcsv) throw Error("short write on homographies.csv");

    std::ofstream echo(dir / "script.cfg", std::ios::binary | std::ios::trunc);
    if (!echo) throw Error("cannot create script.cfg");
    echo << serialize_scene_script(script);
}

}  // namespace flowseg
