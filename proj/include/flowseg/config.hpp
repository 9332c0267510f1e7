#pragma once

// Run configuration for the CLI: detector and estimator knobs plus the
// success-curve step, as a flat key = value file. Unknown keys are errors.

#include <istream>
#include <sstream>
#include <string>

#include "flowseg/detector.hpp"
#include "flowseg/kvfile.hpp"

namespace flowseg {

struct RunConfig {
    DetectorConfig detector;
    double curve_step = 0.01;

    friend bool operator==(const RunConfig&, const RunConfig&) = default;

    void validate() const {
        detector.validate();
        if (!(curve_step > 0.0 && curve_step <= 1.0))
            throw ConfigError("curve_step must be in (0, 1]");
    }
};

inline RunConfig parse_run_config(std::istream& in) {
    KeyValueFile kv = KeyValueFile::parse(in);
    RunConfig rc;
    DetectorConfig& d = rc.detector;
    d.interval_k = static_cast<int>(kv.get_int("interval_k", d.interval_k));
    d.a1_per_frame = kv.get_double("a1_per_frame", d.a1_per_frame);
    d.a2 = kv.get_double("a2", d.a2);
    d.t_g = kv.get_double("t_g", d.t_g);
    d.t_c = kv.get_double("t_c", d.t_c);
    d.eps_mag = kv.get_double("eps_mag", d.eps_mag);
    RansacConfig& r = d.ransac;
    r.sample_n = static_cast<int>(kv.get_int("ransac.sample_n", r.sample_n));
    r.iterations = static_cast<int>(kv.get_int("ransac.iterations", r.iterations));
    r.grid_rows = static_cast<int>(kv.get_int("ransac.grid_rows", r.grid_rows));
    r.grid_cols = static_cast<int>(kv.get_int("ransac.grid_cols", r.grid_cols));
    r.inlier_tol = kv.get_double("ransac.inlier_tol", r.inlier_tol);
    r.eval_stride = static_cast<int>(kv.get_int("ransac.eval_stride", r.eval_stride));
    r.rng_seed = kv.get_u64("ransac.rng_seed", r.rng_seed);
    rc.curve_step = kv.get_double("curve_step", rc.curve_step);
    kv.reject_unknown();
    try {
        rc.validate();
    } catch (const std::invalid_argument& e) {
        throw ConfigError(e.what());
    }
    return rc;
}

inline std::string serialize_run_config(const RunConfig& rc) {
    const DetectorConfig& d = rc.detector;
    const RansacConfig& r = d.ransac;
    std::ostringstream out;
    out << "interval_k = " << d.interval_k << '\n'
        << "a1_per_frame = " << detail::fmt(d.a1_per_frame) << '\n'
        << "a2 = " << detail::fmt(d.a2) << '\n'
        << "t_g = " << detail::fmt(d.t_g) << '\n'
        << "t_c = " << detail::fmt(d.t_c) << '\n'
        << "eps_mag = " << detail::fmt(d.eps_mag) << '\n'
        << "ransac.sample_n = " << r.sample_n << '\n'
        << "ransac.iterations = " << r.iterations << '\n'
        << "ransac.grid_rows = " << r.grid_rows << '\n'
        << "ransac.grid_cols = " << r.grid_cols << '\n'
        << "ransac.inlier_tol = " << detail::fmt(r.inlier_tol) << '\n'
        << "ransac.eval_stride = " << r.eval_stride << '\n'
        << "ransac.rng_seed = " << r.rng_seed << '\n'
        << "curve_step = " << detail::fmt(rc.curve_step) << '\n';
    return out.str();
}

}  // namespace flowseg
