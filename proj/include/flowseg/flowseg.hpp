#pragma once

#include "flowseg/config.hpp"
#include "flowseg/core.hpp"
#include "flowseg/detector.hpp"
#include "flowseg/flo_io.hpp"
#include "flowseg/homography_fit.hpp"
#include "flowseg/kvfile.hpp"
#include "flowseg/metrics.hpp"
#include "flowseg/pgm_io.hpp"
#include "flowseg/rng.hpp"
#include "flowseg/synth.hpp"
