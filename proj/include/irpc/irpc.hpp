#pragma once

#include "irpc/correction.hpp"
#include "irpc/errors.hpp"
#include "irpc/evaluation.hpp"
#include "irpc/fitting.hpp"
#include "irpc/frame.hpp"
#include "irpc/optimizer.hpp"
#include "irpc/photometric_error.hpp"
#include "irpc/random.hpp"
#include "irpc/sensor_model.hpp"
#include "irpc/synthetic.hpp"
#include "irpc/timing.hpp"
#include "irpc/trajectory_metrics.hpp"
