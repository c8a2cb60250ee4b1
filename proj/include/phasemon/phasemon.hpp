#pragma once

#include "phasemon/core_model.hpp"
#include "phasemon/detector.hpp"
#include "phasemon/errors.hpp"
#include "phasemon/experiment.hpp"
#include "phasemon/interval_control.hpp"
#include "phasemon/report.hpp"
#include "phasemon/scheduler.hpp"
#include "phasemon/simulation.hpp"
#include "phasemon/trace_io.hpp"
#include "phasemon/types.hpp"
#include "phasemon/workload.hpp"
