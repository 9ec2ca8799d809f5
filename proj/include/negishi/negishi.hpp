#pragma once

#include "negishi/continuation.hpp"
#include "negishi/diagnostics.hpp"
#include "negishi/economy.hpp"
#include "negishi/errors.hpp"
#include "negishi/planner.hpp"
#include "negishi/report.hpp"
#include "negishi/solver.hpp"
#include "negishi/spec_io.hpp"
#include "negishi/time_consistency.hpp"
#include "negishi/utility.hpp"
