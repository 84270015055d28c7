#pragma once

#include "lsched/assigners.hpp"
#include "lsched/estimation.hpp"
#include "lsched/ilp.hpp"
#include "lsched/model.hpp"
#include "lsched/reorder.hpp"
#include "lsched/report.hpp"
#include "lsched/simulator.hpp"
#include "lsched/workload.hpp"
