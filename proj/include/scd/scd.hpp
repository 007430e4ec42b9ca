#pragma once

#include "scd/checkers/consistency.hpp"
#include "scd/checkers/history.hpp"
#include "scd/checkers/lattice_task.hpp"
#include "scd/checkers/scd_properties.hpp"
#include "scd/checkers/structure.hpp"
#include "scd/checkers/verdict.hpp"
#include "scd/core.hpp"
#include "scd/fifo.hpp"
#include "scd/generators.hpp"
#include "scd/metrics.hpp"
#include "scd/objects/counter.hpp"
#include "scd/objects/lattice.hpp"
#include "scd/objects/pattern.hpp"
#include "scd/objects/snapshot.hpp"
#include "scd/scd_mp.hpp"
#include "scd/scd_shm.hpp"
#include "scd/scenario.hpp"
#include "scd/service.hpp"
#include "scd/shm.hpp"
#include "scd/sim.hpp"
#include "scd/trace_io.hpp"
