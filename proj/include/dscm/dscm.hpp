#pragma once

#include "dscm/dmg.hpp"
#include "dscm/error.hpp"
#include "dscm/fci.hpp"
#include "dscm/graph_io.hpp"
#include "dscm/independence.hpp"
#include "dscm/model.hpp"
#include "dscm/sde_graph.hpp"
#include "dscm/simulate.hpp"
#include "dscm/stat_tests.hpp"
#include "dscm/time_ops.hpp"
