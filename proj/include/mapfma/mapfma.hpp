#pragma once

#include "mapfma/adversary.hpp"
#include "mapfma/engine.hpp"
#include "mapfma/graph.hpp"
#include "mapfma/hardness.hpp"
#include "mapfma/instances.hpp"
#include "mapfma/io.hpp"
#include "mapfma/joint_solver.hpp"
#include "mapfma/model.hpp"
#include "mapfma/worst_case.hpp"
