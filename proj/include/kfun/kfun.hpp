#pragma once

#include "core.hpp"
#include "funcgrid.hpp"
#include "norms.hpp"
#include "weights.hpp"
#include "smoothness.hpp"
#include "semigroups.hpp"
#include "limits.hpp"
#include "harness.hpp"
#include "report.hpp"
