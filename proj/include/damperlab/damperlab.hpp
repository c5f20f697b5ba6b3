#pragma once

#include "units.hpp"
#include "errors.hpp"
#include "curves.hpp"
#include "clocks.hpp"
#include "dampers.hpp"
#include "bounds.hpp"
#include "sim.hpp"
#include "tfa.hpp"
#include "orion.hpp"
#include "reference_paths.hpp"
#include "config.hpp"
#include "report.hpp"
