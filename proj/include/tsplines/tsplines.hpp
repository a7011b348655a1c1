#pragma once

#include "tsplines/bures.hpp"
#include "tsplines/coupling.hpp"
#include "tsplines/errors.hpp"
#include "tsplines/harness.hpp"
#include "tsplines/normal.hpp"
#include "tsplines/spline1d.hpp"
#include "tsplines/thinplate.hpp"
#include "tsplines/transport_spline.hpp"
