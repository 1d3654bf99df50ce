#pragma once

#include "beam.hpp"
#include "cascade.hpp"
#include "config_search.hpp"
#include "errors.hpp"
#include "interferometer.hpp"
#include "io.hpp"
#include "laguerre.hpp"
#include "lg_mode.hpp"
#include "quadrature.hpp"
