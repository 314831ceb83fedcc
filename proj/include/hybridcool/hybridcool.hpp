#pragma once

#define HYBRIDCOOL_VERSION "0.1.0"

#include "config.hpp"
#include "error.hpp"
#include "exact.hpp"
#include "model.hpp"
#include "qnoise.hpp"
#include "quadrature.hpp"
#include "summation.hpp"
#include "sweep.hpp"
