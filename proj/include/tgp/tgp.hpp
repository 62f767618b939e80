#pragma once

#include "tgp/classification.hpp"
#include "tgp/data.hpp"
#include "tgp/dataset.hpp"
#include "tgp/error.hpp"
#include "tgp/ess.hpp"
#include "tgp/kernels.hpp"
#include "tgp/linalg.hpp"
#include "tgp/probe.hpp"
#include "tgp/quadrature.hpp"
#include "tgp/regression.hpp"
#include "tgp/rng.hpp"
#include "tgp/sweep.hpp"
