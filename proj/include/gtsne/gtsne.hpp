#pragma once

//! Umbrella header: a generalized-kernel t-SNE engine (pluggable input and
//! output similarity kernels, entropy calibration, KL gradient descent)
//! with continuum counterparts and a convergence study harness.

#include "gtsne/affinity.hpp"
#include "gtsne/calibration.hpp"
#include "gtsne/continuum.hpp"
#include "gtsne/core.hpp"
#include "gtsne/descent.hpp"
#include "gtsne/errors.hpp"
#include "gtsne/io.hpp"
#include "gtsne/kernels.hpp"
#include "gtsne/parallel.hpp"
#include "gtsne/quadrature.hpp"
#include "gtsne/study.hpp"
#include "gtsne/svg.hpp"
#include "gtsne/validation.hpp"
