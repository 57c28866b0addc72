#pragma once

// Procrustes validation sets: cross-validation based augmentation of
// collinear numeric and mixed tabular data, with SVD and PLS generators,
// rule diagnostics and a small benchmark harness.

#include "pcv/diagnostics.hpp"
#include "pcv/engine.hpp"
#include "pcv/errors.hpp"
#include "pcv/experiment.hpp"
#include "pcv/io.hpp"
#include "pcv/matrix.hpp"
#include "pcv/mlp.hpp"
#include "pcv/resampling.hpp"
#include "pcv/rng.hpp"
#include "pcv/schema.hpp"
#include "pcv/simpls.hpp"
#include "pcv/version.hpp"
