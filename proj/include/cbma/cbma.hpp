#pragma once

// Bayesian model averaging for intervention-effect estimation in linear
// Gaussian structural causal models: exact enumeration engine, variational
// Gaussian-scale-mixture approximation, K2/full-model/IPW baselines, and a
// reproducible benchmark harness.

#include "cbma/bma.hpp"
#include "cbma/candidate_space.hpp"
#include "cbma/dag.hpp"
#include "cbma/dataset.hpp"
#include "cbma/effects.hpp"
#include "cbma/experiments.hpp"
#include "cbma/io.hpp"
#include "cbma/ipw.hpp"
#include "cbma/k2.hpp"
#include "cbma/posterior.hpp"
#include "cbma/rng.hpp"
#include "cbma/scm.hpp"
#include "cbma/vb.hpp"
