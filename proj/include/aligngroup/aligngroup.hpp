#pragma once

// Umbrella header.

#include "aligngroup/alignment.hpp"
#include "aligngroup/checkpoint.hpp"
#include "aligngroup/config.hpp"
#include "aligngroup/dataset.hpp"
#include "aligngroup/evaluation.hpp"
#include "aligngroup/hypergraph.hpp"
#include "aligngroup/manifest.hpp"
#include "aligngroup/model.hpp"
#include "aligngroup/params.hpp"
#include "aligngroup/propagation.hpp"
#include "aligngroup/rng.hpp"
#include "aligngroup/scoring.hpp"
#include "aligngroup/synthetic.hpp"
#include "aligngroup/tape.hpp"
#include "aligngroup/types.hpp"
