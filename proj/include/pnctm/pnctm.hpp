#pragma once

// Umbrella header.

#include "pnctm/checkpoint.hpp"
#include "pnctm/corpus.hpp"
#include "pnctm/diagnostics.hpp"
#include "pnctm/distributions.hpp"
#include "pnctm/do_probit.hpp"
#include "pnctm/gibbs.hpp"
#include "pnctm/mnp.hpp"
#include "pnctm/model.hpp"
#include "pnctm/model_selection.hpp"
#include "pnctm/normal.hpp"
#include "pnctm/rng.hpp"
#include "pnctm/simulate.hpp"
