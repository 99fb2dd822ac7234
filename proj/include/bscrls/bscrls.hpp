#pragma once

// Umbrella header for the whole library.

#include "bscrls/activation.hpp"
#include "bscrls/archive.hpp"
#include "bscrls/dataio.hpp"
#include "bscrls/decomposition.hpp"
#include "bscrls/diagnostics.hpp"
#include "bscrls/incremental.hpp"
#include "bscrls/matrix.hpp"
#include "bscrls/metrics.hpp"
#include "bscrls/model.hpp"
#include "bscrls/nodes.hpp"
#include "bscrls/random.hpp"
#include "bscrls/scn.hpp"
#include "bscrls/trainer.hpp"
