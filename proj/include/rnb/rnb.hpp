// Copyright 2026 The rnb Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "rnb/analytic.hpp"
#include "rnb/cli.hpp"
#include "rnb/cost_model.hpp"
#include "rnb/error.hpp"
#include "rnb/netgraph.hpp"
#include "rnb/numerics.hpp"
#include "rnb/obu.hpp"
#include "rnb/params.hpp"
#include "rnb/photonic_tile.hpp"
#include "rnb/prm_scheduler.hpp"
#include "rnb/weights_io.hpp"
