// Copyright 2026 The rnb Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "rnb/conv.hpp"
#include "rnb/dataset.hpp"
#include "rnb/forward.hpp"
#include "rnb/network.hpp"
#include "rnb/train.hpp"
