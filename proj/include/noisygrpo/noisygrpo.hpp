// Copyright (c) 2026, The noisygrpo authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "noisygrpo/bayes_advantage.hpp"
#include "noisygrpo/diagnostics.hpp"
#include "noisygrpo/error.hpp"
#include "noisygrpo/group_stats.hpp"
#include "noisygrpo/noise_schedule.hpp"
#include "noisygrpo/reward.hpp"
#include "noisygrpo/rng.hpp"
#include "noisygrpo/surrogate.hpp"
#include "noisygrpo/toyenv.hpp"
#include "noisygrpo/trainer.hpp"
