// Copyright 2026 The wasabi-planar Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef WASABI_WASABI_HPP_
#define WASABI_WASABI_HPP_

#include "wasabi/config.hpp"
#include "wasabi/core.hpp"
#include "wasabi/discriminator.hpp"
#include "wasabi/dtw.hpp"
#include "wasabi/error.hpp"
#include "wasabi/evaluation.hpp"
#include "wasabi/nn.hpp"
#include "wasabi/reward.hpp"
#include "wasabi/rl.hpp"
#include "wasabi/sim.hpp"
#include "wasabi/trainer.hpp"

#endif  // WASABI_WASABI_HPP_
