// SPDX-License-Identifier: Apache-2.0
//
// Copyright 2026 The mimo-gpi Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// ------------------------------------------------------------------------


#ifndef MIMO_GPI_MIMO_GPI_HPP
#define MIMO_GPI_MIMO_GPI_HPP

#include "baselines.hpp"
#include "channel.hpp"
#include "config.hpp"
#include "delay_gpi.hpp"
#include "gpi.hpp"
#include "harq_gpi.hpp"
#include "numerics.hpp"
#include "rates.hpp"
#include "simharness.hpp"

#endif // MIMO_GPI_MIMO_GPI_HPP
