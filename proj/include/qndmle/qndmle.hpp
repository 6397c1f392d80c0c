// Copyright 2026 The qndmle Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include "qndmle/config.hpp"
#include "qndmle/errors.hpp"
#include "qndmle/estimate.hpp"
#include "qndmle/io.hpp"
#include "qndmle/lab.hpp"
#include "qndmle/linalg.hpp"
#include "qndmle/model.hpp"
#include "qndmle/optimize.hpp"
#include "qndmle/parallel.hpp"
#include "qndmle/presets.hpp"
#include "qndmle/quantum.hpp"
#include "qndmle/rng.hpp"
#include "qndmle/runner.hpp"
#include "qndmle/simulate.hpp"
#include "qndmle/stats.hpp"
