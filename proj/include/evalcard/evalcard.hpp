// Copyright 2026 The Evalcard Authors.
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

#pragma once

#include "evalcard/corruption.hpp"
#include "evalcard/datasets.hpp"
#include "evalcard/error.hpp"
#include "evalcard/ngram_metrics.hpp"
#include "evalcard/rng.hpp"
#include "evalcard/run_config.hpp"
#include "evalcard/scorecard.hpp"
#include "evalcard/scorer_bridge.hpp"
#include "evalcard/stats.hpp"
#include "evalcard/text_core.hpp"
