// Copyright 2026 The hetembed Authors. All Rights Reserved.
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

#include "hetembed/autodiff.hpp"
#include "hetembed/checkpoint.hpp"
#include "hetembed/common.hpp"
#include "hetembed/config.hpp"
#include "hetembed/encoder.hpp"
#include "hetembed/graph_io.hpp"
#include "hetembed/hetgraph.hpp"
#include "hetembed/init.hpp"
#include "hetembed/log.hpp"
#include "hetembed/lstm.hpp"
#include "hetembed/metrics.hpp"
#include "hetembed/query.hpp"
#include "hetembed/rng.hpp"
#include "hetembed/sampler.hpp"
#include "hetembed/semantics.hpp"
#include "hetembed/store.hpp"
#include "hetembed/synthetic.hpp"
#include "hetembed/trainer.hpp"
