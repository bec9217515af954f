// Copyright 2026 The dipcheck Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Umbrella header.

#pragma once

#include "dipcheck/automaton.hpp"
#include "dipcheck/automaton_io.hpp"
#include "dipcheck/error.hpp"
#include "dipcheck/graph.hpp"
#include "dipcheck/laplace.hpp"
#include "dipcheck/path.hpp"
#include "dipcheck/pathprob.hpp"
#include "dipcheck/pep.hpp"
#include "dipcheck/rational.hpp"
#include "dipcheck/report.hpp"
#include "dipcheck/weight.hpp"
#include "dipcheck/wellformed.hpp"
#include "dipcheck/witness.hpp"
