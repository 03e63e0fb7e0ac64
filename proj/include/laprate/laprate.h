// Copyright 2026 The laprate Authors
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

#ifndef LAPRATE_LAPRATE_H_
#define LAPRATE_LAPRATE_H_

#include "laprate/adjust.h"
#include "laprate/baselines.h"
#include "laprate/blockmath.h"
#include "laprate/error.h"
#include "laprate/gradcheck.h"
#include "laprate/mlfit.h"
#include "laprate/random.h"
#include "laprate/rate.h"
#include "laprate/spd3.h"
#include "laprate/synth.h"

#endif  // LAPRATE_LAPRATE_H_
