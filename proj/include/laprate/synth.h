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

#ifndef LAPRATE_SYNTH_H_
#define LAPRATE_SYNTH_H_

#include <cmath>
#include <cstdint>
#include <vector>

#include "laprate/blockmath.h"
#include "laprate/mlfit.h"
#include "laprate/random.h"

namespace laprate {

// Box from which randomized generating parameters are drawn:
// g0 ~ U(g0_lo, g0_hi), g1, g2 ~ U(slope_lo, slope_hi) independently.
struct ParamRange {
  double g0_lo;
  double g0_hi;
  double slope_lo;
  double slope_hi;
};

// Synthetic corpus: DC scales 0.5 .. 5 quantizer steps, decaying with
// frequency at up to e^-0.3 per row or column.
inline const ParamRange kCorpusRange = {std::log(0.2), std::log(2.0), 0.0, 0.3};

// Gentler decay, used by the gradient check so the fitted inverse scales
// stay around [0.2, 20].
inline const ParamRange kGradcheckRange = {std::log(0.25), std::log(2.5), 0.0, 0.1};

inline ModelParams random_model_params(RandomStream& stream, const ParamRange& range) {
  const double g0 = stream.uniform(range.g0_lo, range.g0_hi);
  const double g1 = stream.uniform(range.slope_lo, range.slope_hi);
  const double g2 = stream.uniform(range.slope_lo, range.slope_hi);
  return {g0, g1, g2};
}

// Stream salt so synthesis and estimation never share a random sequence
// when a caller reuses one seed for both.
inline constexpr uint64_t kSynthSalt = 0x5EED5A1705EEDull;

}  // namespace laprate

#endif  // LAPRATE_SYNTH_H_
