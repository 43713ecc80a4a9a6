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

// Aligns a generated backflip demonstration against a time-stretched copy
// of itself and prints the warping path.

#include <cstdio>
#include <random>

#include "wasabi/wasabi.hpp"

int main() {
  using namespace wasabi;
  std::mt19937_64 rng(4);
  const SimParams p;
  const ReferenceDataset ds = generate_demo_dataset(Motion::kBackFlip, 2, standing_height(p), rng);
  const FeatureSequence a = to_feature_sequence(ds.trajectories[0]);
  const FeatureSequence b = to_feature_sequence(ds.trajectories[1]);

  for (auto pattern : {StepPattern::kSymmetric1, StepPattern::kMoriAsymmetric}) {
    const DtwResult r = dtw_distance(a, b, DtwConfig{pattern, true});
    std::printf("%s: distance %.3f over %zu steps\n",
                pattern == StepPattern::kSymmetric1 ? "symmetric" : "mori asymmetric", r.distance,
                r.alignment.size());
  }
  const DtwResult r = dtw_distance(a, b);
  for (std::size_t k = 0; k < r.alignment.size(); k += 8) {
    std::printf("  query %3zu -> reference %3zu\n", r.alignment[k].query_index, r.alignment[k].reference_index);
  }
  return 0;
}
