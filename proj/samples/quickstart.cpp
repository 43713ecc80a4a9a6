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

// Trains a small WASABI policy on the planar leap demos and compares its DTW
// distance to the demonstrations against a policy that stands still.
//
//   quickstart [iterations] [seed]

#include <cstdio>
#include <cstdlib>

#include "wasabi/wasabi.hpp"

int main(int argc, char** argv) {
  using namespace wasabi;
  const std::size_t iterations = argc > 1 ? std::strtoul(argv[1], nullptr, 10) : 200;
  const std::uint64_t seed = argc > 2 ? std::strtoull(argv[2], nullptr, 10) : 1;

  TrainConfig cfg = task_defaults(Motion::kLeap, LossKind::kWgan);
  const ReferenceDataset refs = make_references(cfg, seed + 7919);
  Trainer trainer(cfg, refs, seed);
  while (trainer.iteration() < iterations) {
    const IterationMetrics m = trainer.iterate();
    if (m.iteration % 50 == 0) {
      std::printf("iter %4zu  reward %7.3f  disc loss %8.4f  kl %.4f\n", m.iteration, m.mean_reward,
                  m.disc_loss, m.kl);
    }
  }

  const double scale = cfg.ppo.action_scale;
  const auto policy = evaluate_policy_dtw(mean_action(trainer.policy()), trainer.context(), scale, refs, 5, 10, 1);
  const auto still = evaluate_policy_dtw(stand_still(), trainer.context(), scale, refs, 5, 10, 1);
  std::printf("DTW to demos: policy %.1f, stand still %.1f (ratio %.2f)\n", policy.mean, still.mean,
              policy.mean / still.mean);
  return 0;
}
