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

#ifndef WASABI_EVALUATION_HPP_
#define WASABI_EVALUATION_HPP_

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <functional>
#include <random>
#include <vector>

#include "wasabi/core.hpp"
#include "wasabi/dtw.hpp"
#include "wasabi/reward.hpp"
#include "wasabi/rl.hpp"
#include "wasabi/sim.hpp"

namespace wasabi {

// Maps a policy observation to an (unscaled) action.
using ActionFn = std::function<Eigen::VectorXd(const Eigen::VectorXd&)>;

inline ActionFn mean_action(const ActorCritic& ac) {
  return [&ac](const Eigen::VectorXd& obs) { return ac.actor.forward_one(obs); };
}

// Zero action holds the nominal joint targets.
inline ActionFn stand_still() {
  return [](const Eigen::VectorXd&) { return Eigen::VectorXd::Zero(kNumJoints); };
}

struct EvalRollout {
  std::vector<Observation> observations;  // one per frame, starting at reset
  double backflip_return = 0.0;
  double standup_mean = 0.0;
  double max_flight_angle = 0.0;
  bool terminated = false;
};

// Deterministic rollout of `frames` frames. After an early termination the
// remaining frames repeat the terminal observation.
inline EvalRollout run_rollout(const ActionFn& policy, const RolloutContext& ctx, double action_scale,
                               std::size_t frames, std::mt19937_64& rng) {
  EnvSlot slot;
  slot.rng = rng;
  slot.window = WindowBuffer(1, frame_dim(false));
  reset_slot(slot, ctx);
  rng = slot.rng;
  EvalRollout out;
  out.observations.reserve(frames);
  if (frames == 0) return out;
  out.observations.push_back(phi_extract(slot.state.sim));
  double standup = 0.0;
  std::size_t steps = 0;
  while (out.observations.size() < frames && !out.terminated) {
    const Eigen::VectorXd a = policy(policy_observation(slot, ctx.sim));
    const auto target = action_to_target(a, ctx.sim, action_scale);
    EnvState next;
    const StepResult r = step(slot.state, clip_to_limits(target, ctx.sim), ctx.sim, &next);
    slot.prev_frame = policy_frame(slot.state.sim, slot.last_target, ctx.sim);
    slot.state = next;
    slot.last_target = target;
    ++steps;
    out.observations.push_back(phi_extract(next.sim));
    out.backflip_return += handcrafted_backflip_reward(r.flight_traversed_angle, r.landing_event);
    out.max_flight_angle = std::max(out.max_flight_angle, r.flight_traversed_angle);
    standup += handcrafted_standup_reward(next.sim.pitch, next.sim.base_z, r.foot_contacts[0]);
    out.terminated = r.next_state.terminal;
  }
  out.standup_mean = standup / static_cast<double>(steps);
  while (out.observations.size() < frames) out.observations.push_back(out.observations.back());
  return out;
}

struct DtwReport {
  Eigen::MatrixXd distances;  // rollouts x references
  double mean = 0.0;
  double stddev = 0.0;
  double termination_rate = 0.0;
};

// Each rollout lasts as long as the longest reference and is cut to each
// reference's length before matching.
inline DtwReport evaluate_policy_dtw(const ActionFn& policy, const RolloutContext& ctx,
                                     double action_scale, const ReferenceDataset& refs,
                                     std::size_t n_rollouts, std::size_t n_references,
                                     std::uint64_t seed, const DtwConfig& dtw = {}) {
  if (refs.trajectories.empty()) throw Error(ErrorCode::kNoTrajectories, "no trajectories");
  if (n_rollouts == 0 || n_references == 0) {
    throw Error(ErrorCode::kInvalidArgument, "evaluation needs at least one rollout and reference");
  }
  const std::size_t nr = std::min(n_references, refs.trajectories.size());
  std::size_t frames = 0;
  std::vector<FeatureSequence> ref_seq(nr);
  for (std::size_t j = 0; j < nr; ++j) {
    frames = std::max(frames, refs.trajectories[j].size());
    ref_seq[j] = to_feature_sequence(refs.trajectories[j]);
  }
  std::mt19937_64 rng(seed);
  DtwReport rep;
  rep.distances.resize(static_cast<Eigen::Index>(n_rollouts), static_cast<Eigen::Index>(nr));
  for (std::size_t i = 0; i < n_rollouts; ++i) {
    const EvalRollout ro = run_rollout(policy, ctx, action_scale, frames, rng);
    rep.termination_rate += ro.terminated ? 1.0 / static_cast<double>(n_rollouts) : 0.0;
    const FeatureSequence q = to_feature_sequence(ro.observations);
    for (std::size_t j = 0; j < nr; ++j) {
      const FeatureSequence qj(q.begin(), q.begin() + static_cast<std::ptrdiff_t>(ref_seq[j].size()));
      rep.distances(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
          dtw_distance(qj, ref_seq[j], dtw).distance;
    }
  }
  rep.mean = rep.distances.mean();
  rep.stddev = std::sqrt((rep.distances.array() - rep.mean).square().mean());
  return rep;
}

struct HandcraftedReport {
  std::vector<double> returns;
  double mean = 0.0;
  double stddev = 0.0;
};

// Backflip: summed traversed-angle reward per rollout. StandUp: mean
// per-step reward. Other tasks have no handcrafted reward.
inline bool has_handcrafted_reward(Motion m) { return m == Motion::kBackFlip || m == Motion::kStandUp; }

// Evaluation episode length for the handcrafted rewards: the backflip gets
// time to land after the 60-frame reference.
inline std::size_t handcrafted_frames(Motion m) { return m == Motion::kBackFlip ? 100 : motion_frames(m); }

inline HandcraftedReport evaluate_handcrafted(const ActionFn& policy, const RolloutContext& ctx,
                                              double action_scale, Motion task, std::size_t n_rollouts,
                                              std::size_t frames, std::uint64_t seed) {
  if (!has_handcrafted_reward(task)) {
    throw Error(ErrorCode::kInvalidArgument,
                std::string("task '") + motion_name(task) + "' has no handcrafted reward");
  }
  std::mt19937_64 rng(seed);
  HandcraftedReport rep;
  for (std::size_t i = 0; i < n_rollouts; ++i) {
    const EvalRollout ro = run_rollout(policy, ctx, action_scale, frames, rng);
    rep.returns.push_back(task == Motion::kBackFlip ? ro.backflip_return : ro.standup_mean);
  }
  double s = 0.0, s2 = 0.0;
  for (double r : rep.returns) s += r;
  rep.mean = s / static_cast<double>(rep.returns.size());
  for (double r : rep.returns) s2 += (r - rep.mean) * (r - rep.mean);
  rep.stddev = std::sqrt(s2 / static_cast<double>(rep.returns.size()));
  return rep;
}

}  // namespace wasabi

#endif  // WASABI_EVALUATION_HPP_
