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

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "wasabi/sim.hpp"

using namespace wasabi;

namespace {

constexpr double kPi = std::numbers::pi;

SimState airborne_state(const SimParams& p) {
  SimState s;
  s.base_z = 2.0;
  s.base_vx = 0.5;
  s.base_vz = 1.0;
  s.joint_pos = p.nominal_joint_pos;
  return s;
}

}  // namespace

TEST(Sim, ProjectileFlight) {
  const SimParams p;
  EnvState e{airborne_state(p), {}};
  for (int k = 0; k < 25; ++k) {
    const auto r = step(e, p.nominal_joint_pos, p, &e);
    EXPECT_FALSE(r.foot_contacts[0] || r.foot_contacts[1]);
  }
  const double t = 0.5;
  EXPECT_NEAR(e.sim.time, t, 1e-9);
  EXPECT_NEAR(e.sim.base_z, 2.0 + 1.0 * t - 0.5 * p.gravity * t * t, 5e-3);
  EXPECT_NEAR(e.sim.base_x, 0.5 * t, 5e-3);
  EXPECT_NEAR(e.sim.pitch, 0.0, 1e-9);
}

TEST(Sim, StandingEquilibrium) {
  const SimParams p;
  std::mt19937_64 rng(1);
  EnvState e = reset_env(p, rng, false);
  const double z0 = e.sim.base_z;
  EXPECT_GT(z0, 0.0);
  for (int k = 0; k < 50; ++k) {
    const auto r = step(e, p.nominal_joint_pos, p, &e);
    EXPECT_TRUE(r.foot_contacts[0] && r.foot_contacts[1]);
    EXPECT_NEAR(e.sim.base_z, z0, 1e-3);
    EXPECT_FALSE(e.sim.terminal);
  }
  // Penetration of the feet stays below 5 mm.
  for (const auto& f : foot_positions(e.sim, p)) EXPECT_GT(f[1], -5e-3);
}

TEST(Sim, ResetContract) {
  SimParams p;
  std::mt19937_64 a(7), b(7);
  const EnvState quiet = reset_env(p, a, false);
  // The quiet reset is the settled stance: joints sag under load, feet rest on the ground.
  for (std::size_t j = 0; j < kNumJoints; ++j) EXPECT_NEAR(quiet.sim.joint_pos[j], p.nominal_joint_pos[j], 0.3);
  for (const auto& f : foot_positions(quiet.sim, p)) EXPECT_NEAR(f[1], 0.0, 5e-3);
  std::mt19937_64 c(99);
  EXPECT_EQ(reset_env(p, c, false), quiet);
  EXPECT_EQ(quiet.sim.base_vx, 0.0);
  EXPECT_EQ(quiet.sim.base_vz, 0.0);
  EXPECT_EQ(quiet.sim.pitch_rate, 0.0);
  a.seed(3);
  b.seed(3);
  EXPECT_EQ(reset_env(p, a), reset_env(p, b));
  p.mass_perturbation = true;
  std::mt19937_64 r(9);
  for (int k = 0; k < 20; ++k) {
    const auto s = reset(p, r);
    EXPECT_GE(body_mass(s, p), p.body_mass - 0.5);
    EXPECT_LE(body_mass(s, p), p.body_mass + 1.0);
  }
}

TEST(Sim, TerminationGeometry) {
  const SimParams p;
  SimState s;
  s.base_z = 0.3;
  EXPECT_FALSE(check_termination(s, p));
  s.base_z = 0.0;
  EXPECT_TRUE(check_termination(s, p));
  s.base_z = 0.12;
  s.pitch = kPi / 2;
  EXPECT_TRUE(check_termination(s, p));
  // Just clear of the ground when tilted: lowest corner at z - L sin - H cos.
  s.pitch = 0.3;
  s.base_z = p.body_half_length * std::sin(0.3) + p.body_half_height * std::cos(0.3) + 1e-6;
  EXPECT_FALSE(check_termination(s, p));
  s.base_z -= 2e-6;
  EXPECT_TRUE(check_termination(s, p));
}

TEST(Sim, BodyContactTerminates) {
  const SimParams p;
  EnvState e{airborne_state(p), {}};
  e.sim.base_z = 0.3;
  e.sim.base_vz = -1.0;
  e.sim.pitch = -kPi * 0.9;
  bool done = false;
  for (int k = 0; k < 100 && !done; ++k) done = step(e, p.nominal_joint_pos, p, &e).next_state.terminal;
  EXPECT_TRUE(done);
}

TEST(Sim, StepIsDeterministic) {
  const SimParams p;
  std::mt19937_64 rng(4);
  const EnvState e = reset_env(p, rng);
  const std::array<double, kNumJoints> a{0.2, -1.0, -0.4, 1.2};
  EnvState n1, n2;
  const auto r1 = step(e, a, p, &n1);
  const auto r2 = step(e, a, p, &n2);
  EXPECT_EQ(n1, n2);
  EXPECT_EQ(r1.next_state, r2.next_state);
  EXPECT_EQ(r1.joint_torques, r2.joint_torques);
}

TEST(Sim, ActionsAreClippedAndValidated) {
  const SimParams p;
  const auto c = clip_to_limits(std::array<double, 4>{10.0, -10.0, 0.0, 0.0}, p);
  EXPECT_EQ(c[0], p.joint_upper[0]);
  EXPECT_EQ(c[1], p.joint_lower[1]);
  EXPECT_THROW(clip_to_limits(std::array<double, 3>{0.0, 0.0, 0.0}, p), Error);
  EXPECT_THROW(clip_to_limits(std::array<double, 4>{0.0, NAN, 0.0, 0.0}, p), Error);
}

TEST(Sim, FlightAngleAccounting) {
  const SimParams p;
  EnvState e{airborne_state(p), {}};
  e.sim.base_z = 0.6;
  e.sim.base_vz = 0.0;
  e.sim.pitch_rate = -2.0;
  double in_flight = 0.0;
  bool landed = false;
  for (int k = 0; k < 50 && !landed; ++k) {
    const auto r = step(e, p.nominal_joint_pos, p, &e);
    if (r.landing_event) {
      landed = true;
      EXPECT_GT(r.flight_traversed_angle, 0.0);
      EXPECT_GE(r.flight_traversed_angle, in_flight);
      EXPECT_EQ(e.sim.flight_angle, 0.0);
    } else if (!e.sim.terminal) {
      EXPECT_GE(r.flight_traversed_angle, in_flight);
      in_flight = r.flight_traversed_angle;
    }
    if (e.sim.terminal) break;
  }
  EXPECT_GT(in_flight, 0.0);
}

TEST(Sim, ObservationReadsOnlyState) {
  const SimParams p;
  std::mt19937_64 rng(5);
  const EnvState e = reset_env(p, rng);
  const auto r = step(e, std::array<double, 4>{0.1, -1.2, -0.5, 1.1}, p);
  const auto o1 = phi_extract(r.next_state);
  SimState copy = r.next_state;
  copy.joint_pos = {};
  copy.joint_vel = {};
  EXPECT_EQ(phi_extract(copy), o1);
}

TEST(Sim, ParamViolations) {
  SimParams p;
  EXPECT_TRUE(p.violations().empty());
  p.control_decimation = 10;
  EXPECT_FALSE(p.violations().empty());
}

TEST(Demos, FrameCountsAndCount) {
  std::mt19937_64 rng(1);
  const std::pair<Motion, std::size_t> expected[] = {
      {Motion::kLeap, 130}, {Motion::kWave, 130}, {Motion::kStandUp, 100}, {Motion::kBackFlip, 60}};
  for (const auto& [m, frames] : expected) {
    EXPECT_EQ(motion_frames(m), frames);
    const auto ds = generate_demo_dataset(m, 20, 0.2, rng);
    ASSERT_EQ(ds.trajectories.size(), 20u);
    for (const auto& t : ds.trajectories) {
      EXPECT_EQ(t.size(), frames);
      for (const auto& o : t) EXPECT_LT(o.gravity_norm_error(), 1e-9);
    }
  }
}

TEST(Demos, BackflipScriptRotatesFullTurn) {
  EXPECT_NEAR(motion_script(Motion::kBackFlip, 0.0, 1.0, 0.2).pitch, -2.0 * kPi, 1e-12);
  std::mt19937_64 rng(2);
  DemoOptions opt;
  opt.noise = false;
  const auto demo = generate_rough_demo(Motion::kBackFlip, 0.2, rng, opt);
  double integral = 0.0;
  for (std::size_t i = 0; i + 1 < demo.size(); ++i) integral += demo[i].pitch_rate * opt.dt;
  EXPECT_NEAR(integral, -2.0 * kPi, 1e-6);
}

TEST(Demos, SeededGeneration) {
  std::mt19937_64 a(11), b(11);
  EXPECT_EQ(generate_rough_demo(Motion::kLeap, 0.2, a), generate_rough_demo(Motion::kLeap, 0.2, b));
}

// While the scripted body is far above standing height it must be in
// flight, where the vertical acceleration can only be -g. The script's
// implied acceleration differs from that by much more than any tolerance.
TEST(Demos, BackflipIsPhysicallyIncompatible) {
  const SimParams p;
  std::mt19937_64 rng(3);
  DemoOptions opt;
  opt.noise = false;
  const double stand = 0.2;
  const auto demo = generate_rough_demo(Motion::kBackFlip, stand, rng, opt);
  double worst = 0.0;
  for (std::size_t i = 0; i + 2 < demo.size(); ++i) {
    if (demo[i].height < stand + 0.2) continue;
    auto world_vz = [&](const Observation& o) {
      const double pitch = std::atan2(-o.grav_x_body, -o.grav_z_body);
      return body_to_world(o.vx_body, o.vz_body, pitch)[1];
    };
    const double az = (world_vz(demo[i + 1]) - world_vz(demo[i])) / opt.dt;
    worst = std::max(worst, std::abs(az + p.gravity));
  }
  EXPECT_GT(worst, 2.0);
}
