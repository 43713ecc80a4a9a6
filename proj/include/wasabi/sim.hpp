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

#ifndef WASABI_SIM_HPP_
#define WASABI_SIM_HPP_

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include "wasabi/core.hpp"
#include "wasabi/error.hpp"

namespace wasabi {

// Planar quadruped: a rigid box with a front and a hind leg, each a massless
// two-link chain (hip, knee) driven by PD joints with reflected rotor inertia.
// Joint order: front hip, front knee, hind hip, hind knee. Joint angles are
// measured counter-clockwise from the thigh pointing straight down.
struct SimParams {
  double body_mass = 2.5;
  double body_half_length = 0.2;
  double body_half_height = 0.05;
  double hip_offset = 0.19;
  std::array<double, 2> link_lengths{0.16, 0.16};
  std::array<double, kNumJoints> joint_lower{-2.6, -2.8, -2.6, -2.8};
  std::array<double, kNumJoints> joint_upper{2.6, 2.8, 2.6, 2.8};
  std::array<double, kNumJoints> nominal_joint_pos{-0.7, 1.4, 0.7, -1.4};
  double kp = 5.0;
  double kd = 0.1;
  double joint_inertia = 0.005;
  double torque_limit = 8.0;
  double contact_stiffness = 5000.0;
  double contact_damping = 80.0;
  double tangential_stiffness = 5000.0;
  double tangential_damping = 80.0;
  double friction_coefficient = 1.0;
  double gravity = 9.81;
  double dt_physics = 1e-3;
  int control_decimation = 20;
  // Uniform base-mass offset drawn once per episode when enabled.
  bool mass_perturbation = false;
  double mass_offset_low = -0.5;
  double mass_offset_high = 1.0;
  double reset_joint_noise = 0.05;
  double reset_height_noise = 0.01;
  double max_episode_time = 20.0;

  friend bool operator==(const SimParams&, const SimParams&) = default;

  double control_dt() const { return dt_physics * control_decimation; }

  double body_inertia(double mass) const {
    const double a = 2.0 * body_half_length, b = 2.0 * body_half_height;
    return mass * (a * a + b * b) / 12.0;
  }

  std::vector<std::string> violations() const {
    std::vector<std::string> v;
    if (!(dt_physics > 0.0)) v.push_back("sim.dt_physics must be > 0");
    if (control_decimation < 1) v.push_back("sim.control_decimation must be >= 1");
    if (std::abs(control_dt() - 0.02) > 1e-12) {
      v.push_back("sim.dt_physics * sim.control_decimation must equal 0.02 s");
    }
    if (!(body_mass > 0.0)) v.push_back("sim.body_mass must be > 0");
    if (!(joint_inertia > 0.0)) v.push_back("sim.joint_inertia must be > 0");
    if (!(contact_stiffness > 0.0)) v.push_back("sim.contact_stiffness must be > 0");
    if (mass_perturbation && body_mass + mass_offset_low <= 0.0) {
      v.push_back("sim.mass_offset_low leaves a non-positive mass");
    }
    for (std::size_t j = 0; j < kNumJoints; ++j) {
      if (!(joint_lower[j] < joint_upper[j])) v.push_back("sim.joint limits are inverted");
    }
    return v;
  }
};

struct StepResult {
  SimState next_state;
  bool base_contact = false;
  std::array<bool, 2> foot_contacts{};
  std::array<double, kNumJoints> joint_torques{};  // mean PD effort over the control step
  bool landing_event = false;
  // Rotation in the flip direction (-pitch) accumulated while fully airborne;
  // at a landing event, the total of the flight that just ended.
  double flight_traversed_angle = 0.0;
};

namespace sim_detail {

struct Vec2 {
  double x = 0.0;
  double z = 0.0;
};

inline double hip_x(const SimParams& p, int leg) { return leg == 0 ? p.hip_offset : -p.hip_offset; }

// Foot position relative to the body origin, body frame.
inline Vec2 foot_body(const SimParams& p, int leg, double qh, double qk) {
  const double l1 = p.link_lengths[0], l2 = p.link_lengths[1];
  return {hip_x(p, leg) + l1 * std::sin(qh) + l2 * std::sin(qh + qk),
          -l1 * std::cos(qh) - l2 * std::cos(qh + qk)};
}

// Columns d foot / d qh and d foot / d qk, body frame.
inline std::array<Vec2, 2> foot_jacobian(const SimParams& p, double qh, double qk) {
  const double l1 = p.link_lengths[0], l2 = p.link_lengths[1];
  const double c1 = std::cos(qh), s1 = std::sin(qh);
  const double c12 = std::cos(qh + qk), s12 = std::sin(qh + qk);
  return {Vec2{l1 * c1 + l2 * c12, l1 * s1 + l2 * s12}, Vec2{l2 * c12, l2 * s12}};
}

inline Vec2 rotate(Vec2 v, double angle) {
  const double c = std::cos(angle), s = std::sin(angle);
  return {c * v.x - s * v.z, s * v.x + c * v.z};
}

}  // namespace sim_detail

inline double body_mass(const SimState& s, const SimParams& p) { return p.body_mass + s.mass_offset; }

// World positions of the feet.
inline std::array<std::array<double, 2>, 2> foot_positions(const SimState& s, const SimParams& p) {
  std::array<std::array<double, 2>, 2> out{};
  for (int leg = 0; leg < 2; ++leg) {
    const auto fb = sim_detail::foot_body(p, leg, s.joint_pos[2 * leg], s.joint_pos[2 * leg + 1]);
    const auto fw = sim_detail::rotate(fb, s.pitch);
    out[leg] = {s.base_x + fw.x, s.base_z + fw.z};
  }
  return out;
}

// True iff a corner of the body rectangle is at or below the ground.
inline bool check_termination(const SimState& s, const SimParams& p) {
  const double sn = std::sin(s.pitch), cs = std::cos(s.pitch);
  for (double bx : {-p.body_half_length, p.body_half_length}) {
    for (double bz : {-p.body_half_height, p.body_half_height}) {
      if (s.base_z + sn * bx + cs * bz <= 0.0) return true;
    }
  }
  return false;
}

// Contact bookkeeping that persists between physics substeps (stiction
// anchors). Kept outside SimState's documented fields but inside the struct
// so that step() stays a pure function of its inputs.
struct ContactAnchors {
  std::array<bool, 2> active{};
  std::array<double, 2> x{};
};

namespace sim_detail {

struct Substep {
  std::array<bool, 2> contact{};
  std::array<double, kNumJoints> torque{};
};

// One semi-implicit Euler step. `anchors` carries tangential stiction state.
inline Substep physics_substep(SimState& s, const std::array<double, kNumJoints>& target,
                               const SimParams& p, ContactAnchors& anchors) {
  const double dt = p.dt_physics;
  const double m = body_mass(s, p);
  const double inertia = p.body_inertia(m);
  Substep out;

  double fx_total = 0.0, fz_total = -m * p.gravity, torque_body = 0.0;
  std::array<double, kNumJoints> joint_ext{};

  for (int leg = 0; leg < 2; ++leg) {
    const double qh = s.joint_pos[2 * leg], qk = s.joint_pos[2 * leg + 1];
    const Vec2 fb = foot_body(p, leg, qh, qk);
    const auto jac = foot_jacobian(p, qh, qk);
    const Vec2 r = rotate(fb, s.pitch);  // COM -> foot, world
    const Vec2 j0 = rotate(jac[0], s.pitch), j1 = rotate(jac[1], s.pitch);
    const double dqh = s.joint_vel[2 * leg], dqk = s.joint_vel[2 * leg + 1];
    const Vec2 pos{s.base_x + r.x, s.base_z + r.z};
    const Vec2 vel{s.base_vx - s.pitch_rate * r.z + j0.x * dqh + j1.x * dqk,
                   s.base_vz + s.pitch_rate * r.x + j0.z * dqh + j1.z * dqk};

    if (pos.z >= 0.0) {
      anchors.active[leg] = false;
      continue;
    }
    // Effective mass seen at the foot along x and z; damping is capped so the
    // explicit update stays stable for light leg configurations.
    const double inv_mx = 1.0 / m + r.z * r.z / inertia + (j0.x * j0.x + j1.x * j1.x) / p.joint_inertia;
    const double inv_mz = 1.0 / m + r.x * r.x / inertia + (j0.z * j0.z + j1.z * j1.z) / p.joint_inertia;
    const double cap_x = 0.5 / (inv_mx * dt);
    const double cap_z = 0.5 / (inv_mz * dt);

    const double pen = -pos.z;
    double fn = p.contact_stiffness * pen - std::min(p.contact_damping, cap_z) * vel.z;
    fn = std::max(fn, 0.0);

    if (!anchors.active[leg]) {
      anchors.active[leg] = true;
      anchors.x[leg] = pos.x;
    }
    double ft = -p.tangential_stiffness * (pos.x - anchors.x[leg]) -
                std::min(p.tangential_damping, cap_x) * vel.x;
    const double limit = p.friction_coefficient * fn;
    if (std::abs(ft) > limit) {
      ft = std::copysign(limit, ft);
      // Slip: drag the anchor so the spring force matches the friction cone.
      anchors.x[leg] = pos.x + ft / p.tangential_stiffness;
    }
    out.contact[leg] = true;
    fx_total += ft;
    fz_total += fn;
    torque_body += r.x * fn - r.z * ft;
    joint_ext[2 * leg] = j0.x * ft + j0.z * fn;
    joint_ext[2 * leg + 1] = j1.x * ft + j1.z * fn;
  }

  for (std::size_t j = 0; j < kNumJoints; ++j) {
    double tau = p.kp * (target[j] - s.joint_pos[j]) - p.kd * s.joint_vel[j];
    tau = std::clamp(tau, -p.torque_limit, p.torque_limit);
    out.torque[j] = tau;
    s.joint_vel[j] += dt * (tau + joint_ext[j]) / p.joint_inertia;
  }
  s.base_vx += dt * fx_total / m;
  s.base_vz += dt * fz_total / m;
  s.pitch_rate += dt * torque_body / inertia;

  s.base_x += dt * s.base_vx;
  s.base_z += dt * s.base_vz;
  s.pitch += dt * s.pitch_rate;
  for (std::size_t j = 0; j < kNumJoints; ++j) {
    s.joint_pos[j] += dt * s.joint_vel[j];
    if (s.joint_pos[j] < p.joint_lower[j]) {
      s.joint_pos[j] = p.joint_lower[j];
      s.joint_vel[j] = std::max(s.joint_vel[j], 0.0);
    } else if (s.joint_pos[j] > p.joint_upper[j]) {
      s.joint_pos[j] = p.joint_upper[j];
      s.joint_vel[j] = std::min(s.joint_vel[j], 0.0);
    }
  }
  s.time += dt;
  return out;
}

}  // namespace sim_detail

// Full simulator state including stiction anchors.
struct EnvState {
  SimState sim;
  ContactAnchors anchors;

  friend bool operator==(const EnvState& a, const EnvState& b) {
    return a.sim == b.sim && a.anchors.active == b.anchors.active && a.anchors.x == b.anchors.x;
  }
};

inline std::array<double, kNumJoints> clip_to_limits(std::span<const double> action,
                                                     const SimParams& p) {
  if (action.size() != kNumJoints) {
    throw Error(ErrorCode::kShapeMismatch, "action must have 4 joint targets");
  }
  std::array<double, kNumJoints> out{};
  for (std::size_t j = 0; j < kNumJoints; ++j) {
    if (!std::isfinite(action[j])) throw Error(ErrorCode::kNonFinite, "action is not finite");
    out[j] = std::clamp(action[j], p.joint_lower[j], p.joint_upper[j]);
  }
  return out;
}

// Advances one control period. `action` holds absolute joint targets.
inline StepResult step(const EnvState& state, std::span<const double> action, const SimParams& p,
                       EnvState* next_full = nullptr) {
  const auto target = clip_to_limits(action, p);
  EnvState s = state;
  StepResult out;
  double flight_total = 0.0;
  for (int k = 0; k < p.control_decimation; ++k) {
    const auto sub = sim_detail::physics_substep(s.sim, target, p, s.anchors);
    for (std::size_t j = 0; j < kNumJoints; ++j) {
      out.joint_torques[j] += sub.torque[j] / p.control_decimation;
    }
    out.foot_contacts = sub.contact;
    const bool body_contact = check_termination(s.sim, p);
    const bool any_contact = sub.contact[0] || sub.contact[1] || body_contact;
    if (!any_contact) {
      s.sim.flight_angle += -s.sim.pitch_rate * p.dt_physics;
      s.sim.airborne = true;
    } else if (s.sim.airborne) {
      if (!out.landing_event) flight_total = s.sim.flight_angle;
      out.landing_event = out.landing_event || sub.contact[0] || sub.contact[1];
      s.sim.airborne = false;
      s.sim.flight_angle = 0.0;
    }
    if (body_contact) {
      out.base_contact = true;
      s.sim.terminal = true;
      break;
    }
  }
  out.flight_traversed_angle = out.landing_event ? flight_total : s.sim.flight_angle;
  out.next_state = s.sim;
  if (next_full) *next_full = s;
  return out;
}

inline StepResult step(const SimState& state, std::span<const double> action, const SimParams& p) {
  return step(EnvState{state, {}}, action, p);
}

namespace sim_detail {

// Places the nominal pose with the feet touching the ground and lets it
// settle under nominal targets. The result is the static standing state.
inline EnvState settle_nominal(const SimParams& p, double mass_offset) {
  EnvState e;
  e.sim.joint_pos = p.nominal_joint_pos;
  e.sim.mass_offset = mass_offset;
  double lowest = 0.0;
  for (int leg = 0; leg < 2; ++leg) {
    lowest = std::min(lowest, foot_body(p, leg, p.nominal_joint_pos[2 * leg],
                                        p.nominal_joint_pos[2 * leg + 1]).z);
  }
  e.sim.base_z = -lowest;
  const int n = static_cast<int>(std::lround(3.0 / p.dt_physics));
  for (int k = 0; k < n; ++k) physics_substep(e.sim, p.nominal_joint_pos, p, e.anchors);
  const double shift = e.sim.base_x;
  e.sim.base_x = 0.0;
  for (int leg = 0; leg < 2; ++leg) e.anchors.x[leg] -= shift;
  e.sim.time = 0.0;
  e.sim.base_vx = e.sim.base_vz = e.sim.pitch_rate = 0.0;
  e.sim.joint_vel = {};
  return e;
}

}  // namespace sim_detail

// Episode start: the settled standing pose, with optional joint/height noise
// and an optional base-mass offset.
// `settled`, when given, is a cached settle_nominal(p, 0) used in place of
// re-settling unperturbed bodies.
inline EnvState reset_env(const SimParams& p, std::mt19937_64& rng, bool noise = true,
                          const EnvState* settled = nullptr) {
  double mass_offset = 0.0;
  if (p.mass_perturbation) {
    std::uniform_real_distribution<double> u(p.mass_offset_low, p.mass_offset_high);
    mass_offset = u(rng);
  }
  EnvState e = (settled && !p.mass_perturbation) ? *settled : sim_detail::settle_nominal(p, mass_offset);
  if (noise) {
    std::uniform_real_distribution<double> uj(-p.reset_joint_noise, p.reset_joint_noise);
    std::uniform_real_distribution<double> uh(-p.reset_height_noise, p.reset_height_noise);
    for (auto& q : e.sim.joint_pos) q += uj(rng);
    e.sim.base_z += uh(rng);
    e.anchors = {};
  }
  return e;
}

inline SimState reset(const SimParams& p, std::mt19937_64& rng, bool noise = true) {
  return reset_env(p, rng, noise).sim;
}

// Settled standing height for the nominal pose.
inline double standing_height(const SimParams& p) { return sim_detail::settle_nominal(p, 0.0).sim.base_z; }

// ---------------------------------------------------------------------------
// Rough demonstrations
// ---------------------------------------------------------------------------

enum class Motion { kLeap, kWave, kStandUp, kBackFlip };

inline const char* motion_name(Motion m) {
  switch (m) {
    case Motion::kLeap: return "leap";
    case Motion::kWave: return "wave";
    case Motion::kStandUp: return "standup";
    case Motion::kBackFlip: return "backflip";
  }
  return "leap";
}

inline Motion motion_from_name(const std::string& s) {
  if (s == "leap") return Motion::kLeap;
  if (s == "wave") return Motion::kWave;
  if (s == "standup") return Motion::kStandUp;
  if (s == "backflip") return Motion::kBackFlip;
  throw Error(ErrorCode::kInvalidArgument,
              "unknown motion '" + s + "' (expected leap|wave|standup|backflip)");
}

inline std::size_t motion_frames(Motion m) {
  switch (m) {
    case Motion::kLeap: return 130;
    case Motion::kWave: return 130;
    case Motion::kStandUp: return 100;
    case Motion::kBackFlip: return 60;
  }
  return 0;
}

struct DemoOptions {
  bool noise = true;
  double time_scale_jitter = 0.15;
  double position_noise = 0.01;  // m
  double angle_noise = 0.03;     // rad
  double height_offset = 0.0;    // demonstrator carrying offset
  double dt = 0.02;
};

struct ScriptPose {
  double x = 0.0;
  double z = 0.0;
  double pitch = 0.0;
};

// Kinematic base script for a motion. `t` is script time (s), `phase` the
// endpoint-preserving progress in [0, 1] used by the episodic motions.
inline ScriptPose motion_script(Motion m, double t, double phase, double stand_z) {
  constexpr double kPi = std::numbers::pi;
  auto smoothstep = [](double u) {
    u = std::clamp(u, 0.0, 1.0);
    return u * u * (3.0 - 2.0 * u);
  };
  switch (m) {
    case Motion::kLeap: {
      const double f = 1.6;  // hops per second
      return {0.6 * t, stand_z + 0.12 * std::abs(std::sin(kPi * f * t)),
              0.15 * std::sin(2.0 * kPi * f * t)};
    }
    case Motion::kWave: {
      const double f = 1.5;
      return {0.3 * t, stand_z + 0.04 * std::sin(2.0 * kPi * f * t),
              0.2 * std::cos(2.0 * kPi * f * t)};
    }
    case Motion::kStandUp: {
      const double s = smoothstep(phase / 0.7);
      return {-0.05 * s, stand_z + (0.45 - stand_z) * s, 0.5 * kPi * s};
    }
    case Motion::kBackFlip: {
      const double s = smoothstep(phase);
      return {-0.1 * phase, stand_z + (0.6 - stand_z) * std::sin(kPi * phase), -2.0 * kPi * s};
    }
  }
  return {};
}

// Kinematic, dynamics-free demonstrations: jittered scripts with velocities
// from forward differences, so they are not reproducible by the simulator.
inline std::vector<Observation> generate_rough_demo(Motion motion, double stand_z,
                                                    std::mt19937_64& rng,
                                                    const DemoOptions& opt = {}) {
  const std::size_t n = motion_frames(motion);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const double jitter = opt.noise ? opt.time_scale_jitter * (2.0 * unit(rng) - 1.0) : 0.0;
  const bool periodic = motion == Motion::kLeap || motion == Motion::kWave;

  struct Wave {
    double amp, freq, phase;
  };
  auto draw_noise = [&](double scale) {
    std::vector<Wave> w;
    if (!opt.noise) return w;
    for (int k = 0; k < 3; ++k) {
      w.push_back({scale / 3.0 * (2.0 * unit(rng) - 1.0), 0.3 + 1.7 * unit(rng),
                   2.0 * std::numbers::pi * unit(rng)});
    }
    return w;
  };
  const auto nx = draw_noise(opt.position_noise);
  const auto nz = draw_noise(opt.position_noise);
  const auto np = draw_noise(opt.angle_noise);
  auto eval_noise = [](const std::vector<Wave>& w, double t) {
    double v = 0.0;
    for (const auto& c : w) v += c.amp * std::sin(2.0 * std::numbers::pi * c.freq * t + c.phase);
    return v;
  };

  std::vector<ScriptPose> poses(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double t = static_cast<double>(i) * opt.dt;
    const double u = n > 1 ? static_cast<double>(i) / static_cast<double>(n - 1) : 1.0;
    const double script_t = periodic ? t * (1.0 + jitter) : t;
    const double phase = periodic ? u : std::pow(u, 1.0 + jitter);
    ScriptPose p = motion_script(motion, script_t, phase, stand_z);
    p.x += eval_noise(nx, t);
    p.z += eval_noise(nz, t) + opt.height_offset;
    p.pitch += eval_noise(np, t);
    poses[i] = p;
  }

  std::vector<Observation> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t a = (i + 1 < n) ? i : (n >= 2 ? n - 2 : 0);
    const std::size_t b = (i + 1 < n) ? i + 1 : n - 1;
    const double vx = n > 1 ? (poses[b].x - poses[a].x) / opt.dt : 0.0;
    const double vz = n > 1 ? (poses[b].z - poses[a].z) / opt.dt : 0.0;
    const double wr = n > 1 ? (poses[b].pitch - poses[a].pitch) / opt.dt : 0.0;
    SimState s;
    s.base_x = poses[i].x;
    s.base_z = poses[i].z;
    s.pitch = poses[i].pitch;
    s.base_vx = vx;
    s.base_vz = vz;
    s.pitch_rate = wr;
    out[i] = phi_extract(s);
  }
  return out;
}

inline ReferenceDataset generate_demo_dataset(Motion motion, std::size_t count, double stand_z,
                                              std::mt19937_64& rng, const DemoOptions& opt = {}) {
  ReferenceDataset ds;
  ds.motion_name = motion_name(motion);
  ds.dt = opt.dt;
  for (std::size_t k = 0; k < count; ++k) {
    ds.trajectories.push_back(generate_rough_demo(motion, stand_z, rng, opt));
  }
  return ds;
}

}  // namespace wasabi

#endif  // WASABI_SIM_HPP_
