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

#include <Eigen/Geometry>

#include <cmath>
#include <filesystem>
#include <map>
#include <fstream>
#include <numbers>
#include <random>
#include <sstream>

#include "wasabi/core.hpp"
#include "wasabi/sim.hpp"

namespace fs = std::filesystem;
using namespace wasabi;

namespace {

fs::path temp_dir(const std::string& name) {
  fs::path p = fs::temp_directory_path() / ("wasabi_core_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

void write_file(const fs::path& p, const std::string& text) {
  std::ofstream(p) << text;
}

std::string rows(std::size_t n, double gx = 0.0, double gz = -1.0) {
  std::ostringstream os;
  for (std::size_t i = 0; i < n; ++i) {
    os << 0.02 * static_cast<double>(i) << ",0.1,0,0.2," << gx << ',' << gz << ",0.3\n";
  }
  return os.str();
}

ErrorCode load_error(const std::string& text, std::size_t horizon) {
  const auto dir = temp_dir("err");
  write_file(dir / "r.csv", text);
  try {
    load_reference_dataset(dir / "r.csv", horizon);
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no error raised";
  return ErrorCode::kIo;
}

}  // namespace

TEST(PhiExtract, UprightAtRest) {
  SimState s;
  s.base_z = 0.30;
  const Observation o = phi_extract(s);
  EXPECT_EQ(o, (Observation{0.0, 0.0, 0.0, 0.0, -1.0, 0.30}));
}

TEST(PhiExtract, QuarterTurnGravity) {
  SimState s;
  s.base_z = 0.30;
  s.pitch = std::numbers::pi / 2;
  const Observation o = phi_extract(s);
  EXPECT_NEAR(o.grav_x_body, -1.0, 1e-15);
  EXPECT_NEAR(o.grav_z_body, 0.0, 1e-15);
}

TEST(PhiExtract, BodyVelocityMatchesRotationOracle) {
  SimState s;
  s.pitch = std::numbers::pi / 4;
  s.base_vx = 1.0;
  const Observation o = phi_extract(s);
  EXPECT_NEAR(o.vx_body, 0.7071, 1e-4);
  EXPECT_NEAR(o.vz_body, -0.7071, 1e-4);

  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-4.0, 4.0);
  for (int k = 0; k < 200; ++k) {
    s.pitch = u(rng);
    s.base_vx = u(rng);
    s.base_vz = u(rng);
    const Eigen::Vector2d v = Eigen::Rotation2Dd(-s.pitch) * Eigen::Vector2d(s.base_vx, s.base_vz);
    const Eigen::Vector2d g = Eigen::Rotation2Dd(-s.pitch) * Eigen::Vector2d(0.0, -1.0);
    const Observation r = phi_extract(s);
    EXPECT_NEAR(r.vx_body, v.x(), 1e-12);
    EXPECT_NEAR(r.vz_body, v.y(), 1e-12);
    EXPECT_NEAR(r.grav_x_body, g.x(), 1e-12);
    EXPECT_NEAR(r.grav_z_body, g.y(), 1e-12);
    EXPECT_LT(r.gravity_norm_error(), 1e-9);
  }
}

TEST(PhiExtract, IgnoresJointFields) {
  SimState a, b;
  a.base_z = b.base_z = 0.25;
  b.joint_pos = {1.0, 2.0, 3.0, 4.0};
  b.joint_vel = {-1.0, 5.0, 0.5, 7.0};
  EXPECT_EQ(phi_extract(a), phi_extract(b));
}

TEST(PhiExtract, RejectsNonFinite) {
  SimState s;
  s.base_vx = std::nan("");
  try {
    phi_extract(s);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kNonFinite);
  }
}

TEST(WindowPush, SingleStepHorizon) {
  WindowBuffer buf(1, 6);
  const Observation o{1, 2, 3, 0, -1, 0.3};
  const auto w = window_push(buf, o);
  ASSERT_EQ(w.horizon, 1u);
  EXPECT_EQ(w.observation(0), o);
}

TEST(WindowPush, ResetPadsWithFirstFrame) {
  WindowBuffer buf(3, 6);
  const Observation o0{0.5, 0, 0, 0, -1, 0.2};
  const auto a = o0.to_array();
  buf.reset(a);
  const auto w = buf.window();
  ASSERT_EQ(w.data.size(), 18u);
  for (std::size_t i = 0; i < 3; ++i) EXPECT_EQ(w.observation(i), o0);
}

TEST(WindowPush, DropsOldestAppendsNewest) {
  WindowBuffer buf(2, 6);
  const Observation a{1, 0, 0, 0, -1, 0}, b{2, 0, 0, 0, -1, 0}, c{3, 0, 0, 0, -1, 0};
  window_push(buf, a);
  window_push(buf, b);
  const auto w = window_push(buf, c);
  EXPECT_EQ(w.observation(0), b);
  EXPECT_EQ(w.observation(1), c);
  // time-major flattening
  EXPECT_EQ(w.data[0], 2.0);
  EXPECT_EQ(w.data[6], 3.0);
}

TEST(WindowPush, RejectsWrongFrameSize) {
  WindowBuffer buf(2, 6);
  std::vector<double> f(5, 0.0);
  EXPECT_THROW(buf.push(f), Error);
}

TEST(ReferenceLoading, TwentyBackflipFiles) {
  const auto dir = temp_dir("bf");
  std::mt19937_64 rng(7);
  const auto ds = generate_demo_dataset(Motion::kBackFlip, 20, 0.22, rng);
  write_reference_files(dir, ds);
  const auto loaded = load_reference_dataset(dir, 16);
  ASSERT_EQ(loaded.trajectories.size(), 20u);
  for (const auto& t : loaded.trajectories) EXPECT_EQ(t.size(), 60u);
  EXPECT_EQ(loaded.motion_name, "backflip");
}

TEST(ReferenceLoading, CsvRoundTripIsExact) {
  std::mt19937_64 rng(11);
  const auto ds = generate_demo_dataset(Motion::kLeap, 3, 0.22, rng);
  std::ostringstream os;
  write_reference_csv(os, ds);
  std::istringstream is(os.str());
  ReferenceDataset back;
  parse_reference_csv(is, back);
  ASSERT_EQ(back.trajectories.size(), 3u);
  EXPECT_EQ(back.trajectories, ds.trajectories);
  EXPECT_DOUBLE_EQ(back.dt, 0.02);
}

TEST(ReferenceLoading, ShortTrajectoryRejected) {
  EXPECT_EQ(load_error("t,vx,vz,pitch_rate,gx,gz,height\n" + rows(5), 16), ErrorCode::kTrajectoryTooShort);
}

TEST(ReferenceLoading, EmptyFileRejected) {
  EXPECT_EQ(load_error("", 2), ErrorCode::kNoTrajectories);
}

TEST(ReferenceLoading, MalformedHeaderRejected) {
  EXPECT_EQ(load_error("t,vx,vz,pitch,gx,gz,height\n" + rows(5), 2), ErrorCode::kMalformedHeader);
}

TEST(ReferenceLoading, NonNumericCellRejected) {
  EXPECT_EQ(load_error("t,vx,vz,pitch_rate,gx,gz,height\n0,0.1,abc,0,0,-1,0.3\n", 1), ErrorCode::kNonNumericCell);
}

TEST(ReferenceLoading, NonUnitGravityRejected) {
  EXPECT_EQ(load_error("t,vx,vz,pitch_rate,gx,gz,height\n" + rows(4, 0.1, -1.0), 2), ErrorCode::kNonUnitGravity);
}

TEST(ReferenceLoading, NonUniformTimestepRejected) {
  EXPECT_EQ(load_error("t,vx,vz,pitch_rate,gx,gz,height\n0,0,0,0,0,-1,0.3\n0.02,0,0,0,0,-1,0.3\n0.05,0,0,0,0,-1,0.3\n", 1),
            ErrorCode::kNonUniformTimestep);
}

TEST(ReferenceLoading, DiagnosticsAreDistinct) {
  EXPECT_STREQ(error_code_name(ErrorCode::kTrajectoryTooShort), "trajectory shorter than horizon");
  EXPECT_STREQ(error_code_name(ErrorCode::kNoTrajectories), "no trajectories");
  EXPECT_STRNE(error_code_name(ErrorCode::kMalformedHeader), error_code_name(ErrorCode::kNonNumericCell));
  EXPECT_STRNE(error_code_name(ErrorCode::kNonUnitGravity), error_code_name(ErrorCode::kMalformedHeader));
}

TEST(ReferenceLoading, JointColumnsOptional) {
  const auto dir = temp_dir("joints");
  std::string text = "t,vx,vz,pitch_rate,gx,gz,height,q0,q1,q2,q3,dq0,dq1,dq2,dq3\n";
  for (int i = 0; i < 3; ++i) text += std::to_string(0.02 * i) + ",0,0,0,0,-1,0.3,1,2,3,4,5,6,7,8\n";
  write_file(dir / "j.csv", text);
  const auto ds = load_reference_dataset(dir / "j.csv", 2);
  ASSERT_TRUE(ds.has_joints());
  std::mt19937_64 rng(1);
  const auto w = sample_reference_windows(ds, 4, 2, rng, true);
  EXPECT_EQ(w[0].data.size(), 28u);
  EXPECT_EQ(w[0].data[6], 1.0);
}

TEST(SampleWindows, WindowsAreContiguousSlices) {
  std::mt19937_64 gen(5);
  const auto ds = generate_demo_dataset(Motion::kWave, 4, 0.22, gen);
  std::mt19937_64 rng(9);
  const auto ws = sample_reference_windows(ds, 200, 4, rng);
  ASSERT_EQ(ws.size(), 200u);
  for (const auto& w : ws) {
    ASSERT_EQ(w.horizon, 4u);
    bool found = false;
    for (const auto& t : ds.trajectories) {
      for (std::size_t s = 0; s + 4 <= t.size() && !found; ++s) {
        bool eq = true;
        for (std::size_t i = 0; i < 4 && eq; ++i) eq = w.observation(i) == t[s + i];
        found = eq;
      }
    }
    EXPECT_TRUE(found);
  }
}

TEST(SampleWindows, SeededAndValidated) {
  std::mt19937_64 gen(5);
  const auto ds = generate_demo_dataset(Motion::kLeap, 2, 0.22, gen);
  std::mt19937_64 a(4), b(4);
  EXPECT_EQ(sample_reference_windows(ds, 10, 2, a)[3].data, sample_reference_windows(ds, 10, 2, b)[3].data);
  EXPECT_THROW(sample_reference_windows(ds, 0, 2, a), Error);
  EXPECT_THROW(sample_reference_windows(ds, 4, 500, a), Error);
}

TEST(SampleWindows, CoversEveryStartUniformly) {
  ReferenceDataset ds;
  ds.trajectories.push_back(std::vector<Observation>(3));
  ds.trajectories.push_back(std::vector<Observation>(5));
  for (std::size_t i = 0; i < 3; ++i) ds.trajectories[0][i].vx_body = static_cast<double>(i);
  for (std::size_t i = 0; i < 5; ++i) ds.trajectories[1][i].vx_body = 10.0 + static_cast<double>(i);
  std::mt19937_64 rng(2);
  std::map<double, int> counts;
  const int n = 60000;
  for (const auto& w : sample_reference_windows(ds, n, 2, rng)) counts[w.data[0]]++;
  // 2 + 4 valid starts
  ASSERT_EQ(counts.size(), 6u);
  for (const auto& [k, c] : counts) EXPECT_NEAR(c, n / 6.0, 5.0 * std::sqrt(n / 6.0)) << k;
}
