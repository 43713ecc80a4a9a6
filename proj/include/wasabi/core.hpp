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

#ifndef WASABI_CORE_HPP_
#define WASABI_CORE_HPP_

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <cstddef>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <istream>
#include <limits>
#include <numeric>
#include <ostream>
#include <random>
#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "wasabi/error.hpp"

namespace wasabi {

inline constexpr std::size_t kNumJoints = 4;

// Full planar simulator state. Positions are world-frame; pitch is the
// counter-clockwise rotation of the body x axis towards world +z, so a
// positive pitch raises the front (+x) end of the body.
struct SimState {
  double base_x = 0.0;
  double base_z = 0.0;
  double pitch = 0.0;
  double base_vx = 0.0;
  double base_vz = 0.0;
  double pitch_rate = 0.0;
  std::array<double, kNumJoints> joint_pos{};
  std::array<double, kNumJoints> joint_vel{};
  double time = 0.0;
  bool terminal = false;

  // Per-episode and per-flight bookkeeping owned by the simulator.
  double mass_offset = 0.0;
  double flight_angle = 0.0;
  bool airborne = false;

  bool finite() const {
    auto ok = [](double v) { return std::isfinite(v); };
    bool base = ok(base_x) && ok(base_z) && ok(pitch) && ok(base_vx) &&
                ok(base_vz) && ok(pitch_rate) && ok(time) && ok(mass_offset) &&
                ok(flight_angle);
    return base && std::all_of(joint_pos.begin(), joint_pos.end(), ok) &&
           std::all_of(joint_vel.begin(), joint_vel.end(), ok);
  }

  friend bool operator==(const SimState&, const SimState&) = default;
};

// Partial, base-only observation shared by the simulator and the reference
// demonstrations.
struct Observation {
  static constexpr std::size_t kSize = 6;

  double vx_body = 0.0;
  double vz_body = 0.0;
  double pitch_rate = 0.0;
  double grav_x_body = 0.0;
  double grav_z_body = -1.0;
  double height = 0.0;

  std::array<double, kSize> to_array() const {
    return {vx_body, vz_body, pitch_rate, grav_x_body, grav_z_body, height};
  }

  static Observation from_array(std::span<const double> v) {
    if (v.size() < kSize) {
      throw Error(ErrorCode::kShapeMismatch, "observation needs 6 values");
    }
    return {v[0], v[1], v[2], v[3], v[4], v[5]};
  }

  bool finite() const {
    auto a = to_array();
    return std::all_of(a.begin(), a.end(), [](double x) { return std::isfinite(x); });
  }

  double gravity_norm_error() const {
    return std::abs(std::hypot(grav_x_body, grav_z_body) - 1.0);
  }

  friend bool operator==(const Observation&, const Observation&) = default;
};

// Rotates a world-frame planar vector into the body frame (rotation by -pitch).
inline std::array<double, 2> world_to_body(double x, double z, double pitch) {
  const double c = std::cos(pitch);
  const double s = std::sin(pitch);
  return {c * x + s * z, -s * x + c * z};
}

inline std::array<double, 2> body_to_world(double x, double z, double pitch) {
  const double c = std::cos(pitch);
  const double s = std::sin(pitch);
  return {c * x - s * z, s * x + c * z};
}

// The observation map. Only base quantities are read; joint fields are never
// touched so that policy observations live in the same space as the
// demonstrations.
inline Observation phi_extract(const SimState& state) {
  const bool ok = std::isfinite(state.base_z) && std::isfinite(state.pitch) &&
                  std::isfinite(state.base_vx) && std::isfinite(state.base_vz) &&
                  std::isfinite(state.pitch_rate);
  if (!ok) {
    throw Error(ErrorCode::kNonFinite, "phi_extract: state has non-finite base fields");
  }
  const auto v = world_to_body(state.base_vx, state.base_vz, state.pitch);
  const auto g = world_to_body(0.0, -1.0, state.pitch);
  return {v[0], v[1], state.pitch_rate, g[0], g[1], state.base_z};
}

// Discriminator features of one frame: the observation, optionally followed
// by joint positions and velocities (full-configuration variant).
inline std::size_t frame_dim(bool full_state) {
  return Observation::kSize + (full_state ? 2 * kNumJoints : 0);
}

inline std::vector<double> state_features(const SimState& state, bool full_state) {
  const auto o = phi_extract(state).to_array();
  std::vector<double> f(o.begin(), o.end());
  if (full_state) {
    f.insert(f.end(), state.joint_pos.begin(), state.joint_pos.end());
    f.insert(f.end(), state.joint_vel.begin(), state.joint_vel.end());
  }
  return f;
}

// H consecutive frames, oldest first, flattened time-major.
struct ObservationWindow {
  std::size_t horizon = 0;
  std::size_t feature_dim = 0;
  std::vector<double> data;

  std::span<const double> frame(std::size_t i) const {
    return std::span<const double>(data).subspan(i * feature_dim, feature_dim);
  }

  Observation observation(std::size_t i) const { return Observation::from_array(frame(i)); }

  friend bool operator==(const ObservationWindow&, const ObservationWindow&) = default;
};

// Rolling s^H buffer. At episode start it holds H copies of the first frame.
class WindowBuffer {
 public:
  WindowBuffer() = default;
  WindowBuffer(std::size_t horizon, std::size_t feature_dim)
      : horizon_(horizon), feature_dim_(feature_dim) {
    if (horizon == 0 || feature_dim == 0) {
      throw Error(ErrorCode::kInvalidArgument, "window buffer needs horizon >= 1");
    }
  }

  std::size_t horizon() const { return horizon_; }
  std::size_t feature_dim() const { return feature_dim_; }
  bool initialized() const { return !data_.empty(); }

  void reset(std::span<const double> first) {
    check(first);
    data_.clear();
    data_.reserve(horizon_ * feature_dim_);
    for (std::size_t i = 0; i < horizon_; ++i) data_.insert(data_.end(), first.begin(), first.end());
  }

  ObservationWindow push(std::span<const double> frame) {
    if (!initialized()) {
      reset(frame);
      return window();
    }
    check(frame);
    std::copy(data_.begin() + static_cast<std::ptrdiff_t>(feature_dim_), data_.end(), data_.begin());
    std::copy(frame.begin(), frame.end(), data_.end() - static_cast<std::ptrdiff_t>(feature_dim_));
    return window();
  }

  ObservationWindow window() const { return {horizon_, feature_dim_, data_}; }

  const std::vector<double>& raw() const { return data_; }
  void set_raw(std::vector<double> data) {
    if (!data.empty() && data.size() != horizon_ * feature_dim_) {
      throw Error(ErrorCode::kShapeMismatch, "window buffer restore size");
    }
    data_ = std::move(data);
  }

 private:
  void check(std::span<const double> frame) const {
    if (frame.size() != feature_dim_) {
      throw Error(ErrorCode::kShapeMismatch, "window frame has " + std::to_string(frame.size()) +
                                                 " features, buffer expects " +
                                                 std::to_string(feature_dim_));
    }
  }

  std::size_t horizon_ = 0;
  std::size_t feature_dim_ = 0;
  std::vector<double> data_;
};

inline ObservationWindow window_push(WindowBuffer& buffer, const Observation& obs) {
  const auto a = obs.to_array();
  return buffer.push(a);
}

// ---------------------------------------------------------------------------
// Reference demonstrations
// ---------------------------------------------------------------------------

using JointFrame = std::array<double, 2 * kNumJoints>;

struct ReferenceDataset {
  std::vector<std::vector<Observation>> trajectories;
  // Either empty or parallel to `trajectories` (joint_pos then joint_vel).
  std::vector<std::vector<JointFrame>> joints;
  std::string motion_name;
  double dt = 0.02;

  bool has_joints() const { return !joints.empty(); }

  std::size_t min_length() const {
    std::size_t m = std::numeric_limits<std::size_t>::max();
    for (const auto& t : trajectories) m = std::min(m, t.size());
    return trajectories.empty() ? 0 : m;
  }

  std::size_t total_frames() const {
    std::size_t n = 0;
    for (const auto& t : trajectories) n += t.size();
    return n;
  }

  void append_frame(std::size_t traj, std::size_t index, bool full_state,
                    std::vector<double>& out) const {
    const auto a = trajectories[traj][index].to_array();
    out.insert(out.end(), a.begin(), a.end());
    if (full_state) {
      if (!has_joints()) {
        throw Error(ErrorCode::kInvalidArgument,
                    "full-state features requested but the dataset has no joint columns");
      }
      const auto& j = joints[traj][index];
      out.insert(out.end(), j.begin(), j.end());
    }
  }

  // Throws on the first violated invariant.
  void validate(std::size_t horizon) const {
    if (trajectories.empty()) throw Error(ErrorCode::kNoTrajectories, motion_name);
    if (has_joints() && joints.size() != trajectories.size()) {
      throw Error(ErrorCode::kShapeMismatch, "joint columns missing for some trajectories");
    }
    for (std::size_t i = 0; i < trajectories.size(); ++i) {
      const auto& t = trajectories[i];
      if (t.size() < horizon) {
        throw Error(ErrorCode::kTrajectoryTooShort,
                    "trajectory " + std::to_string(i) + " has " + std::to_string(t.size()) +
                        " frames, horizon is " + std::to_string(horizon));
      }
      for (const auto& o : t) {
        if (!o.finite()) throw Error(ErrorCode::kNonFinite, "trajectory " + std::to_string(i));
        if (o.gravity_norm_error() > 1e-6) {
          throw Error(ErrorCode::kNonUnitGravity, "trajectory " + std::to_string(i));
        }
      }
    }
  }
};

namespace detail {

inline const std::vector<std::string>& csv_base_columns() {
  static const std::vector<std::string> cols{"t", "vx", "vz", "pitch_rate", "gx", "gz", "height"};
  return cols;
}

inline const std::vector<std::string>& csv_joint_columns() {
  static const std::vector<std::string> cols{"q0",  "q1",  "q2",  "q3",
                                             "dq0", "dq1", "dq2", "dq3"};
  return cols;
}

inline std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(b, e - b + 1));
}

inline std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) out.push_back(trim(cell));
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

inline double parse_double(const std::string& cell, std::size_t line_no) {
  double v = 0.0;
  const char* first = cell.data();
  const char* last = cell.data() + cell.size();
  auto [ptr, ec] = std::from_chars(first, last, v);
  if (cell.empty() || ec != std::errc() || ptr != last || !std::isfinite(v)) {
    throw Error(ErrorCode::kNonNumericCell,
                "line " + std::to_string(line_no) + ": '" + cell + "'");
  }
  return v;
}

inline std::string format_double(double v) {
  std::array<char, 32> buf{};
  auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v,
                                 std::chars_format::general, 17);
  (void)ec;
  return std::string(buf.data(), ptr);
}

struct ParsedTrajectory {
  std::vector<double> t;
  std::vector<Observation> obs;
  std::vector<JointFrame> joints;
};

}  // namespace detail

// Parses one CSV stream; trajectories are separated by "# trajectory <n>"
// lines. Appends to `out`. An optional "# motion <name>" line sets the label.
inline void parse_reference_csv(std::istream& in, ReferenceDataset& out,
                                const std::string& source = "<stream>") {
  std::string line;
  std::size_t line_no = 0;
  bool header_seen = false;
  bool with_joints = false;
  std::vector<detail::ParsedTrajectory> parsed;
  parsed.emplace_back();

  while (std::getline(in, line)) {
    ++line_no;
    const std::string s = detail::trim(line);
    if (s.empty()) continue;
    if (s[0] == '#') {
      std::istringstream cs(s.substr(1));
      std::string tag;
      cs >> tag;
      if (tag == "trajectory") {
        if (!parsed.back().obs.empty()) parsed.emplace_back();
      } else if (tag == "motion") {
        std::string name;
        cs >> name;
        if (out.motion_name.empty()) out.motion_name = name;
      }
      continue;
    }
    const auto cells = detail::split_csv(s);
    if (!header_seen) {
      const auto& base = detail::csv_base_columns();
      const auto& jc = detail::csv_joint_columns();
      const bool base_ok = cells.size() >= base.size() &&
                           std::equal(base.begin(), base.end(), cells.begin());
      with_joints = cells.size() == base.size() + jc.size();
      const bool joints_ok =
          !with_joints || std::equal(jc.begin(), jc.end(), cells.begin() + base.size());
      if (!base_ok || !joints_ok || (cells.size() != base.size() && !with_joints)) {
        throw Error(ErrorCode::kMalformedHeader, source + ": '" + s + "'");
      }
      header_seen = true;
      continue;
    }
    // A repeated header starts a new trajectory (concatenated files).
    if (cells.size() > 0 && cells[0] == "t") {
      if (!parsed.back().obs.empty()) parsed.emplace_back();
      continue;
    }
    const std::size_t expected = with_joints ? 15 : 7;
    if (cells.size() != expected) {
      throw Error(ErrorCode::kNonNumericCell, source + " line " + std::to_string(line_no) +
                                                  ": expected " + std::to_string(expected) +
                                                  " cells");
    }
    std::array<double, 15> v{};
    for (std::size_t i = 0; i < expected; ++i) v[i] = detail::parse_double(cells[i], line_no);
    auto& cur = parsed.back();
    cur.t.push_back(v[0]);
    cur.obs.push_back({v[1], v[2], v[3], v[4], v[5], v[6]});
    if (with_joints) {
      JointFrame j{};
      std::copy(v.begin() + 7, v.begin() + 15, j.begin());
      cur.joints.push_back(j);
    }
  }
  if (!header_seen) return;

  if (!out.trajectories.empty() && out.has_joints() != with_joints) {
    throw Error(ErrorCode::kMalformedHeader, source + ": joint columns differ between files");
  }
  for (auto& p : parsed) {
    if (p.obs.empty()) continue;
    if (p.t.size() >= 2) {
      const double dt = p.t[1] - p.t[0];
      for (std::size_t i = 2; i < p.t.size(); ++i) {
        if (std::abs((p.t[i] - p.t[i - 1]) - dt) > 1e-9) {
          throw Error(ErrorCode::kNonUniformTimestep,
                      source + ": row " + std::to_string(i) + " of a trajectory");
        }
      }
      if (!(dt > 0.0)) throw Error(ErrorCode::kNonUniformTimestep, source + ": dt <= 0");
      if (!out.trajectories.empty() && std::abs(dt - out.dt) > 1e-9) {
        throw Error(ErrorCode::kNonUniformTimestep, source + ": dt differs between trajectories");
      }
      out.dt = dt;
    }
    out.trajectories.push_back(std::move(p.obs));
    if (with_joints) out.joints.push_back(std::move(p.joints));
  }
}

// Writes every trajectory to one stream, separated by "# trajectory <n>".
inline void write_reference_csv(std::ostream& os, const ReferenceDataset& ds) {
  const bool joints = ds.has_joints();
  if (!ds.motion_name.empty()) os << "# motion " << ds.motion_name << '\n';
  os << "t,vx,vz,pitch_rate,gx,gz,height";
  if (joints) os << ",q0,q1,q2,q3,dq0,dq1,dq2,dq3";
  os << '\n';
  for (std::size_t k = 0; k < ds.trajectories.size(); ++k) {
    os << "# trajectory " << k << '\n';
    const auto& traj = ds.trajectories[k];
    for (std::size_t i = 0; i < traj.size(); ++i) {
      os << detail::format_double(static_cast<double>(i) * ds.dt);
      for (double v : traj[i].to_array()) os << ',' << detail::format_double(v);
      if (joints) {
        for (double v : ds.joints[k][i]) os << ',' << detail::format_double(v);
      }
      os << '\n';
    }
  }
}

// Writes one file per trajectory: <dir>/<motion>_<nn>.csv. Returns the paths.
inline std::vector<std::filesystem::path> write_reference_files(
    const std::filesystem::path& dir, const ReferenceDataset& ds) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw Error(ErrorCode::kIo, "cannot create " + dir.string() + ": " + ec.message());
  std::vector<std::filesystem::path> paths;
  for (std::size_t k = 0; k < ds.trajectories.size(); ++k) {
    ReferenceDataset one;
    one.motion_name = ds.motion_name;
    one.dt = ds.dt;
    one.trajectories.push_back(ds.trajectories[k]);
    if (ds.has_joints()) one.joints.push_back(ds.joints[k]);
    std::ostringstream name;
    name << (ds.motion_name.empty() ? "trajectory" : ds.motion_name) << '_' << std::setw(2)
         << std::setfill('0') << k << ".csv";
    const auto path = dir / name.str();
    std::ofstream f(path);
    if (!f) throw Error(ErrorCode::kIo, "cannot write " + path.string());
    write_reference_csv(f, one);
    if (!f) throw Error(ErrorCode::kIo, "write failed for " + path.string());
    paths.push_back(path);
  }
  return paths;
}

// Loads a CSV file or every *.csv in a directory (sorted by name), then checks
// the dataset against `horizon`.
inline ReferenceDataset load_reference_dataset(const std::filesystem::path& path,
                                               std::size_t horizon) {
  namespace fs = std::filesystem;
  std::vector<fs::path> files;
  std::error_code ec;
  if (fs::is_directory(path, ec)) {
    for (const auto& e : fs::directory_iterator(path)) {
      if (e.is_regular_file() && e.path().extension() == ".csv") files.push_back(e.path());
    }
    std::sort(files.begin(), files.end());
  } else {
    files.push_back(path);
  }
  ReferenceDataset ds;
  for (const auto& f : files) {
    std::ifstream in(f);
    if (!in) throw Error(ErrorCode::kIo, "cannot read " + f.string());
    parse_reference_csv(in, ds, f.string());
  }
  if (ds.motion_name.empty()) ds.motion_name = path.stem().string();
  if (ds.trajectories.empty()) throw Error(ErrorCode::kNoTrajectories, path.string());
  ds.validate(horizon);
  return ds;
}

// Draws `batch` windows uniformly over all valid (trajectory, start) pairs,
// with replacement.
inline std::vector<ObservationWindow> sample_reference_windows(const ReferenceDataset& ds,
                                                               std::size_t batch,
                                                               std::size_t horizon,
                                                               std::mt19937_64& rng,
                                                               bool full_state = false) {
  if (batch == 0) throw Error(ErrorCode::kInvalidArgument, "batch must be positive");
  if (horizon == 0) throw Error(ErrorCode::kInvalidArgument, "horizon must be positive");
  std::vector<std::size_t> prefix;
  prefix.reserve(ds.trajectories.size() + 1);
  prefix.push_back(0);
  for (const auto& t : ds.trajectories) {
    if (t.size() < horizon) {
      throw Error(ErrorCode::kTrajectoryTooShort, "dataset not valid for horizon");
    }
    prefix.push_back(prefix.back() + (t.size() - horizon + 1));
  }
  if (prefix.back() == 0) throw Error(ErrorCode::kNoTrajectories, "empty dataset");

  std::uniform_int_distribution<std::size_t> pick(0, prefix.back() - 1);
  const std::size_t fdim = frame_dim(full_state);
  std::vector<ObservationWindow> out;
  out.reserve(batch);
  for (std::size_t b = 0; b < batch; ++b) {
    const std::size_t k = pick(rng);
    const auto it = std::upper_bound(prefix.begin(), prefix.end(), k);
    const std::size_t traj = static_cast<std::size_t>(it - prefix.begin()) - 1;
    const std::size_t start = k - prefix[traj];
    ObservationWindow w{horizon, fdim, {}};
    w.data.reserve(horizon * fdim);
    for (std::size_t i = 0; i < horizon; ++i) ds.append_frame(traj, start + i, full_state, w.data);
    out.push_back(std::move(w));
  }
  return out;
}

}  // namespace wasabi

#endif  // WASABI_CORE_HPP_
