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

#ifndef WASABI_DTW_HPP_
#define WASABI_DTW_HPP_

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "wasabi/core.hpp"
#include "wasabi/error.hpp"

namespace wasabi {

// Symmetric1: steps (1,0), (0,1), (1,1), unit weights.
// MoriAsymmetric: every step advances the query by one while the reference
// advances by 0, 1 or 2, so each query element is matched exactly once and
// reference elements may be skipped. Costs are accumulated unnormalized.
enum class StepPattern { kSymmetric1, kMoriAsymmetric };

inline const char* step_pattern_name(StepPattern p) {
  return p == StepPattern::kSymmetric1 ? "symmetric1" : "mori_asymmetric";
}

inline StepPattern step_pattern_from_name(const std::string& s) {
  if (s == "symmetric1") return StepPattern::kSymmetric1;
  if (s == "mori_asymmetric" || s == "asymmetric") return StepPattern::kMoriAsymmetric;
  throw Error(ErrorCode::kInvalidArgument, "unknown step pattern '" + s + "'");
}

struct DtwConfig {
  StepPattern step_pattern = StepPattern::kMoriAsymmetric;
  bool open_end = true;
};

using FeatureSequence = std::vector<std::vector<double>>;

struct AlignmentStep {
  std::size_t query_index = 0;
  std::size_t reference_index = 0;
  double local_cost = 0.0;
};

struct DtwResult {
  double distance = 0.0;
  std::vector<AlignmentStep> alignment;
};

inline FeatureSequence to_feature_sequence(std::span<const Observation> obs) {
  FeatureSequence out;
  out.reserve(obs.size());
  for (const auto& o : obs) {
    const auto a = o.to_array();
    out.emplace_back(a.begin(), a.end());
  }
  return out;
}

namespace detail {

inline double l2(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) {
    const double d = a[k] - b[k];
    s += d * d;
  }
  return std::sqrt(s);
}

inline void check_sequences(const FeatureSequence& q, const FeatureSequence& r) {
  if (q.empty() || r.empty()) throw Error(ErrorCode::kSequenceTooShort, "empty sequence");
  const std::size_t dim = q.front().size();
  for (const auto* seq : {&q, &r}) {
    for (const auto& x : *seq) {
      if (x.size() != dim) throw Error(ErrorCode::kShapeMismatch, "dtw: feature dimensions differ");
    }
  }
}

// Predecessor offsets (query, reference) of each step pattern.
inline std::span<const std::pair<int, int>> pattern_steps(StepPattern p) {
  static constexpr std::pair<int, int> kSym[] = {{1, 1}, {1, 0}, {0, 1}};
  static constexpr std::pair<int, int> kAsym[] = {{1, 1}, {1, 0}, {1, 2}};
  if (p == StepPattern::kSymmetric1) return kSym;
  return kAsym;
}

}  // namespace detail

inline DtwResult dtw_distance(const FeatureSequence& query, const FeatureSequence& reference,
                              const DtwConfig& cfg = {}) {
  detail::check_sequences(query, reference);
  const std::size_t n = query.size();
  const std::size_t m = reference.size();
  constexpr double kInf = std::numeric_limits<double>::infinity();
  std::vector<double> local(n * m), acc(n * m, kInf);
  std::vector<std::uint8_t> from(n * m, 255);
  auto at = [m](std::size_t i, std::size_t j) { return i * m + j; };
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < m; ++j) local[at(i, j)] = detail::l2(query[i], reference[j]);
  }
  const auto steps = detail::pattern_steps(cfg.step_pattern);
  acc[0] = local[0];
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < m; ++j) {
      if (i == 0 && j == 0) continue;
      double best = kInf;
      std::uint8_t arg = 255;
      for (std::size_t s = 0; s < steps.size(); ++s) {
        const auto [di, dj] = steps[s];
        if (i < static_cast<std::size_t>(di) || j < static_cast<std::size_t>(dj)) continue;
        const double v = acc[at(i - di, j - dj)];
        if (v < best) {
          best = v;
          arg = static_cast<std::uint8_t>(s);
        }
      }
      if (arg != 255) {
        acc[at(i, j)] = best + local[at(i, j)];
        from[at(i, j)] = arg;
      }
    }
  }
  std::size_t end_j = m - 1;
  if (cfg.open_end) {
    for (std::size_t j = 0; j < m; ++j) {
      if (acc[at(n - 1, j)] < acc[at(n - 1, end_j)]) end_j = j;
    }
  }
  DtwResult out;
  out.distance = acc[at(n - 1, end_j)];
  if (!std::isfinite(out.distance)) {
    throw Error(ErrorCode::kSequenceTooShort,
                "no admissible " + std::string(step_pattern_name(cfg.step_pattern)) +
                    " path for query length " + std::to_string(n) + " and reference length " +
                    std::to_string(m));
  }
  std::size_t i = n - 1, j = end_j;
  while (true) {
    out.alignment.push_back({i, j, local[at(i, j)]});
    if (i == 0 && j == 0) break;
    const auto [di, dj] = steps[from[at(i, j)]];
    i -= static_cast<std::size_t>(di);
    j -= static_cast<std::size_t>(dj);
  }
  std::reverse(out.alignment.begin(), out.alignment.end());
  return out;
}

inline DtwResult dtw_distance(std::span<const Observation> query,
                              std::span<const Observation> reference, const DtwConfig& cfg = {}) {
  return dtw_distance(to_feature_sequence(query), to_feature_sequence(reference), cfg);
}

// Exhaustive enumeration of every admissible path; exponential, for
// verification only.
inline double dtw_brute_force(const FeatureSequence& query, const FeatureSequence& reference,
                              const DtwConfig& cfg = {}) {
  detail::check_sequences(query, reference);
  if (query.size() > 8 || reference.size() > 8) {
    throw Error(ErrorCode::kSequenceTooLong, "brute force is limited to length 8");
  }
  const std::size_t n = query.size();
  const std::size_t m = reference.size();
  // Forward moves are the negated predecessor offsets.
  const auto steps = detail::pattern_steps(cfg.step_pattern);
  double best = std::numeric_limits<double>::infinity();
  auto walk = [&](auto&& self, std::size_t i, std::size_t j, double cost) -> void {
    cost += detail::l2(query[i], reference[j]);
    if (i == n - 1 && (j == m - 1 || cfg.open_end)) best = std::min(best, cost);
    for (const auto& [di, dj] : steps) {
      const std::size_t ni = i + static_cast<std::size_t>(di);
      const std::size_t nj = j + static_cast<std::size_t>(dj);
      if (ni < n && nj < m) self(self, ni, nj, cost);
    }
  };
  walk(walk, 0, 0, 0.0);
  if (!std::isfinite(best)) throw Error(ErrorCode::kSequenceTooShort, "no admissible path");
  return best;
}

}  // namespace wasabi

#endif  // WASABI_DTW_HPP_
