/*
 * Copyright 2026 The dfloc Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 * http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#ifndef DFLOC_PREPROCESS_HPP
#define DFLOC_PREPROCESS_HPP

#include <cstddef>
#include <span>
#include <vector>

#include "dfloc/core.hpp"

namespace dfloc {

class Fingerprint;

namespace preprocess {

// Sorts the window, drops ceil(alpha * q) samples from each end and averages
// the rest. Requires q >= 1, alpha in [0, 0.5) and at least one survivor.
double alpha_trimmed_mean(std::span<const double> window, double alpha);

// Causal filter: output[i] is the trimmed mean of the last q samples ending
// at i (fewer at the start of the sequence).
std::vector<double> smooth_stream(std::span<const double> raw, std::size_t q,
                                  double alpha);

// Per-stream smoothing of a frame sequence. Absent readings stay absent and
// are skipped when filling a stream's window.
std::vector<RssFrame> smooth_frames(std::span<const RssFrame> raw,
                                    std::size_t q, double alpha);

// Running (count, mean, M2) summary of a sample set.
struct SampleStats {
  std::size_t count = 0;
  double mean = 0.0;
  double m2 = 0.0;  // sum of squared deviations from the mean

  void add(double x);
  double variance() const;  // sample variance (count - 1 denominator)

  static SampleStats of(std::span<const double> samples);
  bool operator==(const SampleStats&) const = default;
};

struct StreamDecision {
  StreamId stream;
  double f_statistic = 0.0;
  double p_value = 1.0;
  bool kept = true;
  bool insufficient_data = false;
};

// One-way ANOVA for two groups. kept <=> p_value >= significance.
StreamDecision anova_stream_test(std::span<const double> offline,
                                 std::span<const double> online,
                                 double significance);
StreamDecision anova_stream_test(const SampleStats& offline,
                                 const SampleStats& online, double significance);

// Upper tail of the F(d1, d2) distribution.
double f_distribution_sf(double f, double d1, double d2);

struct StreamSelection {
  std::vector<StreamId> kept;
  std::vector<StreamDecision> decisions;
  // Set when every stream was rejected and the best one was retained anyway.
  bool fallback = false;
};

// Tests each fingerprint stream's recent online samples against the offline
// calibration summaries. The offline reference for a stream is the
// calibration session that best explains the online samples (largest
// p-value), so a stream is dropped only when no calibrated condition matches
// it. Never returns an empty set.
StreamSelection select_streams(const Fingerprint& fp,
                               std::span<const RssFrame> recent_online,
                               double significance);

}  // namespace preprocess
}  // namespace dfloc

#endif  // DFLOC_PREPROCESS_HPP
