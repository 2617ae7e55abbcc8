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

#ifndef DFLOC_FINGERPRINT_HPP
#define DFLOC_FINGERPRINT_HPP

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <vector>

#include "dfloc/core.hpp"
#include "dfloc/preprocess.hpp"

namespace dfloc {

// Fixed-width RSS histogram. Bin b covers [origin + b*width, origin + (b+1)*width).
class RssHistogram {
 public:
  RssHistogram() = default;
  RssHistogram(double bin_width, double origin, std::vector<double> probabilities,
               std::uint64_t samples = 0);

  // Normalized histogram of `samples` over `bins` bins; values outside the
  // range land in the edge bins.
  static RssHistogram from_samples(std::span<const double> samples, double bin_width,
                                   double origin, std::size_t bins);

  double bin_width() const noexcept { return bin_width_; }
  double origin() const noexcept { return origin_; }
  std::size_t bins() const noexcept { return probabilities_.size(); }
  std::span<const double> probabilities() const noexcept { return probabilities_; }
  // Raw samples that went into the histogram before smoothing.
  std::uint64_t samples() const noexcept { return samples_; }

  // Clamped to [0, bins).
  std::size_t bin_of(double dbm) const noexcept;
  double probability(double dbm) const noexcept { return probabilities_[bin_of(dbm)]; }
  double mean() const noexcept;
  double total() const noexcept;

  bool operator==(const RssHistogram&) const = default;

 private:
  double bin_width_ = 1.0;
  double origin_ = 0.0;
  std::vector<double> probabilities_;
  std::uint64_t samples_ = 0;
};

// Normalized convolution with a Gaussian kernel truncated at 4 sigma. Each
// output bin is the kernel-weighted average of the in-range bins, so edge
// bins are renormalized rather than leaking mass; the result sums to 1.
RssHistogram smooth_histogram(const RssHistogram& h, double sigma);

// Mixes in a uniform distribution with weight `floor_weight` so that no bin
// is zero.
RssHistogram floor_histogram(const RssHistogram& h, double floor_weight);

// P(active now | active one step ago, active two steps ago), learned with
// add-one smoothing. History code = 2 * prev + prev_prev.
struct TemporalPrior {
  std::array<std::uint64_t, 4> ones{};
  std::array<std::uint64_t, 4> totals{};

  static std::size_t history(bool prev, bool prev_prev) noexcept {
    return (prev ? 2u : 0u) + (prev_prev ? 1u : 0u);
  }
  // Second-order table entry.
  double p_active(std::size_t history_code) const;
  // First-order entry, marginalizing the older step out of the counts.
  double p_active_first_order(bool prev) const;
  // P(alpha^t = state | history) for hmm_order 1 or 2.
  double probability(bool state, bool prev, bool prev_prev, int order) const;

  bool operator==(const TemporalPrior&) const = default;
};

TemporalPrior learn_temporal_priors(std::span<const std::vector<EnvironmentMap>> sequences);

// Training labels from entity positions: the nearest location of each entity
// plus its neighbors within one grid spacing of the entity.
std::vector<EnvironmentMap> maps_from_ground_truth(std::span<const GroundTruthFrame> truth,
                                                   const Grid& grid);

struct LocationFingerprint {
  GridLocation location;
  std::vector<RssHistogram> active;    // P(s | alpha = 1), one per stream
  std::vector<RssHistogram> inactive;  // P(s | alpha = 0), one per stream

  bool operator==(const LocationFingerprint&) const = default;
};

// One calibration recording: a single person standing at `location`.
struct CalibrationSession {
  GridLocation location;
  std::vector<RssFrame> frames;  // already smoothed
};

// Per-stream selection mask aligned with Fingerprint::streams().
using StreamMask = std::vector<std::uint8_t>;

class Fingerprint {
 public:
  Fingerprint() = default;
  Fingerprint(Grid grid, std::vector<StreamId> streams,
              std::vector<LocationFingerprint> locations, TemporalPrior temporal,
              ModelParams params,
              std::vector<std::vector<preprocess::SampleStats>> offline_stats);

  std::size_t size() const noexcept { return locations_.size(); }
  const Grid& grid() const noexcept { return grid_; }
  const std::vector<StreamId>& streams() const noexcept { return streams_; }
  std::optional<std::size_t> stream_index(const StreamId& id) const;
  const LocationFingerprint& location(std::size_t i) const { return locations_.at(i); }
  const RssHistogram& histogram(std::size_t loc, std::size_t stream, bool active) const;
  const TemporalPrior& temporal() const noexcept { return temporal_; }
  const ModelParams& params() const noexcept { return params_; }
  const preprocess::SampleStats& offline_stats(std::size_t loc, std::size_t stream) const;
  const std::vector<std::vector<preprocess::SampleStats>>& offline_stats() const noexcept {
    return offline_stats_;
  }

  StreamMask all_streams() const { return StreamMask(streams_.size(), 1); }
  StreamMask mask_for(std::span<const StreamId> ids) const;

  Fingerprint with_params(ModelParams params) const;
  Fingerprint with_temporal(TemporalPrior temporal) const;

  bool operator==(const Fingerprint&) const = default;

 private:
  Grid grid_;
  std::vector<StreamId> streams_;  // sorted
  std::vector<LocationFingerprint> locations_;
  TemporalPrior temporal_;
  ModelParams params_;
  std::vector<std::vector<preprocess::SampleStats>> offline_stats_;  // [loc][stream]
};

// Cross-calibration: a session at x feeds x's active histograms and the
// inactive histograms of every other location. Exactly one session per grid
// location is required.
Fingerprint build_fingerprint(std::span<const CalibrationSession> sessions, const Grid& grid,
                              const ModelParams& params,
                              const TemporalPrior& temporal = TemporalPrior{});

// Sum over the masked streams present in `frame` of log P(reading | state).
// Throws out_of_range for a bad location and invalid_argument when no
// masked stream has a reading.
double log_likelihood(const Fingerprint& fp, std::size_t loc, bool state,
                      const RssFrame& frame, const StreamMask& active_streams);
double likelihood(const Fingerprint& fp, std::size_t loc, bool state, const RssFrame& frame,
                  const StreamMask& active_streams);

// Binary container: "SPOTFP", u16 version, u64 payload length, payload,
// CRC-32 of the payload. All integers little-endian.
inline constexpr std::uint16_t kFingerprintVersion = 1;
void save_fingerprint(const Fingerprint& fp, const std::filesystem::path& path);
Fingerprint load_fingerprint(const std::filesystem::path& path);
std::vector<std::uint8_t> serialize_fingerprint(const Fingerprint& fp);
Fingerprint deserialize_fingerprint(std::span<const std::uint8_t> bytes);

}  // namespace dfloc

#endif  // DFLOC_FINGERPRINT_HPP
