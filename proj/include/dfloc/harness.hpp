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

// Pipeline orchestration, evaluation metrics and the file formats used by
// the command-line tool.

#ifndef DFLOC_HARNESS_HPP
#define DFLOC_HARNESS_HPP

#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <memory>
#include <optional>
#include <random>
#include <span>
#include <string_view>
#include <vector>

#include "dfloc/clustering.hpp"
#include "dfloc/core.hpp"
#include "dfloc/energy.hpp"
#include "dfloc/fingerprint.hpp"

namespace dfloc {

enum class ErrorMode { zones, locations };

std::optional<ErrorMode> parse_error_mode(std::string_view text);

// Distances between estimated and true entities for one frame. Pairs are
// matched greedily, closest pair first. A true entity left without an
// estimate contributes its distance to `testbed_center`; so does an
// estimate when the frame has no true entities. Extra estimates beyond the
// true count are matched to their closest true entity. In zones mode every
// position is first snapped to its nearest grid location.
std::vector<double> distance_error(const FrameEstimate& estimate, const GroundTruthFrame& truth,
                                   const Grid& grid, ErrorMode mode, Point testbed_center);

// Signed m_hat - m per frame. Throws invalid_argument on length or
// timestamp mismatch.
std::vector<int> count_error(std::span<const FrameEstimate> estimates,
                             std::span<const GroundTruthFrame> truths);

struct CdfPoint {
  double value = 0.0;
  double fraction = 0.0;
};

// Empirical distribution function: one point per distinct value.
std::vector<CdfPoint> empirical_cdf(std::vector<double> samples);
double median(std::vector<double> samples);
double mean(std::span<const double> samples);

struct EvalReport {
  ErrorMode mode = ErrorMode::locations;
  std::size_t frames = 0;
  std::vector<double> location_errors;  // meters, one per matched entity
  std::vector<double> zone_errors;
  std::vector<int> count_errors;
  double location_median = 0.0;
  double location_mean = 0.0;
  double zone_median = 0.0;
  double zone_mean = 0.0;
  double count_within_one = 1.0;  // fraction of frames with |m_hat - m| <= 1
  double count_exact = 1.0;
  std::vector<CdfPoint> cdf;  // of the selected mode's errors
  std::vector<double> runtime_ms;
  double runtime_median_ms = 0.0;

  // All fields except the runtime ones.
  bool same_results(const EvalReport& other) const;
};

EvalReport evaluate(std::span<const FrameEstimate> estimates,
                    std::span<const GroundTruthFrame> truths, const Grid& grid, ErrorMode mode,
                    std::span<const double> runtime_ms = {});

void write_report(std::ostream& out, const EvalReport& report);
void save_report(const EvalReport& report, const std::filesystem::path& path);

// Estimates file: "t=<float> m=<int> (<x>,<y>) ..."
void write_estimates(std::ostream& out, std::span<const FrameEstimate> estimates);
std::vector<FrameEstimate> read_estimates(std::istream& in);
void save_estimates(std::span<const FrameEstimate> estimates, const std::filesystem::path& path);
std::vector<FrameEstimate> load_estimates(const std::filesystem::path& path);

// Maps file: "t=<float> <bits>" with one 0/1 character per location.
void write_maps(std::ostream& out, std::span<const EnvironmentMap> maps);
std::vector<EnvironmentMap> read_maps(std::istream& in);
void save_maps(std::span<const EnvironmentMap> maps, const std::filesystem::path& path);
std::vector<EnvironmentMap> load_maps(const std::filesystem::path& path);

// Activation counts laid out as rows of equal y, ascending y then x.
std::vector<std::vector<std::size_t>> heatmap(std::span<const EnvironmentMap> window,
                                              const Grid& grid);
void export_heatmap(std::span<const EnvironmentMap> window, const Grid& grid,
                    const std::filesystem::path& path);
std::vector<std::vector<std::size_t>> read_heatmap(std::istream& in);

// Smooths the raw sessions, learns the temporal prior from the training
// ground truth (when given) and builds the fingerprint.
Fingerprint calibrate(std::span<const CalibrationSession> raw_sessions, const Grid& grid,
                      const ModelParams& params,
                      std::span<const GroundTruthFrame> training_truth = {});

struct TrackResult {
  std::vector<FrameEstimate> estimates;
  std::vector<EnvironmentMap> maps;
  std::vector<double> runtime_ms;
};

// Called after each frame with the frame index and its cut graph.
using GraphSink = std::function<void(std::size_t, const CutGraph&)>;

TrackResult track(std::shared_ptr<const Fingerprint> fp, std::span<const RssFrame> frames,
                  const ModelParams& params, const GraphSink& graphs = {});

struct PipelineResult {
  Fingerprint fingerprint;
  TrackResult tracked;
  EvalReport report;
};

PipelineResult run_pipeline(std::span<const CalibrationSession> raw_sessions,
                            std::span<const GroundTruthFrame> training_truth,
                            std::span<const RssFrame> test_frames,
                            std::span<const GroundTruthFrame> test_truth, const Grid& grid,
                            const ModelParams& params, ErrorMode mode = ErrorMode::locations);

struct LabeledSequence {
  std::vector<RssFrame> frames;
  std::vector<GroundTruthFrame> truth;
};

struct SearchGrid {
  std::vector<double> betas{0.25, 0.5, 0.75, 1.0};
  std::vector<double> gammas{0.5, 1.0, 2.0, 4.0};
  std::vector<double> deltas{0.25, 0.5, 0.75, 1.0};
};

// Exhaustive search for the (beta, gamma, delta) with the lowest mean
// locations-based error; ties go to the lexicographically smallest point.
ModelParams fit_params(const Fingerprint& fp, std::span<const LabeledSequence> held_out,
                       const SearchGrid& grid = {});

// Random energy instance built from a random fingerprint, history and frame.
struct OracleInstance {
  std::shared_ptr<Fingerprint> fp;
  ModelParams params;
  FrameEvidence evidence;
  EnvironmentMap prev;
  EnvironmentMap prev_prev;
};

OracleInstance random_instance(std::mt19937_64& rng, std::size_t max_n);

struct OracleReport {
  std::size_t instances = 0;
  std::size_t mismatches = 0;
  double max_abs_diff = 0.0;
  double seconds = 0.0;
};

// Compares min_cut against brute-force enumeration on random instances.
OracleReport verify_oracle(std::size_t instances, std::uint64_t seed, std::size_t max_n = 12,
                           double tolerance = 1e-9);

}  // namespace dfloc

#endif  // DFLOC_HARNESS_HPP
