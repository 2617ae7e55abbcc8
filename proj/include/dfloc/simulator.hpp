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

// Synthetic testbed: access points and monitoring points on the walls of a
// rectangular room, one RSS stream per (AP, MP) pair. A person near the
// straight AP-MP segment attenuates that stream by a Gaussian bump of the
// distance to the segment.

#ifndef DFLOC_SIMULATOR_HPP
#define DFLOC_SIMULATOR_HPP

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "dfloc/core.hpp"
#include "dfloc/fingerprint.hpp"

namespace dfloc {

struct TestbedConfig {
  double width = 10.0;
  double height = 10.0;
  std::size_t grid_nx = 5;
  std::size_t grid_ny = 5;
  std::vector<Point> ap_positions{{10.0, 9.8}, {1.8, 10.0}};
  std::vector<Point> mp_positions{{0.0, 5.0}, {8.6, 0.0}, {2.8, 0.0}};
  // One value per stream in (AP-major) order; empty means log-distance
  // baselines of -40 - 20 log10(d) dBm.
  std::vector<double> baseline_rss;
  double noise_sigma = 2.0;
  double impulse_prob = 0.02;
  double impulse_magnitude = 25.0;
  double attenuation_peak = 8.0;
  double attenuation_radius = 1.5;
  std::uint64_t seed = 1;
  std::size_t calibration_frames = 60;

  void validate() const;
  Grid grid() const;
  std::size_t streams() const noexcept { return ap_positions.size() * mp_positions.size(); }
  bool operator==(const TestbedConfig&) const = default;
};

// Flat key=value text, '#' comments. Unknown keys are errors. Point lists
// are written as "x,y;x,y;...".
TestbedConfig read_testbed(std::istream& in);
void write_testbed(std::ostream& out, const TestbedConfig& config);
TestbedConfig load_testbed(const std::filesystem::path& path);
void save_testbed(const TestbedConfig& config, const std::filesystem::path& path);

struct StreamGeometry {
  StreamId id;  // "ap<i>-mp<j>"
  Point ap;
  Point mp;
  double baseline = 0.0;
};

std::vector<StreamGeometry> stream_geometry(const TestbedConfig& config);

double segment_distance(Point p, Point a, Point b) noexcept;
// Noise-free drop in dBm caused by one person at distance d from a segment.
double attenuation(double d, const TestbedConfig& config) noexcept;

// Independent generator for one purpose (calibration, test, training walk).
std::mt19937_64 make_rng(std::uint64_t seed, std::uint64_t purpose);

RssFrame rss_model(std::span<const Point> entities, std::span<const StreamGeometry> streams,
                   const TestbedConfig& config, std::mt19937_64& rng, double timestamp);

struct Waypoint {
  double t = 0.0;
  Point p;
};

// Piecewise-linear path. The entity is present only between the first and
// last waypoint times.
struct Trajectory {
  std::string id;
  std::vector<Waypoint> waypoints;

  void validate() const;
  double start() const { return waypoints.front().t; }
  double end() const { return waypoints.back().t; }
  bool present(double t) const { return t >= start() && t <= end(); }
  Point at(double t) const;
};

Trajectory static_trajectory(std::string id, Point p, double t0, double t1);
Trajectory random_walk(std::string id, const TestbedConfig& config, std::mt19937_64& rng,
                       double t0, double t1, double speed = 0.5);
// Uniform positions at least `min_separation` apart and one meter inside
// the walls, by rejection sampling.
std::vector<Point> place_entities(const TestbedConfig& config, std::size_t count,
                                  double min_separation, std::mt19937_64& rng);

// One session per grid location with a single person standing on it. The
// frames are raw; smooth them before building a fingerprint.
std::vector<CalibrationSession> generate_calibration(const TestbedConfig& config);

struct SimulatedRun {
  std::vector<RssFrame> frames;
  std::vector<GroundTruthFrame> truth;
};

// Frames at 1 Hz. Without `frames` the run covers the integer seconds of
// the union of the trajectory spans; an empty trajectory list then yields
// an empty run. `purpose` selects an independent noise stream.
SimulatedRun generate_test(const TestbedConfig& config, std::span<const Trajectory> trajectories,
                           std::optional<std::size_t> frames = std::nullopt,
                           std::uint64_t purpose = 2);

}  // namespace dfloc

#endif  // DFLOC_SIMULATOR_HPP
