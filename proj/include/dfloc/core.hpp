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

#ifndef DFLOC_CORE_HPP
#define DFLOC_CORE_HPP

#include <compare>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace dfloc {

enum class ErrorCode {
  io,
  format,
  version,
  corrupt,
  invalid_argument,
  out_of_range,
};

// Every failure raised by the library. The C API maps `code()` onto its
// status enumeration.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] void throw_error(ErrorCode code, const std::string& what);

inline void require(bool condition, const std::string& what) {
  if (!condition) throw_error(ErrorCode::invalid_argument, what);
}

// One (AP, MP) pair. Names are whitespace-free tokens without '=' or ':'.
struct StreamId {
  std::string name;

  auto operator<=>(const StreamId&) const = default;
  bool operator==(const StreamId&) const = default;
};

bool is_valid_stream_name(std::string_view name);

struct Reading {
  StreamId stream;
  double dbm = 0.0;

  bool operator==(const Reading&) const = default;
};

// A time-stamped RSS vector. Readings are kept sorted by stream and unique;
// a stream without a reading in this frame is simply absent.
class RssFrame {
 public:
  RssFrame() = default;
  explicit RssFrame(double timestamp) : timestamp_(timestamp) {}
  RssFrame(double timestamp, std::vector<Reading> readings);

  double timestamp() const noexcept { return timestamp_; }
  void set_timestamp(double t) noexcept { timestamp_ = t; }

  std::span<const Reading> readings() const noexcept { return readings_; }
  std::size_t size() const noexcept { return readings_.size(); }
  bool empty() const noexcept { return readings_.empty(); }

  std::optional<double> reading(const StreamId& stream) const;
  // Inserts or replaces.
  void set(const StreamId& stream, double dbm);
  void erase(const StreamId& stream);

  bool operator==(const RssFrame&) const = default;

 private:
  double timestamp_ = 0.0;
  std::vector<Reading> readings_;
};

struct Point {
  double x = 0.0;
  double y = 0.0;

  bool operator==(const Point&) const = default;
};

double distance(Point a, Point b) noexcept;

struct GridLocation {
  std::size_t index = 0;
  double x = 0.0;
  double y = 0.0;

  Point point() const noexcept { return {x, y}; }
  bool operator==(const GridLocation&) const = default;
};

// Discrete location set with a symmetric, irreflexive neighbor relation.
class Grid {
 public:
  Grid() = default;
  Grid(std::vector<GridLocation> locations,
       std::vector<std::pair<std::size_t, std::size_t>> edges, double width,
       double height);

  // nx * ny cell centers over [0, width] x [0, height], 4-neighborhood.
  static Grid regular(std::size_t nx, std::size_t ny, double width,
                      double height);

  std::size_t size() const noexcept { return locations_.size(); }
  const GridLocation& operator[](std::size_t i) const { return locations_.at(i); }
  std::span<const GridLocation> locations() const noexcept { return locations_; }

  std::span<const std::size_t> neighbors(std::size_t i) const;
  // Undirected neighbor pairs with first < second, sorted.
  std::span<const std::pair<std::size_t, std::size_t>> edges() const noexcept {
    return edges_;
  }
  bool adjacent(std::size_t i, std::size_t j) const;

  double width() const noexcept { return width_; }
  double height() const noexcept { return height_; }
  Point center() const noexcept { return {width_ / 2.0, height_ / 2.0}; }
  // Smallest distance between two adjacent locations (0 for n == 1).
  double spacing() const noexcept { return spacing_; }
  std::size_t nearest(Point p) const;

  bool operator==(const Grid& other) const {
    return locations_ == other.locations_ && edges_ == other.edges_ &&
           width_ == other.width_ && height_ == other.height_;
  }

 private:
  std::vector<GridLocation> locations_;
  std::vector<std::pair<std::size_t, std::size_t>> edges_;
  std::vector<std::vector<std::size_t>> adjacency_;
  double width_ = 0.0;
  double height_ = 0.0;
  double spacing_ = 0.0;
};

// Activation labels over the n grid locations at one time step.
struct EnvironmentMap {
  double timestamp = 0.0;
  std::vector<std::uint8_t> active;

  EnvironmentMap() = default;
  EnvironmentMap(double t, std::size_t n) : timestamp(t), active(n, 0) {}

  std::size_t size() const noexcept { return active.size(); }
  std::size_t count() const noexcept;
  bool operator==(const EnvironmentMap&) const = default;
};

enum class ContrastMode {
  normalized,  // min-max normalized negative log-likelihood difference
  literal,     // raw difference of product likelihoods
};

struct ModelParams {
  double beta = 0.5;    // temporal prior weight
  double gamma = 1.0;   // spatial coherence strength
  double delta = 1.0;   // likelihood weight
  std::size_t q = 5;    // smoothing window
  double alpha_trim = 0.2;
  double anova_significance = 0.05;
  std::size_t anova_window = 60;
  double hist_bin_width = 1.0;
  double hist_smooth_sigma = 2.0;
  double hist_floor = 1e-3;  // uniform mixing weight after smoothing
  std::size_t w = 13;
  double r = 0.25;
  double cluster_scale = 2.0;  // meters; floor on the inconsistency spread
  int hmm_order = 2;
  ContrastMode contrast = ContrastMode::normalized;

  // Throws Error(invalid_argument) naming the offending field.
  void validate() const;
  bool operator==(const ModelParams&) const = default;
};

// Applies one `key=value` override (keys are the field names above).
void set_param(ModelParams& params, std::string_view key, std::string_view value);
void set_param(ModelParams& params, std::string_view assignment);

struct EntityPosition {
  std::string id;
  double x = 0.0;
  double y = 0.0;

  Point point() const noexcept { return {x, y}; }
  bool operator==(const EntityPosition&) const = default;
};

struct GroundTruthFrame {
  double timestamp = 0.0;
  std::vector<EntityPosition> entities;

  bool operator==(const GroundTruthFrame&) const = default;
};

// Shortest round-trip decimal representation.
std::string format_double(double value);
std::optional<double> parse_double(std::string_view text);

}  // namespace dfloc

#endif  // DFLOC_CORE_HPP
