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

#include "dfloc/core.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <limits>

namespace dfloc {

void throw_error(ErrorCode code, const std::string& what) {
  throw Error(code, what);
}

bool is_valid_stream_name(std::string_view name) {
  if (name.empty()) return false;
  return std::none_of(name.begin(), name.end(), [](char c) {
    return c == '=' || c == ':' || c == '#' || c == ' ' || c == '\t' ||
           c == '\n' || c == '\r';
  });
}

namespace {

auto find_reading(std::vector<Reading>& readings, const StreamId& stream) {
  return std::lower_bound(
      readings.begin(), readings.end(), stream,
      [](const Reading& r, const StreamId& s) { return r.stream < s; });
}

}  // namespace

RssFrame::RssFrame(double timestamp, std::vector<Reading> readings)
    : timestamp_(timestamp), readings_(std::move(readings)) {
  std::stable_sort(readings_.begin(), readings_.end(),
                   [](const Reading& a, const Reading& b) {
                     return a.stream < b.stream;
                   });
  for (std::size_t i = 1; i < readings_.size(); ++i) {
    require(readings_[i - 1].stream != readings_[i].stream,
            "duplicate reading for stream '" + readings_[i].stream.name + "'");
  }
}

std::optional<double> RssFrame::reading(const StreamId& stream) const {
  auto it = std::lower_bound(
      readings_.begin(), readings_.end(), stream,
      [](const Reading& r, const StreamId& s) { return r.stream < s; });
  if (it == readings_.end() || it->stream != stream) return std::nullopt;
  return it->dbm;
}

void RssFrame::set(const StreamId& stream, double dbm) {
  auto it = find_reading(readings_, stream);
  if (it != readings_.end() && it->stream == stream) {
    it->dbm = dbm;
  } else {
    readings_.insert(it, Reading{stream, dbm});
  }
}

void RssFrame::erase(const StreamId& stream) {
  auto it = find_reading(readings_, stream);
  if (it != readings_.end() && it->stream == stream) readings_.erase(it);
}

double distance(Point a, Point b) noexcept {
  return std::hypot(a.x - b.x, a.y - b.y);
}

Grid::Grid(std::vector<GridLocation> locations,
           std::vector<std::pair<std::size_t, std::size_t>> edges, double width,
           double height)
    : locations_(std::move(locations)), width_(width), height_(height) {
  const std::size_t n = locations_.size();
  require(n >= 1, "grid needs at least one location");
  for (std::size_t i = 0; i < n; ++i) {
    require(locations_[i].index == i, "grid location indices must be 0..n-1");
  }
  adjacency_.assign(n, {});
  for (auto [a, b] : edges) {
    require(a < n && b < n, "grid edge references unknown location");
    require(a != b, "grid adjacency must be irreflexive");
    if (a > b) std::swap(a, b);
    edges_.emplace_back(a, b);
  }
  std::sort(edges_.begin(), edges_.end());
  edges_.erase(std::unique(edges_.begin(), edges_.end()), edges_.end());
  spacing_ = edges_.empty() ? 0.0 : std::numeric_limits<double>::infinity();
  for (auto [a, b] : edges_) {
    adjacency_[a].push_back(b);
    adjacency_[b].push_back(a);
    spacing_ = std::min(spacing_,
                        distance(locations_[a].point(), locations_[b].point()));
  }
  for (auto& list : adjacency_) std::sort(list.begin(), list.end());
}

Grid Grid::regular(std::size_t nx, std::size_t ny, double width, double height) {
  require(nx >= 1 && ny >= 1, "grid dimensions must be positive");
  require(width > 0.0 && height > 0.0, "testbed extent must be positive");
  std::vector<GridLocation> locations;
  std::vector<std::pair<std::size_t, std::size_t>> edges;
  const double dx = width / static_cast<double>(nx);
  const double dy = height / static_cast<double>(ny);
  for (std::size_t iy = 0; iy < ny; ++iy) {
    for (std::size_t ix = 0; ix < nx; ++ix) {
      const std::size_t index = iy * nx + ix;
      locations.push_back({index, (static_cast<double>(ix) + 0.5) * dx,
                           (static_cast<double>(iy) + 0.5) * dy});
      if (ix + 1 < nx) edges.emplace_back(index, index + 1);
      if (iy + 1 < ny) edges.emplace_back(index, index + nx);
    }
  }
  return Grid(std::move(locations), std::move(edges), width, height);
}

std::span<const std::size_t> Grid::neighbors(std::size_t i) const {
  return adjacency_.at(i);
}

bool Grid::adjacent(std::size_t i, std::size_t j) const {
  const auto& list = adjacency_.at(i);
  return std::binary_search(list.begin(), list.end(), j);
}

std::size_t Grid::nearest(Point p) const {
  std::size_t best = 0;
  double best_d = std::numeric_limits<double>::infinity();
  for (const auto& loc : locations_) {
    const double d = distance(p, loc.point());
    if (d < best_d) {
      best_d = d;
      best = loc.index;
    }
  }
  return best;
}

std::size_t EnvironmentMap::count() const noexcept {
  return static_cast<std::size_t>(
      std::count_if(active.begin(), active.end(), [](auto a) { return a != 0; }));
}

void ModelParams::validate() const {
  require(beta > 0.0 && beta <= 1.0, "beta must lie in (0, 1]");
  require(gamma > 0.0 && std::isfinite(gamma), "gamma must be positive");
  require(delta > 0.0 && delta <= 1.0, "delta must lie in (0, 1]");
  require(q >= 1, "q must be at least 1");
  require(alpha_trim >= 0.0 && alpha_trim < 0.5, "alpha_trim must lie in [0, 0.5)");
  require(anova_significance > 0.0 && anova_significance < 1.0,
          "anova_significance must lie in (0, 1)");
  require(anova_window >= 2, "anova_window must be at least 2");
  require(hist_bin_width > 0.0 && std::isfinite(hist_bin_width),
          "hist_bin_width must be positive");
  require(hist_smooth_sigma > 0.0 && std::isfinite(hist_smooth_sigma),
          "hist_smooth_sigma must be positive");
  require(hist_floor > 0.0 && hist_floor < 1.0, "hist_floor must lie in (0, 1)");
  require(w >= 1, "w must be at least 1");
  require(r > 0.0 && std::isfinite(r), "r must be positive");
  require(cluster_scale > 0.0 && std::isfinite(cluster_scale),
          "cluster_scale must be positive");
  require(hmm_order == 1 || hmm_order == 2, "hmm_order must be 1 or 2");
}

namespace {

double to_double(std::string_view key, std::string_view value) {
  auto v = parse_double(value);
  require(v.has_value(), "parameter '" + std::string(key) + "' expects a number, got '" +
                             std::string(value) + "'");
  return *v;
}

std::size_t to_count(std::string_view key, std::string_view value) {
  std::size_t out = 0;
  auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), out);
  require(ec == std::errc() && ptr == value.data() + value.size(),
          "parameter '" + std::string(key) + "' expects a nonnegative integer, got '" +
              std::string(value) + "'");
  return out;
}

}  // namespace

void set_param(ModelParams& p, std::string_view key, std::string_view value) {
  if (key == "beta") p.beta = to_double(key, value);
  else if (key == "gamma") p.gamma = to_double(key, value);
  else if (key == "delta") p.delta = to_double(key, value);
  else if (key == "q") p.q = to_count(key, value);
  else if (key == "alpha_trim") p.alpha_trim = to_double(key, value);
  else if (key == "anova_significance") p.anova_significance = to_double(key, value);
  else if (key == "anova_window") p.anova_window = to_count(key, value);
  else if (key == "hist_bin_width") p.hist_bin_width = to_double(key, value);
  else if (key == "hist_smooth_sigma") p.hist_smooth_sigma = to_double(key, value);
  else if (key == "hist_floor") p.hist_floor = to_double(key, value);
  else if (key == "w") p.w = to_count(key, value);
  else if (key == "r") p.r = to_double(key, value);
  else if (key == "cluster_scale") p.cluster_scale = to_double(key, value);
  else if (key == "hmm_order" || key == "o") p.hmm_order = static_cast<int>(to_count(key, value));
  else if (key == "contrast") {
    if (value == "normalized") p.contrast = ContrastMode::normalized;
    else if (value == "literal") p.contrast = ContrastMode::literal;
    else throw_error(ErrorCode::invalid_argument,
                     "contrast must be 'normalized' or 'literal'");
  } else {
    throw_error(ErrorCode::invalid_argument, "unknown parameter '" + std::string(key) + "'");
  }
}

void set_param(ModelParams& params, std::string_view assignment) {
  const auto eq = assignment.find('=');
  require(eq != std::string_view::npos && eq > 0,
          "parameter override must look like key=value");
  set_param(params, assignment.substr(0, eq), assignment.substr(eq + 1));
}

std::string format_double(double value) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value);
  if (ec != std::errc()) throw_error(ErrorCode::invalid_argument, "unformattable number");
  return std::string(buf, ptr);
}

std::optional<double> parse_double(std::string_view text) {
  if (!text.empty() && text.front() == '+') text.remove_prefix(1);
  if (text.empty()) return std::nullopt;
  double out = 0.0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), out);
  if (ec != std::errc() || ptr != text.data() + text.size()) return std::nullopt;
  return out;
}

}  // namespace dfloc
