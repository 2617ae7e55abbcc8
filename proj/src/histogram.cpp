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

#include <algorithm>
#include <cmath>
#include <numeric>

#include "dfloc/fingerprint.hpp"

namespace dfloc {

RssHistogram::RssHistogram(double bin_width, double origin,
                           std::vector<double> probabilities, std::uint64_t samples)
    : bin_width_(bin_width),
      origin_(origin),
      probabilities_(std::move(probabilities)),
      samples_(samples) {
  require(bin_width_ > 0.0 && std::isfinite(bin_width_), "histogram bin width must be positive");
  require(std::isfinite(origin_), "histogram origin must be finite");
  require(!probabilities_.empty(), "histogram needs at least one bin");
  for (double p : probabilities_) {
    require(p >= 0.0 && std::isfinite(p), "histogram probabilities must be nonnegative");
  }
}

RssHistogram RssHistogram::from_samples(std::span<const double> samples, double bin_width,
                                        double origin, std::size_t bins) {
  require(!samples.empty(), "histogram from an empty sample set");
  require(bins >= 1, "histogram needs at least one bin");
  RssHistogram h(bin_width, origin, std::vector<double>(bins, 0.0), samples.size());
  const double unit = 1.0 / static_cast<double>(samples.size());
  for (double x : samples) h.probabilities_[h.bin_of(x)] += unit;
  return h;
}

std::size_t RssHistogram::bin_of(double dbm) const noexcept {
  const double pos = std::floor((dbm - origin_) / bin_width_);
  if (!(pos > 0.0)) return 0;
  const auto last = static_cast<double>(probabilities_.size() - 1);
  return static_cast<std::size_t>(std::min(pos, last));
}

double RssHistogram::mean() const noexcept {
  double m = 0.0;
  for (std::size_t b = 0; b < probabilities_.size(); ++b) {
    m += probabilities_[b] * (origin_ + (static_cast<double>(b) + 0.5) * bin_width_);
  }
  return m / total();
}

double RssHistogram::total() const noexcept {
  return std::accumulate(probabilities_.begin(), probabilities_.end(), 0.0);
}

RssHistogram smooth_histogram(const RssHistogram& h, double sigma) {
  require(sigma > 0.0, "smooth_histogram: sigma must be positive");
  require(h.bins() > 0 && h.total() > 0.0, "smooth_histogram: empty histogram");
  const auto in = h.probabilities();
  const auto bins = static_cast<std::ptrdiff_t>(in.size());
  const auto half = static_cast<std::ptrdiff_t>(std::floor(4.0 * sigma / h.bin_width()));

  std::vector<double> kernel(static_cast<std::size_t>(half) + 1);
  for (std::ptrdiff_t d = 0; d <= half; ++d) {
    const double x = static_cast<double>(d) * h.bin_width();
    kernel[static_cast<std::size_t>(d)] = std::exp(-x * x / (2.0 * sigma * sigma));
  }

  std::vector<double> out(in.size(), 0.0);
  for (std::ptrdiff_t j = 0; j < bins; ++j) {
    double num = 0.0;
    double den = 0.0;
    for (std::ptrdiff_t i = std::max<std::ptrdiff_t>(0, j - half);
         i <= std::min(bins - 1, j + half); ++i) {
      const double k = kernel[static_cast<std::size_t>(std::abs(i - j))];
      num += k * in[static_cast<std::size_t>(i)];
      den += k;
    }
    out[static_cast<std::size_t>(j)] = num / den;
  }
  const double total = std::accumulate(out.begin(), out.end(), 0.0);
  for (double& p : out) p /= total;
  return RssHistogram(h.bin_width(), h.origin(), std::move(out), h.samples());
}

RssHistogram floor_histogram(const RssHistogram& h, double floor_weight) {
  require(floor_weight >= 0.0 && floor_weight < 1.0,
          "floor_histogram: weight must lie in [0, 1)");
  const double total = h.total();
  require(total > 0.0, "floor_histogram: empty histogram");
  const double uniform = floor_weight / static_cast<double>(h.bins());
  std::vector<double> out;
  out.reserve(h.bins());
  for (double p : h.probabilities()) out.push_back((1.0 - floor_weight) * p / total + uniform);
  return RssHistogram(h.bin_width(), h.origin(), std::move(out), h.samples());
}

double TemporalPrior::p_active(std::size_t history_code) const {
  require(history_code < 4, "temporal history code out of range");
  return (static_cast<double>(ones[history_code]) + 1.0) /
         (static_cast<double>(totals[history_code]) + 2.0);
}

double TemporalPrior::p_active_first_order(bool prev) const {
  const std::size_t a = history(prev, false);
  const std::size_t b = history(prev, true);
  return (static_cast<double>(ones[a] + ones[b]) + 1.0) /
         (static_cast<double>(totals[a] + totals[b]) + 2.0);
}

double TemporalPrior::probability(bool state, bool prev, bool prev_prev, int order) const {
  const double p1 = order == 1 ? p_active_first_order(prev) : p_active(history(prev, prev_prev));
  return state ? p1 : 1.0 - p1;
}

TemporalPrior learn_temporal_priors(std::span<const std::vector<EnvironmentMap>> sequences) {
  require(!sequences.empty(), "learn_temporal_priors: no sequences");
  TemporalPrior prior;
  for (const auto& seq : sequences) {
    require(seq.size() >= 3, "learn_temporal_priors: sequences need at least 3 maps");
    const std::size_t n = seq.front().size();
    for (const auto& m : seq) {
      require(m.size() == n, "learn_temporal_priors: map length mismatch");
    }
    for (std::size_t t = 2; t < seq.size(); ++t) {
      for (std::size_t i = 0; i < n; ++i) {
        const auto h = TemporalPrior::history(seq[t - 1].active[i] != 0, seq[t - 2].active[i] != 0);
        ++prior.totals[h];
        if (seq[t].active[i] != 0) ++prior.ones[h];
      }
    }
  }
  return prior;
}

std::vector<EnvironmentMap> maps_from_ground_truth(std::span<const GroundTruthFrame> truth,
                                                   const Grid& grid) {
  std::vector<EnvironmentMap> maps;
  maps.reserve(truth.size());
  const double radius = grid.spacing();
  for (const auto& frame : truth) {
    EnvironmentMap map(frame.timestamp, grid.size());
    for (const auto& e : frame.entities) {
      const std::size_t nearest = grid.nearest(e.point());
      map.active[nearest] = 1;
      for (std::size_t nb : grid.neighbors(nearest)) {
        if (distance(grid[nb].point(), e.point()) <= radius) map.active[nb] = 1;
      }
    }
    maps.push_back(std::move(map));
  }
  return maps;
}

}  // namespace dfloc
