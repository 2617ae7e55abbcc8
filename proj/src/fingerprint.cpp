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

#include "dfloc/fingerprint.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

namespace dfloc {

Fingerprint::Fingerprint(Grid grid, std::vector<StreamId> streams,
                         std::vector<LocationFingerprint> locations, TemporalPrior temporal,
                         ModelParams params,
                         std::vector<std::vector<preprocess::SampleStats>> offline_stats)
    : grid_(std::move(grid)),
      streams_(std::move(streams)),
      locations_(std::move(locations)),
      temporal_(temporal),
      params_(params),
      offline_stats_(std::move(offline_stats)) {
  params_.validate();
  require(!streams_.empty(), "fingerprint needs at least one stream");
  require(std::is_sorted(streams_.begin(), streams_.end()) &&
              std::adjacent_find(streams_.begin(), streams_.end()) == streams_.end(),
          "fingerprint streams must be sorted and unique");
  require(locations_.size() == grid_.size(), "fingerprint needs one entry per grid location");
  require(offline_stats_.size() == grid_.size(), "offline statistics per location missing");
  for (std::size_t i = 0; i < locations_.size(); ++i) {
    require(locations_[i].location == grid_[i], "fingerprint location order must match grid");
    require(locations_[i].active.size() == streams_.size() &&
                locations_[i].inactive.size() == streams_.size(),
            "every location needs active and inactive histograms per stream");
    require(offline_stats_[i].size() == streams_.size(), "offline statistics per stream missing");
  }
}

std::optional<std::size_t> Fingerprint::stream_index(const StreamId& id) const {
  auto it = std::lower_bound(streams_.begin(), streams_.end(), id);
  if (it == streams_.end() || *it != id) return std::nullopt;
  return static_cast<std::size_t>(it - streams_.begin());
}

const RssHistogram& Fingerprint::histogram(std::size_t loc, std::size_t stream,
                                           bool active) const {
  const auto& l = locations_.at(loc);
  return active ? l.active.at(stream) : l.inactive.at(stream);
}

const preprocess::SampleStats& Fingerprint::offline_stats(std::size_t loc,
                                                          std::size_t stream) const {
  return offline_stats_.at(loc).at(stream);
}

StreamMask Fingerprint::mask_for(std::span<const StreamId> ids) const {
  StreamMask mask(streams_.size(), 0);
  for (const auto& id : ids) {
    if (auto s = stream_index(id)) mask[*s] = 1;
  }
  return mask;
}

Fingerprint Fingerprint::with_params(ModelParams params) const {
  Fingerprint copy = *this;
  params.validate();
  copy.params_ = params;
  return copy;
}

Fingerprint Fingerprint::with_temporal(TemporalPrior temporal) const {
  Fingerprint copy = *this;
  copy.temporal_ = temporal;
  return copy;
}

Fingerprint build_fingerprint(std::span<const CalibrationSession> sessions, const Grid& grid,
                              const ModelParams& params, const TemporalPrior& temporal) {
  params.validate();
  const std::size_t n = grid.size();
  require(sessions.size() == n, "build_fingerprint: expected exactly one session per location (" +
                                    std::to_string(n) + "), got " +
                                    std::to_string(sessions.size()));

  // Index sessions by location and collect per-stream samples.
  std::vector<const CalibrationSession*> by_location(n, nullptr);
  std::map<StreamId, std::pair<double, double>> range;  // stream -> (min, max)
  for (const auto& s : sessions) {
    require(s.location.index < n && s.location == grid[s.location.index],
            "build_fingerprint: session location is not a grid location");
    require(by_location[s.location.index] == nullptr,
            "build_fingerprint: duplicate session for location " +
                std::to_string(s.location.index));
    require(!s.frames.empty(), "build_fingerprint: session at location " +
                                   std::to_string(s.location.index) + " has no frames");
    by_location[s.location.index] = &s;
    for (const auto& f : s.frames) {
      for (const auto& r : f.readings()) {
        auto [it, fresh] = range.try_emplace(r.stream, r.dbm, r.dbm);
        if (!fresh) {
          it->second.first = std::min(it->second.first, r.dbm);
          it->second.second = std::max(it->second.second, r.dbm);
        }
      }
    }
  }
  require(!range.empty(), "build_fingerprint: sessions contain no readings");

  std::vector<StreamId> streams;
  for (const auto& [id, _] : range) streams.push_back(id);
  const std::size_t k = streams.size();

  // samples[loc][stream]
  std::vector<std::vector<std::vector<double>>> samples(n, std::vector<std::vector<double>>(k));
  for (std::size_t loc = 0; loc < n; ++loc) {
    for (const auto& f : by_location[loc]->frames) {
      for (std::size_t s = 0; s < k; ++s) {
        if (auto v = f.reading(streams[s])) samples[loc][s].push_back(*v);
      }
    }
  }

  const double bw = params.hist_bin_width;
  const double pad = 4.0 * params.hist_smooth_sigma + bw;
  std::vector<LocationFingerprint> locations(n);
  std::vector<std::vector<preprocess::SampleStats>> stats(n);
  for (std::size_t loc = 0; loc < n; ++loc) {
    locations[loc].location = grid[loc];
    for (std::size_t s = 0; s < k; ++s) {
      stats[loc].push_back(preprocess::SampleStats::of(samples[loc][s]));
    }
  }

  for (std::size_t s = 0; s < k; ++s) {
    const auto [lo, hi] = range.at(streams[s]);
    const double origin = std::floor((lo - pad) / bw) * bw;
    const auto bins = static_cast<std::size_t>(std::ceil((hi + pad - origin) / bw));

    auto finish = [&](const std::vector<double>& values) {
      if (values.empty()) {
        // Stream never observed in this state: uninformative.
        return RssHistogram(bw, origin, std::vector<double>(bins, 1.0 / static_cast<double>(bins)), 0);
      }
      auto h = RssHistogram::from_samples(values, bw, origin, bins);
      return floor_histogram(smooth_histogram(h, params.hist_smooth_sigma), params.hist_floor);
    };

    for (std::size_t loc = 0; loc < n; ++loc) {
      std::vector<double> others;
      for (std::size_t other = 0; other < n; ++other) {
        if (other == loc) continue;
        others.insert(others.end(), samples[other][s].begin(), samples[other][s].end());
      }
      locations[loc].active.push_back(finish(samples[loc][s]));
      locations[loc].inactive.push_back(finish(others));
    }
  }

  return Fingerprint(grid, std::move(streams), std::move(locations), temporal, params,
                     std::move(stats));
}

double log_likelihood(const Fingerprint& fp, std::size_t loc, bool state, const RssFrame& frame,
                      const StreamMask& active_streams) {
  if (loc >= fp.size()) {
    throw_error(ErrorCode::out_of_range, "location index " + std::to_string(loc) +
                                             " out of range (n = " + std::to_string(fp.size()) + ")");
  }
  require(active_streams.size() == fp.streams().size(), "stream mask size mismatch");
  const auto& streams = fp.streams();
  double sum = 0.0;
  std::size_t used = 0;
  for (std::size_t s = 0; s < streams.size(); ++s) {
    if (!active_streams[s]) continue;
    auto v = frame.reading(streams[s]);
    if (!v) continue;
    sum += std::log(fp.histogram(loc, s, state).probability(*v));
    ++used;
  }
  require(used > 0, "frame has no reading among the selected streams");
  return sum;
}

double likelihood(const Fingerprint& fp, std::size_t loc, bool state, const RssFrame& frame,
                  const StreamMask& active_streams) {
  return std::exp(log_likelihood(fp, loc, state, frame, active_streams));
}

}  // namespace dfloc
