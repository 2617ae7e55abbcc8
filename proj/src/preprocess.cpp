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

#include "dfloc/preprocess.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <map>

#include <boost/math/distributions/fisher_f.hpp>

#include "dfloc/fingerprint.hpp"

namespace dfloc::preprocess {

namespace {

double trimmed_mean_of_sorted(std::span<const double> sorted, std::size_t trim) {
  double sum = 0.0;
  for (std::size_t i = trim; i < sorted.size() - trim; ++i) sum += sorted[i];
  return sum / static_cast<double>(sorted.size() - 2 * trim);
}

std::size_t trim_count(std::size_t q, double alpha) {
  return static_cast<std::size_t>(std::ceil(alpha * static_cast<double>(q)));
}

// Trimmed mean where short windows keep at least one sample.
double capped_trimmed_mean(std::vector<double> window, double alpha) {
  std::stable_sort(window.begin(), window.end());
  const std::size_t m = window.size();
  const std::size_t trim = std::min(trim_count(m, alpha), (m - 1) / 2);
  return trimmed_mean_of_sorted(window, trim);
}

}  // namespace

double alpha_trimmed_mean(std::span<const double> window, double alpha) {
  require(!window.empty(), "alpha_trimmed_mean: empty window");
  require(alpha >= 0.0 && alpha < 0.5, "alpha_trimmed_mean: alpha must lie in [0, 0.5)");
  const std::size_t q = window.size();
  const std::size_t trim = trim_count(q, alpha);
  require(2 * trim < q, "alpha_trimmed_mean: trimming leaves no samples");
  std::vector<double> sorted(window.begin(), window.end());
  std::stable_sort(sorted.begin(), sorted.end());
  return trimmed_mean_of_sorted(sorted, trim);
}

std::vector<double> smooth_stream(std::span<const double> raw, std::size_t q,
                                  double alpha) {
  require(q >= 1, "smooth_stream: q must be at least 1");
  require(alpha >= 0.0 && alpha < 0.5, "smooth_stream: alpha must lie in [0, 0.5)");
  std::vector<double> out;
  out.reserve(raw.size());
  for (std::size_t i = 0; i < raw.size(); ++i) {
    const std::size_t start = i + 1 >= q ? i + 1 - q : 0;
    out.push_back(capped_trimmed_mean(
        std::vector<double>(raw.begin() + static_cast<std::ptrdiff_t>(start),
                            raw.begin() + static_cast<std::ptrdiff_t>(i + 1)),
        alpha));
  }
  return out;
}

std::vector<RssFrame> smooth_frames(std::span<const RssFrame> raw, std::size_t q,
                                    double alpha) {
  require(q >= 1, "smooth_frames: q must be at least 1");
  require(alpha >= 0.0 && alpha < 0.5, "smooth_frames: alpha must lie in [0, 0.5)");
  std::vector<RssFrame> out;
  out.reserve(raw.size());
  for (std::size_t i = 0; i < raw.size(); ++i) {
    const std::size_t start = i + 1 >= q ? i + 1 - q : 0;
    RssFrame smoothed(raw[i].timestamp());
    for (const auto& reading : raw[i].readings()) {
      std::vector<double> window;
      for (std::size_t j = start; j <= i; ++j) {
        if (auto v = raw[j].reading(reading.stream)) window.push_back(*v);
      }
      smoothed.set(reading.stream, capped_trimmed_mean(std::move(window), alpha));
    }
    out.push_back(std::move(smoothed));
  }
  return out;
}

void SampleStats::add(double x) {
  ++count;
  const double d = x - mean;
  mean += d / static_cast<double>(count);
  m2 += d * (x - mean);
}

double SampleStats::variance() const {
  return count < 2 ? 0.0 : m2 / static_cast<double>(count - 1);
}

SampleStats SampleStats::of(std::span<const double> samples) {
  SampleStats s;
  for (double x : samples) s.add(x);
  return s;
}

double f_distribution_sf(double f, double d1, double d2) {
  if (!(f > 0.0)) return 1.0;
  if (std::isinf(f)) return 0.0;
  boost::math::fisher_f_distribution<double> dist(d1, d2);
  return boost::math::cdf(boost::math::complement(dist, f));
}

StreamDecision anova_stream_test(const SampleStats& offline, const SampleStats& online,
                                 double significance) {
  require(significance > 0.0 && significance < 1.0,
          "anova_stream_test: significance must lie in (0, 1)");
  StreamDecision d;
  if (offline.count < 2 || online.count < 2) {
    d.insufficient_data = true;
    return d;
  }
  const double n1 = static_cast<double>(offline.count);
  const double n2 = static_cast<double>(online.count);
  const double diff = offline.mean - online.mean;
  const double between = n1 * n2 / (n1 + n2) * diff * diff;  // df = 1
  const double within = offline.m2 + online.m2;
  const double df_within = n1 + n2 - 2.0;
  if (within <= 0.0) {
    d.f_statistic = between > 0.0 ? std::numeric_limits<double>::infinity() : 0.0;
  } else {
    d.f_statistic = between / (within / df_within);
  }
  d.p_value = f_distribution_sf(d.f_statistic, 1.0, df_within);
  d.kept = d.p_value >= significance;
  return d;
}

StreamDecision anova_stream_test(std::span<const double> offline,
                                 std::span<const double> online, double significance) {
  return anova_stream_test(SampleStats::of(offline), SampleStats::of(online),
                           significance);
}

StreamSelection select_streams(const Fingerprint& fp,
                               std::span<const RssFrame> recent_online,
                               double significance) {
  StreamSelection selection;
  const auto& streams = fp.streams();
  for (std::size_t s = 0; s < streams.size(); ++s) {
    SampleStats online;
    for (const auto& frame : recent_online) {
      if (auto v = frame.reading(streams[s])) online.add(*v);
    }
    StreamDecision best;
    bool have_best = false;
    for (std::size_t loc = 0; loc < fp.size(); ++loc) {
      StreamDecision d = anova_stream_test(fp.offline_stats(loc, s), online, significance);
      if (!have_best || d.p_value > best.p_value ||
          (d.insufficient_data && !best.insufficient_data)) {
        best = d;
        have_best = true;
      }
    }
    best.stream = streams[s];
    selection.decisions.push_back(best);
    if (best.kept) selection.kept.push_back(streams[s]);
  }
  if (selection.kept.empty() && !selection.decisions.empty()) {
    auto it = std::max_element(
        selection.decisions.begin(), selection.decisions.end(),
        [](const StreamDecision& a, const StreamDecision& b) { return a.p_value < b.p_value; });
    selection.kept.push_back(it->stream);
    selection.fallback = true;
  }
  return selection;
}

}  // namespace dfloc::preprocess
