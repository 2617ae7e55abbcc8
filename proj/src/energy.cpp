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

#include "dfloc/energy.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <limits>
#include <ostream>

#include "dfloc/maxflow.hpp"

namespace dfloc {

FrameEvidence evaluate_frame(const Fingerprint& fp, const RssFrame& frame,
                             const StreamMask& active_streams, ContrastMode mode) {
  const std::size_t n = fp.size();
  FrameEvidence ev;
  ev.timestamp = frame.timestamp();
  ev.nll_active.resize(n);
  ev.nll_inactive.resize(n);
  ev.contrast.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    ev.nll_active[i] = -log_likelihood(fp, i, true, frame, active_streams);
    ev.nll_inactive[i] = -log_likelihood(fp, i, false, frame, active_streams);
  }
  if (mode == ContrastMode::literal) {
    for (std::size_t i = 0; i < n; ++i) ev.contrast[i] = std::exp(-ev.nll_active[i]);
  } else {
    const auto [lo, hi] = std::minmax_element(ev.nll_active.begin(), ev.nll_active.end());
    const double span = *hi - *lo;
    for (std::size_t i = 0; i < n; ++i) {
      ev.contrast[i] = span > 0.0 ? (ev.nll_active[i] - *lo) / span : 0.0;
    }
  }
  return ev;
}

double unary_cost(double p_state_given_history, double p_obs_given_state, double beta,
                  double delta) {
  return beta * -std::log(p_state_given_history) + delta * -std::log(p_obs_given_state);
}

namespace {

void check_evidence(const Fingerprint& fp, const FrameEvidence& evidence) {
  require(evidence.size() == fp.size() && evidence.nll_inactive.size() == fp.size() &&
              evidence.contrast.size() == fp.size(),
          "frame evidence does not match the fingerprint");
}

double unary_from_nll(const TemporalPrior& prior, double nll, bool state, History history,
                      const ModelParams& params) {
  const double p_state = prior.probability(state, history.prev, history.prev_prev, params.hmm_order);
  return params.beta * -std::log(p_state) + params.delta * nll;
}

void check_map(const EnvironmentMap& m, std::size_t n, const char* what) {
  if (m.size() != n) {
    throw_error(ErrorCode::invalid_argument, std::string(what) + " has length " +
                                                 std::to_string(m.size()) + ", expected " +
                                                 std::to_string(n));
  }
}

}  // namespace

double unary_energy(const Fingerprint& fp, const FrameEvidence& evidence, std::size_t loc,
                    bool state, History history, const ModelParams& params) {
  check_evidence(fp, evidence);
  if (loc >= fp.size()) throw_error(ErrorCode::out_of_range, "location index out of range");
  const double nll = state ? evidence.nll_active[loc] : evidence.nll_inactive[loc];
  return unary_from_nll(fp.temporal(), nll, state, history, params);
}

double coherence_cost(double contrast, double gamma) {
  return gamma * (1.0 + std::exp(-contrast * contrast)) / 2.0;
}

double pairwise_energy(const Fingerprint& fp, const FrameEvidence& evidence, std::size_t i,
                       std::size_t j, const ModelParams& params) {
  check_evidence(fp, evidence);
  if (i >= fp.size() || j >= fp.size()) {
    throw_error(ErrorCode::out_of_range, "location index out of range");
  }
  require(fp.grid().adjacent(i, j), "pairwise_energy: locations " + std::to_string(i) + " and " +
                                        std::to_string(j) + " are not neighbors");
  return coherence_cost(evidence.contrast[i] - evidence.contrast[j], params.gamma);
}

double total_energy(const EnvironmentMap& map, const FrameEvidence& evidence,
                    const EnvironmentMap& prev, const EnvironmentMap& prev_prev,
                    const Fingerprint& fp, const ModelParams& params) {
  check_evidence(fp, evidence);
  const std::size_t n = fp.size();
  check_map(map, n, "map");
  check_map(prev, n, "previous map");
  check_map(prev_prev, n, "map two frames back");
  double temporal = 0.0;
  double likelihood = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const bool state = map.active[i] != 0;
    temporal += params.beta * -std::log(fp.temporal().probability(
                                  state, prev.active[i] != 0, prev_prev.active[i] != 0,
                                  params.hmm_order));
    likelihood += params.delta * (state ? evidence.nll_active[i] : evidence.nll_inactive[i]);
  }
  double spatial = 0.0;
  for (auto [i, j] : fp.grid().edges()) {
    if (map.active[i] != map.active[j]) spatial += pairwise_energy(fp, evidence, i, j, params);
  }
  return temporal + spatial + likelihood;
}

bool is_regular(const PairwiseTable& t) noexcept {
  return t.e00 + t.e11 <= t.e01 + t.e10;
}

bool check_regular(const Fingerprint& fp, const FrameEvidence& evidence,
                   const ModelParams& params) {
  for (auto [i, j] : fp.grid().edges()) {
    const double differ = pairwise_energy(fp, evidence, i, j, params);
    if (!is_regular({0.0, differ, differ, 0.0})) return false;
  }
  return true;
}

CutGraph build_cut_graph(const FrameEvidence& evidence, const EnvironmentMap& prev,
                         const EnvironmentMap& prev_prev, const Fingerprint& fp,
                         const ModelParams& params) {
  check_evidence(fp, evidence);
  const std::size_t n = fp.size();
  check_map(prev, n, "previous map");
  check_map(prev_prev, n, "map two frames back");
  assert(check_regular(fp, evidence, params));

  CutGraph g;
  g.n = n;
  g.source_tedge.resize(n);
  g.sink_tedge.resize(n);
  for (std::size_t x = 0; x < n; ++x) {
    const History h{prev.active[x] != 0, prev_prev.active[x] != 0};
    g.source_tedge[x] = unary_from_nll(fp.temporal(), evidence.nll_inactive[x], false, h, params);
    g.sink_tedge[x] = unary_from_nll(fp.temporal(), evidence.nll_active[x], true, h, params);
  }
  g.n_edges.reserve(fp.grid().edges().size());
  for (auto [i, j] : fp.grid().edges()) {
    g.n_edges.push_back({i, j, coherence_cost(evidence.contrast[i] - evidence.contrast[j],
                                              params.gamma)});
  }
  return g;
}

double graph_energy(const CutGraph& g, const EnvironmentMap& map) {
  check_map(map, g.n, "map");
  double e = 0.0;
  for (std::size_t x = 0; x < g.n; ++x) e += map.active[x] ? g.sink_tedge[x] : g.source_tedge[x];
  for (const auto& edge : g.n_edges) {
    if (map.active[edge.i] != map.active[edge.j]) e += edge.weight;
  }
  return e;
}

EnvironmentMap min_cut(const CutGraph& g, double timestamp) {
  require(g.source_tedge.size() == g.n && g.sink_tedge.size() == g.n, "malformed cut graph");
  MaxFlow flow(g.n);
  for (std::size_t x = 0; x < g.n; ++x) {
    flow.add_terminal_weights(x, g.source_tedge[x], g.sink_tedge[x]);
  }
  for (const auto& e : g.n_edges) {
    require(e.i < g.n && e.j < g.n, "cut graph edge out of range");
    flow.add_edge(e.i, e.j, e.weight, e.weight);
  }
  flow.solve();
  EnvironmentMap map(timestamp, g.n);
  for (std::size_t x = 0; x < g.n; ++x) map.active[x] = flow.on_source_side(x) ? 1 : 0;
  return map;
}

EnvironmentMap brute_force_map(const FrameEvidence& evidence, const EnvironmentMap& prev,
                               const EnvironmentMap& prev_prev, const Fingerprint& fp,
                               const ModelParams& params) {
  const std::size_t n = fp.size();
  require(n <= kBruteForceLimit, "brute_force_map: n = " + std::to_string(n) +
                                     " exceeds the enumeration limit of " +
                                     std::to_string(kBruteForceLimit));
  EnvironmentMap candidate(evidence.timestamp, n);
  EnvironmentMap best = candidate;
  double best_energy = std::numeric_limits<double>::infinity();
  const std::uint64_t count = std::uint64_t{1} << n;
  for (std::uint64_t bits = 0; bits < count; ++bits) {
    for (std::size_t i = 0; i < n; ++i) candidate.active[i] = (bits >> i) & 1u;
    const double e = total_energy(candidate, evidence, prev, prev_prev, fp, params);
    if (e < best_energy) {
      best_energy = e;
      best = candidate;
    }
  }
  return best;
}

void write_cut_graph(std::ostream& out, const CutGraph& g) {
  for (std::size_t x = 0; x < g.n; ++x) {
    out << "tedge " << x << ' ' << format_double(g.source_tedge[x]) << ' '
        << format_double(g.sink_tedge[x]) << '\n';
  }
  for (const auto& e : g.n_edges) {
    out << "nedge " << e.i << ' ' << e.j << ' ' << format_double(e.weight) << '\n';
  }
}

TrackerState::TrackerState(std::size_t n, std::size_t window)
    : n_(n), capacity_(window), prev_(0.0, n), prev_prev_(0.0, n) {
  require(n >= 1, "tracker needs at least one location");
  require(window >= 1, "tracker window must be at least 1");
}

void TrackerState::push(EnvironmentMap map) {
  check_map(map, n_, "map");
  prev_prev_ = std::move(prev_);
  prev_ = map;
  window_.push_back(std::move(map));
  while (window_.size() > capacity_) window_.pop_front();
}

EnvironmentMap infer_map(TrackerState& state, const RssFrame& frame, const Fingerprint& fp,
                         const ModelParams& params, const StreamMask& active_streams) {
  require(state.locations() == fp.size(), "tracker state does not match the fingerprint");
  const FrameEvidence ev = evaluate_frame(fp, frame, active_streams, params.contrast);
  const CutGraph g = build_cut_graph(ev, state.prev(), state.prev_prev(), fp, params);
  EnvironmentMap map = min_cut(g, frame.timestamp());
  state.push(map);
  return map;
}

}  // namespace dfloc
