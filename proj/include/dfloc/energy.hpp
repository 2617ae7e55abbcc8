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

// Binary labeling energy over the location grid and its exact minimization
// by a two-terminal minimum cut.
//
//   E(M) = sum_i beta  * -log P(a_i | a_i', a_i'')        temporal prior
//        + sum_i delta * -log P(s | a_i)                    RSS likelihood
//        + sum_{i~j, a_i != a_j} gamma * (1 + exp(-D_ij^2)) / 2   coherence
//
// where a_i' and a_i'' are the labels one and two frames back and D_ij is
// the likelihood contrast between neighbors i and j.

#ifndef DFLOC_ENERGY_HPP
#define DFLOC_ENERGY_HPP

#include <cstddef>
#include <deque>
#include <iosfwd>
#include <vector>

#include "dfloc/core.hpp"
#include "dfloc/fingerprint.hpp"

namespace dfloc {

// Per-frame observation terms shared by every energy evaluation of a frame.
struct FrameEvidence {
  double timestamp = 0.0;
  std::vector<double> nll_active;    // -log P(s | a_i = 1)
  std::vector<double> nll_inactive;  // -log P(s | a_i = 0)
  std::vector<double> contrast;      // per-location score entering D_ij

  std::size_t size() const noexcept { return nll_active.size(); }
};

FrameEvidence evaluate_frame(const Fingerprint& fp, const RssFrame& frame,
                             const StreamMask& active_streams, ContrastMode mode);

struct History {
  bool prev = false;       // label one frame back
  bool prev_prev = false;  // label two frames back
};

// beta * -log p_state_given_history + delta * -log p_obs_given_state.
double unary_cost(double p_state_given_history, double p_obs_given_state, double beta,
                  double delta);

double unary_energy(const Fingerprint& fp, const FrameEvidence& evidence, std::size_t loc,
                    bool state, History history, const ModelParams& params);

// gamma * (1 + exp(-contrast^2)) / 2
double coherence_cost(double contrast, double gamma);

// Cost charged when neighbors i and j take different labels. Throws
// invalid_argument for non-adjacent pairs.
double pairwise_energy(const Fingerprint& fp, const FrameEvidence& evidence, std::size_t i,
                       std::size_t j, const ModelParams& params);

double total_energy(const EnvironmentMap& map, const FrameEvidence& evidence,
                    const EnvironmentMap& prev, const EnvironmentMap& prev_prev,
                    const Fingerprint& fp, const ModelParams& params);

struct PairwiseTable {
  double e00 = 0.0;
  double e01 = 0.0;
  double e10 = 0.0;
  double e11 = 0.0;
};

// E(0,0) + E(1,1) <= E(0,1) + E(1,0)
bool is_regular(const PairwiseTable& table) noexcept;
// Checks every neighbor pair of the energy built for this frame.
bool check_regular(const Fingerprint& fp, const FrameEvidence& evidence,
                   const ModelParams& params);

struct NEdge {
  std::size_t i = 0;
  std::size_t j = 0;
  double weight = 0.0;
};

// n location nodes plus the two implicit terminals. source_tedge[x] is the
// cost of labeling x inactive, sink_tedge[x] the cost of labeling it active.
struct CutGraph {
  std::size_t n = 0;
  std::vector<double> source_tedge;
  std::vector<double> sink_tedge;
  std::vector<NEdge> n_edges;
};

CutGraph build_cut_graph(const FrameEvidence& evidence, const EnvironmentMap& prev,
                         const EnvironmentMap& prev_prev, const Fingerprint& fp,
                         const ModelParams& params);

// Energy of a labeling as encoded by the graph (equals the cut cost).
double graph_energy(const CutGraph& g, const EnvironmentMap& map);

// Exact minimizer via max-flow. Locations left on the source side of the
// cut pay their sink t-edge (the active cost) and are labeled active.
EnvironmentMap min_cut(const CutGraph& g, double timestamp = 0.0);

inline constexpr std::size_t kBruteForceLimit = 20;

// Exhaustive minimizer of total_energy; ties go to the smallest activation
// vector read as a binary number with location 0 as the least significant bit.
EnvironmentMap brute_force_map(const FrameEvidence& evidence, const EnvironmentMap& prev,
                               const EnvironmentMap& prev_prev, const Fingerprint& fp,
                               const ModelParams& params);

// Text dump: "tedge <i> <src_w> <sink_w>" and "nedge <i> <j> <w>" lines.
void write_cut_graph(std::ostream& out, const CutGraph& g);

// Online labeling state: the two previous maps and the last w maps.
class TrackerState {
 public:
  TrackerState(std::size_t n, std::size_t window);

  std::size_t locations() const noexcept { return n_; }
  const EnvironmentMap& prev() const noexcept { return prev_; }
  const EnvironmentMap& prev_prev() const noexcept { return prev_prev_; }
  const std::deque<EnvironmentMap>& window() const noexcept { return window_; }
  std::size_t capacity() const noexcept { return capacity_; }

  void push(EnvironmentMap map);

 private:
  std::size_t n_;
  std::size_t capacity_;
  EnvironmentMap prev_;
  EnvironmentMap prev_prev_;
  std::deque<EnvironmentMap> window_;
};

// Builds the cut graph for `frame`, solves it, and records the result.
EnvironmentMap infer_map(TrackerState& state, const RssFrame& frame, const Fingerprint& fp,
                         const ModelParams& params, const StreamMask& active_streams);

}  // namespace dfloc

#endif  // DFLOC_ENERGY_HPP
