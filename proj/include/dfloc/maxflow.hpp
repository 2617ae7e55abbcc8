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

#ifndef DFLOC_MAXFLOW_HPP
#define DFLOC_MAXFLOW_HPP

#include <cstddef>
#include <cstdint>
#include <deque>
#include <vector>

namespace dfloc {

// Two-terminal max-flow with the Boykov-Kolmogorov augmenting-path scheme:
// search trees grown from both terminals are reused between augmentations
// and repaired through orphan adoption. Terminals are implicit; each node
// carries a residual terminal capacity instead of explicit t-arcs.
class MaxFlow {
 public:
  explicit MaxFlow(std::size_t nodes);

  std::size_t size() const noexcept { return nodes_.size(); }

  // Adds capacity source->node and node->sink. May be called repeatedly.
  void add_terminal_weights(std::size_t node, double source_cap, double sink_cap);
  // Adds the arc pair i->j (cap) and j->i (reverse_cap).
  void add_edge(std::size_t i, std::size_t j, double cap, double reverse_cap);

  // Runs to completion and returns the flow value (including the flow routed
  // directly source->node->sink by add_terminal_weights).
  double solve();

  // After solve(): true if the node ends on the source side of the minimum
  // cut. Nodes not reachable from either terminal go to the sink side.
  bool on_source_side(std::size_t node) const;

 private:
  static constexpr std::int32_t kNone = -1;
  static constexpr std::int32_t kTerminal = -2;
  static constexpr std::int32_t kOrphan = -3;

  struct Node {
    std::int32_t first = kNone;   // first outgoing arc
    std::int32_t parent = kNone;  // arc towards the parent, or a marker
    std::uint64_t stamp = 0;
    std::int32_t dist = 0;
    bool in_sink_tree = false;
    bool queued = false;
    double terminal_cap = 0.0;  // > 0: residual from source, < 0: to sink
  };
  struct Arc {
    std::int32_t head = 0;
    std::int32_t next = kNone;
    double residual = 0.0;
  };

  static std::int32_t sister(std::int32_t a) noexcept { return a ^ 1; }
  void activate(std::int32_t node);
  std::int32_t next_active();
  void augment(std::int32_t middle);
  void adopt_orphan(std::int32_t node);

  std::vector<Node> nodes_;
  std::vector<Arc> arcs_;
  std::deque<std::int32_t> active_;
  std::deque<std::int32_t> orphans_;
  std::uint64_t time_ = 0;
  double flow_ = 0.0;
  bool solved_ = false;
};

}  // namespace dfloc

#endif  // DFLOC_MAXFLOW_HPP
