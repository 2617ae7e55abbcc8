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

#include "dfloc/maxflow.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "dfloc/core.hpp"

namespace dfloc {

MaxFlow::MaxFlow(std::size_t nodes) : nodes_(nodes) {
  require(nodes < static_cast<std::size_t>(std::numeric_limits<std::int32_t>::max() / 2),
          "max-flow graph too large");
}

void MaxFlow::add_terminal_weights(std::size_t node, double source_cap, double sink_cap) {
  require(node < nodes_.size(), "max-flow node out of range");
  require(source_cap >= 0.0 && sink_cap >= 0.0 && std::isfinite(source_cap) &&
              std::isfinite(sink_cap),
          "terminal capacities must be finite and nonnegative");
  Node& n = nodes_[node];
  if (n.terminal_cap > 0.0) {
    source_cap += n.terminal_cap;
  } else {
    sink_cap -= n.terminal_cap;
  }
  flow_ += std::min(source_cap, sink_cap);
  n.terminal_cap = source_cap - sink_cap;
  solved_ = false;
}

void MaxFlow::add_edge(std::size_t i, std::size_t j, double cap, double reverse_cap) {
  require(i < nodes_.size() && j < nodes_.size() && i != j, "max-flow edge endpoints invalid");
  require(cap >= 0.0 && reverse_cap >= 0.0 && std::isfinite(cap) && std::isfinite(reverse_cap),
          "edge capacities must be finite and nonnegative");
  const auto a = static_cast<std::int32_t>(arcs_.size());
  arcs_.push_back({static_cast<std::int32_t>(j), nodes_[i].first, cap});
  arcs_.push_back({static_cast<std::int32_t>(i), nodes_[j].first, reverse_cap});
  nodes_[i].first = a;
  nodes_[j].first = a + 1;
  solved_ = false;
}

void MaxFlow::activate(std::int32_t node) {
  Node& n = nodes_[static_cast<std::size_t>(node)];
  if (!n.queued) {
    n.queued = true;
    active_.push_back(node);
  }
}

std::int32_t MaxFlow::next_active() {
  while (!active_.empty()) {
    const std::int32_t i = active_.front();
    active_.pop_front();
    Node& n = nodes_[static_cast<std::size_t>(i)];
    n.queued = false;
    if (n.parent != kNone) return i;
  }
  return kNone;
}

void MaxFlow::augment(std::int32_t middle) {
  auto node = [this](std::int32_t i) -> Node& { return nodes_[static_cast<std::size_t>(i)]; };

  // Bottleneck along source tree, middle arc, sink tree.
  double bottleneck = arcs_[static_cast<std::size_t>(middle)].residual;
  std::int32_t i = arcs_[static_cast<std::size_t>(sister(middle))].head;
  for (;;) {
    const std::int32_t pa = node(i).parent;
    if (pa == kTerminal) break;
    bottleneck = std::min(bottleneck, arcs_[static_cast<std::size_t>(sister(pa))].residual);
    i = arcs_[static_cast<std::size_t>(pa)].head;
  }
  bottleneck = std::min(bottleneck, node(i).terminal_cap);
  i = arcs_[static_cast<std::size_t>(middle)].head;
  for (;;) {
    const std::int32_t pa = node(i).parent;
    if (pa == kTerminal) break;
    bottleneck = std::min(bottleneck, arcs_[static_cast<std::size_t>(pa)].residual);
    i = arcs_[static_cast<std::size_t>(pa)].head;
  }
  bottleneck = std::min(bottleneck, -node(i).terminal_cap);

  arcs_[static_cast<std::size_t>(sister(middle))].residual += bottleneck;
  arcs_[static_cast<std::size_t>(middle)].residual -= bottleneck;

  i = arcs_[static_cast<std::size_t>(sister(middle))].head;
  for (;;) {
    const std::int32_t pa = node(i).parent;
    if (pa == kTerminal) {
      node(i).terminal_cap -= bottleneck;
      if (node(i).terminal_cap <= 0.0) {
        node(i).terminal_cap = 0.0;
        node(i).parent = kOrphan;
        orphans_.push_front(i);
      }
      break;
    }
    auto& down = arcs_[static_cast<std::size_t>(sister(pa))];
    arcs_[static_cast<std::size_t>(pa)].residual += bottleneck;
    down.residual -= bottleneck;
    if (down.residual <= 0.0) {
      down.residual = 0.0;
      node(i).parent = kOrphan;
      orphans_.push_front(i);
    }
    i = arcs_[static_cast<std::size_t>(pa)].head;
  }

  i = arcs_[static_cast<std::size_t>(middle)].head;
  for (;;) {
    const std::int32_t pa = node(i).parent;
    if (pa == kTerminal) {
      node(i).terminal_cap += bottleneck;
      if (node(i).terminal_cap >= 0.0) {
        node(i).terminal_cap = 0.0;
        node(i).parent = kOrphan;
        orphans_.push_front(i);
      }
      break;
    }
    auto& up = arcs_[static_cast<std::size_t>(pa)];
    arcs_[static_cast<std::size_t>(sister(pa))].residual += bottleneck;
    up.residual -= bottleneck;
    if (up.residual <= 0.0) {
      up.residual = 0.0;
      node(i).parent = kOrphan;
      orphans_.push_front(i);
    }
    i = up.head;
  }

  flow_ += bottleneck;
}

void MaxFlow::adopt_orphan(std::int32_t orphan) {
  auto node = [this](std::int32_t i) -> Node& { return nodes_[static_cast<std::size_t>(i)]; };
  Node& o = node(orphan);
  const bool sink_tree = o.in_sink_tree;
  constexpr std::int32_t kInfinite = std::numeric_limits<std::int32_t>::max();

  std::int32_t best_arc = kNone;
  std::int32_t best_dist = kInfinite;
  for (std::int32_t a = o.first; a != kNone; a = arcs_[static_cast<std::size_t>(a)].next) {
    // Residual capacity from the candidate parent's tree into the orphan.
    const double cap = sink_tree ? arcs_[static_cast<std::size_t>(a)].residual
                                 : arcs_[static_cast<std::size_t>(sister(a))].residual;
    if (cap <= 0.0) continue;
    const std::int32_t j = arcs_[static_cast<std::size_t>(a)].head;
    if (node(j).in_sink_tree != sink_tree || node(j).parent == kNone) continue;

    // Walk to the root to make sure j is still connected to a terminal.
    std::int32_t d = 0;
    std::int32_t k = j;
    for (;;) {
      Node& nk = node(k);
      if (nk.stamp == time_) {
        d += nk.dist;
        break;
      }
      const std::int32_t pa = nk.parent;
      ++d;
      if (pa == kTerminal) {
        nk.stamp = time_;
        nk.dist = 1;
        break;
      }
      if (pa == kOrphan) {
        d = kInfinite;
        break;
      }
      k = arcs_[static_cast<std::size_t>(pa)].head;
    }
    if (d == kInfinite) continue;
    if (d < best_dist) {
      best_arc = a;
      best_dist = d;
    }
    for (k = j; node(k).stamp != time_; k = arcs_[static_cast<std::size_t>(node(k).parent)].head) {
      node(k).stamp = time_;
      node(k).dist = d--;
    }
  }

  if (best_arc != kNone) {
    o.parent = best_arc;
    o.stamp = time_;
    o.dist = best_dist + 1;
    return;
  }

  // No valid parent: the orphan becomes free and its children become orphans.
  for (std::int32_t a = o.first; a != kNone; a = arcs_[static_cast<std::size_t>(a)].next) {
    const std::int32_t j = arcs_[static_cast<std::size_t>(a)].head;
    Node& nj = node(j);
    const std::int32_t pa = nj.parent;
    if (nj.in_sink_tree != sink_tree || pa == kNone) continue;
    const double cap = sink_tree ? arcs_[static_cast<std::size_t>(a)].residual
                                 : arcs_[static_cast<std::size_t>(sister(a))].residual;
    if (cap > 0.0) activate(j);
    if (pa != kTerminal && pa != kOrphan && arcs_[static_cast<std::size_t>(pa)].head == orphan) {
      nj.parent = kOrphan;
      orphans_.push_back(j);
    }
  }
  o.parent = kNone;
}

double MaxFlow::solve() {
  auto node = [this](std::int32_t i) -> Node& { return nodes_[static_cast<std::size_t>(i)]; };
  active_.clear();
  orphans_.clear();
  time_ = 0;
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    Node& n = nodes_[i];
    n.queued = false;
    n.stamp = 0;
    if (n.terminal_cap > 0.0) {
      n.in_sink_tree = false;
      n.parent = kTerminal;
      n.dist = 1;
      activate(static_cast<std::int32_t>(i));
    } else if (n.terminal_cap < 0.0) {
      n.in_sink_tree = true;
      n.parent = kTerminal;
      n.dist = 1;
      activate(static_cast<std::int32_t>(i));
    } else {
      n.parent = kNone;
    }
  }

  std::int32_t current = kNone;
  for (;;) {
    std::int32_t i = current;
    if (i != kNone && node(i).parent == kNone) i = kNone;
    if (i == kNone) {
      i = next_active();
      if (i == kNone) break;
    }

    // Grow the tree rooted at i's terminal until it touches the other tree.
    std::int32_t middle = kNone;
    Node& ni = node(i);
    if (!ni.in_sink_tree) {
      for (std::int32_t a = ni.first; a != kNone; a = arcs_[static_cast<std::size_t>(a)].next) {
        if (arcs_[static_cast<std::size_t>(a)].residual <= 0.0) continue;
        const std::int32_t j = arcs_[static_cast<std::size_t>(a)].head;
        Node& nj = node(j);
        if (nj.parent == kNone) {
          nj.in_sink_tree = false;
          nj.parent = sister(a);
          nj.stamp = ni.stamp;
          nj.dist = ni.dist + 1;
          activate(j);
        } else if (nj.in_sink_tree) {
          middle = a;
          break;
        } else if (nj.stamp <= ni.stamp && nj.dist > ni.dist) {
          nj.parent = sister(a);
          nj.stamp = ni.stamp;
          nj.dist = ni.dist + 1;
        }
      }
    } else {
      for (std::int32_t a = ni.first; a != kNone; a = arcs_[static_cast<std::size_t>(a)].next) {
        if (arcs_[static_cast<std::size_t>(sister(a))].residual <= 0.0) continue;
        const std::int32_t j = arcs_[static_cast<std::size_t>(a)].head;
        Node& nj = node(j);
        if (nj.parent == kNone) {
          nj.in_sink_tree = true;
          nj.parent = sister(a);
          nj.stamp = ni.stamp;
          nj.dist = ni.dist + 1;
          activate(j);
        } else if (!nj.in_sink_tree) {
          middle = sister(a);
          break;
        } else if (nj.stamp <= ni.stamp && nj.dist > ni.dist) {
          nj.parent = sister(a);
          nj.stamp = ni.stamp;
          nj.dist = ni.dist + 1;
        }
      }
    }

    ++time_;
    if (middle == kNone) {
      current = kNone;
      continue;
    }

    current = i;  // i may still have unexplored residual arcs
    augment(middle);
    while (!orphans_.empty()) {
      const std::int32_t o = orphans_.front();
      orphans_.pop_front();
      adopt_orphan(o);
    }
  }
  solved_ = true;
  return flow_;
}

bool MaxFlow::on_source_side(std::size_t node) const {
  require(solved_, "max-flow not solved");
  const Node& n = nodes_.at(node);
  return n.parent != kNone && !n.in_sink_tree;
}

}  // namespace dfloc
