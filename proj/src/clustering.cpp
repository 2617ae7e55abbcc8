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

#include "dfloc/clustering.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace dfloc {

CandidateSet merge_window(std::span<const EnvironmentMap> maps, const Grid& grid) {
  std::vector<std::size_t> counts(grid.size(), 0);
  for (const auto& m : maps) {
    require(m.size() == grid.size(), "merge_window: map length does not match the grid");
    for (std::size_t i = 0; i < m.size(); ++i) counts[i] += m.active[i] ? 1 : 0;
  }
  CandidateSet out;
  for (std::size_t i = 0; i < counts.size(); ++i) {
    if (counts[i] == 0) continue;
    out.push_back({grid[i].x, grid[i].y, static_cast<double>(counts[i]), i});
  }
  return out;
}

std::vector<Merge> centroid_linkage(std::span<const Point> points) {
  const std::size_t leaves = points.size();
  std::vector<Merge> merges;
  if (leaves < 2) return merges;

  struct Node {
    Point center;
    std::size_t size;
    std::size_t id;
  };
  std::vector<Node> active;
  active.reserve(leaves);
  for (std::size_t i = 0; i < leaves; ++i) active.push_back({points[i], 1, i});

  while (active.size() > 1) {
    std::size_t bi = 0;
    std::size_t bj = 1;
    double best = std::numeric_limits<double>::infinity();
    // `active` stays sorted by id, so the first strict minimum is the
    // lexicographically smallest pair.
    for (std::size_t i = 0; i < active.size(); ++i) {
      for (std::size_t j = i + 1; j < active.size(); ++j) {
        const double d = distance(active[i].center, active[j].center);
        if (d < best) {
          best = d;
          bi = i;
          bj = j;
        }
      }
    }
    const Node& a = active[bi];
    const Node& b = active[bj];
    const auto sa = static_cast<double>(a.size);
    const auto sb = static_cast<double>(b.size);
    Node merged{{(sa * a.center.x + sb * b.center.x) / (sa + sb),
                 (sa * a.center.y + sb * b.center.y) / (sa + sb)},
                a.size + b.size,
                leaves + merges.size()};
    merges.push_back({a.id, b.id, best, merged.size});
    active.erase(active.begin() + static_cast<std::ptrdiff_t>(bj));
    active.erase(active.begin() + static_cast<std::ptrdiff_t>(bi));
    active.push_back(merged);
  }
  return merges;
}

std::vector<double> inconsistency(std::span<const Merge> merges, std::size_t leaves,
                                  double scale) {
  require(scale > 0.0, "inconsistency: scale must be positive");
  std::vector<double> out(merges.size(), 0.0);
  for (std::size_t k = 0; k < merges.size(); ++k) {
    double heights[3];
    std::size_t count = 0;
    heights[count++] = merges[k].height;
    for (std::size_t child : {merges[k].left, merges[k].right}) {
      if (child >= leaves) heights[count++] = merges[child - leaves].height;
    }
    if (count < 2) continue;
    double mean = 0.0;
    for (std::size_t i = 0; i < count; ++i) mean += heights[i];
    mean /= static_cast<double>(count);
    double ss = 0.0;
    for (std::size_t i = 0; i < count; ++i) ss += (heights[i] - mean) * (heights[i] - mean);
    const double sd = std::sqrt(ss / static_cast<double>(count - 1));
    out[k] = (merges[k].height - mean) / std::max(sd, scale);
  }
  return out;
}

namespace {

void collect_leaves(std::span<const Merge> merges, std::size_t leaves, std::size_t node,
                    std::vector<std::size_t>& out) {
  if (node < leaves) {
    out.push_back(node);
    return;
  }
  const Merge& m = merges[node - leaves];
  collect_leaves(merges, leaves, m.left, out);
  collect_leaves(merges, leaves, m.right, out);
}

}  // namespace

std::vector<Cluster> hierarchical_cluster(const CandidateSet& candidates, double r,
                                          double scale) {
  require(r > 0.0, "hierarchical_cluster: r must be positive");
  std::vector<Cluster> clusters;
  const std::size_t leaves = candidates.size();
  if (leaves == 0) return clusters;

  std::vector<Point> points;
  points.reserve(leaves);
  for (const auto& c : candidates) points.push_back(c.point());
  const auto merges = centroid_linkage(points);
  const auto coeff = inconsistency(merges, leaves, scale);

  std::vector<std::size_t> stack{leaves == 1 ? 0 : leaves + merges.size() - 1};
  while (!stack.empty()) {
    const std::size_t node = stack.back();
    stack.pop_back();
    if (node >= leaves && coeff[node - leaves] > r) {
      stack.push_back(merges[node - leaves].right);
      stack.push_back(merges[node - leaves].left);
      continue;
    }
    Cluster c;
    collect_leaves(merges, leaves, node, c.members);
    std::sort(c.members.begin(), c.members.end());
    double wx = 0.0;
    double wy = 0.0;
    double w = 0.0;
    for (std::size_t m : c.members) {
      wx += candidates[m].weight * candidates[m].x;
      wy += candidates[m].weight * candidates[m].y;
      w += candidates[m].weight;
    }
    c.centroid = {wx / w, wy / w};
    clusters.push_back(std::move(c));
  }
  return clusters;
}

FrameEstimate estimate_entities(std::span<const Cluster> clusters, double timestamp) {
  FrameEstimate est;
  est.timestamp = timestamp;
  for (const auto& c : clusters) est.entities.push_back(c.centroid);
  return est;
}

}  // namespace dfloc
