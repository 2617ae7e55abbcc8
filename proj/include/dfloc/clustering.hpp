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

#ifndef DFLOC_CLUSTERING_HPP
#define DFLOC_CLUSTERING_HPP

#include <cstddef>
#include <span>
#include <vector>

#include "dfloc/core.hpp"

namespace dfloc {

struct Candidate {
  double x = 0.0;
  double y = 0.0;
  double weight = 1.0;  // appearances in the merged window
  std::size_t location = 0;

  Point point() const noexcept { return {x, y}; }
};

using CandidateSet = std::vector<Candidate>;

struct Cluster {
  std::vector<std::size_t> members;  // indices into the candidate set
  Point centroid;                    // weighted center of mass
};

struct FrameEstimate {
  double timestamp = 0.0;
  std::vector<Point> entities;

  std::size_t m_hat() const noexcept { return entities.size(); }
  bool operator==(const FrameEstimate&) const = default;
};

// Activation counts of the given maps; locations never active are omitted.
CandidateSet merge_window(std::span<const EnvironmentMap> maps, const Grid& grid);

// One merge of the dendrogram. Children < leaves are candidate indices,
// otherwise (child - leaves) indexes the merge list.
struct Merge {
  std::size_t left = 0;
  std::size_t right = 0;
  double height = 0.0;  // distance between the children's centers
  std::size_t size = 0;
};

// Centroid-linkage agglomeration under Euclidean distance. Centers are
// unweighted member means; ties go to the smallest (i, j) cluster pair.
std::vector<Merge> centroid_linkage(std::span<const Point> points);

// Inconsistency of each merge against the merges at most one level below
// it: (h - mean) / max(stddev, scale), 0 when only the merge itself counts.
std::vector<double> inconsistency(std::span<const Merge> merges, std::size_t leaves,
                                  double scale);

// Agglomerates the candidates, then splits the dendrogram top-down: a merge
// is undone when its inconsistency exceeds r, recursing into both halves.
std::vector<Cluster> hierarchical_cluster(const CandidateSet& candidates, double r,
                                          double scale);

FrameEstimate estimate_entities(std::span<const Cluster> clusters, double timestamp);

}  // namespace dfloc

#endif  // DFLOC_CLUSTERING_HPP
