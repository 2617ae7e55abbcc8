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

#ifndef DFLOC_TRACKER_HPP
#define DFLOC_TRACKER_HPP

#include <deque>
#include <memory>
#include <optional>

#include "dfloc/clustering.hpp"
#include "dfloc/energy.hpp"
#include "dfloc/fingerprint.hpp"
#include "dfloc/preprocess.hpp"

namespace dfloc {

// Online pipeline for one trace: smoothing, stream selection, map
// inference, window merging and clustering. Frames must be pushed in
// timestamp order. Single writer; the fingerprint may be shared.
class Tracker {
 public:
  explicit Tracker(std::shared_ptr<const Fingerprint> fp);
  Tracker(std::shared_ptr<const Fingerprint> fp, ModelParams params);

  FrameEstimate push(const RssFrame& raw);

  const Fingerprint& fingerprint() const noexcept { return *fp_; }
  const ModelParams& params() const noexcept { return params_; }
  const TrackerState& state() const noexcept { return state_; }
  const EnvironmentMap& last_map() const noexcept { return state_.prev(); }
  const preprocess::StreamSelection& last_selection() const noexcept { return selection_; }

  // When enabled, the cut graph of the latest frame is retained.
  void keep_graphs(bool on) noexcept { keep_graphs_ = on; }
  const std::optional<CutGraph>& last_graph() const noexcept { return graph_; }

 private:
  std::shared_ptr<const Fingerprint> fp_;
  ModelParams params_;
  TrackerState state_;
  std::vector<RssFrame> raw_;        // last q raw frames
  std::deque<RssFrame> smoothed_;    // last anova_window smoothed frames
  preprocess::StreamSelection selection_;
  bool keep_graphs_ = false;
  std::optional<CutGraph> graph_;
  double last_time_ = 0.0;
  bool started_ = false;
};

}  // namespace dfloc

#endif  // DFLOC_TRACKER_HPP
