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

#include "dfloc/tracker.hpp"

#include <utility>

namespace dfloc {

namespace {

std::shared_ptr<const Fingerprint> checked(std::shared_ptr<const Fingerprint> fp) {
  require(fp != nullptr, "tracker needs a fingerprint");
  require(fp->size() >= 1, "tracker needs a non-empty fingerprint");
  return fp;
}

}  // namespace

Tracker::Tracker(std::shared_ptr<const Fingerprint> fp)
    : Tracker(fp, checked(fp)->params()) {}

Tracker::Tracker(std::shared_ptr<const Fingerprint> fp, ModelParams params)
    : fp_(checked(std::move(fp))),
      params_((params.validate(), params)),
      state_(fp_->size(), params_.w) {}

FrameEstimate Tracker::push(const RssFrame& raw) {
  if (started_ && raw.timestamp() < last_time_) {
    throw_error(ErrorCode::invalid_argument, "frames must be pushed in timestamp order");
  }
  started_ = true;
  last_time_ = raw.timestamp();

  raw_.push_back(raw);
  if (raw_.size() > params_.q) raw_.erase(raw_.begin());
  RssFrame frame = preprocess::smooth_frames(raw_, params_.q, params_.alpha_trim).back();

  smoothed_.push_back(frame);
  while (smoothed_.size() > params_.anova_window) smoothed_.pop_front();
  const std::vector<RssFrame> recent(smoothed_.begin(), smoothed_.end());
  selection_ = preprocess::select_streams(*fp_, recent, params_.anova_significance);
  const StreamMask mask = fp_->mask_for(selection_.kept);

  const FrameEvidence ev = evaluate_frame(*fp_, frame, mask, params_.contrast);
  CutGraph g = build_cut_graph(ev, state_.prev(), state_.prev_prev(), *fp_, params_);
  state_.push(min_cut(g, frame.timestamp()));
  if (keep_graphs_) {
    graph_ = std::move(g);
  } else {
    graph_.reset();
  }

  const std::vector<EnvironmentMap> window(state_.window().begin(), state_.window().end());
  const CandidateSet candidates = merge_window(window, fp_->grid());
  const auto clusters = hierarchical_cluster(candidates, params_.r, params_.cluster_scale);
  return estimate_entities(clusters, frame.timestamp());
}

}  // namespace dfloc
