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

// Command-line front end. Uses only the C interface of libdfloc.

#include <cstdio>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "dfloc/dfloc.h"

namespace {

int report(dfloc_status status, const char* what) {
  if (status == DFLOC_OK) return 0;
  std::fprintf(stderr, "dfloc %s: %s: %s\n", what, dfloc_status_name(status), dfloc_last_error());
  return 1;
}

std::vector<const char*> c_strings(const std::vector<std::string>& v) {
  std::vector<const char*> out;
  out.reserve(v.size());
  for (const auto& s : v) out.push_back(s.c_str());
  return out;
}

const char* or_null(const std::string& s) { return s.empty() ? nullptr : s.c_str(); }

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Device-free multi-person localization from WiFi RSS streams"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(dfloc_version()));

  // simulate
  auto* sim = app.add_subcommand("simulate", "Generate a synthetic testbed, sessions and traces");
  std::string sim_config;
  std::string sim_out;
  unsigned sim_entities = 1;
  std::optional<std::uint64_t> sim_seed;
  bool sim_static = false;
  std::size_t sim_frames = 300;
  std::size_t sim_training = 600;
  sim->add_option("--config", sim_config, "Testbed key=value file (built-in testbed if omitted)")
      ->check(CLI::ExistingFile);
  sim->add_option("--out", sim_out, "Output directory")->required();
  sim->add_option("--entities", sim_entities, "People in the test trace");
  sim->add_option("--seed", sim_seed, "Override the configured seed");
  sim->add_flag("--static", sim_static, "People stand still instead of walking");
  sim->add_option("--frames", sim_frames, "Test trace length in seconds")->check(CLI::PositiveNumber);
  sim->add_option("--training-frames", sim_training, "Prior-training walk length in seconds")
      ->check(CLI::PositiveNumber);

  // calibrate
  auto* cal = app.add_subcommand("calibrate", "Build a fingerprint from calibration sessions");
  std::string cal_sessions;
  std::string cal_out;
  std::vector<std::string> cal_params;
  cal->add_option("--sessions", cal_sessions, "Directory written by simulate")
      ->required()
      ->check(CLI::ExistingDirectory);
  cal->add_option("--out", cal_out, "Fingerprint file")->required();
  cal->add_option("--params", cal_params, "Model parameter overrides, key=value");

  // track
  auto* trk = app.add_subcommand("track", "Estimate people per frame of a trace");
  std::string trk_fp;
  std::string trk_trace;
  std::string trk_out;
  std::string trk_maps;
  std::string trk_graph;
  std::vector<std::string> trk_params;
  trk->add_option("--fp", trk_fp, "Fingerprint file")->required()->check(CLI::ExistingFile);
  trk->add_option("--trace", trk_trace, "RSS trace")->required()->check(CLI::ExistingFile);
  trk->add_option("--out", trk_out, "Estimates file")->required();
  trk->add_option("--maps-out", trk_maps, "Also write the per-frame activation maps");
  trk->add_option("--dump-graph", trk_graph, "Also write every frame's cut graph");
  trk->add_option("--params", trk_params, "Model parameter overrides, key=value");

  // evaluate
  auto* ev = app.add_subcommand("evaluate", "Score estimates against ground truth");
  std::string ev_est;
  std::string ev_truth;
  std::string ev_grid;
  std::string ev_mode = "locations";
  std::string ev_report;
  ev->add_option("--est", ev_est, "Estimates file")->required()->check(CLI::ExistingFile);
  ev->add_option("--truth", ev_truth, "Ground-truth file")->required()->check(CLI::ExistingFile);
  ev->add_option("--grid", ev_grid, "Testbed key=value file")->required()->check(CLI::ExistingFile);
  ev->add_option("--mode", ev_mode, "zones or locations")
      ->check(CLI::IsMember({"zones", "locations"}));
  ev->add_option("--report", ev_report, "JSON report")->required();

  // heatmap
  auto* hm = app.add_subcommand("heatmap", "Export window activation counts as CSV");
  std::string hm_maps;
  std::string hm_grid;
  std::optional<double> hm_at;
  std::size_t hm_w = 13;
  std::string hm_out;
  hm->add_option("--est-window", hm_maps, "Maps file written by track --maps-out")
      ->required()
      ->check(CLI::ExistingFile);
  hm->add_option("--grid", hm_grid, "Testbed key=value file")->required()->check(CLI::ExistingFile);
  hm->add_option("--at", hm_at, "Window ends at this time (default: last frame)");
  hm->add_option("--w", hm_w, "Window length")->check(CLI::PositiveNumber);
  hm->add_option("--out", hm_out, "CSV file")->required();

  // verify
  auto* ver = app.add_subcommand("verify", "Self checks");
  bool ver_oracle = false;
  std::size_t ver_instances = 1000;
  std::uint64_t ver_seed = 1;
  std::size_t ver_max_n = 12;
  ver->add_flag("--oracle", ver_oracle, "Compare min-cut against brute force")->required();
  ver->add_option("--instances", ver_instances, "Random instances");
  ver->add_option("--seed", ver_seed, "Random seed");
  ver->add_option("--max-n", ver_max_n, "Largest instance size")->check(CLI::Range(1, 20));

  CLI11_PARSE(app, argc, argv);

  if (*sim) {
    dfloc_simulate_options opt;
    dfloc_simulate_defaults(&opt);
    opt.entities = sim_entities;
    opt.static_entities = sim_static ? 1 : 0;
    opt.frames = sim_frames;
    opt.training_frames = sim_training;
    if (sim_seed) {
      opt.override_seed = 1;
      opt.seed = *sim_seed;
    }
    return report(dfloc_simulate(or_null(sim_config), sim_out.c_str(), &opt), "simulate");
  }
  if (*cal) {
    const auto overrides = c_strings(cal_params);
    return report(dfloc_calibrate(cal_sessions.c_str(), cal_out.c_str(), overrides.data(),
                                  overrides.size()),
                  "calibrate");
  }
  if (*trk) {
    const auto overrides = c_strings(trk_params);
    return report(dfloc_track_file(trk_fp.c_str(), trk_trace.c_str(), trk_out.c_str(),
                                   or_null(trk_maps), or_null(trk_graph), overrides.data(),
                                   overrides.size()),
                  "track");
  }
  if (*ev) {
    double med = 0.0;
    const int rc = report(dfloc_evaluate(ev_est.c_str(), ev_truth.c_str(), ev_grid.c_str(),
                                         ev_mode.c_str(), ev_report.c_str(), &med),
                          "evaluate");
    if (rc == 0) std::printf("median %s error: %.3f m\n", ev_mode.c_str(), med);
    return rc;
  }
  if (*hm) {
    return report(dfloc_heatmap(hm_maps.c_str(), hm_grid.c_str(), hm_at ? 1 : 0,
                                hm_at.value_or(0.0), hm_w, hm_out.c_str()),
                  "heatmap");
  }
  if (*ver) {
    std::size_t mismatches = 0;
    double max_diff = 0.0;
    double seconds = 0.0;
    const int rc = report(dfloc_verify_oracle(ver_instances, ver_seed, ver_max_n, &mismatches,
                                              &max_diff, &seconds),
                          "verify");
    if (rc != 0) return rc;
    std::printf("%zu instances, %zu mismatches, max |dE| = %.3g, %.2f s\n", ver_instances,
                mismatches, max_diff, seconds);
    return mismatches == 0 ? 0 : 2;
  }
  return 0;
}
