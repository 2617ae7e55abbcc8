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

#include "dfloc/dfloc.h"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <exception>
#include <filesystem>
#include <fstream>
#include <map>
#include <memory>
#include <new>
#include <string>

#include "dfloc/harness.hpp"
#include "dfloc/simulator.hpp"
#include "dfloc/trace_io.hpp"
#include "dfloc/tracker.hpp"

struct dfloc_fingerprint {
  std::shared_ptr<const dfloc::Fingerprint> fp;
};

struct dfloc_tracker {
  std::unique_ptr<dfloc::Tracker> tracker;
};

namespace {

thread_local std::string g_last_error;

dfloc_status to_status(dfloc::ErrorCode code) {
  switch (code) {
    case dfloc::ErrorCode::io: return DFLOC_ERR_IO;
    case dfloc::ErrorCode::format: return DFLOC_ERR_FORMAT;
    case dfloc::ErrorCode::version: return DFLOC_ERR_VERSION;
    case dfloc::ErrorCode::corrupt: return DFLOC_ERR_CORRUPT;
    case dfloc::ErrorCode::invalid_argument: return DFLOC_ERR_INVALID_ARGUMENT;
    case dfloc::ErrorCode::out_of_range: return DFLOC_ERR_OUT_OF_RANGE;
  }
  return DFLOC_ERR_INTERNAL;
}

template <class F>
dfloc_status guarded(F f) {
  g_last_error.clear();
  try {
    f();
    return DFLOC_OK;
  } catch (const dfloc::Error& e) {
    g_last_error = e.what();
    return to_status(e.code());
  } catch (const std::bad_alloc&) {
    g_last_error = "out of memory";
    return DFLOC_ERR_INTERNAL;
  } catch (const std::filesystem::filesystem_error& e) {
    g_last_error = e.what();
    return DFLOC_ERR_IO;
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return DFLOC_ERR_INTERNAL;
  } catch (...) {
    g_last_error = "unknown error";
    return DFLOC_ERR_INTERNAL;
  }
}

void need(const void* p, const char* what) {
  if (p == nullptr) dfloc::throw_error(dfloc::ErrorCode::invalid_argument, std::string(what) + " is null");
}

dfloc::ModelParams with_overrides(dfloc::ModelParams params, const char* const* overrides,
                                  size_t n) {
  if (n > 0) need(overrides, "overrides");
  for (size_t i = 0; i < n; ++i) {
    need(overrides[i], "override");
    dfloc::set_param(params, overrides[i]);
  }
  params.validate();
  return params;
}

std::string session_name(std::size_t index, std::size_t n) {
  std::string digits = std::to_string(index);
  const std::size_t width = std::max<std::size_t>(2, std::to_string(n > 0 ? n - 1 : 0).size());
  if (digits.size() < width) digits.insert(0, width - digits.size(), '0');
  return "session_" + digits + ".trace";
}

// Index of a "session_<digits>.trace" file name.
std::optional<std::size_t> session_index(const std::string& name) {
  constexpr std::string_view prefix = "session_";
  constexpr std::string_view suffix = ".trace";
  if (name.size() <= prefix.size() + suffix.size() || name.rfind(prefix, 0) != 0 ||
      name.compare(name.size() - suffix.size(), suffix.size(), suffix) != 0) {
    return std::nullopt;
  }
  const std::string_view digits(name.data() + prefix.size(),
                                name.size() - prefix.size() - suffix.size());
  std::size_t v = 0;
  auto [ptr, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), v);
  if (ec != std::errc{} || ptr != digits.data() + digits.size()) return std::nullopt;
  return v;
}

}  // namespace

extern "C" {

const char* dfloc_version(void) { return "1.0.0"; }

const char* dfloc_last_error(void) { return g_last_error.c_str(); }

const char* dfloc_status_name(dfloc_status status) {
  switch (status) {
    case DFLOC_OK: return "ok";
    case DFLOC_ERR_IO: return "io error";
    case DFLOC_ERR_FORMAT: return "format error";
    case DFLOC_ERR_VERSION: return "version error";
    case DFLOC_ERR_CORRUPT: return "corrupt data";
    case DFLOC_ERR_INVALID_ARGUMENT: return "invalid argument";
    case DFLOC_ERR_OUT_OF_RANGE: return "out of range";
    case DFLOC_ERR_INTERNAL: return "internal error";
  }
  return "unknown status";
}

void dfloc_simulate_defaults(dfloc_simulate_options* options) {
  if (options == nullptr) return;
  *options = dfloc_simulate_options{};
  options->entities = 1;
  options->static_entities = 0;
  options->frames = 300;
  options->training_frames = 600;
  options->override_seed = 0;
  options->seed = 0;
}

dfloc_status dfloc_simulate(const char* config_path, const char* out_dir,
                            const dfloc_simulate_options* options) {
  return guarded([&] {
    need(out_dir, "out_dir");
    dfloc_simulate_options opt;
    dfloc_simulate_defaults(&opt);
    if (options != nullptr) opt = *options;
    if (opt.frames == 0) opt.frames = 300;
    if (opt.training_frames == 0) opt.training_frames = 600;

    dfloc::TestbedConfig config;
    if (config_path != nullptr) config = dfloc::load_testbed(config_path);
    if (opt.override_seed) config.seed = opt.seed;
    config.validate();

    const std::filesystem::path dir(out_dir);
    std::filesystem::create_directories(dir);
    dfloc::save_testbed(config, dir / "testbed.cfg");

    const auto sessions = dfloc::generate_calibration(config);
    for (const auto& s : sessions) {
      dfloc::save_trace(s.frames, dir / session_name(s.location.index, sessions.size()));
    }

    const auto t_train = static_cast<double>(opt.training_frames - 1);
    auto train_rng = dfloc::make_rng(config.seed, 3);
    std::vector<dfloc::Trajectory> walkers;
    for (int i = 0; i < 2; ++i) {
      walkers.push_back(
          dfloc::random_walk("w" + std::to_string(i), config, train_rng, 0.0, t_train));
    }
    auto training = dfloc::generate_test(config, walkers, opt.training_frames, 3);
    dfloc::save_ground_truth(training.truth, dir / "train_truth.txt");

    const auto t_end = static_cast<double>(opt.frames - 1);
    auto scene_rng = dfloc::make_rng(config.seed, 4);
    std::vector<dfloc::Trajectory> people;
    if (opt.static_entities) {
      const auto spots = dfloc::place_entities(config, opt.entities, 3.0, scene_rng);
      for (std::size_t i = 0; i < spots.size(); ++i) {
        people.push_back(dfloc::static_trajectory("e" + std::to_string(i), spots[i], 0.0,
                                                  std::max(t_end, 1.0)));
      }
    } else {
      for (unsigned i = 0; i < opt.entities; ++i) {
        people.push_back(dfloc::random_walk("e" + std::to_string(i), config, scene_rng, 0.0,
                                            std::max(t_end, 1.0)));
      }
    }
    auto test = dfloc::generate_test(config, people, opt.frames, 2);
    dfloc::save_trace(test.frames, dir / "test.trace");
    dfloc::save_ground_truth(test.truth, dir / "test_truth.txt");
  });
}

dfloc_status dfloc_calibrate(const char* sessions_dir, const char* out_path,
                             const char* const* overrides, size_t n_overrides) {
  return guarded([&] {
    need(sessions_dir, "sessions_dir");
    need(out_path, "out_path");
    const std::filesystem::path dir(sessions_dir);
    const auto params = with_overrides(dfloc::ModelParams{}, overrides, n_overrides);
    const auto config = dfloc::load_testbed(dir / "testbed.cfg");
    const auto grid = config.grid();

    std::map<std::size_t, std::filesystem::path> files;
    for (const auto& entry : std::filesystem::directory_iterator(dir)) {
      if (!entry.is_regular_file()) continue;
      if (auto idx = session_index(entry.path().filename().string())) {
        if (!files.emplace(*idx, entry.path()).second) {
          dfloc::throw_error(dfloc::ErrorCode::invalid_argument,
                             "duplicate session file for location " + std::to_string(*idx));
        }
      }
    }
    std::vector<dfloc::CalibrationSession> sessions;
    for (const auto& [idx, path] : files) {
      if (idx >= grid.size()) {
        dfloc::throw_error(dfloc::ErrorCode::invalid_argument,
                           path.string() + ": no grid location " + std::to_string(idx));
      }
      sessions.push_back({grid[idx], dfloc::load_trace(path)});
    }
    std::vector<dfloc::GroundTruthFrame> training;
    if (std::filesystem::exists(dir / "train_truth.txt")) {
      training = dfloc::load_ground_truth(dir / "train_truth.txt");
    }
    const auto fp = dfloc::calibrate(sessions, grid, params, training);
    dfloc::save_fingerprint(fp, out_path);
  });
}

dfloc_status dfloc_fingerprint_load(const char* path, dfloc_fingerprint** out) {
  return guarded([&] {
    need(path, "path");
    need(out, "out");
    *out = nullptr;
    auto handle = std::make_unique<dfloc_fingerprint>();
    handle->fp = std::make_shared<const dfloc::Fingerprint>(dfloc::load_fingerprint(path));
    *out = handle.release();
  });
}

void dfloc_fingerprint_free(dfloc_fingerprint* fp) { delete fp; }

size_t dfloc_fingerprint_locations(const dfloc_fingerprint* fp) {
  return fp != nullptr ? fp->fp->size() : 0;
}

size_t dfloc_fingerprint_streams(const dfloc_fingerprint* fp) {
  return fp != nullptr ? fp->fp->streams().size() : 0;
}

dfloc_status dfloc_tracker_create(const dfloc_fingerprint* fp, const char* const* overrides,
                                  size_t n_overrides, dfloc_tracker** out) {
  return guarded([&] {
    need(fp, "fingerprint");
    need(out, "out");
    *out = nullptr;
    const auto params = with_overrides(fp->fp->params(), overrides, n_overrides);
    auto handle = std::make_unique<dfloc_tracker>();
    handle->tracker = std::make_unique<dfloc::Tracker>(fp->fp, params);
    *out = handle.release();
  });
}

void dfloc_tracker_free(dfloc_tracker* tracker) { delete tracker; }

dfloc_status dfloc_tracker_push(dfloc_tracker* tracker, double timestamp,
                                const char* const* stream_ids, const double* dbm,
                                size_t readings, size_t* m_hat, dfloc_point* entities,
                                size_t capacity) {
  return guarded([&] {
    need(tracker, "tracker");
    if (readings > 0) {
      need(stream_ids, "stream_ids");
      need(dbm, "dbm");
    }
    if (capacity > 0) need(entities, "entities");
    dfloc::require(std::isfinite(timestamp), "timestamp must be finite");
    dfloc::RssFrame frame(timestamp);
    for (size_t i = 0; i < readings; ++i) {
      need(stream_ids[i], "stream id");
      dfloc::require(dfloc::is_valid_stream_name(stream_ids[i]),
                     std::string("invalid stream id '") + stream_ids[i] + "'");
      dfloc::require(std::isfinite(dbm[i]), "RSS values must be finite");
      frame.set({stream_ids[i]}, dbm[i]);
    }
    const auto est = tracker->tracker->push(frame);
    if (m_hat != nullptr) *m_hat = est.m_hat();
    for (size_t i = 0; i < std::min(capacity, est.entities.size()); ++i) {
      entities[i] = {est.entities[i].x, est.entities[i].y};
    }
  });
}

dfloc_status dfloc_tracker_last_map(const dfloc_tracker* tracker, uint8_t* out, size_t n) {
  return guarded([&] {
    need(tracker, "tracker");
    const auto& map = tracker->tracker->last_map();
    if (n > 0) need(out, "out");
    dfloc::require(n == map.size(), "map buffer needs " + std::to_string(map.size()) + " bytes");
    std::copy(map.active.begin(), map.active.end(), out);
  });
}

dfloc_status dfloc_track_file(const char* fp_path, const char* trace_path,
                              const char* estimates_out, const char* maps_out,
                              const char* graph_dump, const char* const* overrides,
                              size_t n_overrides) {
  return guarded([&] {
    need(fp_path, "fp_path");
    need(trace_path, "trace_path");
    need(estimates_out, "estimates_out");
    auto fp = std::make_shared<const dfloc::Fingerprint>(dfloc::load_fingerprint(fp_path));
    const auto params = with_overrides(fp->params(), overrides, n_overrides);
    const auto frames = dfloc::load_trace(trace_path);

    std::ofstream graphs;
    dfloc::GraphSink sink;
    if (graph_dump != nullptr) {
      graphs = dfloc::text::open_output(graph_dump);
      sink = [&](std::size_t i, const dfloc::CutGraph& g) {
        graphs << "frame " << i << " t=" << dfloc::format_double(frames[i].timestamp()) << '\n';
        dfloc::write_cut_graph(graphs, g);
      };
    }
    const auto result = dfloc::track(fp, frames, params, sink);
    dfloc::save_estimates(result.estimates, estimates_out);
    if (maps_out != nullptr) dfloc::save_maps(result.maps, maps_out);
    if (graph_dump != nullptr) dfloc::text::finish_output(graphs, graph_dump);
  });
}

dfloc_status dfloc_evaluate(const char* estimates_path, const char* truth_path,
                            const char* testbed_path, const char* mode,
                            const char* report_path, double* median_out) {
  return guarded([&] {
    need(estimates_path, "estimates_path");
    need(truth_path, "truth_path");
    need(testbed_path, "testbed_path");
    need(mode, "mode");
    need(report_path, "report_path");
    const auto m = dfloc::parse_error_mode(mode);
    dfloc::require(m.has_value(), std::string("mode must be 'zones' or 'locations', got '") +
                                      mode + "'");
    const auto grid = dfloc::load_testbed(testbed_path).grid();
    const auto estimates = dfloc::load_estimates(estimates_path);
    const auto truth = dfloc::load_ground_truth(truth_path);
    const auto report = dfloc::evaluate(estimates, truth, grid, *m);
    dfloc::save_report(report, report_path);
    if (median_out != nullptr) {
      *median_out = *m == dfloc::ErrorMode::zones ? report.zone_median : report.location_median;
    }
  });
}

dfloc_status dfloc_heatmap(const char* maps_path, const char* testbed_path, int has_at,
                           double at, size_t w, const char* out_csv) {
  return guarded([&] {
    need(maps_path, "maps_path");
    need(testbed_path, "testbed_path");
    need(out_csv, "out_csv");
    dfloc::require(w >= 1, "window must be at least 1");
    const auto grid = dfloc::load_testbed(testbed_path).grid();
    const auto maps = dfloc::load_maps(maps_path);
    std::size_t end = maps.size();
    if (has_at) {
      end = static_cast<std::size_t>(
          std::upper_bound(maps.begin(), maps.end(), at,
                           [](double t, const dfloc::EnvironmentMap& m) { return t < m.timestamp; }) -
          maps.begin());
    }
    const std::size_t begin = end > w ? end - w : 0;
    const std::vector<dfloc::EnvironmentMap> window(maps.begin() + static_cast<std::ptrdiff_t>(begin),
                                                    maps.begin() + static_cast<std::ptrdiff_t>(end));
    dfloc::export_heatmap(window, grid, out_csv);
  });
}

dfloc_status dfloc_verify_oracle(size_t instances, uint64_t seed, size_t max_n,
                                 size_t* mismatches, double* max_abs_diff, double* seconds) {
  return guarded([&] {
    const auto report = dfloc::verify_oracle(instances, seed, max_n);
    if (mismatches != nullptr) *mismatches = report.mismatches;
    if (max_abs_diff != nullptr) *max_abs_diff = report.max_abs_diff;
    if (seconds != nullptr) *seconds = report.seconds;
  });
}

}  // extern "C"
