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

#include "dfloc/harness.hpp"

#include <algorithm>
#include <chrono>
#include <charconv>
#include <cmath>
#include <istream>
#include <limits>
#include <map>
#include <numeric>
#include <ostream>
#include <sstream>
#include <string>

#include <json.hpp>

#include "dfloc/preprocess.hpp"
#include "dfloc/trace_io.hpp"
#include "dfloc/tracker.hpp"

namespace dfloc {

std::optional<ErrorMode> parse_error_mode(std::string_view text) {
  if (text == "zones") return ErrorMode::zones;
  if (text == "locations") return ErrorMode::locations;
  return std::nullopt;
}

std::vector<double> distance_error(const FrameEstimate& estimate, const GroundTruthFrame& truth,
                                   const Grid& grid, ErrorMode mode, Point testbed_center) {
  auto place = [&](Point p) {
    return mode == ErrorMode::zones ? grid[grid.nearest(p)].point() : p;
  };
  std::vector<Point> est;
  for (Point p : estimate.entities) est.push_back(place(p));
  std::vector<Point> gt;
  for (const auto& e : truth.entities) gt.push_back(place(e.point()));
  const Point center = place(testbed_center);

  std::vector<double> out;
  if (gt.empty()) {
    for (Point p : est) out.push_back(distance(p, center));
    return out;
  }

  std::vector<bool> est_used(est.size(), false);
  std::vector<bool> gt_used(gt.size(), false);
  const std::size_t pairs = std::min(est.size(), gt.size());
  for (std::size_t step = 0; step < pairs; ++step) {
    double best = std::numeric_limits<double>::infinity();
    std::size_t bi = 0;
    std::size_t bj = 0;
    for (std::size_t i = 0; i < est.size(); ++i) {
      if (est_used[i]) continue;
      for (std::size_t j = 0; j < gt.size(); ++j) {
        if (gt_used[j]) continue;
        const double d = distance(est[i], gt[j]);
        if (d < best) {
          best = d;
          bi = i;
          bj = j;
        }
      }
    }
    est_used[bi] = true;
    gt_used[bj] = true;
    out.push_back(best);
  }
  for (std::size_t i = 0; i < est.size(); ++i) {
    if (est_used[i]) continue;
    double best = std::numeric_limits<double>::infinity();
    for (Point g : gt) best = std::min(best, distance(est[i], g));
    out.push_back(best);
  }
  for (std::size_t j = 0; j < gt.size(); ++j) {
    if (!gt_used[j]) out.push_back(distance(center, gt[j]));
  }
  return out;
}

std::vector<int> count_error(std::span<const FrameEstimate> estimates,
                             std::span<const GroundTruthFrame> truths) {
  require(estimates.size() == truths.size(),
          "count_error: " + std::to_string(estimates.size()) + " estimates for " +
              std::to_string(truths.size()) + " ground-truth frames");
  std::vector<int> out;
  out.reserve(estimates.size());
  for (std::size_t i = 0; i < estimates.size(); ++i) {
    require(estimates[i].timestamp == truths[i].timestamp,
            "count_error: timestamp mismatch at frame " + std::to_string(i) + " (" +
                format_double(estimates[i].timestamp) + " vs " +
                format_double(truths[i].timestamp) + ")");
    out.push_back(static_cast<int>(estimates[i].m_hat()) -
                  static_cast<int>(truths[i].entities.size()));
  }
  return out;
}

std::vector<CdfPoint> empirical_cdf(std::vector<double> samples) {
  std::sort(samples.begin(), samples.end());
  std::vector<CdfPoint> out;
  const auto n = static_cast<double>(samples.size());
  for (std::size_t i = 0; i < samples.size(); ++i) {
    if (i + 1 < samples.size() && samples[i + 1] == samples[i]) continue;
    out.push_back({samples[i], static_cast<double>(i + 1) / n});
  }
  return out;
}

double median(std::vector<double> samples) {
  if (samples.empty()) return 0.0;
  std::sort(samples.begin(), samples.end());
  const std::size_t m = samples.size() / 2;
  return samples.size() % 2 ? samples[m] : (samples[m - 1] + samples[m]) / 2.0;
}

double mean(std::span<const double> samples) {
  if (samples.empty()) return 0.0;
  return std::accumulate(samples.begin(), samples.end(), 0.0) /
         static_cast<double>(samples.size());
}

bool EvalReport::same_results(const EvalReport& o) const {
  auto cdf_eq = [](const std::vector<CdfPoint>& a, const std::vector<CdfPoint>& b) {
    return std::equal(a.begin(), a.end(), b.begin(), b.end(), [](CdfPoint x, CdfPoint y) {
      return x.value == y.value && x.fraction == y.fraction;
    });
  };
  return mode == o.mode && frames == o.frames && location_errors == o.location_errors &&
         zone_errors == o.zone_errors && count_errors == o.count_errors &&
         location_median == o.location_median && location_mean == o.location_mean &&
         zone_median == o.zone_median && zone_mean == o.zone_mean &&
         count_within_one == o.count_within_one && count_exact == o.count_exact &&
         cdf_eq(cdf, o.cdf);
}

EvalReport evaluate(std::span<const FrameEstimate> estimates,
                    std::span<const GroundTruthFrame> truths, const Grid& grid, ErrorMode mode,
                    std::span<const double> runtime_ms) {
  EvalReport r;
  r.mode = mode;
  r.count_errors = count_error(estimates, truths);
  r.frames = estimates.size();
  for (std::size_t i = 0; i < estimates.size(); ++i) {
    for (double d : distance_error(estimates[i], truths[i], grid, ErrorMode::locations, grid.center())) {
      r.location_errors.push_back(d);
    }
    for (double d : distance_error(estimates[i], truths[i], grid, ErrorMode::zones, grid.center())) {
      r.zone_errors.push_back(d);
    }
  }
  r.location_median = median(r.location_errors);
  r.location_mean = mean(r.location_errors);
  r.zone_median = median(r.zone_errors);
  r.zone_mean = mean(r.zone_errors);
  if (!r.count_errors.empty()) {
    const auto n = static_cast<double>(r.count_errors.size());
    r.count_within_one =
        static_cast<double>(std::count_if(r.count_errors.begin(), r.count_errors.end(),
                                          [](int e) { return std::abs(e) <= 1; })) / n;
    r.count_exact =
        static_cast<double>(std::count(r.count_errors.begin(), r.count_errors.end(), 0)) / n;
  }
  r.cdf = empirical_cdf(mode == ErrorMode::zones ? r.zone_errors : r.location_errors);
  r.runtime_ms.assign(runtime_ms.begin(), runtime_ms.end());
  r.runtime_median_ms = median(r.runtime_ms);
  return r;
}

void write_report(std::ostream& out, const EvalReport& r) {
  nlohmann::ordered_json j;
  j["mode"] = r.mode == ErrorMode::zones ? "zones" : "locations";
  j["frames"] = r.frames;
  const bool zones = r.mode == ErrorMode::zones;
  j["median_error_m"] = zones ? r.zone_median : r.location_median;
  j["mean_error_m"] = zones ? r.zone_mean : r.location_mean;
  j["locations"] = {{"median_m", r.location_median},
                    {"mean_m", r.location_mean},
                    {"errors_m", r.location_errors}};
  j["zones"] = {{"median_m", r.zone_median}, {"mean_m", r.zone_mean}, {"errors_m", r.zone_errors}};
  j["count"] = {{"within_one", r.count_within_one},
                {"exact", r.count_exact},
                {"errors", r.count_errors}};
  auto cdf = nlohmann::ordered_json::array();
  for (const auto& p : r.cdf) cdf.push_back({p.value, p.fraction});
  j["cdf"] = std::move(cdf);
  j["runtime"] = {{"median_ms", r.runtime_median_ms}, {"per_frame_ms", r.runtime_ms}};
  out << j.dump(2) << '\n';
}

void save_report(const EvalReport& report, const std::filesystem::path& path) {
  auto out = text::open_output(path);
  write_report(out, report);
  text::finish_output(out, path);
}

namespace {

// "(x,y)"
Point parse_point(std::string_view token, std::size_t line_no) {
  if (token.size() < 5 || token.front() != '(' || token.back() != ')') {
    text::format_error(line_no, "expected '(x,y)', got '" + std::string(token) + "'");
  }
  const auto inner = token.substr(1, token.size() - 2);
  const auto comma = inner.find(',');
  if (comma == std::string_view::npos) text::format_error(line_no, "expected '(x,y)'");
  auto x = parse_double(inner.substr(0, comma));
  auto y = parse_double(inner.substr(comma + 1));
  if (!x || !y || !std::isfinite(*x) || !std::isfinite(*y)) {
    text::format_error(line_no, "bad coordinates '" + std::string(token) + "'");
  }
  return {*x, *y};
}

template <class T, class Parse>
std::vector<T> read_records(std::istream& in, Parse parse) {
  std::vector<T> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (text::skippable(line)) continue;
    out.push_back(parse(text::split_tokens(line), line_no));
  }
  if (in.bad()) throw_error(ErrorCode::io, "read error");
  return out;
}

template <class Read>
auto load_with_path(const std::filesystem::path& path, Read read) {
  auto in = text::open_input(path);
  try {
    return read(in);
  } catch (const Error& e) {
    throw_error(e.code(), path.string() + ": " + e.what());
  }
}

}  // namespace

void write_estimates(std::ostream& out, std::span<const FrameEstimate> estimates) {
  for (const auto& e : estimates) {
    out << "t=" << format_double(e.timestamp) << " m=" << e.m_hat();
    for (Point p : e.entities) out << " (" << format_double(p.x) << ',' << format_double(p.y) << ')';
    out << '\n';
  }
}

std::vector<FrameEstimate> read_estimates(std::istream& in) {
  return read_records<FrameEstimate>(in, [](const std::vector<std::string_view>& tok,
                                            std::size_t line_no) {
    if (tok.size() < 2) text::format_error(line_no, "expected 't=<seconds> m=<count>'");
    FrameEstimate e;
    e.timestamp = text::parse_timestamp(tok[0], line_no);
    if (tok[1].substr(0, 2) != "m=") text::format_error(line_no, "expected 'm=<count>'");
    std::size_t m = 0;
    const auto digits = tok[1].substr(2);
    auto [ptr, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), m);
    if (ec != std::errc{} || ptr != digits.data() + digits.size()) {
      text::format_error(line_no, "bad count '" + std::string(tok[1]) + "'");
    }
    if (tok.size() - 2 != m) {
      text::format_error(line_no, "m=" + std::to_string(m) + " but " +
                                      std::to_string(tok.size() - 2) + " positions given");
    }
    for (std::size_t i = 2; i < tok.size(); ++i) e.entities.push_back(parse_point(tok[i], line_no));
    return e;
  });
}

void save_estimates(std::span<const FrameEstimate> estimates, const std::filesystem::path& path) {
  auto out = text::open_output(path);
  write_estimates(out, estimates);
  text::finish_output(out, path);
}

std::vector<FrameEstimate> load_estimates(const std::filesystem::path& path) {
  return load_with_path(path, [](std::istream& in) { return read_estimates(in); });
}

void write_maps(std::ostream& out, std::span<const EnvironmentMap> maps) {
  for (const auto& m : maps) {
    out << "t=" << format_double(m.timestamp) << ' ';
    for (auto a : m.active) out << (a ? '1' : '0');
    out << '\n';
  }
}

std::vector<EnvironmentMap> read_maps(std::istream& in) {
  return read_records<EnvironmentMap>(in, [](const std::vector<std::string_view>& tok,
                                             std::size_t line_no) {
    if (tok.size() != 2) text::format_error(line_no, "expected 't=<seconds> <bits>'");
    EnvironmentMap m(text::parse_timestamp(tok[0], line_no), 0);
    for (char c : tok[1]) {
      if (c != '0' && c != '1') text::format_error(line_no, "map bits must be 0 or 1");
      m.active.push_back(c == '1' ? 1 : 0);
    }
    return m;
  });
}

void save_maps(std::span<const EnvironmentMap> maps, const std::filesystem::path& path) {
  auto out = text::open_output(path);
  write_maps(out, maps);
  text::finish_output(out, path);
}

std::vector<EnvironmentMap> load_maps(const std::filesystem::path& path) {
  return load_with_path(path, [](std::istream& in) { return read_maps(in); });
}

std::vector<std::vector<std::size_t>> heatmap(std::span<const EnvironmentMap> window,
                                              const Grid& grid) {
  const auto candidates = merge_window(window, grid);
  std::vector<std::size_t> counts(grid.size(), 0);
  for (const auto& c : candidates) counts[c.location] = static_cast<std::size_t>(c.weight);

  std::vector<std::size_t> order(grid.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (grid[a].y != grid[b].y) return grid[a].y < grid[b].y;
    return grid[a].x < grid[b].x;
  });
  std::vector<std::vector<std::size_t>> rows;
  for (std::size_t k = 0; k < order.size(); ++k) {
    if (k == 0 || grid[order[k]].y != grid[order[k - 1]].y) rows.emplace_back();
    rows.back().push_back(counts[order[k]]);
  }
  return rows;
}

void export_heatmap(std::span<const EnvironmentMap> window, const Grid& grid,
                    const std::filesystem::path& path) {
  auto out = text::open_output(path);
  for (const auto& row : heatmap(window, grid)) {
    for (std::size_t i = 0; i < row.size(); ++i) out << (i ? "," : "") << row[i];
    out << '\n';
  }
  text::finish_output(out, path);
}

std::vector<std::vector<std::size_t>> read_heatmap(std::istream& in) {
  std::vector<std::vector<std::size_t>> rows;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<std::size_t> row;
    std::string_view rest(line);
    for (;;) {
      const auto comma = rest.find(',');
      const auto cell = rest.substr(0, comma);
      std::size_t v = 0;
      auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), v);
      if (ec != std::errc{} || ptr != cell.data() + cell.size()) {
        text::format_error(line_no, "bad heatmap cell '" + std::string(cell) + "'");
      }
      row.push_back(v);
      if (comma == std::string_view::npos) break;
      rest.remove_prefix(comma + 1);
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

Fingerprint calibrate(std::span<const CalibrationSession> raw_sessions, const Grid& grid,
                      const ModelParams& params, std::span<const GroundTruthFrame> training_truth) {
  params.validate();
  std::vector<CalibrationSession> smoothed;
  smoothed.reserve(raw_sessions.size());
  for (const auto& s : raw_sessions) {
    smoothed.push_back({s.location, preprocess::smooth_frames(s.frames, params.q, params.alpha_trim)});
  }
  TemporalPrior prior;
  if (!training_truth.empty()) {
    const std::vector<std::vector<EnvironmentMap>> seqs{maps_from_ground_truth(training_truth, grid)};
    prior = learn_temporal_priors(seqs);
  }
  return build_fingerprint(smoothed, grid, params, prior);
}

TrackResult track(std::shared_ptr<const Fingerprint> fp, std::span<const RssFrame> frames,
                  const ModelParams& params, const GraphSink& graphs) {
  Tracker tracker(std::move(fp), params);
  tracker.keep_graphs(static_cast<bool>(graphs));
  TrackResult out;
  out.estimates.reserve(frames.size());
  out.maps.reserve(frames.size());
  out.runtime_ms.reserve(frames.size());
  for (std::size_t i = 0; i < frames.size(); ++i) {
    const auto t0 = std::chrono::steady_clock::now();
    FrameEstimate e = tracker.push(frames[i]);
    const auto t1 = std::chrono::steady_clock::now();
    out.runtime_ms.push_back(std::chrono::duration<double, std::milli>(t1 - t0).count());
    out.estimates.push_back(std::move(e));
    out.maps.push_back(tracker.last_map());
    if (graphs) graphs(i, *tracker.last_graph());
  }
  return out;
}

namespace {

template <class F>
auto stage(const char* name, F f) {
  try {
    return f();
  } catch (const Error& e) {
    throw_error(e.code(), std::string(name) + ": " + e.what());
  }
}

}  // namespace

PipelineResult run_pipeline(std::span<const CalibrationSession> raw_sessions,
                            std::span<const GroundTruthFrame> training_truth,
                            std::span<const RssFrame> test_frames,
                            std::span<const GroundTruthFrame> test_truth, const Grid& grid,
                            const ModelParams& params, ErrorMode mode) {
  PipelineResult r;
  r.fingerprint = stage("calibrate", [&] {
    return calibrate(raw_sessions, grid, params, training_truth);
  });
  auto shared = std::make_shared<const Fingerprint>(r.fingerprint);
  r.tracked = stage("track", [&] { return track(shared, test_frames, params); });
  r.report = stage("evaluate", [&] {
    return evaluate(r.tracked.estimates, test_truth, grid, mode, r.tracked.runtime_ms);
  });
  return r;
}

ModelParams fit_params(const Fingerprint& fp, std::span<const LabeledSequence> held_out,
                       const SearchGrid& grid) {
  require(!grid.betas.empty() && !grid.gammas.empty() && !grid.deltas.empty(),
          "fit_params: empty search grid");
  require(!held_out.empty(), "fit_params: no held-out sequences");
  auto shared = std::make_shared<const Fingerprint>(fp);

  auto sorted = [](std::vector<double> v) {
    std::sort(v.begin(), v.end());
    v.erase(std::unique(v.begin(), v.end()), v.end());
    return v;
  };
  ModelParams best = fp.params();
  double best_error = std::numeric_limits<double>::infinity();
  for (double beta : sorted(grid.betas)) {
    for (double gamma : sorted(grid.gammas)) {
      for (double delta : sorted(grid.deltas)) {
        ModelParams p = fp.params();
        p.beta = beta;
        p.gamma = gamma;
        p.delta = delta;
        p.validate();
        std::vector<double> errors;
        for (const auto& seq : held_out) {
          const auto tracked = track(shared, seq.frames, p);
          const auto report = evaluate(tracked.estimates, seq.truth, fp.grid(), ErrorMode::locations);
          errors.insert(errors.end(), report.location_errors.begin(), report.location_errors.end());
        }
        const double err = mean(errors);
        if (err < best_error) {
          best_error = err;
          best = p;
        }
      }
    }
  }
  return best;
}

OracleInstance random_instance(std::mt19937_64& rng, std::size_t max_n) {
  require(max_n >= 1 && max_n <= kBruteForceLimit, "random_instance: max_n out of range");
  std::uniform_int_distribution<std::size_t> side(1, max_n);
  std::size_t nx = 0;
  std::size_t ny = 0;
  do {
    nx = side(rng);
    ny = side(rng);
  } while (nx * ny > max_n);
  const Grid grid = Grid::regular(nx, ny, 2.0 * static_cast<double>(nx), 2.0 * static_cast<double>(ny));
  const std::size_t n = grid.size();

  std::uniform_int_distribution<std::size_t> stream_count(1, 3);
  std::uniform_real_distribution<double> level(-80.0, -40.0);
  std::uniform_real_distribution<double> shift(-10.0, 2.0);
  std::normal_distribution<double> noise(0.0, 2.0);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const std::size_t k = stream_count(rng);

  std::vector<double> base(k);
  for (auto& b : base) b = level(rng);
  std::vector<std::vector<double>> offset(n, std::vector<double>(k));
  for (auto& row : offset) {
    for (auto& o : row) o = shift(rng);
  }
  std::vector<CalibrationSession> sessions;
  for (std::size_t loc = 0; loc < n; ++loc) {
    CalibrationSession s{grid[loc], {}};
    for (int f = 0; f < 8; ++f) {
      RssFrame frame(f);
      for (std::size_t j = 0; j < k; ++j) {
        frame.set({"s" + std::to_string(j)}, base[j] + offset[loc][j] + noise(rng));
      }
      s.frames.push_back(std::move(frame));
    }
    sessions.push_back(std::move(s));
  }

  ModelParams params;
  params.beta = 0.05 + 0.95 * unit(rng);
  params.delta = 0.05 + 0.95 * unit(rng);
  params.gamma = 0.1 + 4.9 * unit(rng);
  params.hmm_order = unit(rng) < 0.5 ? 1 : 2;
  params.contrast = unit(rng) < 0.5 ? ContrastMode::normalized : ContrastMode::literal;

  TemporalPrior prior;
  std::uniform_int_distribution<std::uint64_t> total(0, 50);
  for (std::size_t h = 0; h < 4; ++h) {
    prior.totals[h] = total(rng);
    std::uniform_int_distribution<std::uint64_t> ones(0, prior.totals[h]);
    prior.ones[h] = ones(rng);
  }

  OracleInstance inst;
  inst.fp = std::make_shared<Fingerprint>(build_fingerprint(sessions, grid, params, prior));
  inst.params = params;

  RssFrame frame(0.0);
  std::uniform_int_distribution<std::size_t> pick(0, n - 1);
  const std::size_t where = pick(rng);
  for (std::size_t j = 0; j < k; ++j) {
    const double v = unit(rng) < 0.5 ? base[j] + offset[where][j] + noise(rng) : level(rng);
    frame.set({"s" + std::to_string(j)}, v);
  }
  inst.evidence = evaluate_frame(*inst.fp, frame, inst.fp->all_streams(), params.contrast);
  inst.prev = EnvironmentMap(0.0, n);
  inst.prev_prev = EnvironmentMap(0.0, n);
  for (std::size_t i = 0; i < n; ++i) {
    inst.prev.active[i] = unit(rng) < 0.3 ? 1 : 0;
    inst.prev_prev.active[i] = unit(rng) < 0.3 ? 1 : 0;
  }
  return inst;
}

OracleReport verify_oracle(std::size_t instances, std::uint64_t seed, std::size_t max_n,
                           double tolerance) {
  auto rng = std::mt19937_64(seed);
  OracleReport report;
  const auto t0 = std::chrono::steady_clock::now();
  for (std::size_t i = 0; i < instances; ++i) {
    const auto inst = random_instance(rng, max_n);
    const auto g = build_cut_graph(inst.evidence, inst.prev, inst.prev_prev, *inst.fp, inst.params);
    const auto cut = min_cut(g);
    const auto brute = brute_force_map(inst.evidence, inst.prev, inst.prev_prev, *inst.fp, inst.params);
    const double e_cut = total_energy(cut, inst.evidence, inst.prev, inst.prev_prev, *inst.fp, inst.params);
    const double e_brute =
        total_energy(brute, inst.evidence, inst.prev, inst.prev_prev, *inst.fp, inst.params);
    const double diff = std::abs(e_cut - e_brute);
    report.max_abs_diff = std::max(report.max_abs_diff, diff);
    if (diff > tolerance) ++report.mismatches;
    ++report.instances;
  }
  report.seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return report;
}

}  // namespace dfloc
