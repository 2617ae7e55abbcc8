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

// Acceptance gate: one PASS/FAIL line per criterion. Exit status is the
// number of failed criteria.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <memory>
#include <numeric>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "dfloc/clustering.hpp"
#include "dfloc/energy.hpp"
#include "dfloc/harness.hpp"
#include "dfloc/preprocess.hpp"
#include "dfloc/simulator.hpp"
#include "dfloc/trace_io.hpp"
#include "dfloc/tracker.hpp"

using namespace dfloc;
using Clock = std::chrono::steady_clock;

namespace {

// Pinned tolerances.
constexpr std::size_t kOracleInstances = 1000;
constexpr std::size_t kOracleMaxN = 12;
constexpr double kEnergyTolerance = 1e-9;
constexpr double kOracleSeconds = 30.0;
constexpr std::size_t kRegularityInstances = 10000;
constexpr std::size_t kAnovaTrials = 10000;
constexpr std::size_t kAnovaGroup = 60;
constexpr double kAnovaAlpha = 0.05;
constexpr double kAnovaRateTolerance = 0.02;
constexpr double kShiftRejectRate = 0.99;
constexpr double kClusterSpread = 0.3;
constexpr double kClusterSeparation = 5.0;
constexpr double kCentroidTolerance = 0.2;
constexpr double kCountWithinOneRate = 0.95;
constexpr double kEmptyRate = 0.95;
constexpr double kEndToEndSeconds = 120.0;
constexpr double kScalingBound = 3.0 * 400.0 / 25.0;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

int g_failed = 0;

void report(int id, bool pass, const std::string& detail) {
  std::printf("criterion %d %s: %s\n", id, pass ? "PASS" : "FAIL", detail.c_str());
  std::fflush(stdout);
  if (!pass) ++g_failed;
}

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof(buf), f, args...);
  return buf;
}

void criterion_1() {
  const auto r = verify_oracle(kOracleInstances, 1, kOracleMaxN, kEnergyTolerance);
  const bool pass = r.mismatches == 0 && r.max_abs_diff <= kEnergyTolerance && r.seconds < kOracleSeconds;
  report(1, pass, fmt("%zu instances n<=%zu, %zu mismatches, max |dE| %.3g, %.2f s", r.instances,
                      kOracleMaxN, r.mismatches, r.max_abs_diff, r.seconds));
}

void criterion_2() {
  std::mt19937_64 rng(2);
  std::size_t regular = 0;
  for (std::size_t i = 0; i < kRegularityInstances; ++i) {
    const auto inst = random_instance(rng, kOracleMaxN);
    regular += check_regular(*inst.fp, inst.evidence, inst.params) ? 1 : 0;
  }
  const bool violating_rejected = !is_regular({1.0, 0.5, 0.4, 1.0});
  report(2, regular == kRegularityInstances && violating_rejected,
         fmt("%zu/%zu generated energies regular, violating table rejected: %s", regular,
             kRegularityInstances, violating_rejected ? "yes" : "no"));
}

void criterion_3() {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> dbm(-95.0, -25.0);
  std::uniform_int_distribution<int> len(1, 21);
  std::uniform_real_distribution<double> alpha_dist(0.0, 0.45);
  std::size_t bad = 0;
  std::size_t checked = 0;
  for (int trial = 0; trial < 5000; ++trial) {
    std::vector<double> w(static_cast<std::size_t>(len(rng)));
    for (auto& x : w) x = dbm(rng);
    const double alpha = alpha_dist(rng);
    const auto trim = static_cast<std::size_t>(std::ceil(alpha * static_cast<double>(w.size())));
    if (2 * trim >= w.size()) continue;
    ++checked;
    auto sorted = w;
    std::sort(sorted.begin(), sorted.end());
    const double v = preprocess::alpha_trimmed_mean(w, alpha);
    if (v < sorted[trim] || v > sorted[sorted.size() - 1 - trim]) ++bad;
    auto perm = w;
    std::shuffle(perm.begin(), perm.end(), rng);
    if (std::abs(preprocess::alpha_trimmed_mean(perm, alpha) - v) > 1e-12 * std::abs(v)) ++bad;
    const double mean = std::accumulate(w.begin(), w.end(), 0.0) / static_cast<double>(w.size());
    if (std::abs(preprocess::alpha_trimmed_mean(w, 0.0) - mean) > 1e-12 * std::abs(mean)) ++bad;
  }
  const std::vector<double> example{-60.0, -52.0, -50.0, -48.0, -40.0};
  const double ex = preprocess::alpha_trimmed_mean(example, 0.2);
  report(3, bad == 0 && ex == -50.0,
         fmt("%zu property violations over %zu windows, worked example %s", bad, checked,
             format_double(ex).c_str()));
}

void criterion_4() {
  std::mt19937_64 rng(4);
  std::normal_distribution<double> noise(0.0, 2.0);
  std::vector<double> a(kAnovaGroup), b(kAnovaGroup);
  std::size_t false_reject = 0;
  std::size_t shift_reject = 0;
  for (std::size_t t = 0; t < kAnovaTrials; ++t) {
    for (auto& x : a) x = -50.0 + noise(rng);
    for (auto& x : b) x = -50.0 + noise(rng);
    false_reject += preprocess::anova_stream_test(a, b, kAnovaAlpha).kept ? 0 : 1;
    for (auto& x : b) x += 20.0;
    shift_reject += preprocess::anova_stream_test(a, b, kAnovaAlpha).kept ? 0 : 1;
  }
  const double rate = static_cast<double>(false_reject) / kAnovaTrials;
  const double power = static_cast<double>(shift_reject) / kAnovaTrials;
  const bool pass = std::abs(rate - kAnovaAlpha) <= kAnovaRateTolerance && power >= kShiftRejectRate;
  report(4, pass, fmt("null rejection rate %.4f (target 0.05 +- 0.02), +20 dBm shift rejected %.4f",
                      rate, power));
}

void criterion_5() {
  const TestbedConfig cfg;
  const Grid grid = cfg.grid();
  const ModelParams params;
  const auto raw = generate_calibration(cfg);
  std::vector<CalibrationSession> sessions;
  for (const auto& s : raw) {
    sessions.push_back({s.location, preprocess::smooth_frames(s.frames, params.q, params.alpha_trim)});
  }
  const auto fp = build_fingerprint(sessions, grid, params);
  bool ok = fp.size() == grid.size();
  std::size_t histograms = 0;
  for (std::size_t loc = 0; loc < fp.size(); ++loc) {
    const auto& l = fp.location(loc);
    ok = ok && l.active.size() == fp.streams().size() && l.inactive.size() == fp.streams().size();
    histograms += l.active.size() + l.inactive.size();
    for (std::size_t s = 0; s < fp.streams().size(); ++s) {
      std::uint64_t own = 0, others = 0;
      for (const auto& sess : sessions) {
        for (const auto& f : sess.frames) {
          if (!f.reading(fp.streams()[s])) continue;
          (sess.location.index == loc ? own : others) += 1;
        }
      }
      ok = ok && fp.histogram(loc, s, true).samples() == own &&
           fp.histogram(loc, s, false).samples() == others &&
           fp.offline_stats(loc, s).count == own;
    }
  }
  bool rejects_wrong_count = false;
  try {
    build_fingerprint(std::span(sessions).first(sessions.size() - 1), grid, params);
  } catch (const Error&) {
    rejects_wrong_count = true;
  }
  ok = ok && rejects_wrong_count && histograms == 2 * grid.size() * fp.streams().size();
  report(5, ok, fmt("%zu sessions -> %zu histograms for %zu locations x %zu streams, counts %s",
                    sessions.size(), histograms, fp.size(), fp.streams().size(),
                    ok ? "exact" : "wrong"));
}

void criterion_6() {
  std::mt19937_64 rng(6);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::uniform_real_distribution<double> pos(1.0, 19.0);
  const ModelParams params;
  std::size_t recovered = 0, monotone = 0;
  const std::size_t trials = 200;
  for (std::size_t t = 0; t < trials; ++t) {
    std::vector<Point> centers;
    while (centers.size() < 3) {
      const Point c{pos(rng), pos(rng)};
      bool far = true;
      for (Point o : centers) far = far && distance(c, o) >= kClusterSeparation;
      if (far) centers.push_back(c);
    }
    CandidateSet cands;
    for (Point c : centers) {
      for (int i = 0; i < 8; ++i) {
        const double r = kClusterSpread * std::sqrt(unit(rng));
        const double a = 2.0 * M_PI * unit(rng);
        cands.push_back({c.x + r * std::cos(a), c.y + r * std::sin(a), 1.0 + (i % 3), 0});
      }
    }
    const auto clusters = hierarchical_cluster(cands, params.r, params.cluster_scale);
    bool ok = clusters.size() == 3;
    if (ok) {
      for (Point c : centers) {
        double best = 1e9;
        for (const auto& k : clusters) best = std::min(best, distance(k.centroid, c));
        ok = ok && best <= kCentroidTolerance;
      }
    }
    recovered += ok;
    std::size_t last = cands.size() + 1;
    bool mono = true;
    for (double r = 0.01; r <= 5.0; r *= 1.15) {
      const auto k = hierarchical_cluster(cands, r, params.cluster_scale).size();
      mono = mono && k <= last;
      last = k;
    }
    monotone += mono;
  }
  report(6, recovered == trials && monotone == trials,
         fmt("planted clusters recovered in %zu/%zu trials, count monotone in r in %zu/%zu",
             recovered, trials, monotone, trials));
}

struct Scenario {
  std::size_t frames;
  std::size_t entities;
};

void criterion_7() {
  const auto t0 = Clock::now();
  const ModelParams params;
  const std::size_t warmup = params.w;
  const std::vector<std::uint64_t> seeds{1, 2, 3, 4, 5};
  double worst_median = 0.0;
  double spacing = 0.0;
  std::size_t within[4] = {0, 0, 0, 0}, counted[4] = {0, 0, 0, 0};
  double worst_empty = 1.0;
  std::size_t detected = 0, single_frames = 0;
  for (auto seed : seeds) {
    TestbedConfig cfg;
    cfg.seed = seed;
    const Grid grid = cfg.grid();
    spacing = grid.spacing();
    auto walk_rng = make_rng(seed, 3);
    std::vector<Trajectory> walkers{random_walk("w0", cfg, walk_rng, 0, 599),
                                    random_walk("w1", cfg, walk_rng, 0, 599)};
    const auto train = generate_test(cfg, walkers, 600, 3);
    auto fp = std::make_shared<const Fingerprint>(
        calibrate(generate_calibration(cfg), grid, params, train.truth));

    for (std::size_t m = 0; m <= 3; ++m) {
      const std::size_t frames = m == 0 ? 500 : 300;
      auto scene = make_rng(seed, 4 + m);
      std::vector<Trajectory> people;
      const auto spots = place_entities(cfg, m, 3.0, scene);
      for (std::size_t i = 0; i < spots.size(); ++i) {
        people.push_back(static_trajectory("e" + std::to_string(i), spots[i], 0,
                                           static_cast<double>(frames - 1)));
      }
      const auto run = generate_test(cfg, people, frames, 2 + 10 * m);
      const auto tracked = track(fp, run.frames, params);
      if (m == 0) {
        std::size_t zero = 0;
        for (const auto& e : tracked.estimates) zero += e.m_hat() == 0;
        worst_empty = std::min(worst_empty, static_cast<double>(zero) / frames);
        continue;
      }
      if (m == 1) {
        const auto rep = evaluate(tracked.estimates, run.truth, grid, ErrorMode::locations);
        worst_median = std::max(worst_median, rep.location_median);
        for (std::size_t i = warmup; i < frames; ++i) detected += tracked.estimates[i].m_hat() > 0;
        single_frames += frames - warmup;
      }
      for (std::size_t i = warmup; i < frames; ++i) {
        const auto d = static_cast<long>(tracked.estimates[i].m_hat()) - static_cast<long>(m);
        within[m] += std::abs(d) <= 1;
        ++counted[m];
      }
    }
  }
  const double secs = seconds_since(t0);
  double rate[4] = {0, 0, 0, 0};
  bool b = true;
  for (std::size_t m = 1; m <= 3; ++m) {
    rate[m] = static_cast<double>(within[m]) / static_cast<double>(counted[m]);
    b = b && rate[m] >= kCountWithinOneRate;
  }
  const bool a = worst_median <= spacing;
  const bool c = worst_empty >= kEmptyRate;
  const bool fast = secs < kEndToEndSeconds;
  report(7, a && b && c && fast,
         fmt("(a) worst single-entity median %.2f m vs spacing %.2f m %s, detected in %.3f "
             "of frames; (b) count within +-1 "
             "m=1 %.3f m=2 %.3f m=3 %.3f %s; (c) worst empty-room m_hat=0 rate %.3f %s; "
             "%zu seeds, %.1f s",
             worst_median, spacing, a ? "ok" : "MISS",
             static_cast<double>(detected) / static_cast<double>(single_frames), rate[1], rate[2], rate[3],
             b ? "ok" : "MISS", worst_empty, c ? "ok" : "MISS", seeds.size(), secs));
}

double median_cut_ms(std::size_t side) {
  TestbedConfig cfg;
  cfg.grid_nx = cfg.grid_ny = side;
  cfg.width = cfg.height = 2.0 * static_cast<double>(side);
  cfg.ap_positions = {{cfg.width, 0.98 * cfg.height}, {0.18 * cfg.width, cfg.height}};
  cfg.mp_positions = {{0.0, 0.5 * cfg.height}, {0.86 * cfg.width, 0.0}, {0.28 * cfg.width, 0.0}};
  cfg.calibration_frames = 20;
  cfg.attenuation_radius = 1.5;
  const ModelParams params;
  const Grid grid = cfg.grid();
  const Fingerprint fp = calibrate(generate_calibration(cfg), grid, params);
  auto rng = make_rng(cfg.seed, 4);
  std::vector<Trajectory> walkers{random_walk("a", cfg, rng, 0, 59), random_walk("b", cfg, rng, 0, 59)};
  const auto run = generate_test(cfg, walkers, 60, 2);
  TrackerState state(grid.size(), params.w);
  const auto smoothed = preprocess::smooth_frames(run.frames, params.q, params.alpha_trim);
  std::vector<double> ms;
  for (const auto& f : smoothed) {
    const auto ev = evaluate_frame(fp, f, fp.all_streams(), params.contrast);
    const auto g = build_cut_graph(ev, state.prev(), state.prev_prev(), fp, params);
    const int reps = static_cast<int>(std::max<std::size_t>(1, 4000 / grid.size()));
    EnvironmentMap map;
    const auto t0 = Clock::now();
    for (int r = 0; r < reps; ++r) map = min_cut(g, f.timestamp());
    ms.push_back(seconds_since(t0) * 1e3 / reps);
    state.push(map);
  }
  return median(ms);
}

void criterion_8() {
  const double t25 = median_cut_ms(5);
  const double t100 = median_cut_ms(10);
  const double t400 = median_cut_ms(20);
  const double ratio = t400 / t25;
  report(8, ratio <= kScalingBound,
         fmt("median min-cut ms n=25 %.4f n=100 %.4f n=400 %.4f, ratio %.1f (bound %.0f)", t25,
             t100, t400, ratio, kScalingBound));
}

std::string pipeline_bytes(const std::filesystem::path& dir) {
  TestbedConfig cfg;
  cfg.seed = 9;
  const ModelParams params;
  auto walk = make_rng(cfg.seed, 3);
  std::vector<Trajectory> walkers{random_walk("w0", cfg, walk, 0, 299), random_walk("w1", cfg, walk, 0, 299)};
  const auto train = generate_test(cfg, walkers, 300, 3);
  auto scene = make_rng(cfg.seed, 4);
  std::vector<Trajectory> people{random_walk("e0", cfg, scene, 0, 199), random_walk("e1", cfg, scene, 0, 199)};
  const auto run = generate_test(cfg, people, 200, 2);
  save_trace(run.frames, dir / "test.trace");
  const auto fp = calibrate(generate_calibration(cfg), cfg.grid(), params, train.truth);
  save_fingerprint(fp, dir / "fp.spotfp");
  auto loaded = std::make_shared<const Fingerprint>(load_fingerprint(dir / "fp.spotfp"));
  const auto tracked = track(loaded, load_trace(dir / "test.trace"), params);
  save_estimates(tracked.estimates, dir / "est.txt");
  std::ifstream in(dir / "est.txt", std::ios::binary);
  std::ostringstream bytes;
  bytes << in.rdbuf();
  return bytes.str();
}

void criterion_9() {
  const auto base = std::filesystem::temp_directory_path() / "dfloc_acceptance";
  std::filesystem::remove_all(base);
  std::filesystem::create_directories(base / "a");
  std::filesystem::create_directories(base / "b");
  const auto a = pipeline_bytes(base / "a");
  const auto b = pipeline_bytes(base / "b");
  report(9, !a.empty() && a == b,
         fmt("two full pipeline runs: %zu and %zu bytes, %s", a.size(), b.size(),
             a == b ? "identical" : "DIFFERENT"));
  std::filesystem::remove_all(base);
}

}  // namespace

int main() {
  const auto t0 = Clock::now();
  using Fn = void (*)();
  const Fn criteria[] = {criterion_1, criterion_2, criterion_3, criterion_4, criterion_5,
                         criterion_6, criterion_7, criterion_8, criterion_9};
  for (std::size_t i = 0; i < std::size(criteria); ++i) {
    try {
      criteria[i]();
    } catch (const std::exception& e) {
      report(static_cast<int>(i + 1), false, std::string("exception: ") + e.what());
    }
  }
  std::printf("%d of 9 criteria failed, %.1f s\n", g_failed, seconds_since(t0));
  return g_failed == 0 ? 0 : 1;
}
