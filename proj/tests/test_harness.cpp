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

#include <doctest.h>

#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "dfloc/harness.hpp"
#include "dfloc/simulator.hpp"
#include "support.hpp"

using namespace dfloc;

namespace {

const Grid kGrid = Grid::regular(5, 5, 10.0, 10.0);

GroundTruthFrame truth_at(double t, std::vector<Point> ps) {
  GroundTruthFrame g{t, {}};
  for (std::size_t i = 0; i < ps.size(); ++i) g.entities.push_back({"p" + std::to_string(i), ps[i].x, ps[i].y});
  return g;
}

}  // namespace

TEST_CASE("distance errors") {
  const Point center{5, 5};
  auto d = distance_error({0, {{2, 3}}}, truth_at(0, {{2, 3}}), kGrid, ErrorMode::locations, center);
  CHECK(d == std::vector<double>{0.0});

  d = distance_error({0, {}}, truth_at(0, {{1, 1}}), kGrid, ErrorMode::locations, center);
  REQUIRE(d.size() == 1);
  CHECK(d[0] == doctest::Approx(std::hypot(4.0, 4.0)));

  const FrameEstimate crossed{0, {{0, 0}, {10, 0}}};
  const auto gt = truth_at(0, {{9, 0}, {1, 0}});
  d = distance_error(crossed, gt, kGrid, ErrorMode::locations, center);
  const double greedy = d[0] + d[1];
  const double straight = distance({0, 0}, {9, 0}) + distance({10, 0}, {1, 0});
  const double swapped = distance({0, 0}, {1, 0}) + distance({10, 0}, {9, 0});
  CHECK(greedy == doctest::Approx(std::min(straight, swapped)));

  d = distance_error({0, {{1.2, 0.9}}}, truth_at(0, {{0.8, 1.3}}), kGrid, ErrorMode::zones, center);
  CHECK(d == std::vector<double>{0.0});
  d = distance_error({0, {{1.0, 1.0}}}, truth_at(0, {{3.2, 1.0}}), kGrid, ErrorMode::zones, center);
  CHECK(d[0] == doctest::Approx(2.0));

  d = distance_error({0, {{1, 1}, {1, 2}}}, truth_at(0, {{1, 1}}), kGrid, ErrorMode::locations, center);
  CHECK(d == std::vector<double>{0.0, 1.0});
  d = distance_error({0, {{1, 1}}}, truth_at(0, {}), kGrid, ErrorMode::locations, center);
  CHECK(d[0] == doctest::Approx(std::hypot(4.0, 4.0)));
}

TEST_CASE("count errors") {
  std::vector<FrameEstimate> est{{0, {{1, 1}, {2, 2}, {3, 3}}}, {1, {}}};
  std::vector<GroundTruthFrame> gt{truth_at(0, {{1, 1}, {2, 2}}), truth_at(1, {{1, 1}, {2, 2}})};
  CHECK(count_error(est, gt) == std::vector<int>{1, -2});
  CHECK(count_error(std::span<const FrameEstimate>(est).first(1),
                    std::span<const GroundTruthFrame>(gt).first(1)) == std::vector<int>{1});
  CHECK_THROWS_AS(count_error(est, std::span<const GroundTruthFrame>(gt).first(1)), Error);
  gt[1].timestamp = 5;
  CHECK_THROWS_AS(count_error(est, gt), Error);

  std::vector<FrameEstimate> exact{{0, {{1, 1}}}};
  std::vector<GroundTruthFrame> one{truth_at(0, {{1, 1}})};
  CHECK(count_error(exact, one) == std::vector<int>{0});
}

TEST_CASE("summary statistics") {
  CHECK(median({3.0, 1.0, 2.0}) == 2.0);
  CHECK(median({4.0, 1.0, 2.0, 3.0}) == 2.5);
  const std::vector<double> v{1.0, 2.0, 6.0};
  CHECK(mean(v) == 3.0);
  const auto cdf = empirical_cdf({2.0, 1.0, 2.0, 4.0});
  REQUIRE(cdf.size() == 3);
  CHECK(cdf[0].value == 1.0);
  CHECK(cdf[0].fraction == 0.25);
  CHECK(cdf[1].fraction == 0.75);
  CHECK(cdf[2].fraction == 1.0);
}

TEST_CASE("empty evaluation") {
  const auto r = evaluate({}, {}, kGrid, ErrorMode::locations);
  CHECK(r.frames == 0);
  CHECK(r.location_errors.empty());
  CHECK(r.count_errors.empty());
  CHECK(r.cdf.empty());
}

TEST_CASE("report json") {
  std::vector<FrameEstimate> est{{0, {{1, 1}}}, {1, {}}};
  std::vector<GroundTruthFrame> gt{truth_at(0, {{1, 2}}), truth_at(1, {})};
  const std::vector<double> ms{0.5, 0.7};
  const auto r = evaluate(est, gt, kGrid, ErrorMode::zones, ms);
  CHECK(r.count_within_one == 1.0);
  CHECK(r.count_exact == 1.0);
  CHECK(r.runtime_median_ms == doctest::Approx(0.6));
  std::stringstream io;
  write_report(io, r);
  const auto j = nlohmann::json::parse(io.str());
  CHECK(j["mode"] == "zones");
  CHECK(j["frames"] == 2);
  CHECK(j["locations"]["errors_m"].size() == 1);
  CHECK(j["count"]["errors"][0] == 0);
  CHECK(j["runtime"]["per_frame_ms"].size() == 2);

  auto other = evaluate(est, gt, kGrid, ErrorMode::zones, std::vector<double>{9.0, 9.0});
  CHECK(r.same_results(other));
  other.count_exact = 0.5;
  CHECK_FALSE(r.same_results(other));
}

TEST_CASE("estimate and map files round-trip") {
  std::vector<FrameEstimate> est{{0, {}}, {1.5, {{1.25, 3.0}, {9.75, 0.125}}}};
  std::stringstream io;
  write_estimates(io, est);
  CHECK(io.str() == "t=0 m=0\nt=1.5 m=2 (1.25,3) (9.75,0.125)\n");
  CHECK(read_estimates(io) == est);

  std::istringstream bad("t=0 m=2 (1,1)\n");
  CHECK_THROWS_AS(read_estimates(bad), Error);

  EnvironmentMap a(0, 4), b(1, 4);
  b.active[1] = b.active[3] = 1;
  std::vector<EnvironmentMap> maps{a, b};
  std::stringstream mio;
  write_maps(mio, maps);
  CHECK(read_maps(mio) == maps);
}

TEST_CASE("heatmaps") {
  std::vector<EnvironmentMap> quiet(13, EnvironmentMap(0, 25));
  for (const auto& row : heatmap(quiet, kGrid)) {
    CHECK(row.size() == 5);
    for (auto v : row) CHECK(v == 0);
  }
  auto busy = quiet;
  for (auto& m : busy) m.active[7] = 1;
  const auto h = heatmap(busy, kGrid);
  REQUIRE(h.size() == 5);
  CHECK(h[1][2] == 13);

  const auto dir = testing::scratch_dir("heat");
  export_heatmap(busy, kGrid, dir / "h.csv");
  std::ifstream in(dir / "h.csv");
  CHECK(read_heatmap(in) == h);
}

TEST_CASE("calibration defaults") {
  const TestbedConfig c;
  const auto fp = calibrate(generate_calibration(c), c.grid(), ModelParams{});
  CHECK(fp.streams().size() == 6);
  CHECK(fp.size() == 25);
  CHECK(fp.params().w == 13);
  CHECK(fp.params().hmm_order == 2);
  CHECK(fp.params().r == 0.25);
}

TEST_CASE("pipeline on a single static person") {
  const TestbedConfig c;
  auto rng = make_rng(c.seed, 3);
  std::vector<Trajectory> walkers{random_walk("a", c, rng, 0, 599), random_walk("b", c, rng, 0, 599)};
  const auto train = generate_test(c, walkers, 600, 3);
  const std::vector<Trajectory> one{static_trajectory("p", {3.0, 7.0}, 0, 149)};
  const auto run = generate_test(c, one);
  const auto r = run_pipeline(generate_calibration(c), train.truth, run.frames, run.truth, c.grid(),
                              ModelParams{});
  CHECK(r.tracked.estimates.size() == 150);
  CHECK(r.report.location_median <= c.grid().spacing());
  CHECK(r.tracked.runtime_ms.size() == 150);

  const auto empty = run_pipeline(generate_calibration(c), train.truth, {}, {}, c.grid(), ModelParams{});
  CHECK(empty.tracked.estimates.empty());
  CHECK(empty.report.frames == 0);

  try {
    run_pipeline({}, {}, run.frames, run.truth, c.grid(), ModelParams{});
    FAIL("accepted no sessions");
  } catch (const Error& e) {
    CHECK(std::string(e.what()).rfind("calibrate:", 0) == 0);
  }
}

TEST_CASE("parameter search picks the exhaustive argmin") {
  TestbedConfig c;
  const auto fp = calibrate(generate_calibration(c), c.grid(), ModelParams{});
  std::vector<LabeledSequence> held;
  for (Point p : {Point{3, 3}, Point{7, 5}}) {
    const std::vector<Trajectory> one{static_trajectory("p", p, 0, 39)};
    auto run = generate_test(c, one);
    held.push_back({run.frames, run.truth});
  }

  SearchGrid single{{0.5}, {1.0}, {0.75}};
  const auto p1 = fit_params(fp, held, single);
  CHECK(p1.beta == 0.5);
  CHECK(p1.gamma == 1.0);
  CHECK(p1.delta == 0.75);

  SearchGrid pair{{0.25, 1.0}, {0.5}, {1.0}};
  auto shared = std::make_shared<const Fingerprint>(fp);
  auto error_of = [&](double beta) {
    ModelParams p = fp.params();
    p.beta = beta;
    p.gamma = 0.5;
    p.delta = 1.0;
    std::vector<double> errs;
    for (const auto& s : held) {
      const auto tr = track(shared, s.frames, p);
      const auto rep = evaluate(tr.estimates, s.truth, fp.grid(), ErrorMode::locations);
      errs.insert(errs.end(), rep.location_errors.begin(), rep.location_errors.end());
    }
    return mean(errs);
  };
  const double e_lo = error_of(0.25), e_hi = error_of(1.0);
  const auto p2 = fit_params(fp, held, pair);
  CHECK(p2.beta == (e_hi < e_lo ? 1.0 : 0.25));
}

TEST_CASE("oracle verification") {
  const auto rep = verify_oracle(100, 3, 10);
  CHECK(rep.instances == 100);
  CHECK(rep.mismatches == 0);
  CHECK(rep.max_abs_diff <= 1e-9);
}
