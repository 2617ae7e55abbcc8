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
#include <memory>
#include <random>
#include <sstream>

#include "dfloc/energy.hpp"
#include "dfloc/harness.hpp"
#include "support.hpp"

using namespace dfloc;

namespace {

// Energy recomputed from the histograms, prior counts and raw frame.
double naive_energy(const EnvironmentMap& m, const RssFrame& frame, const EnvironmentMap& prev,
                    const EnvironmentMap& prev2, const Fingerprint& fp, const ModelParams& p) {
  const std::size_t n = fp.size();
  std::vector<double> nll1(n, 0.0), nll0(n, 0.0);
  for (std::size_t x = 0; x < n; ++x) {
    for (std::size_t s = 0; s < fp.streams().size(); ++s) {
      const double v = *frame.reading(fp.streams()[s]);
      const auto& h1 = fp.location(x).active[s];
      const auto& h0 = fp.location(x).inactive[s];
      auto bin = [&](const RssHistogram& h) {
        long b = static_cast<long>(std::floor((v - h.origin()) / h.bin_width()));
        b = std::clamp(b, 0L, static_cast<long>(h.bins()) - 1);
        return h.probabilities()[static_cast<std::size_t>(b)];
      };
      nll1[x] -= std::log(bin(h1));
      nll0[x] -= std::log(bin(h0));
    }
  }
  double lo = nll1[0], hi = nll1[0];
  for (double v : nll1) lo = std::min(lo, v), hi = std::max(hi, v);

  const auto& t = fp.temporal();
  double e = 0.0;
  for (std::size_t x = 0; x < n; ++x) {
    const int code = 2 * prev.active[x] + prev2.active[x];
    double p1;
    if (p.hmm_order == 2) {
      p1 = (t.ones[code] + 1.0) / (t.totals[code] + 2.0);
    } else {
      const int a = 2 * prev.active[x], b = a + 1;
      p1 = (t.ones[a] + t.ones[b] + 1.0) / (t.totals[a] + t.totals[b] + 2.0);
    }
    const double pt = m.active[x] ? p1 : 1.0 - p1;
    e += p.beta * -std::log(pt) + p.delta * (m.active[x] ? nll1[x] : nll0[x]);
  }
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      if (!fp.grid().adjacent(i, j) || m.active[i] == m.active[j]) continue;
      const double d = hi > lo ? (nll1[i] - nll1[j]) / (hi - lo) : 0.0;
      e += p.gamma * (1.0 + std::exp(-d * d)) / 2.0;
    }
  }
  return e;
}

EnvironmentMap random_map(std::mt19937_64& rng, std::size_t n, double p = 0.4) {
  std::bernoulli_distribution b(p);
  EnvironmentMap m(0.0, n);
  for (auto& a : m.active) a = b(rng) ? 1 : 0;
  return m;
}

struct Toy {
  Fingerprint fp;
  RssFrame frame;
};

Toy toy(std::mt19937_64& rng, std::size_t nx, std::size_t ny) {
  const Grid grid = Grid::regular(nx, ny, 2.0 * nx, 2.0 * ny);
  TemporalPrior prior;
  std::uniform_int_distribution<std::uint64_t> c(0, 50);
  for (std::size_t h = 0; h < 4; ++h) {
    prior.totals[h] = 50 + c(rng);
    prior.ones[h] = c(rng);
  }
  const auto sessions = testing::toy_sessions(grid, 3, 20, 6.0, 2.0, rng());
  Fingerprint fp = build_fingerprint(sessions, grid, ModelParams{}, prior);
  std::uniform_real_distribution<double> u(-65.0, -45.0);
  RssFrame f(1.0);
  for (int s = 0; s < 3; ++s) f.set(StreamId{"s" + std::to_string(s)}, u(rng));
  return {std::move(fp), std::move(f)};
}

}  // namespace

TEST_CASE("unary cost arithmetic") {
  CHECK(unary_cost(1.0, 1.0, 0.5, 0.5) == 0.0);
  CHECK(unary_cost(std::exp(-1.0), std::exp(-1.0), 1.0, 1.0) == doctest::Approx(2.0));
  CHECK(unary_cost(std::exp(-1.0), std::exp(-1.0), 0.5, 0.5) == doctest::Approx(1.0));
}

TEST_CASE("coherence cost range") {
  CHECK(coherence_cost(0.0, 3.0) == 3.0);
  CHECK(coherence_cost(1e6, 3.0) == doctest::Approx(1.5));
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> d(-5.0, 5.0);
  for (int i = 0; i < 1000; ++i) {
    const double c = coherence_cost(d(rng), 2.0);
    CHECK(c >= 1.0);
    CHECK(c <= 2.0);
  }
}

TEST_CASE("regularity tables") {
  CHECK_FALSE(is_regular({1.0, 0.5, 0.4, 1.0}));
  CHECK(is_regular({0.0, 0.0, 0.0, 0.0}));
  CHECK(is_regular({0.0, 1.0, 1.0, 0.0}));
}

TEST_CASE("single location energy is the unary term") {
  const Grid grid = Grid::regular(1, 1, 2.0, 2.0);
  std::vector<CalibrationSession> s{{grid[0], {RssFrame(0.0, {{StreamId{"a"}, -50.0}})}}};
  const Fingerprint fp = build_fingerprint(s, grid, ModelParams{});
  const RssFrame f(0.0, {{StreamId{"a"}, -50.0}});
  const auto ev = evaluate_frame(fp, f, fp.all_streams(), ContrastMode::normalized);
  const EnvironmentMap off(0.0, 1);
  EnvironmentMap on(0.0, 1);
  on.active[0] = 1;
  const ModelParams p;
  for (const EnvironmentMap* m : {&off, static_cast<const EnvironmentMap*>(&on)}) {
    CHECK(total_energy(*m, ev, off, off, fp, p) ==
          doctest::Approx(unary_energy(fp, ev, 0, m->active[0] != 0, {}, p)));
  }
  const auto g = build_cut_graph(ev, off, off, fp, p);
  const auto best = min_cut(g);
  const bool want = g.sink_tedge[0] < g.source_tedge[0];
  CHECK((best.active[0] != 0) == want);
}

TEST_CASE("total energy against naive summation") {
  std::mt19937_64 rng(77);
  for (int trial = 0; trial < 200; ++trial) {
    auto [fp, frame] = toy(rng, 3, 3);
    ModelParams p;
    p.beta = std::uniform_real_distribution<double>(0.05, 1.0)(rng);
    p.delta = std::uniform_real_distribution<double>(0.05, 1.0)(rng);
    p.gamma = std::uniform_real_distribution<double>(0.1, 4.0)(rng);
    p.hmm_order = trial % 2 ? 1 : 2;
    const auto ev = evaluate_frame(fp, frame, fp.all_streams(), ContrastMode::normalized);
    const auto prev = random_map(rng, 9), prev2 = random_map(rng, 9), m = random_map(rng, 9);
    const double e = total_energy(m, ev, prev, prev2, fp, p);
    CHECK(e == doctest::Approx(naive_energy(m, frame, prev, prev2, fp, p)).epsilon(1e-12));
    const auto g = build_cut_graph(ev, prev, prev2, fp, p);
    CHECK(graph_energy(g, m) == doctest::Approx(e).epsilon(1e-12));
    CHECK(check_regular(fp, ev, p));
  }
}

TEST_CASE("uniform labels pay no coherence") {
  std::mt19937_64 rng(5);
  auto [fp, frame] = toy(rng, 3, 2);
  const ModelParams p;
  const auto ev = evaluate_frame(fp, frame, fp.all_streams(), ContrastMode::normalized);
  const EnvironmentMap zero(0.0, 6);
  EnvironmentMap ones(0.0, 6);
  for (auto& a : ones.active) a = 1;
  for (const EnvironmentMap* m : {&zero, static_cast<const EnvironmentMap*>(&ones)}) {
    double unary = 0.0;
    for (std::size_t x = 0; x < 6; ++x) unary += unary_energy(fp, ev, x, m->active[x] != 0, {}, p);
    CHECK(total_energy(*m, ev, zero, zero, fp, p) == doctest::Approx(unary));
  }
  CHECK_THROWS_AS(pairwise_energy(fp, ev, 0, 5, p), Error);
  CHECK(pairwise_energy(fp, ev, 0, 1, p) >= p.gamma / 2.0);
}

TEST_CASE("literal contrast uses raw likelihoods") {
  std::mt19937_64 rng(6);
  auto [fp, frame] = toy(rng, 2, 2);
  const auto ev = evaluate_frame(fp, frame, fp.all_streams(), ContrastMode::literal);
  for (std::size_t x = 0; x < 4; ++x) {
    CHECK(ev.contrast[x] == doctest::Approx(likelihood(fp, x, true, frame, fp.all_streams())));
  }
  const auto norm = evaluate_frame(fp, frame, fp.all_streams(), ContrastMode::normalized);
  double lo = 1.0, hi = 0.0;
  for (double c : norm.contrast) lo = std::min(lo, c), hi = std::max(hi, c);
  CHECK(lo == 0.0);
  CHECK(hi == 1.0);
}

TEST_CASE("hand-built cut graphs") {
  CutGraph g{3, {1.0, 1.0, 1.0}, {5.0, 5.0, 5.0}, {{0, 1, 0.0}, {1, 2, 0.0}}};
  CHECK(min_cut(g).count() == 0);

  CutGraph free2{2, {1.0, 4.0}, {3.0, 2.0}, {{0, 1, 0.0}}};
  const auto a = min_cut(free2);
  CHECK(a.active[0] == 0);
  CHECK(a.active[1] == 1);

  // Strong coupling: node 0 prefers active by 10, node 1 inactive by 1.
  CutGraph tied{2, {10.0, 0.0}, {0.0, 1.0}, {{0, 1, 100.0}}};
  const auto b = min_cut(tied);
  CHECK(b.active[0] == 1);
  CHECK(b.active[1] == 1);
  double best = 1e9;
  for (int bits = 0; bits < 4; ++bits) {
    EnvironmentMap m(0.0, 2);
    m.active[0] = bits & 1;
    m.active[1] = (bits >> 1) & 1;
    best = std::min(best, graph_energy(tied, m));
  }
  CHECK(graph_energy(tied, b) == best);
}

TEST_CASE("two-location instances match enumeration") {
  std::mt19937_64 rng(8);
  for (int trial = 0; trial < 300; ++trial) {
    auto [fp, frame] = toy(rng, 2, 1);
    ModelParams p;
    p.gamma = std::uniform_real_distribution<double>(0.1, 20.0)(rng);
    const auto ev = evaluate_frame(fp, frame, fp.all_streams(), ContrastMode::normalized);
    const auto prev = random_map(rng, 2), prev2 = random_map(rng, 2);
    const auto cut = min_cut(build_cut_graph(ev, prev, prev2, fp, p));
    const auto brute = brute_force_map(ev, prev, prev2, fp, p);
    CHECK(total_energy(cut, ev, prev, prev2, fp, p) ==
          doctest::Approx(total_energy(brute, ev, prev, prev2, fp, p)).epsilon(1e-12));
  }
}

TEST_CASE("min cut matches brute force on random instances") {
  std::mt19937_64 rng(2024);
  for (int trial = 0; trial < 300; ++trial) {
    const auto inst = random_instance(rng, 12);
    const auto g = build_cut_graph(inst.evidence, inst.prev, inst.prev_prev, *inst.fp, inst.params);
    const auto cut = min_cut(g);
    const auto brute = brute_force_map(inst.evidence, inst.prev, inst.prev_prev, *inst.fp, inst.params);
    const double ec = total_energy(cut, inst.evidence, inst.prev, inst.prev_prev, *inst.fp, inst.params);
    const double eb = total_energy(brute, inst.evidence, inst.prev, inst.prev_prev, *inst.fp, inst.params);
    CHECK(std::abs(ec - eb) <= 1e-9);
    CHECK(check_regular(*inst.fp, inst.evidence, inst.params));
  }
}

TEST_CASE("brute force refuses large grids") {
  std::mt19937_64 rng(3);
  auto [fp, frame] = toy(rng, 7, 3);
  const auto ev = evaluate_frame(fp, frame, fp.all_streams(), ContrastMode::normalized);
  const EnvironmentMap z(0.0, 21);
  CHECK_THROWS_AS(brute_force_map(ev, z, z, fp, ModelParams{}), Error);
}

TEST_CASE("tracker state bootstraps with inactive history") {
  TrackerState st(4, 3);
  CHECK(st.prev().count() == 0);
  CHECK(st.prev_prev().count() == 0);
  CHECK(st.prev().size() == 4);
  EnvironmentMap a(1.0, 4);
  a.active[2] = 1;
  st.push(a);
  CHECK(st.prev() == a);
  CHECK(st.prev_prev().count() == 0);
  for (int t = 2; t < 6; ++t) st.push(EnvironmentMap(t, 4));
  CHECK(st.window().size() == 3);
  CHECK_THROWS_AS(st.push(EnvironmentMap(9.0, 5)), Error);
}

TEST_CASE("graph dump lists every edge") {
  CutGraph g{2, {1.5, 2.0}, {0.5, 3.0}, {{0, 1, 0.75}}};
  std::ostringstream out;
  write_cut_graph(out, g);
  CHECK(out.str() == "tedge 0 1.5 0.5\ntedge 1 2 3\nnedge 0 1 0.75\n");
}
