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

#include <limits>
#include <random>
#include <vector>

#include "dfloc/maxflow.hpp"

using namespace dfloc;

namespace {

struct Arc {
  std::size_t i, j;
  double cap, rev;
};

// Cheapest s-t cut by enumerating every side assignment.
double brute_min_cut(const std::vector<double>& src, const std::vector<double>& snk,
                     const std::vector<Arc>& arcs) {
  const std::size_t n = src.size();
  double best = std::numeric_limits<double>::infinity();
  for (std::uint64_t bits = 0; bits < (std::uint64_t{1} << n); ++bits) {
    auto source_side = [&](std::size_t x) { return ((bits >> x) & 1u) != 0; };
    double c = 0.0;
    for (std::size_t x = 0; x < n; ++x) c += source_side(x) ? snk[x] : src[x];
    for (const auto& a : arcs) {
      if (source_side(a.i) && !source_side(a.j)) c += a.cap;
      if (source_side(a.j) && !source_side(a.i)) c += a.rev;
    }
    best = std::min(best, c);
  }
  return best;
}

}  // namespace

TEST_CASE("single node") {
  MaxFlow f(1);
  f.add_terminal_weights(0, 3.0, 5.0);
  CHECK(f.solve() == doctest::Approx(3.0));
  CHECK_FALSE(f.on_source_side(0));

  MaxFlow g(1);
  g.add_terminal_weights(0, 5.0, 3.0);
  CHECK(g.solve() == doctest::Approx(3.0));
  CHECK(g.on_source_side(0));
}

TEST_CASE("textbook chain") {
  MaxFlow f(3);
  f.add_terminal_weights(0, 10.0, 0.0);
  f.add_edge(0, 1, 4.0, 0.0);
  f.add_edge(1, 2, 7.0, 0.0);
  f.add_terminal_weights(2, 0.0, 9.0);
  CHECK(f.solve() == doctest::Approx(4.0));
  CHECK(f.on_source_side(0));
  CHECK_FALSE(f.on_source_side(1));
}

TEST_CASE("terminal weights accumulate") {
  MaxFlow f(1);
  f.add_terminal_weights(0, 2.0, 1.0);
  f.add_terminal_weights(0, 2.0, 1.0);
  CHECK(f.solve() == doctest::Approx(2.0));
}

TEST_CASE("random graphs match enumeration") {
  std::mt19937_64 rng(42);
  std::uniform_real_distribution<double> w(0.0, 5.0);
  std::bernoulli_distribution zero(0.2);
  for (int trial = 0; trial < 500; ++trial) {
    const std::size_t n = 1 + trial % 10;
    std::vector<double> src(n), snk(n);
    for (std::size_t x = 0; x < n; ++x) {
      src[x] = zero(rng) ? 0.0 : w(rng);
      snk[x] = zero(rng) ? 0.0 : w(rng);
    }
    std::vector<Arc> arcs;
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = i + 1; j < n; ++j) {
        if (std::bernoulli_distribution(0.4)(rng)) arcs.push_back({i, j, w(rng), w(rng)});
      }
    }
    MaxFlow f(n);
    for (std::size_t x = 0; x < n; ++x) f.add_terminal_weights(x, src[x], snk[x]);
    for (const auto& a : arcs) f.add_edge(a.i, a.j, a.cap, a.rev);
    const double flow = f.solve();
    const double want = brute_min_cut(src, snk, arcs);
    CHECK(flow == doctest::Approx(want).epsilon(1e-9));

    // The reported partition is itself a minimum cut.
    double c = 0.0;
    for (std::size_t x = 0; x < n; ++x) c += f.on_source_side(x) ? snk[x] : src[x];
    for (const auto& a : arcs) {
      if (f.on_source_side(a.i) && !f.on_source_side(a.j)) c += a.cap;
      if (f.on_source_side(a.j) && !f.on_source_side(a.i)) c += a.rev;
    }
    CHECK(c == doctest::Approx(want).epsilon(1e-9));
  }
}

TEST_CASE("invalid use") {
  MaxFlow f(2);
  CHECK_THROWS(f.add_edge(0, 2, 1.0, 1.0));
  CHECK_THROWS(f.add_terminal_weights(0, -1.0, 0.0));
}
