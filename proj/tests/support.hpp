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

// Small fixtures shared by the unit tests.

#ifndef DFLOC_TESTS_SUPPORT_HPP
#define DFLOC_TESTS_SUPPORT_HPP

#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include "dfloc/fingerprint.hpp"

namespace dfloc::testing {

inline std::filesystem::path scratch_dir(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / ("dfloc_test_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

// One session per location; stream j reads base[j] minus `drop` when the
// session's location index equals j modulo the stream count, plus noise.
inline std::vector<CalibrationSession> toy_sessions(const Grid& grid, std::size_t streams,
                                                    std::size_t frames, double drop,
                                                    double noise, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> n01(0.0, 1.0);
  std::vector<CalibrationSession> out;
  for (const auto& loc : grid.locations()) {
    CalibrationSession s{loc, {}};
    for (std::size_t t = 0; t < frames; ++t) {
      RssFrame f(static_cast<double>(t));
      for (std::size_t j = 0; j < streams; ++j) {
        double v = -50.0 - 3.0 * static_cast<double>(j) + noise * n01(rng);
        if (loc.index % streams == j) v -= drop;
        f.set(StreamId{"s" + std::to_string(j)}, v);
      }
      s.frames.push_back(std::move(f));
    }
    out.push_back(std::move(s));
  }
  return out;
}

}  // namespace dfloc::testing

#endif  // DFLOC_TESTS_SUPPORT_HPP
