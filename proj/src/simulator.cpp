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

#include "dfloc/simulator.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <istream>
#include <ostream>
#include <string>

#include "dfloc/trace_io.hpp"

namespace dfloc {

namespace {

bool inside(Point p, const TestbedConfig& c) {
  return p.x >= 0.0 && p.x <= c.width && p.y >= 0.0 && p.y <= c.height;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) {
    s.remove_suffix(1);
  }
  return s;
}

std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> parts;
  if (trim(s).empty()) return parts;
  std::size_t start = 0;
  for (;;) {
    const std::size_t pos = s.find(sep, start);
    parts.push_back(trim(s.substr(start, pos == std::string_view::npos ? pos : pos - start)));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return parts;
}

double number(std::string_view text, std::size_t line_no) {
  auto v = parse_double(text);
  if (!v || !std::isfinite(*v)) {
    text::format_error(line_no, "bad number '" + std::string(text) + "'");
  }
  return *v;
}

std::uint64_t integer(std::string_view text, std::size_t line_no) {
  std::uint64_t v = 0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc{} || ptr != text.data() + text.size()) {
    text::format_error(line_no, "bad integer '" + std::string(text) + "'");
  }
  return v;
}

std::vector<Point> points(std::string_view text, std::size_t line_no) {
  std::vector<Point> out;
  for (auto item : split(text, ';')) {
    auto xy = split(item, ',');
    if (xy.size() != 2) text::format_error(line_no, "expected 'x,y' in '" + std::string(item) + "'");
    out.push_back({number(xy[0], line_no), number(xy[1], line_no)});
  }
  return out;
}

std::string join(const std::vector<Point>& pts) {
  std::string s;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    if (i) s += ';';
    s += format_double(pts[i].x) + ',' + format_double(pts[i].y);
  }
  return s;
}

}  // namespace

void TestbedConfig::validate() const {
  require(width > 0.0 && height > 0.0, "testbed dimensions must be positive");
  require(grid_nx >= 1 && grid_ny >= 1, "testbed grid needs at least one location");
  require(!ap_positions.empty() && !mp_positions.empty(),
          "testbed needs at least one access point and one monitoring point");
  for (Point p : ap_positions) require(inside(p, *this), "access point outside the testbed");
  for (Point p : mp_positions) require(inside(p, *this), "monitoring point outside the testbed");
  require(baseline_rss.empty() || baseline_rss.size() == streams(),
          "baseline_rss needs one value per stream");
  require(noise_sigma >= 0.0, "noise_sigma must be nonnegative");
  require(impulse_prob >= 0.0 && impulse_prob <= 1.0, "impulse_prob must be in [0, 1]");
  require(impulse_magnitude >= 0.0, "impulse_magnitude must be nonnegative");
  require(attenuation_peak >= 0.0, "attenuation_peak must be nonnegative");
  require(attenuation_radius > 0.0, "attenuation_radius must be positive");
  require(calibration_frames >= 1, "calibration_frames must be at least 1");
}

Grid TestbedConfig::grid() const {
  validate();
  return Grid::regular(grid_nx, grid_ny, width, height);
}

TestbedConfig read_testbed(std::istream& in) {
  TestbedConfig c;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (text::skippable(line)) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) text::format_error(line_no, "expected key=value");
    const auto key = trim(std::string_view(line).substr(0, eq));
    const auto value = trim(std::string_view(line).substr(eq + 1));
    if (key == "width") c.width = number(value, line_no);
    else if (key == "height") c.height = number(value, line_no);
    else if (key == "grid_nx") c.grid_nx = integer(value, line_no);
    else if (key == "grid_ny") c.grid_ny = integer(value, line_no);
    else if (key == "ap_positions") c.ap_positions = points(value, line_no);
    else if (key == "mp_positions") c.mp_positions = points(value, line_no);
    else if (key == "baseline_rss") {
      c.baseline_rss.clear();
      for (auto v : split(value, ',')) c.baseline_rss.push_back(number(v, line_no));
    } else if (key == "noise_sigma") c.noise_sigma = number(value, line_no);
    else if (key == "impulse_prob") c.impulse_prob = number(value, line_no);
    else if (key == "impulse_magnitude") c.impulse_magnitude = number(value, line_no);
    else if (key == "attenuation_peak") c.attenuation_peak = number(value, line_no);
    else if (key == "attenuation_radius") c.attenuation_radius = number(value, line_no);
    else if (key == "seed") c.seed = integer(value, line_no);
    else if (key == "calibration_frames") c.calibration_frames = integer(value, line_no);
    else text::format_error(line_no, "unknown key '" + std::string(key) + "'");
  }
  if (in.bad()) throw_error(ErrorCode::io, "read error");
  c.validate();
  return c;
}

void write_testbed(std::ostream& out, const TestbedConfig& c) {
  out << "width=" << format_double(c.width) << '\n'
      << "height=" << format_double(c.height) << '\n'
      << "grid_nx=" << c.grid_nx << '\n'
      << "grid_ny=" << c.grid_ny << '\n'
      << "ap_positions=" << join(c.ap_positions) << '\n'
      << "mp_positions=" << join(c.mp_positions) << '\n';
  if (!c.baseline_rss.empty()) {
    out << "baseline_rss=";
    for (std::size_t i = 0; i < c.baseline_rss.size(); ++i) {
      out << (i ? "," : "") << format_double(c.baseline_rss[i]);
    }
    out << '\n';
  }
  out << "noise_sigma=" << format_double(c.noise_sigma) << '\n'
      << "impulse_prob=" << format_double(c.impulse_prob) << '\n'
      << "impulse_magnitude=" << format_double(c.impulse_magnitude) << '\n'
      << "attenuation_peak=" << format_double(c.attenuation_peak) << '\n'
      << "attenuation_radius=" << format_double(c.attenuation_radius) << '\n'
      << "seed=" << c.seed << '\n'
      << "calibration_frames=" << c.calibration_frames << '\n';
}

TestbedConfig load_testbed(const std::filesystem::path& path) {
  auto in = text::open_input(path);
  try {
    return read_testbed(in);
  } catch (const Error& e) {
    throw_error(e.code(), path.string() + ": " + e.what());
  }
}

void save_testbed(const TestbedConfig& config, const std::filesystem::path& path) {
  auto out = text::open_output(path);
  write_testbed(out, config);
  text::finish_output(out, path);
}

std::vector<StreamGeometry> stream_geometry(const TestbedConfig& config) {
  config.validate();
  std::vector<StreamGeometry> out;
  for (std::size_t a = 0; a < config.ap_positions.size(); ++a) {
    for (std::size_t m = 0; m < config.mp_positions.size(); ++m) {
      StreamGeometry g;
      g.id.name = "ap" + std::to_string(a) + "-mp" + std::to_string(m);
      g.ap = config.ap_positions[a];
      g.mp = config.mp_positions[m];
      if (config.baseline_rss.empty()) {
        g.baseline = -40.0 - 20.0 * std::log10(std::max(distance(g.ap, g.mp), 1.0));
      } else {
        g.baseline = config.baseline_rss[out.size()];
      }
      out.push_back(std::move(g));
    }
  }
  std::sort(out.begin(), out.end(),
            [](const StreamGeometry& x, const StreamGeometry& y) { return x.id < y.id; });
  return out;
}

double segment_distance(Point p, Point a, Point b) noexcept {
  const double dx = b.x - a.x;
  const double dy = b.y - a.y;
  const double len2 = dx * dx + dy * dy;
  double t = len2 > 0.0 ? ((p.x - a.x) * dx + (p.y - a.y) * dy) / len2 : 0.0;
  t = std::clamp(t, 0.0, 1.0);
  return distance(p, {a.x + t * dx, a.y + t * dy});
}

double attenuation(double d, const TestbedConfig& config) noexcept {
  const double r = config.attenuation_radius;
  return config.attenuation_peak * std::exp(-(d * d) / (2.0 * r * r));
}

std::mt19937_64 make_rng(std::uint64_t seed, std::uint64_t purpose) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(purpose),
                    static_cast<std::uint32_t>(purpose >> 32)};
  return std::mt19937_64(seq);
}

RssFrame rss_model(std::span<const Point> entities, std::span<const StreamGeometry> streams,
                   const TestbedConfig& config, std::mt19937_64& rng, double timestamp) {
  std::normal_distribution<double> noise(0.0, 1.0);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<Reading> readings;
  readings.reserve(streams.size());
  for (const auto& s : streams) {
    double rss = s.baseline;
    for (Point e : entities) rss -= attenuation(segment_distance(e, s.ap, s.mp), config);
    // Draws happen unconditionally so the random sequence does not depend on
    // the parameter values.
    const double n = noise(rng);
    const double u = unit(rng);
    const double sign = unit(rng) < 0.5 ? -1.0 : 1.0;
    rss += config.noise_sigma * n;
    if (u < config.impulse_prob) rss += sign * config.impulse_magnitude;
    readings.push_back({s.id, rss});
  }
  return RssFrame(timestamp, std::move(readings));
}

void Trajectory::validate() const {
  require(!waypoints.empty(), "trajectory '" + id + "' has no waypoints");
  for (std::size_t i = 1; i < waypoints.size(); ++i) {
    require(waypoints[i].t > waypoints[i - 1].t,
            "trajectory '" + id + "' waypoint times must increase");
  }
}

Point Trajectory::at(double t) const {
  validate();
  if (t <= waypoints.front().t) return waypoints.front().p;
  if (t >= waypoints.back().t) return waypoints.back().p;
  auto it = std::upper_bound(waypoints.begin(), waypoints.end(), t,
                             [](double v, const Waypoint& w) { return v < w.t; });
  const Waypoint& b = *it;
  const Waypoint& a = *(it - 1);
  const double f = (t - a.t) / (b.t - a.t);
  return {a.p.x + f * (b.p.x - a.p.x), a.p.y + f * (b.p.y - a.p.y)};
}

Trajectory static_trajectory(std::string id, Point p, double t0, double t1) {
  require(t1 > t0, "static trajectory needs t1 > t0");
  return {std::move(id), {{t0, p}, {t1, p}}};
}

Trajectory random_walk(std::string id, const TestbedConfig& config, std::mt19937_64& rng,
                       double t0, double t1, double speed) {
  config.validate();
  require(t1 > t0, "random walk needs t1 > t0");
  require(speed > 0.0, "random walk speed must be positive");
  const double margin_x = std::min(0.5, config.width / 4.0);
  const double margin_y = std::min(0.5, config.height / 4.0);
  std::uniform_real_distribution<double> ux(margin_x, config.width - margin_x);
  std::uniform_real_distribution<double> uy(margin_y, config.height - margin_y);
  std::uniform_int_distribution<int> pause(0, 5);

  Trajectory tr{std::move(id), {}};
  double t = t0;
  Point p{ux(rng), uy(rng)};
  tr.waypoints.push_back({t, p});
  while (t < t1) {
    const double rest = pause(rng);
    if (rest > 0.0) {
      t = std::min(t + rest, t1);
      tr.waypoints.push_back({t, p});
      if (t >= t1) break;
    }
    Point next{ux(rng), uy(rng)};
    const double leg = std::max(1.0, std::ceil(distance(p, next) / speed));
    if (t + leg > t1) {
      const double f = (t1 - t) / leg;
      next = {p.x + f * (next.x - p.x), p.y + f * (next.y - p.y)};
      t = t1;
    } else {
      t += leg;
    }
    p = next;
    tr.waypoints.push_back({t, p});
  }
  return tr;
}

std::vector<Point> place_entities(const TestbedConfig& config, std::size_t count,
                                  double min_separation, std::mt19937_64& rng) {
  config.validate();
  const double mx = std::min(1.0, config.width / 4.0);
  const double my = std::min(1.0, config.height / 4.0);
  std::uniform_real_distribution<double> ux(mx, config.width - mx);
  std::uniform_real_distribution<double> uy(my, config.height - my);
  std::vector<Point> out;
  for (int attempt = 0; out.size() < count; ++attempt) {
    if (attempt > 100000) {
      throw_error(ErrorCode::invalid_argument,
                  "cannot place " + std::to_string(count) + " entities " +
                      format_double(min_separation) + " m apart");
    }
    const Point p{ux(rng), uy(rng)};
    const bool ok = std::all_of(out.begin(), out.end(),
                                [&](Point q) { return distance(p, q) >= min_separation; });
    if (ok) out.push_back(p);
  }
  return out;
}

std::vector<CalibrationSession> generate_calibration(const TestbedConfig& config) {
  const Grid grid = config.grid();
  const auto streams = stream_geometry(config);
  auto rng = make_rng(config.seed, 1);
  std::vector<CalibrationSession> sessions;
  sessions.reserve(grid.size());
  for (const auto& loc : grid.locations()) {
    CalibrationSession s{loc, {}};
    const Point person = loc.point();
    for (std::size_t f = 0; f < config.calibration_frames; ++f) {
      s.frames.push_back(rss_model({&person, 1}, streams, config, rng, static_cast<double>(f)));
    }
    sessions.push_back(std::move(s));
  }
  return sessions;
}

SimulatedRun generate_test(const TestbedConfig& config, std::span<const Trajectory> trajectories,
                           std::optional<std::size_t> frames, std::uint64_t purpose) {
  const auto streams = stream_geometry(config);
  for (const auto& tr : trajectories) {
    tr.validate();
    for (const auto& w : tr.waypoints) {
      require(inside(w.p, config), "trajectory '" + tr.id + "' leaves the testbed");
    }
  }
  double first = 0.0;
  std::size_t count = 0;
  if (frames) {
    count = *frames;
  } else if (!trajectories.empty()) {
    double lo = trajectories.front().start();
    double hi = trajectories.front().end();
    for (const auto& tr : trajectories) {
      lo = std::min(lo, tr.start());
      hi = std::max(hi, tr.end());
    }
    first = std::ceil(lo);
    count = hi >= first ? static_cast<std::size_t>(std::floor(hi) - first) + 1 : 0;
  }

  auto rng = make_rng(config.seed, purpose);
  SimulatedRun run;
  run.frames.reserve(count);
  run.truth.reserve(count);
  std::vector<Point> positions;
  for (std::size_t i = 0; i < count; ++i) {
    const double t = first + static_cast<double>(i);
    GroundTruthFrame gt{t, {}};
    positions.clear();
    for (const auto& tr : trajectories) {
      if (!tr.present(t)) continue;
      const Point p = tr.at(t);
      positions.push_back(p);
      gt.entities.push_back({tr.id, p.x, p.y});
    }
    run.frames.push_back(rss_model(positions, streams, config, rng, t));
    run.truth.push_back(std::move(gt));
  }
  return run;
}

}  // namespace dfloc
