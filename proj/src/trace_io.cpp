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

#include "dfloc/trace_io.hpp"

#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <string>

namespace dfloc {
namespace text {

std::vector<std::string_view> split_tokens(std::string_view line) {
  std::vector<std::string_view> tokens;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && (line[i] == ' ' || line[i] == '\t' || line[i] == '\r')) ++i;
    const std::size_t start = i;
    while (i < line.size() && line[i] != ' ' && line[i] != '\t' && line[i] != '\r') ++i;
    if (i > start) tokens.push_back(line.substr(start, i - start));
  }
  return tokens;
}

bool skippable(std::string_view line) {
  for (char c : line) {
    if (c == '#') return true;
    if (c != ' ' && c != '\t' && c != '\r') return false;
  }
  return true;
}

void format_error(std::size_t line_no, const std::string& what) {
  throw_error(ErrorCode::format, "line " + std::to_string(line_no) + ": " + what);
}

double parse_timestamp(std::string_view token, std::size_t line_no) {
  if (token.substr(0, 2) != "t=") format_error(line_no, "expected 't=<seconds>'");
  auto t = parse_double(token.substr(2));
  if (!t || !std::isfinite(*t)) format_error(line_no, "bad timestamp '" + std::string(token) + "'");
  return *t;
}

std::ifstream open_input(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw_error(ErrorCode::io, "cannot open '" + path.string() + "' for reading");
  return in;
}

std::ofstream open_output(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw_error(ErrorCode::io, "cannot open '" + path.string() + "' for writing");
  return out;
}

void finish_output(std::ofstream& out, const std::filesystem::path& path) {
  out.flush();
  if (!out) throw_error(ErrorCode::io, "write to '" + path.string() + "' failed");
}

}  // namespace text

namespace {

double frame_time(const RssFrame& f) { return f.timestamp(); }
double frame_time(const GroundTruthFrame& f) { return f.timestamp; }

template <class Frame, class ParseLine>
std::vector<Frame> read_lines(std::istream& in, ParseLine parse_line) {
  std::vector<Frame> frames;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (text::skippable(line)) continue;
    Frame frame = parse_line(std::string_view(line), line_no);
    if (!frames.empty() && frame_time(frame) < frame_time(frames.back())) {
      text::format_error(line_no, "non-monotone timestamp");
    }
    frames.push_back(std::move(frame));
  }
  if (in.bad()) throw_error(ErrorCode::io, "read failure");
  return frames;
}

RssFrame parse_trace_line(std::string_view line, std::size_t line_no) {
  const auto tokens = text::split_tokens(line);
  RssFrame frame(text::parse_timestamp(tokens.front(), line_no));
  std::vector<Reading> readings;
  for (std::size_t i = 1; i < tokens.size(); ++i) {
    const auto tok = tokens[i];
    const auto eq = tok.find('=');
    if (eq == std::string_view::npos) text::format_error(line_no, "expected '<stream>=<dbm>'");
    const auto name = tok.substr(0, eq);
    if (!is_valid_stream_name(name)) {
      text::format_error(line_no, "bad stream id '" + std::string(name) + "'");
    }
    auto value = parse_double(tok.substr(eq + 1));
    if (!value || !std::isfinite(*value)) {
      text::format_error(line_no, "non-numeric RSS '" + std::string(tok.substr(eq + 1)) + "'");
    }
    readings.push_back({StreamId{std::string(name)}, *value});
  }
  try {
    return RssFrame(frame.timestamp(), std::move(readings));
  } catch (const Error& e) {
    text::format_error(line_no, e.what());
  }
}

GroundTruthFrame parse_truth_line(std::string_view line, std::size_t line_no) {
  const auto tokens = text::split_tokens(line);
  GroundTruthFrame frame;
  frame.timestamp = text::parse_timestamp(tokens.front(), line_no);
  for (std::size_t i = 1; i < tokens.size(); ++i) {
    const auto tok = tokens[i];
    const auto colon = tok.find(':');
    const auto comma = tok.find(',', colon == std::string_view::npos ? 0 : colon);
    if (colon == std::string_view::npos || comma == std::string_view::npos || colon == 0) {
      text::format_error(line_no, "expected '<entity>:<x>,<y>'");
    }
    auto x = parse_double(tok.substr(colon + 1, comma - colon - 1));
    auto y = parse_double(tok.substr(comma + 1));
    if (!x || !y || !std::isfinite(*x) || !std::isfinite(*y)) {
      text::format_error(line_no, "bad coordinates in '" + std::string(tok) + "'");
    }
    frame.entities.push_back({std::string(tok.substr(0, colon)), *x, *y});
  }
  return frame;
}

}  // namespace

std::vector<RssFrame> read_trace(std::istream& in) {
  return read_lines<RssFrame>(in, parse_trace_line);
}

void write_trace(std::ostream& out, const std::vector<RssFrame>& frames) {
  for (std::size_t i = 0; i < frames.size(); ++i) {
    const auto& f = frames[i];
    require(std::isfinite(f.timestamp()), "trace timestamps must be finite");
    require(i == 0 || frames[i - 1].timestamp() <= f.timestamp(),
            "trace frames must be timestamp-ordered");
    out << "t=" << format_double(f.timestamp());
    for (const auto& r : f.readings()) {
      require(std::isfinite(r.dbm), "RSS values must be finite");
      out << ' ' << r.stream.name << '=' << format_double(r.dbm);
    }
    out << '\n';
  }
}

std::vector<RssFrame> load_trace(const std::filesystem::path& path) {
  auto in = text::open_input(path);
  try {
    return read_trace(in);
  } catch (const Error& e) {
    if (e.code() == ErrorCode::format) {
      throw_error(ErrorCode::format, path.string() + ": " + e.what());
    }
    throw;
  }
}

void save_trace(const std::vector<RssFrame>& frames, const std::filesystem::path& path) {
  auto out = text::open_output(path);
  write_trace(out, frames);
  text::finish_output(out, path);
}

std::vector<GroundTruthFrame> read_ground_truth(std::istream& in) {
  return read_lines<GroundTruthFrame>(in, parse_truth_line);
}

void write_ground_truth(std::ostream& out, const std::vector<GroundTruthFrame>& frames) {
  for (const auto& f : frames) {
    out << "t=" << format_double(f.timestamp);
    for (const auto& e : f.entities) {
      out << ' ' << e.id << ':' << format_double(e.x) << ',' << format_double(e.y);
    }
    out << '\n';
  }
}

std::vector<GroundTruthFrame> load_ground_truth(const std::filesystem::path& path) {
  auto in = text::open_input(path);
  try {
    return read_ground_truth(in);
  } catch (const Error& e) {
    if (e.code() == ErrorCode::format) {
      throw_error(ErrorCode::format, path.string() + ": " + e.what());
    }
    throw;
  }
}

void save_ground_truth(const std::vector<GroundTruthFrame>& frames,
                       const std::filesystem::path& path) {
  auto out = text::open_output(path);
  write_ground_truth(out, frames);
  text::finish_output(out, path);
}

}  // namespace dfloc
