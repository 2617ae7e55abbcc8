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

// Line-oriented text formats. One record per line, '#' comment lines and
// blank lines are skipped:
//
//   trace:         t=<float> <stream_id>=<dbm> <stream_id>=<dbm> ...
//   ground truth:  t=<float> <entity_id>:<x>,<y> ...
//
// Timestamps must be nondecreasing. Numbers are written in shortest
// round-trip form so save followed by load is exact.

#ifndef DFLOC_TRACE_IO_HPP
#define DFLOC_TRACE_IO_HPP

#include <filesystem>
#include <fstream>
#include <string_view>
#include <vector>

#include "dfloc/core.hpp"

namespace dfloc {

std::vector<RssFrame> read_trace(std::istream& in);
void write_trace(std::ostream& out, const std::vector<RssFrame>& frames);
std::vector<RssFrame> load_trace(const std::filesystem::path& path);
void save_trace(const std::vector<RssFrame>& frames, const std::filesystem::path& path);

std::vector<GroundTruthFrame> read_ground_truth(std::istream& in);
void write_ground_truth(std::ostream& out, const std::vector<GroundTruthFrame>& frames);
std::vector<GroundTruthFrame> load_ground_truth(const std::filesystem::path& path);
void save_ground_truth(const std::vector<GroundTruthFrame>& frames,
                       const std::filesystem::path& path);

// Shared helpers for the other line formats.
namespace text {

std::vector<std::string_view> split_tokens(std::string_view line);
// True for blank and '#' lines.
bool skippable(std::string_view line);
// Parses the leading `t=<float>` token.
double parse_timestamp(std::string_view token, std::size_t line_no);
[[noreturn]] void format_error(std::size_t line_no, const std::string& what);

std::ifstream open_input(const std::filesystem::path& path);
std::ofstream open_output(const std::filesystem::path& path);
void finish_output(std::ofstream& out, const std::filesystem::path& path);

}  // namespace text

}  // namespace dfloc

#endif  // DFLOC_TRACE_IO_HPP
