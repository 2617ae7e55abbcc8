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

#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>
#include <string>

#include <boost/crc.hpp>

#include "dfloc/fingerprint.hpp"

namespace dfloc {

namespace {

constexpr char kMagic[6] = {'S', 'P', 'O', 'T', 'F', 'P'};

class Writer {
 public:
  void u8(std::uint8_t v) { bytes_.push_back(v); }
  void u16(std::uint16_t v) { put(v, 2); }
  void u32(std::uint32_t v) { put(v, 4); }
  void u64(std::uint64_t v) { put(v, 8); }
  void f64(double v) { u64(std::bit_cast<std::uint64_t>(v)); }
  void str(const std::string& s) {
    u32(static_cast<std::uint32_t>(s.size()));
    bytes_.insert(bytes_.end(), s.begin(), s.end());
  }
  void raw(std::span<const std::uint8_t> b) { bytes_.insert(bytes_.end(), b.begin(), b.end()); }

  std::vector<std::uint8_t>& bytes() { return bytes_; }

 private:
  void put(std::uint64_t v, int width) {
    for (int i = 0; i < width; ++i) bytes_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
  }
  std::vector<std::uint8_t> bytes_;
};

class Reader {
 public:
  explicit Reader(std::span<const std::uint8_t> bytes) : bytes_(bytes) {}

  std::uint8_t u8() { return static_cast<std::uint8_t>(get(1)); }
  std::uint16_t u16() { return static_cast<std::uint16_t>(get(2)); }
  std::uint32_t u32() { return static_cast<std::uint32_t>(get(4)); }
  std::uint64_t u64() { return get(8); }
  double f64() { return std::bit_cast<double>(u64()); }
  std::size_t count(std::size_t element_size) {
    const std::uint64_t c = u64();
    if (c > remaining() / std::max<std::size_t>(element_size, 1)) corrupt("implausible count");
    return static_cast<std::size_t>(c);
  }
  std::string str() {
    const std::uint32_t len = u32();
    need(len);
    std::string s(reinterpret_cast<const char*>(bytes_.data() + pos_), len);
    pos_ += len;
    return s;
  }
  std::span<const std::uint8_t> take(std::size_t n) {
    need(n);
    auto s = bytes_.subspan(pos_, n);
    pos_ += n;
    return s;
  }
  std::size_t remaining() const { return bytes_.size() - pos_; }

  [[noreturn]] static void corrupt(const std::string& what) {
    throw_error(ErrorCode::corrupt, "corrupt fingerprint: " + what);
  }

 private:
  void need(std::size_t n) const {
    if (remaining() < n) corrupt("truncated data");
  }
  std::uint64_t get(int width) {
    need(static_cast<std::size_t>(width));
    std::uint64_t v = 0;
    for (int i = 0; i < width; ++i) v |= static_cast<std::uint64_t>(bytes_[pos_ + i]) << (8 * i);
    pos_ += static_cast<std::size_t>(width);
    return v;
  }

  std::span<const std::uint8_t> bytes_;
  std::size_t pos_ = 0;
};

std::uint32_t crc32(std::span<const std::uint8_t> bytes) {
  boost::crc_32_type crc;
  crc.process_bytes(bytes.data(), bytes.size());
  return crc.checksum();
}

void write_params(Writer& w, const ModelParams& p) {
  w.f64(p.beta);
  w.f64(p.gamma);
  w.f64(p.delta);
  w.u64(p.q);
  w.f64(p.alpha_trim);
  w.f64(p.anova_significance);
  w.u64(p.anova_window);
  w.f64(p.hist_bin_width);
  w.f64(p.hist_smooth_sigma);
  w.f64(p.hist_floor);
  w.u64(p.w);
  w.f64(p.r);
  w.f64(p.cluster_scale);
  w.u32(static_cast<std::uint32_t>(p.hmm_order));
  w.u8(p.contrast == ContrastMode::literal ? 1 : 0);
}

ModelParams read_params(Reader& r) {
  ModelParams p;
  p.beta = r.f64();
  p.gamma = r.f64();
  p.delta = r.f64();
  p.q = r.u64();
  p.alpha_trim = r.f64();
  p.anova_significance = r.f64();
  p.anova_window = r.u64();
  p.hist_bin_width = r.f64();
  p.hist_smooth_sigma = r.f64();
  p.hist_floor = r.f64();
  p.w = r.u64();
  p.r = r.f64();
  p.cluster_scale = r.f64();
  p.hmm_order = static_cast<int>(r.u32());
  const auto contrast = r.u8();
  if (contrast > 1) Reader::corrupt("unknown contrast mode");
  p.contrast = contrast == 1 ? ContrastMode::literal : ContrastMode::normalized;
  return p;
}

void write_histogram(Writer& w, const RssHistogram& h) {
  w.f64(h.bin_width());
  w.f64(h.origin());
  w.u64(h.samples());
  w.u64(h.bins());
  for (double p : h.probabilities()) w.f64(p);
}

RssHistogram read_histogram(Reader& r) {
  const double width = r.f64();
  const double origin = r.f64();
  const std::uint64_t samples = r.u64();
  const std::size_t bins = r.count(8);
  std::vector<double> probs(bins);
  for (double& p : probs) p = r.f64();
  return RssHistogram(width, origin, std::move(probs), samples);
}

std::vector<std::uint8_t> payload_of(const Fingerprint& fp) {
  Writer w;
  write_params(w, fp.params());

  const Grid& grid = fp.grid();
  w.f64(grid.width());
  w.f64(grid.height());
  w.u64(grid.size());
  for (const auto& loc : grid.locations()) {
    w.f64(loc.x);
    w.f64(loc.y);
  }
  w.u64(grid.edges().size());
  for (auto [a, b] : grid.edges()) {
    w.u64(a);
    w.u64(b);
  }

  w.u64(fp.streams().size());
  for (const auto& s : fp.streams()) w.str(s.name);

  for (std::size_t h = 0; h < 4; ++h) {
    w.u64(fp.temporal().ones[h]);
    w.u64(fp.temporal().totals[h]);
  }

  for (std::size_t loc = 0; loc < fp.size(); ++loc) {
    for (std::size_t s = 0; s < fp.streams().size(); ++s) {
      write_histogram(w, fp.histogram(loc, s, true));
      write_histogram(w, fp.histogram(loc, s, false));
      const auto& st = fp.offline_stats(loc, s);
      w.u64(st.count);
      w.f64(st.mean);
      w.f64(st.m2);
    }
  }
  return std::move(w.bytes());
}

Fingerprint fingerprint_of(std::span<const std::uint8_t> payload) {
  Reader r(payload);
  const ModelParams params = read_params(r);

  const double width = r.f64();
  const double height = r.f64();
  const std::size_t n = r.count(16);
  std::vector<GridLocation> locations;
  for (std::size_t i = 0; i < n; ++i) {
    const double x = r.f64();
    const double y = r.f64();
    locations.push_back({i, x, y});
  }
  const std::size_t edge_count = r.count(16);
  std::vector<std::pair<std::size_t, std::size_t>> edges;
  for (std::size_t e = 0; e < edge_count; ++e) {
    const auto a = static_cast<std::size_t>(r.u64());
    const auto b = static_cast<std::size_t>(r.u64());
    edges.emplace_back(a, b);
  }
  Grid grid(std::move(locations), std::move(edges), width, height);

  const std::size_t k = r.count(4);
  std::vector<StreamId> streams;
  for (std::size_t s = 0; s < k; ++s) streams.push_back({r.str()});

  TemporalPrior temporal;
  for (std::size_t h = 0; h < 4; ++h) {
    temporal.ones[h] = r.u64();
    temporal.totals[h] = r.u64();
  }

  std::vector<LocationFingerprint> locs(n);
  std::vector<std::vector<preprocess::SampleStats>> stats(n);
  for (std::size_t loc = 0; loc < n; ++loc) {
    locs[loc].location = grid[loc];
    for (std::size_t s = 0; s < k; ++s) {
      locs[loc].active.push_back(read_histogram(r));
      locs[loc].inactive.push_back(read_histogram(r));
      preprocess::SampleStats st;
      st.count = r.u64();
      st.mean = r.f64();
      st.m2 = r.f64();
      stats[loc].push_back(st);
    }
  }
  if (r.remaining() != 0) Reader::corrupt("trailing bytes in payload");
  return Fingerprint(std::move(grid), std::move(streams), std::move(locs), temporal, params,
                     std::move(stats));
}

}  // namespace

std::vector<std::uint8_t> serialize_fingerprint(const Fingerprint& fp) {
  const auto payload = payload_of(fp);
  Writer w;
  w.raw({reinterpret_cast<const std::uint8_t*>(kMagic), sizeof(kMagic)});
  w.u16(kFingerprintVersion);
  w.u64(payload.size());
  w.raw(payload);
  w.u32(crc32(payload));
  return std::move(w.bytes());
}

Fingerprint deserialize_fingerprint(std::span<const std::uint8_t> bytes) {
  Reader r(bytes);
  const auto magic = r.take(sizeof(kMagic));
  if (std::memcmp(magic.data(), kMagic, sizeof(kMagic)) != 0) {
    Reader::corrupt("bad magic bytes");
  }
  const std::uint16_t version = r.u16();
  if (version != kFingerprintVersion) {
    throw_error(ErrorCode::version, "unsupported fingerprint version " + std::to_string(version) +
                                        " (expected " + std::to_string(kFingerprintVersion) + ")");
  }
  const std::uint64_t length = r.u64();
  if (length > r.remaining()) Reader::corrupt("truncated payload");
  const auto payload = r.take(static_cast<std::size_t>(length));
  const std::uint32_t stored = r.u32();
  if (r.remaining() != 0) Reader::corrupt("trailing bytes after checksum");
  if (stored != crc32(payload)) Reader::corrupt("checksum mismatch");
  try {
    return fingerprint_of(payload);
  } catch (const Error& e) {
    if (e.code() == ErrorCode::corrupt) throw;
    throw_error(ErrorCode::corrupt, std::string("corrupt fingerprint: ") + e.what());
  }
}

void save_fingerprint(const Fingerprint& fp, const std::filesystem::path& path) {
  const auto bytes = serialize_fingerprint(fp);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw_error(ErrorCode::io, "cannot open '" + path.string() + "' for writing");
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  out.flush();
  if (!out) throw_error(ErrorCode::io, "write to '" + path.string() + "' failed");
}

Fingerprint load_fingerprint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw_error(ErrorCode::io, "cannot open '" + path.string() + "' for reading");
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                  std::istreambuf_iterator<char>());
  if (in.bad()) throw_error(ErrorCode::io, "read failure on '" + path.string() + "'");
  return deserialize_fingerprint(bytes);
}

}  // namespace dfloc
