// Copyright 2026 The Ginibre Overlaps Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//    http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cerrno>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "ginibre/mc.hpp"
#include "ginibre/types.hpp"

// Record files (JSON lines, hex-float numbers), CSV series and JSON reports.
namespace ginibre {

inline constexpr const char* kRecordFormat = "ginibre-records";
inline constexpr int kRecordVersion = 1;
inline constexpr const char* kGeneratorId =
    "ginibre-overlaps 1.0.0; mt19937_64/seed_seq";

// Raised for unreadable, unwritable or malformed files.
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Shortest hexadecimal representation; parses back to the identical double.
inline std::string hex_double(double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%a", x);
  return buf;
}

inline double parse_hex_double(const std::string& s) {
  errno = 0;
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (end == s.c_str() || *end != '\0') {
    throw IoError("malformed floating-point field '" + s + "'");
  }
  return v;
}

struct RecordHeader {
  std::string format = kRecordFormat;
  int version = kRecordVersion;
  EnsembleKind kind = EnsembleKind::GinOE;
  int n = 2;
  std::uint64_t master_seed = 0;
  std::int64_t requested_samples = 0;
  std::int64_t samples = 0;  // accepted matrices
  std::int64_t rejected = 0;
  double reject_threshold = 1e12;
  std::string generator = kGeneratorId;

  bool operator==(const RecordHeader&) const = default;
};

inline std::string header_line(const RecordHeader& h) {
  // Fixed key order keeps files byte-stable.
  std::string s = "{\"format\":\"" + h.format + "\",\"version\":" + std::to_string(h.version) +
                  ",\"ensemble\":\"" + std::string(to_string(h.kind)) + "\",\"n\":" + std::to_string(h.n) +
                  ",\"master_seed\":" + std::to_string(h.master_seed) +
                  ",\"requested_samples\":" + std::to_string(h.requested_samples) +
                  ",\"samples\":" + std::to_string(h.samples) +
                  ",\"rejected\":" + std::to_string(h.rejected) +
                  ",\"reject_threshold\":\"" + hex_double(h.reject_threshold) +
                  "\",\"generator\":" + nlohmann::json(h.generator).dump() + "}";
  return s;
}

inline std::string record_line(const SpectralDatum& d) {
  return "{\"sample\":" + std::to_string(d.sample_index) +
         ",\"eigen\":" + std::to_string(d.eigen_index) + ",\"re\":\"" + hex_double(d.z.re) +
         "\",\"im\":\"" + hex_double(d.z.im) + "\",\"overlap\":\"" +
         hex_double(d.self_overlap) + "\",\"real\":" + (d.is_real ? "true" : "false") + "}";
}

inline RecordHeader parse_header(const std::string& line) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(line);
  } catch (const nlohmann::json::exception& e) {
    throw IoError(std::string("record header is not valid JSON: ") + e.what());
  }
  try {
    RecordHeader h;
    h.format = j.at("format").get<std::string>();
    if (h.format != kRecordFormat) throw IoError("not a record file (format " + h.format + ")");
    h.version = j.at("version").get<int>();
    if (h.version != kRecordVersion) {
      throw IoError("unsupported record version " + std::to_string(h.version));
    }
    h.kind = parse_ensemble(j.at("ensemble").get<std::string>());
    h.n = j.at("n").get<int>();
    h.master_seed = j.at("master_seed").get<std::uint64_t>();
    h.requested_samples = j.at("requested_samples").get<std::int64_t>();
    h.samples = j.at("samples").get<std::int64_t>();
    h.rejected = j.at("rejected").get<std::int64_t>();
    h.reject_threshold = parse_hex_double(j.at("reject_threshold").get<std::string>());
    h.generator = j.at("generator").get<std::string>();
    return h;
  } catch (const nlohmann::json::exception& e) {
    throw IoError(std::string("record header field error: ") + e.what());
  } catch (const std::invalid_argument& e) {
    throw IoError(std::string("record header field error: ") + e.what());
  }
}

inline SpectralDatum parse_record(const std::string& line) {
  try {
    const auto j = nlohmann::json::parse(line);
    SpectralDatum d;
    d.sample_index = j.at("sample").get<std::int64_t>();
    d.eigen_index = j.at("eigen").get<std::int32_t>();
    d.z.re = parse_hex_double(j.at("re").get<std::string>());
    d.z.im = parse_hex_double(j.at("im").get<std::string>());
    d.self_overlap = parse_hex_double(j.at("overlap").get<std::string>());
    d.is_real = j.at("real").get<bool>();
    return d;
  } catch (const nlohmann::json::exception& e) {
    throw IoError(std::string("malformed record line: ") + e.what());
  }
}

struct RecordFile {
  RecordHeader header;
  std::vector<SpectralDatum> rows;
};

inline void write_record_file(const std::filesystem::path& path, const RecordFile& file) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
  out << header_line(file.header) << '\n';
  for (const auto& d : file.rows) out << record_line(d) << '\n';
  out.flush();
  if (!out) throw IoError("write to '" + path.string() + "' failed");
}

inline RecordFile read_record_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path.string() + "' for reading");
  RecordFile f;
  std::string line;
  if (!std::getline(in, line)) throw IoError("'" + path.string() + "' is empty");
  f.header = parse_header(line);
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    f.rows.push_back(parse_record(line));
  }
  if (in.bad()) throw IoError("read from '" + path.string() + "' failed");
  return f;
}

// Streams a campaign into a record file. Rows go to a side file first because
// the header carries counts known only at the end.
class RecordWriter {
 public:
  explicit RecordWriter(std::filesystem::path path)
      : path_(std::move(path)), rows_path_(path_.string() + ".rows.tmp") {
    rows_.open(rows_path_, std::ios::binary | std::ios::trunc);
    if (!rows_) throw IoError("cannot open '" + rows_path_.string() + "' for writing");
  }

  RecordWriter(const RecordWriter&) = delete;
  RecordWriter& operator=(const RecordWriter&) = delete;

  ~RecordWriter() {
    if (!finished_) {
      rows_.close();
      std::error_code ec;
      std::filesystem::remove(rows_path_, ec);
    }
  }

  void append(const std::vector<SpectralDatum>& data) {
    for (const auto& d : data) rows_ << record_line(d) << '\n';
    if (!rows_) throw IoError("write to '" + rows_path_.string() + "' failed");
  }

  void finish(const RecordHeader& header) {
    rows_.close();
    if (!rows_) throw IoError("write to '" + rows_path_.string() + "' failed");
    {
      std::ofstream out(path_, std::ios::binary | std::ios::trunc);
      if (!out) throw IoError("cannot open '" + path_.string() + "' for writing");
      out << header_line(header) << '\n';
      std::ifstream in(rows_path_, std::ios::binary);
      if (!in) throw IoError("cannot reopen '" + rows_path_.string() + "'");
      out << in.rdbuf();
      out.flush();
      if (!out) throw IoError("write to '" + path_.string() + "' failed");
    }
    std::error_code ec;
    std::filesystem::remove(rows_path_, ec);
    finished_ = true;
  }

 private:
  std::filesystem::path path_;
  std::filesystem::path rows_path_;
  std::ofstream rows_;
  bool finished_ = false;
};

inline RecordHeader header_for(const CampaignSummary& s) {
  RecordHeader h;
  h.kind = s.config.kind;
  h.n = s.config.n;
  h.master_seed = s.config.master_seed;
  h.requested_samples = s.config.samples;
  h.samples = s.accepted;
  h.rejected = s.rejected;
  h.reject_threshold = s.config.reject_threshold;
  const EigenBackend b =
      s.config.kind == EnsembleKind::GinOE ? real_backend() : complex_backend();
  h.generator += b == EigenBackend::Lapack ? "; LAPACK geev" : "; Eigen QR";
  return h;
}

// CSV with '#'-prefixed metadata lines ahead of the column header.
class CsvWriter {
 public:
  CsvWriter(const std::filesystem::path& path,
            const std::vector<std::pair<std::string, std::string>>& metadata,
            const std::vector<std::string>& columns)
      : path_(path), width_(columns.size()) {
    out_.open(path, std::ios::binary | std::ios::trunc);
    if (!out_) throw IoError("cannot open '" + path.string() + "' for writing");
    for (const auto& [k, v] : metadata) out_ << "# " << k << ": " << v << '\n';
    for (std::size_t i = 0; i < columns.size(); ++i) {
      out_ << (i ? "," : "") << columns[i];
    }
    out_ << '\n';
  }

  void row(const std::vector<double>& values) {
    if (values.size() != width_) throw std::invalid_argument("CsvWriter: row width mismatch");
    char buf[40];
    for (std::size_t i = 0; i < values.size(); ++i) {
      std::snprintf(buf, sizeof buf, "%.17g", values[i]);
      out_ << (i ? "," : "") << buf;
    }
    out_ << '\n';
  }

  void close() {
    out_.close();
    if (!out_) throw IoError("write to '" + path_.string() + "' failed");
  }

 private:
  std::filesystem::path path_;
  std::size_t width_;
  std::ofstream out_;
};

inline void write_text_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
  out << text;
  out.flush();
  if (!out) throw IoError("write to '" + path.string() + "' failed");
}

inline void write_json_file(const std::filesystem::path& path, const nlohmann::json& j) {
  write_text_file(path, j.dump(2) + "\n");
}

}  // namespace ginibre
