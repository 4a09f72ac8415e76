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


#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>
#include <string>

#include <gtest/gtest.h>

#include "ginibre/io.hpp"
#include "ginibre/mc.hpp"

namespace ginibre {
namespace {

namespace fs = std::filesystem;

class TempDir : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("ginibre_io_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  static std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
  }

  fs::path dir_;
};

TEST(HexDouble, RoundTripsBitExactly) {
  const double values[] = {0.0, -0.0, 1.0, 1.0 / 3.0, -2.5e-300, 4.9e-324, 1.7976931348623157e308,
                           3.14159265358979, std::numeric_limits<double>::infinity()};
  for (double v : values) {
    const double back = parse_hex_double(hex_double(v));
    EXPECT_EQ(std::signbit(back), std::signbit(v));
    EXPECT_EQ(back, v) << hex_double(v);
  }
  EXPECT_TRUE(std::isnan(parse_hex_double(hex_double(std::nan("")))));
  EXPECT_EQ(hex_double(1.0), "0x1p+0");
  EXPECT_THROW(parse_hex_double("0x1p+0junk"), IoError);
  EXPECT_THROW(parse_hex_double(""), IoError);
}

TEST(RecordLines, RoundTrip) {
  SpectralDatum d;
  d.z = {-0.1, 2.0 / 7.0};
  d.self_overlap = 1.0 + 1e-13;
  d.is_real = true;
  d.sample_index = 1234567890123;
  d.eigen_index = 17;
  EXPECT_EQ(parse_record(record_line(d)), d);
  RecordHeader h;
  h.kind = EnsembleKind::GinUE;
  h.n = 250;
  h.master_seed = 0xffffffffffffffffULL;
  h.requested_samples = 10;
  h.samples = 9;
  h.rejected = 1;
  h.reject_threshold = 1e10;
  h.generator = "x \"quoted\"";
  EXPECT_EQ(parse_header(header_line(h)), h);
}

TEST(RecordLines, MalformedInput) {
  EXPECT_THROW(parse_header("not json"), IoError);
  EXPECT_THROW(parse_header("{\"format\":\"other\",\"version\":1}"), IoError);
  RecordHeader h;
  std::string line = header_line(h);
  line.replace(line.find("\"version\":1"), 11, "\"version\":9");
  EXPECT_THROW(parse_header(line), IoError);
  EXPECT_THROW(parse_record("{\"sample\":0}"), IoError);
  EXPECT_THROW(parse_record("{\"sample\":0,\"eigen\":0,\"re\":\"zz\",\"im\":\"0x0p+0\","
                            "\"overlap\":\"0x1p+0\",\"real\":false}"),
               IoError);
}

TEST_F(TempDir, CampaignFileIsLosslessAndStable) {
  EnsembleConfig c;
  c.n = 9;
  c.samples = 12;
  c.master_seed = 41;
  auto write = [&](const fs::path& p) {
    RecordWriter w(p);
    const auto s = run_campaign(c, [&](const std::vector<SpectralDatum>& d) { w.append(d); });
    w.finish(header_for(s));
    return s;
  };
  const auto s = write(dir_ / "a.jsonl");
  write(dir_ / "b.jsonl");
  EXPECT_EQ(slurp(dir_ / "a.jsonl"), slurp(dir_ / "b.jsonl"));
  EXPECT_FALSE(fs::exists(dir_ / "a.jsonl.rows.tmp"));

  const auto f = read_record_file(dir_ / "a.jsonl");
  EXPECT_EQ(f.header.n, 9);
  EXPECT_EQ(f.header.samples, s.accepted);
  EXPECT_EQ(f.header.master_seed, 41u);
  EXPECT_EQ(f.header.generator.rfind(kGeneratorId, 0), 0u);
  const auto direct = collect_campaign(c).first;
  EXPECT_EQ(f.rows, direct);

  write_record_file(dir_ / "c.jsonl", f);
  EXPECT_EQ(slurp(dir_ / "a.jsonl"), slurp(dir_ / "c.jsonl"));
}

TEST_F(TempDir, AbandonedWriterLeavesNoTempFile) {
  {
    RecordWriter w(dir_ / "x.jsonl");
    w.append({SpectralDatum{}});
  }
  EXPECT_FALSE(fs::exists(dir_ / "x.jsonl.rows.tmp"));
  EXPECT_FALSE(fs::exists(dir_ / "x.jsonl"));
}

TEST_F(TempDir, ReadErrors) {
  EXPECT_THROW(read_record_file(dir_ / "missing.jsonl"), IoError);
  write_text_file(dir_ / "empty.jsonl", "");
  EXPECT_THROW(read_record_file(dir_ / "empty.jsonl"), IoError);
  write_text_file(dir_ / "bad.jsonl", header_line(RecordHeader{}) + "\n{broken\n");
  EXPECT_THROW(read_record_file(dir_ / "bad.jsonl"), IoError);
  EXPECT_THROW(write_text_file(dir_ / "no" / "such" / "dir.txt", "x"), IoError);
}

TEST_F(TempDir, CsvLayout) {
  CsvWriter w(dir_ / "t.csv", {{"formula", "test"}, {"n", "5"}}, {"x", "y"});
  w.row({0.5, 1.0 / 3.0});
  EXPECT_THROW(w.row({1.0}), std::invalid_argument);
  w.close();
  EXPECT_EQ(slurp(dir_ / "t.csv"),
            "# formula: test\n# n: 5\nx,y\n0.5,0.33333333333333331\n");
}

TEST_F(TempDir, JsonReport) {
  write_json_file(dir_ / "r.json", {{"passed", true}});
  EXPECT_EQ(nlohmann::json::parse(slurp(dir_ / "r.json"))["passed"], true);
}

}  // namespace
}  // namespace ginibre
