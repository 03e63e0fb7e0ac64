// Copyright 2026 The laprate Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <gtest/gtest.h>

#include <bit>
#include <cmath>
#include <cstring>
#include <set>

#include "laprate/io/block_dump.h"
#include "laprate/io/records.h"
#include "laprate/random.h"
#include "test_util.h"

namespace laprate::io {
namespace {

using laprate::testing::slurp;
using laprate::testing::spit;
using laprate::testing::temp_path;

std::vector<BlockRecord> random_records(std::size_t count, BlockShape shape, Domain domain,
                                        uint64_t seed) {
  RandomStream rs(seed);
  std::vector<BlockRecord> out;
  for (std::size_t i = 0; i < count; ++i) {
    std::vector<double> v(shape.size());
    for (auto& x : v) x = rs.uniform(-1e3, 1e3);
    out.push_back({static_cast<uint32_t>(i / 10), static_cast<uint32_t>(i),
                   BlockData(shape, domain, std::move(v))});
  }
  return out;
}

std::string expect_format_error(const std::string& path) {
  try {
    read_block_dump(path);
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kFormat) << e.what();
    return e.what();
  }
  ADD_FAILURE() << "expected a format error";
  return {};
}

TEST(BlockDumpTest, HeaderLayout) {
  BlockDumpHeader h;
  h.domain = Domain::kPixelResidual;
  h.rows = 4;
  h.cols = 16;
  h.q = 2.5;
  h.block_count = 7;
  const std::string bytes = encode_header(h);
  ASSERT_EQ(bytes.size(), kDumpHeaderSize);
  EXPECT_EQ(bytes.substr(0, 4), "RDB1");
  const unsigned char expect_prefix[] = {1, 0, 0, 0, 4, 0, 16, 0, 0, 0};
  EXPECT_EQ(std::memcmp(bytes.data() + 4, expect_prefix, sizeof(expect_prefix)), 0);
  uint64_t q_bits = 0;
  std::memcpy(&q_bits, bytes.data() + 14, 8);
  EXPECT_EQ(q_bits, std::bit_cast<uint64_t>(2.5));  // little-endian host
  EXPECT_EQ(static_cast<unsigned char>(bytes[22]), 7);
}

TEST(BlockDumpTest, RoundTripIsBitwise) {
  const BlockShape shape(8, 8);
  const auto records = random_records(100, shape, Domain::kScaledCoefficient, 71);
  BlockDumpHeader h;
  h.q = 8.0;
  const std::string path = temp_path("roundtrip.rdb");
  write_block_dump(path, h, records);
  EXPECT_EQ(slurp(path).size(), kDumpHeaderSize + 100 * (8 + 64 * 8));

  auto [header, back] = read_block_dump(path);
  EXPECT_EQ(header.q, 8.0);
  EXPECT_EQ(header.block_count, 100u);
  EXPECT_EQ(header.domain, Domain::kScaledCoefficient);
  ASSERT_EQ(back.size(), records.size());
  for (std::size_t i = 0; i < records.size(); ++i) {
    EXPECT_EQ(back[i].frame_id, records[i].frame_id);
    EXPECT_EQ(back[i].block_id, records[i].block_id);
    EXPECT_EQ(back[i].block.shape, shape);
    for (std::size_t k = 0; k < 64; ++k)
      EXPECT_EQ(std::bit_cast<uint64_t>(back[i].block.values[k]),
                std::bit_cast<uint64_t>(records[i].block.values[k]));
  }

  // write(read(f)) == f
  const std::string again = temp_path("roundtrip2.rdb");
  write_block_dump(again, header, back);
  EXPECT_EQ(slurp(again), slurp(path));
}

TEST(BlockDumpTest, EmptyFileIsValid) {
  const std::string path = temp_path("empty.rdb");
  BlockDumpHeader h;
  h.domain = Domain::kPixelResidual;
  write_block_dump(path, h, {});
  BlockDumpReader reader(path);
  EXPECT_EQ(reader.header().block_count, 0u);
  EXPECT_EQ(reader.header().domain, Domain::kPixelResidual);
  EXPECT_FALSE(reader.next().has_value());
}

TEST(BlockDumpTest, StreamingReaderYieldsInOrder) {
  const auto records = random_records(5, BlockShape(2, 3), Domain::kPixelResidual, 72);
  BlockDumpHeader h;
  h.domain = Domain::kPixelResidual;
  h.rows = 2;
  h.cols = 3;
  const std::string path = temp_path("stream.rdb");
  write_block_dump(path, h, records);
  BlockDumpReader reader(path);
  for (const auto& r : records) {
    auto got = reader.next();
    ASSERT_TRUE(got.has_value());
    EXPECT_EQ(got->block_id, r.block_id);
    EXPECT_EQ(got->block.values, r.block.values);
  }
  EXPECT_FALSE(reader.next().has_value());
}

class CorruptDumpTest : public ::testing::Test {
 protected:
  void SetUp() override {
    BlockDumpHeader h;
    h.rows = 2;
    h.cols = 2;
    const auto recs = random_records(3, BlockShape(2, 2), Domain::kScaledCoefficient, 73);
    const std::string path = temp_path("good.rdb");
    write_block_dump(path, h, recs);
    good_ = slurp(path);
  }
  std::string write(const std::string& bytes) {
    const std::string path = temp_path("corrupt.rdb");
    spit(path, bytes);
    return path;
  }
  std::string good_;
};

TEST_F(CorruptDumpTest, BadMagic) {
  std::string b = good_;
  b[3] = '2';
  EXPECT_NE(expect_format_error(write(b)).find("magic"), std::string::npos);
  EXPECT_NE(expect_format_error(write("")).find("magic"), std::string::npos);
}

TEST_F(CorruptDumpTest, TruncatedHeader) {
  EXPECT_NE(expect_format_error(write(good_.substr(0, 20))).find("truncated header"),
            std::string::npos);
}

TEST_F(CorruptDumpTest, BadVersionDomainShapeAndQ) {
  std::string b = good_;
  b[4] = 2;
  EXPECT_NE(expect_format_error(write(b)).find("version"), std::string::npos);
  b = good_;
  b[6] = 9;
  EXPECT_NE(expect_format_error(write(b)).find("domain"), std::string::npos);
  b = good_;
  b[8] = 0;
  EXPECT_NE(expect_format_error(write(b)).find("dimension"), std::string::npos);
  b = good_;
  const uint64_t neg = std::bit_cast<uint64_t>(-1.0);
  std::memcpy(b.data() + 14, &neg, 8);
  EXPECT_NE(expect_format_error(write(b)).find("quantizer"), std::string::npos);
}

TEST_F(CorruptDumpTest, TruncatedRecordNamesIndex) {
  const std::size_t cut = kDumpHeaderSize + 2 * 40 + 17;
  const std::string msg = expect_format_error(write(good_.substr(0, cut)));
  EXPECT_NE(msg.find("truncated record 2"), std::string::npos) << msg;
  EXPECT_NE(msg.find("byte offset " + std::to_string(cut)), std::string::npos) << msg;
}

TEST_F(CorruptDumpTest, NonFiniteValue) {
  std::string b = good_;
  const uint64_t nan = std::bit_cast<uint64_t>(std::nan(""));
  const std::size_t at = kDumpHeaderSize + 40 + 8 + 16;
  std::memcpy(b.data() + at, &nan, 8);
  const std::string msg = expect_format_error(write(b));
  EXPECT_NE(msg.find("non-finite value in record 1"), std::string::npos) << msg;
  EXPECT_NE(msg.find("byte offset " + std::to_string(at)), std::string::npos) << msg;
}

TEST_F(CorruptDumpTest, TrailingData) {
  const std::string msg = expect_format_error(write(good_ + "x"));
  EXPECT_NE(msg.find("trailing"), std::string::npos) << msg;
}

TEST(BlockDumpTest, MissingFileIsIoError) {
  try {
    read_block_dump(temp_path("does_not_exist.rdb"));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kIo);
  }
}

TEST(BlockDumpTest, TransformDomainIsNotStorable) {
  BlockDumpHeader h;
  h.domain = Domain::kTransformCoefficient;
  EXPECT_THROW(encode_header(h), Error);
}

TEST(DeriveBlockStreamTest, SameTripleSameStream) {
  auto a = derive_block_stream(9, 3, 4);
  auto b = derive_block_stream(9, 3, 4);
  for (int i = 0; i < 100; ++i) EXPECT_EQ(a.next_u64(), b.next_u64());
}

TEST(DeriveBlockStreamTest, DistinctInputsGiveDistinctFirstWords) {
  std::set<uint64_t> seen;
  for (uint32_t block = 0; block < 10000; ++block)
    seen.insert(derive_block_stream(1, 0, block).next_u64());
  for (uint32_t frame = 1; frame < 100; ++frame)
    seen.insert(derive_block_stream(1, frame, 0).next_u64());
  for (uint64_t seed = 2; seed < 100; ++seed)
    seen.insert(derive_block_stream(seed, 0, 0).next_u64());
  EXPECT_EQ(seen.size(), 10000u + 99u + 98u);
  // frame and block are not interchangeable
  EXPECT_NE(derive_block_stream(1, 2, 3).next_u64(), derive_block_stream(1, 3, 2).next_u64());
}

TEST(RecordTest, FormatAndParse) {
  Record r;
  r.add("frame", 3LL).add("estimator", "proposed").add("rate_bits", 0.1);
  EXPECT_EQ(r.to_line(), "frame:3 estimator:proposed rate_bits:0.1");
  const Record back = Record::parse(r.to_line());
  EXPECT_EQ(back.require_int("frame"), 3);
  EXPECT_EQ(back.require("estimator"), "proposed");
  EXPECT_EQ(back.require_double("rate_bits"), 0.1);
  EXPECT_FALSE(back.has("q"));
  EXPECT_THROW(back.require("q"), Error);
  EXPECT_THROW(Record::parse("frame3"), Error);
  EXPECT_THROW(Record::parse(":3"), Error);
  EXPECT_THROW(back.require_int("estimator"), Error);
}

TEST(RecordTest, DoublesRoundTripExactly) {
  RandomStream rs(74);
  for (int i = 0; i < 10000; ++i) {
    const double v = std::ldexp(rs.uniform(-1.0, 1.0), static_cast<int>(rs.next_u64() % 200) - 100);
    EXPECT_EQ(parse_double(format_double(v)), v);
  }
  EXPECT_EQ(format_double(1.0), "1");
  EXPECT_THROW(parse_double("1.0x"), Error);
  EXPECT_THROW(parse_double(""), Error);
}

TEST(RecordTest, FileRoundTripSkipsCommentsAndBlanks) {
  const std::string path = temp_path("records.txt");
  spit(path, "# header\n\na:1 b:two\n   \nc:3.5\n");
  const auto recs = read_records(path);
  ASSERT_EQ(recs.size(), 2u);
  EXPECT_EQ(recs[0].require("b"), "two");
  EXPECT_EQ(recs[1].require_double("c"), 3.5);

  const std::string out = temp_path("records_out.txt");
  write_records(out, recs);
  EXPECT_EQ(slurp(out), "a:1 b:two\nc:3.5\n");

  spit(path, "a:1\nbroken\n");
  try {
    read_records(path);
    FAIL();
  } catch (const Error& e) {
    EXPECT_NE(std::string(e.what()).find(":2:"), std::string::npos);
  }
}

}  // namespace
}  // namespace laprate::io
