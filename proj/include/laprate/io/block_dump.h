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

#ifndef LAPRATE_IO_BLOCK_DUMP_H_
#define LAPRATE_IO_BLOCK_DUMP_H_

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include "laprate/blockmath.h"
#include "laprate/error.h"

namespace laprate::io {

// Block dump layout, all integers unsigned little-endian:
//
//   offset  size  field
//        0     4  magic "RDB1"
//        4     2  version (1)
//        6     2  domain flag: 0 = pixel residuals, 1 = scaled coefficients
//        8     2  M
//       10     2  N
//       12     2  reserved (0)
//       14     8  Q, IEEE-754 binary64
//       22     8  block count
//       30        records: frame id u32, block id u32, K binary64 values

inline constexpr std::array<char, 4> kDumpMagic = {'R', 'D', 'B', '1'};
inline constexpr uint16_t kDumpVersion = 1;
inline constexpr std::size_t kDumpHeaderSize = 30;

struct BlockDumpHeader {
  Domain domain = Domain::kScaledCoefficient;
  int rows = 8;
  int cols = 8;
  double q = 1.0;
  uint64_t block_count = 0;

  BlockShape shape() const { return BlockShape(rows, cols); }
  std::size_t record_size() const {
    return 8 + 8 * static_cast<std::size_t>(rows) * cols;
  }
};

struct BlockRecord {
  uint32_t frame_id = 0;
  uint32_t block_id = 0;
  BlockData block;
};

namespace detail {

inline Error format_error(const std::string& what, uint64_t offset) {
  return Error(ErrorCode::kFormat,
               what + " (byte offset " + std::to_string(offset) + ")");
}

template <typename T>
void put_le(std::string& out, T value) {
  for (std::size_t i = 0; i < sizeof(T); ++i)
    out.push_back(static_cast<char>((static_cast<uint64_t>(value) >> (8 * i)) & 0xFF));
}

template <typename T>
T get_le(const unsigned char* p) {
  uint64_t v = 0;
  for (std::size_t i = 0; i < sizeof(T); ++i) v |= static_cast<uint64_t>(p[i]) << (8 * i);
  return static_cast<T>(v);
}

inline uint16_t domain_flag(Domain d) {
  switch (d) {
    case Domain::kPixelResidual: return 0;
    case Domain::kScaledCoefficient: return 1;
    case Domain::kTransformCoefficient: break;
  }
  throw Error(ErrorCode::kInvalidArgument,
              "block dumps carry pixel residuals or scaled coefficients only");
}

}  // namespace detail

inline std::string encode_header(const BlockDumpHeader& h) {
  check_arg(h.rows >= 1 && h.rows <= 0xFFFF && h.cols >= 1 && h.cols <= 0xFFFF,
            "block shape does not fit the dump header");
  std::string out(kDumpMagic.begin(), kDumpMagic.end());
  detail::put_le<uint16_t>(out, kDumpVersion);
  detail::put_le<uint16_t>(out, detail::domain_flag(h.domain));
  detail::put_le<uint16_t>(out, static_cast<uint16_t>(h.rows));
  detail::put_le<uint16_t>(out, static_cast<uint16_t>(h.cols));
  detail::put_le<uint16_t>(out, 0);
  detail::put_le<uint64_t>(out, std::bit_cast<uint64_t>(h.q));
  detail::put_le<uint64_t>(out, h.block_count);
  return out;
}

inline std::string encode_record(const BlockRecord& r) {
  std::string out;
  detail::put_le<uint32_t>(out, r.frame_id);
  detail::put_le<uint32_t>(out, r.block_id);
  for (double v : r.block.values) detail::put_le<uint64_t>(out, std::bit_cast<uint64_t>(v));
  return out;
}

// Writes a complete dump; header.block_count is taken from records.
inline void write_block_dump(const std::string& path, BlockDumpHeader header,
                             const std::vector<BlockRecord>& records) {
  header.block_count = records.size();
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::kIo, "cannot open " + path + " for writing");
  const std::string head = encode_header(header);
  out.write(head.data(), static_cast<std::streamsize>(head.size()));
  for (const auto& r : records) {
    check_arg(r.block.shape == header.shape(), "record shape != header shape");
    check_arg(r.block.domain == header.domain, "record domain != header domain");
    const std::string rec = encode_record(r);
    out.write(rec.data(), static_cast<std::streamsize>(rec.size()));
  }
  if (!out) throw Error(ErrorCode::kIo, "write failed for " + path);
}

// Streaming reader. The header is validated on open; next() yields records
// in file order and validates each one as it is read.
class BlockDumpReader {
 public:
  explicit BlockDumpReader(const std::string& path)
      : in_(path, std::ios::binary) {
    if (!in_) throw Error(ErrorCode::kIo, "cannot open " + path);
    std::array<unsigned char, kDumpHeaderSize> buf{};
    in_.read(reinterpret_cast<char*>(buf.data()), buf.size());
    const auto got = static_cast<std::size_t>(in_.gcount());
    if (got < 4 || !std::equal(kDumpMagic.begin(), kDumpMagic.end(), buf.begin()))
      throw detail::format_error("bad magic, expected RDB1", 0);
    if (got < kDumpHeaderSize) throw detail::format_error("truncated header", got);
    if (detail::get_le<uint16_t>(&buf[4]) != kDumpVersion)
      throw detail::format_error("unsupported version", 4);
    switch (detail::get_le<uint16_t>(&buf[6])) {
      case 0: header_.domain = Domain::kPixelResidual; break;
      case 1: header_.domain = Domain::kScaledCoefficient; break;
      default: throw detail::format_error("unknown domain flag", 6);
    }
    header_.rows = detail::get_le<uint16_t>(&buf[8]);
    header_.cols = detail::get_le<uint16_t>(&buf[10]);
    if (header_.rows == 0 || header_.cols == 0)
      throw detail::format_error("zero block dimension", 8);
    header_.q = std::bit_cast<double>(detail::get_le<uint64_t>(&buf[14]));
    if (!(header_.q > 0.0) || !std::isfinite(header_.q))
      throw detail::format_error("quantizer step must be positive and finite", 14);
    header_.block_count = detail::get_le<uint64_t>(&buf[22]);
    offset_ = kDumpHeaderSize;
    record_.resize(header_.record_size());
  }

  const BlockDumpHeader& header() const { return header_; }

  std::optional<BlockRecord> next() {
    if (index_ == header_.block_count) {
      if (in_.peek() != std::char_traits<char>::eof())
        throw detail::format_error(
            "trailing data after " + std::to_string(index_) + " declared records",
            offset_);
      return std::nullopt;
    }
    in_.read(reinterpret_cast<char*>(record_.data()),
             static_cast<std::streamsize>(record_.size()));
    if (static_cast<std::size_t>(in_.gcount()) != record_.size())
      throw detail::format_error("truncated record " + std::to_string(index_),
                                 offset_ + static_cast<uint64_t>(in_.gcount()));
    BlockRecord rec{detail::get_le<uint32_t>(&record_[0]),
                    detail::get_le<uint32_t>(&record_[4]),
                    BlockData(header_.shape(), header_.domain,
                              std::vector<double>(header_.shape().size(), 0.0))};
    for (std::size_t k = 0; k < rec.block.values.size(); ++k) {
      const double v = std::bit_cast<double>(detail::get_le<uint64_t>(&record_[8 + 8 * k]));
      if (!std::isfinite(v))
        throw detail::format_error("non-finite value in record " + std::to_string(index_),
                                   offset_ + 8 + 8 * k);
      rec.block.values[k] = v;
    }
    offset_ += record_.size();
    ++index_;
    return rec;
  }

 private:
  std::ifstream in_;
  BlockDumpHeader header_;
  std::vector<unsigned char> record_;
  uint64_t index_ = 0;
  uint64_t offset_ = 0;
};

inline std::pair<BlockDumpHeader, std::vector<BlockRecord>> read_block_dump(
    const std::string& path) {
  BlockDumpReader reader(path);
  std::vector<BlockRecord> records;
  while (auto rec = reader.next()) records.push_back(std::move(*rec));
  return {reader.header(), std::move(records)};
}

}  // namespace laprate::io

#endif  // LAPRATE_IO_BLOCK_DUMP_H_
