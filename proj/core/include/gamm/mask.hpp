#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "gamm/graph.hpp"

namespace gamm {

/// Binary observation indicator: 1 = observed, 0 = missing. Entries in
/// observed columns are always 1. `provenance` is the JSON text recording
/// the generating mechanism spec and calibration summary; it travels with
/// the mask through the binary format.
class Mask {
 public:
  Mask() = default;
  Mask(std::size_t rows, std::size_t cols, ColumnSplit split);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }

  bool observed(std::size_t i, std::size_t j) const { return bits_[i * cols_ + j] != 0; }
  void set(std::size_t i, std::size_t j, bool is_observed) {
    bits_[i * cols_ + j] = is_observed ? 1 : 0;
  }

  const ColumnSplit& split() const { return split_; }
  const std::vector<std::uint8_t>& bits() const { return bits_; }

  std::size_t missable_count() const;
  std::size_t missing_count() const;

  std::string provenance;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  ColumnSplit split_;
  std::vector<std::uint8_t> bits_;  // one byte per entry in memory
};

/// Fraction of zeros among missable entries (0 when nothing is missable).
double empirical_rate(const Mask& mask);

enum class MaskFormat { binary, csv };

/// Binary layout: magic "GAMM", u16 version, u64 n, u64 d (little endian),
/// row-major bit-packed indicator (LSB-first within each byte), u64
/// provenance byte length, UTF-8 JSON provenance. CSV is a 0/1 debug grid
/// (no provenance).
void write_mask(const Mask& mask, const std::filesystem::path& path,
                MaskFormat format = MaskFormat::binary);
Mask read_mask(const std::filesystem::path& path);

}  // namespace gamm
