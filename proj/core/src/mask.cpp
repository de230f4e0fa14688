#include "gamm/mask.hpp"

#include <array>
#include <cstring>
#include <fstream>

#include <nlohmann/json.hpp>

#include "gamm/error.hpp"

namespace gamm {

namespace {

constexpr std::array<char, 4> kMagic = {'G', 'A', 'M', 'M'};
constexpr std::uint16_t kFormatVersion = 1;

template <typename T>
void write_le(std::ofstream& out, T value) {
  std::array<unsigned char, sizeof(T)> buf;
  for (std::size_t i = 0; i < sizeof(T); ++i) {
    buf[i] = static_cast<unsigned char>((value >> (8 * i)) & 0xff);
  }
  out.write(reinterpret_cast<const char*>(buf.data()), buf.size());
}

template <typename T>
T read_le(std::ifstream& in, const char* what) {
  std::array<unsigned char, sizeof(T)> buf;
  in.read(reinterpret_cast<char*>(buf.data()), buf.size());
  if (!in) throw DataError(std::string("mask file truncated while reading ") + what);
  T value = 0;
  for (std::size_t i = 0; i < sizeof(T); ++i) {
    value |= static_cast<T>(buf[i]) << (8 * i);
  }
  return value;
}

}  // namespace

Mask::Mask(std::size_t rows, std::size_t cols, ColumnSplit split)
    : rows_(rows), cols_(cols), split_(std::move(split)), bits_(rows * cols, 1) {
  split_.validate(cols);
}

std::size_t Mask::missable_count() const {
  return rows_ * (cols_ - split_.observed_columns.size());
}

std::size_t Mask::missing_count() const {
  std::size_t zeros = 0;
  for (std::uint8_t b : bits_) zeros += (b == 0);
  return zeros;
}

double empirical_rate(const Mask& mask) {
  const std::size_t missable = mask.missable_count();
  if (missable == 0) return 0.0;
  return static_cast<double>(mask.missing_count()) / static_cast<double>(missable);
}

void write_mask(const Mask& mask, const std::filesystem::path& path, MaskFormat format) {
  if (format == MaskFormat::csv) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot write " + path.string());
    for (std::size_t i = 0; i < mask.rows(); ++i) {
      for (std::size_t j = 0; j < mask.cols(); ++j) {
        if (j > 0) out << ',';
        out << (mask.observed(i, j) ? '1' : '0');
      }
      out << '\n';
    }
    return;
  }

  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path.string());
  out.write(kMagic.data(), kMagic.size());
  write_le<std::uint16_t>(out, kFormatVersion);
  write_le<std::uint64_t>(out, mask.rows());
  write_le<std::uint64_t>(out, mask.cols());

  const auto& bits = mask.bits();
  std::vector<unsigned char> packed((bits.size() + 7) / 8, 0);
  for (std::size_t e = 0; e < bits.size(); ++e) {
    if (bits[e]) packed[e / 8] |= static_cast<unsigned char>(1u << (e % 8));
  }
  out.write(reinterpret_cast<const char*>(packed.data()),
            static_cast<std::streamsize>(packed.size()));

  write_le<std::uint64_t>(out, mask.provenance.size());
  out.write(mask.provenance.data(), static_cast<std::streamsize>(mask.provenance.size()));
  if (!out) throw DataError("failed writing " + path.string());
}

Mask read_mask(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open mask file " + path.string());
  std::array<char, 4> magic;
  in.read(magic.data(), magic.size());
  if (!in || magic != kMagic) throw DataError(path.string() + " is not a GAMM mask file");
  auto version = read_le<std::uint16_t>(in, "version");
  if (version != kFormatVersion) {
    throw DataError("unsupported mask format version " + std::to_string(version));
  }
  auto n = read_le<std::uint64_t>(in, "n");
  auto d = read_le<std::uint64_t>(in, "d");

  std::vector<unsigned char> packed((n * d + 7) / 8);
  in.read(reinterpret_cast<char*>(packed.data()), static_cast<std::streamsize>(packed.size()));
  if (!in) throw DataError("mask file truncated while reading the bit matrix");

  auto prov_len = read_le<std::uint64_t>(in, "provenance length");
  if (prov_len > (1ULL << 30)) {
    throw DataError("mask file has an implausible provenance length (corrupt?)");
  }
  std::string provenance(prov_len, '\0');
  in.read(provenance.data(), static_cast<std::streamsize>(prov_len));
  if (!in) throw DataError("mask file truncated while reading provenance");

  // The column split rides in the provenance spec; default to all-missable
  // when a mask was written without one.
  ColumnSplit split;
  if (!provenance.empty()) {
    try {
      auto j = nlohmann::json::parse(provenance);
      if (j.contains("spec") && j.at("spec").contains("observed_columns")) {
        split.observed_columns =
            j.at("spec").at("observed_columns").get<std::vector<int>>();
      }
    } catch (const nlohmann::json::exception& e) {
      throw DataError("mask provenance is not valid JSON: " + std::string(e.what()));
    }
  }

  Mask mask(n, d, split);
  mask.provenance = std::move(provenance);
  for (std::size_t e = 0; e < n * d; ++e) {
    bool bit = (packed[e / 8] >> (e % 8)) & 1u;
    mask.set(e / d, e % d, bit);
  }
  return mask;
}

}  // namespace gamm
