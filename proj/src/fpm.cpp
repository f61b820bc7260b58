#include "autofocus/fpm.hpp"

#include <bit>
#include <cmath>
#include <fstream>
#include <iterator>

namespace autofocus {

namespace {

constexpr std::uint8_t kMagic[4] = {'F', 'P', 'M', '1'};
constexpr std::size_t kHeader = 12;

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

std::uint32_t get_u32(std::span<const std::uint8_t> b, std::size_t at) {
  return std::uint32_t(b[at]) | std::uint32_t(b[at + 1]) << 8 | std::uint32_t(b[at + 2]) << 16 |
         std::uint32_t(b[at + 3]) << 24;
}

}  // namespace

std::vector<std::uint8_t> encode_fpm(const Grid<float>& grid) {
  std::vector<std::uint8_t> out(std::begin(kMagic), std::end(kMagic));
  out.reserve(kHeader + grid.size() * 4);
  put_u32(out, static_cast<std::uint32_t>(grid.width()));
  put_u32(out, static_cast<std::uint32_t>(grid.height()));
  for (const float v : grid.cells()) put_u32(out, std::bit_cast<std::uint32_t>(v));
  return out;
}

Grid<float> decode_fpm(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < 4) throw FpmError(FpmErrorKind::Truncated, "FPM1 file shorter than its magic");
  if (!std::equal(std::begin(kMagic), std::end(kMagic), bytes.begin())) {
    throw FpmError(FpmErrorKind::BadMagic, "not an FPM1 file (bad magic)");
  }
  if (bytes.size() < kHeader) throw FpmError(FpmErrorKind::Truncated, "FPM1 header truncated");
  const std::uint32_t w = get_u32(bytes, 4);
  const std::uint32_t h = get_u32(bytes, 8);
  if (w > 0x7fffffffu || h > 0x7fffffffu) throw FpmError(FpmErrorKind::SizeMismatch, "FPM1 dimensions too large");
  const std::uint64_t expected = std::uint64_t(w) * h * 4;
  const std::uint64_t have = bytes.size() - kHeader;
  if (have < expected) {
    throw FpmError(FpmErrorKind::Truncated, "FPM1 payload truncated: header says " + std::to_string(w) + "x" +
                                                std::to_string(h) + " but only " + std::to_string(have) +
                                                " payload bytes present");
  }
  if (have > expected) {
    throw FpmError(FpmErrorKind::SizeMismatch, "FPM1 payload has " + std::to_string(have - expected) +
                                                   " bytes beyond the " + std::to_string(w) + "x" +
                                                   std::to_string(h) + " grid");
  }
  std::vector<float> cells(static_cast<std::size_t>(w) * h);
  for (std::size_t i = 0; i < cells.size(); ++i) cells[i] = std::bit_cast<float>(get_u32(bytes, kHeader + 4 * i));
  return Grid<float>(static_cast<int>(w), static_cast<int>(h), std::move(cells));
}

void write_fpm(const std::filesystem::path& path, const Grid<float>& grid) {
  const auto bytes = encode_fpm(grid);
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw FpmError(FpmErrorKind::Io, "cannot open " + path.string() + " for writing");
  f.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!f) throw FpmError(FpmErrorKind::Io, "write failed for " + path.string());
}

Grid<float> read_fpm(const std::filesystem::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw FpmError(FpmErrorKind::Io, "cannot open " + path.string());
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
  try {
    return decode_fpm(bytes);
  } catch (const FpmError& e) {
    throw FpmError(e.kind(), path.string() + ": " + e.what());
  }
}

ProbMap read_probmap(const std::filesystem::path& path) {
  auto grid = read_fpm(path);
  for (const float v : grid.cells()) {
    if (!(v >= 0.0f && v <= 1.0f)) {
      throw FpmError(FpmErrorKind::BadValue, path.string() + ": probability " + std::to_string(v) + " outside [0,1]");
    }
  }
  return grid;
}

LabelMap to_labelmap(const Grid<float>& grid) {
  LabelMap labels(grid.width(), grid.height(), 0);
  auto dst = labels.cells();
  const auto src = grid.cells();
  for (std::size_t i = 0; i < src.size(); ++i) {
    if (src[i] == 1.0f) {
      dst[i] = 1;
    } else if (src[i] == -1.0f) {
      dst[i] = -1;
    } else if (src[i] == 0.0f) {
      dst[i] = 0;
    } else {
      throw FpmError(FpmErrorKind::BadValue, "label value " + std::to_string(src[i]) + " is not -1, 0 or 1");
    }
  }
  return labels;
}

LabelMap read_labelmap(const std::filesystem::path& path) {
  try {
    return to_labelmap(read_fpm(path));
  } catch (const FpmError& e) {
    if (e.kind() != FpmErrorKind::BadValue) throw;
    throw FpmError(e.kind(), path.string() + ": " + e.what());
  }
}

void write_labelmap(const std::filesystem::path& path, const LabelMap& labels) {
  Grid<float> grid(labels.width(), labels.height(), 0.0f);
  auto dst = grid.cells();
  const auto src = labels.cells();
  for (std::size_t i = 0; i < src.size(); ++i) dst[i] = static_cast<float>(src[i]);
  write_fpm(path, grid);
}

}  // namespace autofocus
