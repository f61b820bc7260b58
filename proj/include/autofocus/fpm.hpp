#pragma once

// FPM1: "FPM1" | width u32 LE | height u32 LE | width*height f32 LE, row-major, row 0 on top.

#include <cstdint>
#include <filesystem>
#include <span>
#include <stdexcept>
#include <vector>

#include "autofocus/grid.hpp"

namespace autofocus {

enum class FpmErrorKind { Io, BadMagic, Truncated, SizeMismatch, BadValue };

class FpmError : public std::runtime_error {
 public:
  FpmError(FpmErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  FpmErrorKind kind() const { return kind_; }

 private:
  FpmErrorKind kind_;
};

std::vector<std::uint8_t> encode_fpm(const Grid<float>& grid);
Grid<float> decode_fpm(std::span<const std::uint8_t> bytes);

void write_fpm(const std::filesystem::path& path, const Grid<float>& grid);
Grid<float> read_fpm(const std::filesystem::path& path);

// Typed views: probability maps must hold values in [0,1], label maps only
// -1, 0 and +1.
ProbMap read_probmap(const std::filesystem::path& path);
LabelMap read_labelmap(const std::filesystem::path& path);
void write_labelmap(const std::filesystem::path& path, const LabelMap& labels);
LabelMap to_labelmap(const Grid<float>& grid);

}  // namespace autofocus
