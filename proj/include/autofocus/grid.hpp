#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace autofocus {

// Dense row-major 2-D grid; row 0 is the top of the image.
template <typename T>
class Grid {
 public:
  Grid() = default;
  Grid(int width, int height, T fill = T{}) : width_(width), height_(height) {
    if (width < 0 || height < 0) throw std::invalid_argument("grid dimensions must be non-negative");
    cells_.assign(static_cast<std::size_t>(width) * static_cast<std::size_t>(height), fill);
  }
  Grid(int width, int height, std::vector<T> cells) : width_(width), height_(height), cells_(std::move(cells)) {
    if (width < 0 || height < 0 ||
        cells_.size() != static_cast<std::size_t>(width) * static_cast<std::size_t>(height)) {
      throw std::invalid_argument("grid payload does not match " + std::to_string(width) + "x" +
                                  std::to_string(height));
    }
  }

  int width() const { return width_; }
  int height() const { return height_; }
  std::size_t size() const { return cells_.size(); }
  bool empty() const { return cells_.empty(); }

  T& at(int col, int row) { return cells_[index(col, row)]; }
  const T& at(int col, int row) const { return cells_[index(col, row)]; }

  std::span<T> row(int r) { return {cells_.data() + index(0, r), static_cast<std::size_t>(width_)}; }
  std::span<const T> row(int r) const {
    return {cells_.data() + index(0, r), static_cast<std::size_t>(width_)};
  }

  std::span<T> cells() { return cells_; }
  std::span<const T> cells() const { return cells_; }

  bool same_shape(const auto& other) const {
    return width_ == other.width() && height_ == other.height();
  }

  friend bool operator==(const Grid&, const Grid&) = default;

 private:
  std::size_t index(int col, int row) const {
    return static_cast<std::size_t>(row) * static_cast<std::size_t>(width_) + static_cast<std::size_t>(col);
  }

  int width_ = 0;
  int height_ = 0;
  std::vector<T> cells_;
};

// Foreground probabilities at feature-map resolution.
using ProbMap = Grid<float>;
// FocusPixel training labels: +1 positive, 0 negative, -1 invalid.
using LabelMap = Grid<std::int8_t>;
using BitMask = Grid<std::uint8_t>;

inline int ceil_div(int value, int divisor) { return (value + divisor - 1) / divisor; }

}  // namespace autofocus
