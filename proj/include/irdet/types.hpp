#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace irdet {

/// Error with a stable machine-readable code ("missing file", "singular
/// system", ...) plus a human-readable detail string.
class Error : public std::runtime_error {
 public:
  Error(std::string code, const std::string& detail)
      : std::runtime_error(detail.empty() ? code : code + ": " + detail),
        code_(std::move(code)) {}
  explicit Error(std::string code) : Error(std::move(code), "") {}

  const std::string& code() const noexcept { return code_; }

 private:
  std::string code_;
};

// First-order (4-connected) neighborhood. The direction order is fixed:
// up, left, right, down.
enum class Direction : int { Up = 0, Left = 1, Right = 2, Down = 3 };

inline constexpr int kNumDirections = 4;

// (dx, dy) per direction, same order as Direction.
inline constexpr std::array<std::array<int, 2>, kNumDirections> kDirectionOffsets{
    {{{0, -1}}, {{-1, 0}}, {{1, 0}}, {{0, 1}}}};

inline Direction opposite_direction(Direction d) {
  switch (d) {
    case Direction::Up: return Direction::Down;
    case Direction::Left: return Direction::Right;
    case Direction::Right: return Direction::Left;
    default: return Direction::Up;
  }
}

struct NeighborRef {
  Direction dir;
  int index;
};

/// In-bounds neighbors of a site, tagged with their direction slot.
/// Boundary sites simply have fewer entries.
struct NeighborSet {
  int count = 0;
  std::array<NeighborRef, kNumDirections> refs{};

  const NeighborRef* begin() const { return refs.data(); }
  const NeighborRef* end() const { return refs.data() + count; }
};

NeighborSet neighbors(int width, int height, int site);

/// 2-D field of real intensities, row-major.
struct PixelGrid {
  int width = 0;
  int height = 0;
  std::vector<double> values;

  PixelGrid() = default;
  PixelGrid(int w, int h, double fill = 0.0);
  PixelGrid(int w, int h, std::vector<double> v);

  int size() const { return width * height; }
  int index(int x, int y) const { return y * width + x; }
  bool in_bounds(int x, int y) const {
    return x >= 0 && x < width && y >= 0 && y < height;
  }
  double at(int x, int y) const { return values[index(x, y)]; }
  double& at(int x, int y) { return values[index(x, y)]; }
};

/// 2-D field of binary class labels; 1 = target, 0 = background.
struct LabelGrid {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> labels;

  LabelGrid() = default;
  LabelGrid(int w, int h, std::uint8_t fill = 0);
  LabelGrid(int w, int h, std::vector<std::uint8_t> v);

  int size() const { return width * height; }
  int index(int x, int y) const { return y * width + x; }
  bool in_bounds(int x, int y) const {
    return x >= 0 && x < width && y >= 0 && y < height;
  }
  std::uint8_t at(int x, int y) const { return labels[index(x, y)]; }
  std::uint8_t& at(int x, int y) { return labels[index(x, y)]; }
};

/// Axis-aligned box with integer top-left corner and positive extents.
/// score is NaN when unscored.
struct BoundingBox {
  int x0 = 0;
  int y0 = 0;
  int w = 1;
  int h = 1;
  double score = std::numeric_limits<double>::quiet_NaN();

  int x1() const { return x0 + w; }  // exclusive
  int y1() const { return y0 + h; }  // exclusive
  long long area() const { return static_cast<long long>(w) * h; }
  double center_x() const { return x0 + 0.5 * w; }
  double center_y() const { return y0 + 0.5 * h; }
  bool contains(int x, int y) const {
    return x >= x0 && x < x1() && y >= y0 && y < y1();
  }
  bool inside(int image_width, int image_height) const {
    return x0 >= 0 && y0 >= 0 && w >= 1 && h >= 1 && x1() <= image_width &&
           y1() <= image_height;
  }
};

/// Intersection-over-union in [0, 1].
double box_iou(const BoundingBox& a, const BoundingBox& b);

/// One dataset element: an image plus its ground-truth boxes.
struct Frame {
  PixelGrid image;
  std::vector<BoundingBox> truth;
};

}  // namespace irdet
