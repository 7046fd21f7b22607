#include "irdet/types.hpp"

#include <algorithm>

namespace irdet {

namespace {

void check_dims(int w, int h) {
  if (w <= 0 || h <= 0) throw Error("bad grid", "non-positive dimensions");
}

}  // namespace

NeighborSet neighbors(int width, int height, int site) {
  if (site < 0 || site >= width * height)
    throw Error("bad site", "site index out of range");
  const int x = site % width;
  const int y = site / width;
  NeighborSet set;
  for (int d = 0; d < kNumDirections; ++d) {
    const int nx = x + kDirectionOffsets[d][0];
    const int ny = y + kDirectionOffsets[d][1];
    if (nx < 0 || nx >= width || ny < 0 || ny >= height) continue;
    set.refs[set.count++] = {static_cast<Direction>(d), ny * width + nx};
  }
  return set;
}

PixelGrid::PixelGrid(int w, int h, double fill) : width(w), height(h) {
  check_dims(w, h);
  if (!std::isfinite(fill)) throw Error("bad grid", "non-finite fill value");
  values.assign(static_cast<size_t>(w) * h, fill);
}

PixelGrid::PixelGrid(int w, int h, std::vector<double> v)
    : width(w), height(h), values(std::move(v)) {
  check_dims(w, h);
  if (values.size() != static_cast<size_t>(w) * h)
    throw Error("bad grid", "value count does not match dimensions");
  for (double x : values)
    if (!std::isfinite(x)) throw Error("bad grid", "non-finite intensity");
}

LabelGrid::LabelGrid(int w, int h, std::uint8_t fill) : width(w), height(h) {
  check_dims(w, h);
  if (fill > 1) throw Error("bad grid", "label not in {0,1}");
  labels.assign(static_cast<size_t>(w) * h, fill);
}

LabelGrid::LabelGrid(int w, int h, std::vector<std::uint8_t> v)
    : width(w), height(h), labels(std::move(v)) {
  check_dims(w, h);
  if (labels.size() != static_cast<size_t>(w) * h)
    throw Error("bad grid", "label count does not match dimensions");
  for (std::uint8_t l : labels)
    if (l > 1) throw Error("bad grid", "label not in {0,1}");
}

double box_iou(const BoundingBox& a, const BoundingBox& b) {
  const int ix0 = std::max(a.x0, b.x0);
  const int iy0 = std::max(a.y0, b.y0);
  const int ix1 = std::min(a.x1(), b.x1());
  const int iy1 = std::min(a.y1(), b.y1());
  const long long iw = std::max(0, ix1 - ix0);
  const long long ih = std::max(0, iy1 - iy0);
  const long long inter = iw * ih;
  if (inter == 0) return 0.0;
  const long long uni = a.area() + b.area() - inter;
  return static_cast<double>(inter) / static_cast<double>(uni);
}

}  // namespace irdet
