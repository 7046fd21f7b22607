#pragma once

#include <span>
#include <string>
#include <vector>

#include "irdet/types.hpp"

namespace irdet {

/// Ground truth CSV: one `x0,y0,w,h` row per box, no header. An empty file
/// means no boxes.
std::vector<BoundingBox> load_truth_csv(const std::string& path);
void write_truth_csv(const std::string& path, std::span<const BoundingBox> boxes);

struct FrameRef {
  std::string image_path;
  std::string truth_path;
};

/// Manifest: one `image-path,truth-path` line per frame. Relative paths are
/// resolved against the manifest's directory on load.
std::vector<FrameRef> load_manifest(const std::string& path);
void write_manifest(const std::string& path, std::span<const FrameRef> frames);

/// Loads image + truth and checks the boxes against the image bounds.
Frame load_frame(const FrameRef& ref);

}  // namespace irdet
