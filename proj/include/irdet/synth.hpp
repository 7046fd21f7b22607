#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "irdet/dataset.hpp"
#include "irdet/sar.hpp"
#include "irdet/types.hpp"

namespace irdet {

/// Synthetic scene: a SAR-textured background with independently sampled
/// SAR-textured target patches planted at the given boxes.
struct SceneSpec {
  int width = 128;
  int height = 96;
  SarParams background;
  SarParams target;
  std::vector<BoundingBox> boxes;
  std::uint64_t seed = 0;

  void validate() const;  // boxes in bounds, pairwise non-overlapping
};

/// Renders one frame; truth = spec.boxes. Error: "invalid spec".
Frame render_scene(const SceneSpec& spec);

/// Renders a temporally ordered sequence: the background is resampled with
/// fresh noise per frame, each target box translates by (dx, dy) per frame,
/// and an optional distractor region keeps the identical target-textured
/// patch at a fixed location in every frame.
/// Error: "out of bounds motion" when a displaced box leaves the image.
std::vector<Frame> render_sequence(const SceneSpec& spec, int frames, int dx,
                                   int dy,
                                   const std::optional<BoundingBox>& distractor);

/// Writes frames as img_NNNN.pgm + truth_NNNN.csv plus manifest.txt in
/// out_dir; returns the manifest path.
std::string write_dataset(const std::string& out_dir,
                          std::span<const Frame> frames);

}  // namespace irdet
