#include "irdet/synth.hpp"

#include <cstdio>
#include <filesystem>

#include "irdet/pgm.hpp"
#include "irdet/rng.hpp"

namespace irdet {

namespace {

namespace fs = std::filesystem;

// Seed streams for the independent pieces of a scene.
constexpr std::uint64_t kBackgroundStream = 0x100000;
constexpr std::uint64_t kTargetStream = 0x200000;
constexpr std::uint64_t kDistractorStream = 0x300000;

void stamp_patch(PixelGrid& image, const PixelGrid& patch,
                 const BoundingBox& box) {
  for (int y = 0; y < box.h; ++y)
    for (int x = 0; x < box.w; ++x)
      image.at(box.x0 + x, box.y0 + y) = patch.at(x, y);
}

bool boxes_overlap(const BoundingBox& a, const BoundingBox& b) {
  return a.x0 < b.x1() && b.x0 < a.x1() && a.y0 < b.y1() && b.y0 < a.y1();
}

}  // namespace

void SceneSpec::validate() const {
  if (width <= 0 || height <= 0)
    throw Error("invalid spec", "non-positive scene dimensions");
  background.validate();
  target.validate();
  for (size_t i = 0; i < boxes.size(); ++i) {
    if (!boxes[i].inside(width, height))
      throw Error("invalid spec", "target box outside scene bounds");
    for (size_t j = i + 1; j < boxes.size(); ++j)
      if (boxes_overlap(boxes[i], boxes[j]))
        throw Error("invalid spec", "target boxes overlap");
  }
}

Frame render_scene(const SceneSpec& spec) {
  spec.validate();
  Frame frame;
  frame.image = sample_sar(spec.background, spec.width, spec.height,
                           derive_seed(spec.seed, kBackgroundStream));
  for (size_t k = 0; k < spec.boxes.size(); ++k) {
    const BoundingBox& box = spec.boxes[k];
    const PixelGrid patch = sample_sar(
        spec.target, box.w, box.h, derive_seed(spec.seed, kTargetStream + k));
    stamp_patch(frame.image, patch, box);
  }
  frame.truth = spec.boxes;
  return frame;
}

std::vector<Frame> render_sequence(const SceneSpec& spec, int frames, int dx,
                                   int dy,
                                   const std::optional<BoundingBox>& distractor) {
  spec.validate();
  if (frames < 1) throw Error("invalid spec", "frame count must be >= 1");
  if (distractor && !distractor->inside(spec.width, spec.height))
    throw Error("invalid spec", "distractor outside scene bounds");

  // The distractor patch is sampled once and stamped identically in every
  // frame; it has target texture but never moves.
  std::optional<PixelGrid> distractor_patch;
  if (distractor)
    distractor_patch = sample_sar(spec.target, distractor->w, distractor->h,
                                  derive_seed(spec.seed, kDistractorStream));

  std::vector<Frame> sequence;
  for (int f = 0; f < frames; ++f) {
    SceneSpec frame_spec = spec;
    // frame 0 keeps the scene seed so a 1-frame sequence equals render_scene
    if (f > 0) frame_spec.seed = derive_seed(spec.seed, static_cast<std::uint64_t>(f));
    for (auto& box : frame_spec.boxes) {
      box.x0 += f * dx;
      box.y0 += f * dy;
      if (!box.inside(spec.width, spec.height))
        throw Error("out of bounds motion",
                    "target box leaves the scene at frame " + std::to_string(f));
    }
    Frame frame = render_scene(frame_spec);
    if (distractor_patch) stamp_patch(frame.image, *distractor_patch, *distractor);
    sequence.push_back(std::move(frame));
  }
  return sequence;
}

std::string write_dataset(const std::string& out_dir,
                          std::span<const Frame> frames) {
  fs::create_directories(out_dir);
  std::vector<FrameRef> refs;
  for (size_t f = 0; f < frames.size(); ++f) {
    char image_name[32], truth_name[32];
    std::snprintf(image_name, sizeof image_name, "img_%04zu.pgm", f);
    std::snprintf(truth_name, sizeof truth_name, "truth_%04zu.csv", f);
    write_pgm((fs::path(out_dir) / image_name).string(), frames[f].image);
    write_truth_csv((fs::path(out_dir) / truth_name).string(), frames[f].truth);
    refs.push_back({image_name, truth_name});
  }
  const std::string manifest = (fs::path(out_dir) / "manifest.txt").string();
  write_manifest(manifest, refs);
  return manifest;
}

}  // namespace irdet
