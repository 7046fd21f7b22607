#pragma once

#include <deque>

#include "irdet/types.hpp"

namespace irdet {

inline constexpr int kBgHistoryDefault = 50;     // frames
inline constexpr double kBgSigmaDefault = 5.0;   // intensity levels
inline constexpr double kBgTauDefault = 0.05;

/// Nonparametric per-pixel background model: a sliding window of the last T
/// frames scored with a Gaussian kernel of bandwidth sigma. Scores are
/// normalized by the kernel count, so 1.0 means "identical to every stored
/// frame". Scoring and updating the same model concurrently is not allowed.
class KdeModel {
 public:
  KdeModel(int history_len, double bandwidth);

  int history_len() const { return history_len_; }
  double bandwidth() const { return bandwidth_; }
  int stored_frames() const { return static_cast<int>(history_.size()); }

  /// Appends a frame, evicting the oldest once the buffer holds T.
  /// Error: "dimension mismatch".
  void update(const PixelGrid& frame);

  /// Per-pixel probability in [0,1] of being background under the stored
  /// history. Errors: "empty history", "dimension mismatch".
  PixelGrid background_prob(const PixelGrid& frame) const;

 private:
  int history_len_;
  double bandwidth_;
  int width_ = 0;
  int height_ = 0;
  std::deque<PixelGrid> history_;
};

/// Foreground where the background probability falls below tau.
LabelGrid foreground_mask(const PixelGrid& prob, double tau);

/// Pixelwise logical AND of two binary grids. Error: "dimension mismatch".
LabelGrid fuse_and(const LabelGrid& mrf_labels, const LabelGrid& fg_mask);

}  // namespace irdet
