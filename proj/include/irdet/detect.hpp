#pragma once

#include <span>
#include <string>
#include <vector>

#include "irdet/icm.hpp"
#include "irdet/types.hpp"

namespace irdet {

inline constexpr int kMinAreaDefault = 4;
inline constexpr double kMergeIouThreshold = 0.5;
inline constexpr double kHitIouThreshold = 0.3;
inline constexpr int kLadderSizeDefault = 21;

/// Strictly increasing list of log-rho detection thresholds.
struct ThresholdLadder {
  std::vector<double> deltas;

  void validate() const;

  /// Evenly spaced quantiles (0% .. 100%) of the pooled log-rho values,
  /// deduplicated to keep the ladder strictly increasing.
  static ThresholdLadder from_quantiles(std::span<const double> pooled,
                                        int count);
};

struct RocPoint {
  double delta = 0.0;
  double hit_rate = 0.0;
  double fa_per_frame = 0.0;
};

struct FrameEval {
  int hits = 0;
  int misses = 0;
  int false_alarms = 0;
};

struct EvalReport {
  std::vector<RocPoint> points;                    // one per ladder delta
  std::vector<std::vector<FrameEval>> per_frame;   // [delta][frame]
};

/// Binarizes log rho > delta, labels 8-connected components, and returns
/// each component's tight bounding box scored with its max log rho.
/// Components smaller than min_area pixels are dropped.
std::vector<BoundingBox> extract_components(const RatioMap& rho, double delta,
                                            int min_area = kMinAreaDefault);

/// Component extraction over an explicit binary mask; scores come from the
/// ratio map. Used by the fusion path, where the mask is labels AND kde.
std::vector<BoundingBox> extract_components(const RatioMap& scores,
                                            const LabelGrid& mask,
                                            int min_area = kMinAreaDefault);

/// Transitively merges boxes with pairwise IoU >= 0.5: each group becomes a
/// box at the mean of member centers with mean extents and max score,
/// repeated until no pair qualifies. Idempotent.
std::vector<BoundingBox> merge_boxes(std::vector<BoundingBox> boxes);

/// Greedy matching by descending score; a detection hits an unmatched truth
/// box when IoU >= 0.3, each truth box counts at most once. Unmatched
/// detections are false alarms, unmatched truths misses.
FrameEval evaluate_frame(std::span<const BoundingBox> detections,
                         std::span<const BoundingBox> truth);

struct RocFrame {
  RatioMap rho;
  std::vector<BoundingBox> truth;
};

/// Full ladder sweep: per delta, extract + merge + evaluate over all
/// frames; hit_rate = hits / total truths, fa_per_frame = FAs / frames.
/// Errors: "empty ladder", "empty frames".
EvalReport build_roc(std::span<const RocFrame> frames,
                     const ThresholdLadder& ladder,
                     int min_area = kMinAreaDefault);

struct FrameDetections {
  int frame_id = 0;
  std::vector<BoundingBox> boxes;
};

/// CSV rows `frame_id,x0,y0,w,h,score`.
void write_detections_csv(const std::string& path,
                          std::span<const FrameDetections> detections);
std::vector<FrameDetections> load_detections_csv(const std::string& path);

/// CSV rows `delta,hit_rate,fa_per_frame`.
void write_roc_csv(const std::string& path, const EvalReport& report);

}  // namespace irdet
