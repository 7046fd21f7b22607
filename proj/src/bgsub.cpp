#include "irdet/bgsub.hpp"

#include <cmath>

namespace irdet {

KdeModel::KdeModel(int history_len, double bandwidth)
    : history_len_(history_len), bandwidth_(bandwidth) {
  if (history_len < 1) throw Error("bad params", "history length must be >= 1");
  if (!(bandwidth > 0.0)) throw Error("bad params", "bandwidth must be positive");
}

void KdeModel::update(const PixelGrid& frame) {
  if (history_.empty()) {
    width_ = frame.width;
    height_ = frame.height;
  } else if (frame.width != width_ || frame.height != height_) {
    throw Error("dimension mismatch", "frame does not match model dimensions");
  }
  history_.push_back(frame);
  if (static_cast<int>(history_.size()) > history_len_) history_.pop_front();
}

PixelGrid KdeModel::background_prob(const PixelGrid& frame) const {
  if (history_.empty()) throw Error("empty history");
  if (frame.width != width_ || frame.height != height_)
    throw Error("dimension mismatch", "frame does not match model dimensions");

  const double inv_two_sigma2 = 1.0 / (2.0 * bandwidth_ * bandwidth_);
  PixelGrid prob(frame.width, frame.height, 0.0);
  for (const auto& past : history_) {
    for (int i = 0; i < frame.size(); ++i) {
      const double d = frame.values[i] - past.values[i];
      prob.values[i] += std::exp(-d * d * inv_two_sigma2);
    }
  }
  const double inv_count = 1.0 / static_cast<double>(history_.size());
  for (double& v : prob.values) v *= inv_count;
  return prob;
}

LabelGrid foreground_mask(const PixelGrid& prob, double tau) {
  LabelGrid mask(prob.width, prob.height, 0);
  for (int i = 0; i < prob.size(); ++i)
    mask.labels[i] = prob.values[i] < tau ? 1 : 0;
  return mask;
}

LabelGrid fuse_and(const LabelGrid& mrf_labels, const LabelGrid& fg_mask) {
  if (mrf_labels.width != fg_mask.width || mrf_labels.height != fg_mask.height)
    throw Error("dimension mismatch", "label grids differ");
  LabelGrid fused(mrf_labels.width, mrf_labels.height, 0);
  for (int i = 0; i < fused.size(); ++i)
    fused.labels[i] = std::min(mrf_labels.labels[i], fg_mask.labels[i]);
  return fused;
}

}  // namespace irdet
