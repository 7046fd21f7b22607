#include "irdet/detect.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>

namespace irdet {

void ThresholdLadder::validate() const {
  if (deltas.empty()) throw Error("empty ladder");
  for (size_t i = 1; i < deltas.size(); ++i)
    if (!(deltas[i] > deltas[i - 1]))
      throw Error("bad params", "ladder deltas must be strictly increasing");
}

ThresholdLadder ThresholdLadder::from_quantiles(std::span<const double> pooled,
                                                int count) {
  if (count < 1) throw Error("bad params", "ladder size must be >= 1");
  if (pooled.empty()) throw Error("empty ladder", "no pooled values");
  std::vector<double> sorted(pooled.begin(), pooled.end());
  std::sort(sorted.begin(), sorted.end());

  ThresholdLadder ladder;
  for (int k = 0; k < count; ++k) {
    const double q = count == 1 ? 0.5 : static_cast<double>(k) / (count - 1);
    const size_t idx = std::min(
        sorted.size() - 1, static_cast<size_t>(q * (sorted.size() - 1) + 0.5));
    const double delta = sorted[idx];
    if (ladder.deltas.empty() || delta > ladder.deltas.back())
      ladder.deltas.push_back(delta);
  }
  ladder.validate();
  return ladder;
}

namespace {

// 8-connected flood fill over an arbitrary pass predicate.
template <typename Pass>
std::vector<BoundingBox> components_impl(int width, int height,
                                         const std::vector<double>& scores,
                                         Pass pass, int min_area) {
  std::vector<std::uint8_t> visited(static_cast<size_t>(width) * height, 0);
  std::vector<int> stack;
  std::vector<BoundingBox> boxes;

  for (int start = 0; start < width * height; ++start) {
    if (visited[start] || !pass(start)) continue;
    int min_x = width, max_x = -1, min_y = height, max_y = -1;
    double best = -std::numeric_limits<double>::infinity();
    int area = 0;

    stack.push_back(start);
    visited[start] = 1;
    while (!stack.empty()) {
      const int site = stack.back();
      stack.pop_back();
      const int x = site % width;
      const int y = site / width;
      min_x = std::min(min_x, x);
      max_x = std::max(max_x, x);
      min_y = std::min(min_y, y);
      max_y = std::max(max_y, y);
      best = std::max(best, scores[site]);
      ++area;
      for (int dy = -1; dy <= 1; ++dy) {
        for (int dx = -1; dx <= 1; ++dx) {
          if (dx == 0 && dy == 0) continue;
          const int nx = x + dx;
          const int ny = y + dy;
          if (nx < 0 || nx >= width || ny < 0 || ny >= height) continue;
          const int nsite = ny * width + nx;
          if (visited[nsite] || !pass(nsite)) continue;
          visited[nsite] = 1;
          stack.push_back(nsite);
        }
      }
    }

    if (area < min_area) continue;
    BoundingBox box;
    box.x0 = min_x;
    box.y0 = min_y;
    box.w = max_x - min_x + 1;
    box.h = max_y - min_y + 1;
    box.score = best;
    boxes.push_back(box);
  }
  return boxes;
}

}  // namespace

std::vector<BoundingBox> extract_components(const RatioMap& rho, double delta,
                                            int min_area) {
  return components_impl(
      rho.width, rho.height, rho.log_rho,
      [&rho, delta](int site) { return rho.log_rho[site] > delta; }, min_area);
}

std::vector<BoundingBox> extract_components(const RatioMap& scores,
                                            const LabelGrid& mask,
                                            int min_area) {
  if (scores.width != mask.width || scores.height != mask.height)
    throw Error("dimension mismatch", "ratio map and mask differ");
  return components_impl(
      mask.width, mask.height, scores.log_rho,
      [&mask](int site) { return mask.labels[site] != 0; }, min_area);
}

namespace {

int find_root(std::vector<int>& parent, int i) {
  while (parent[i] != i) {
    parent[i] = parent[parent[i]];
    i = parent[i];
  }
  return i;
}

}  // namespace

std::vector<BoundingBox> merge_boxes(std::vector<BoundingBox> boxes) {
  bool merged_any = true;
  while (merged_any && boxes.size() > 1) {
    merged_any = false;
    std::vector<int> parent(boxes.size());
    std::iota(parent.begin(), parent.end(), 0);
    for (size_t i = 0; i < boxes.size(); ++i) {
      for (size_t j = i + 1; j < boxes.size(); ++j) {
        if (box_iou(boxes[i], boxes[j]) >= kMergeIouThreshold) {
          const int ri = find_root(parent, static_cast<int>(i));
          const int rj = find_root(parent, static_cast<int>(j));
          if (ri != rj) {
            parent[rj] = ri;
            merged_any = true;
          }
        }
      }
    }
    if (!merged_any) break;

    std::vector<BoundingBox> next;
    for (size_t root = 0; root < boxes.size(); ++root) {
      if (find_root(parent, static_cast<int>(root)) != static_cast<int>(root))
        continue;
      double cx = 0.0, cy = 0.0, w = 0.0, h = 0.0;
      double score = -std::numeric_limits<double>::infinity();
      bool any_score = false;
      int members = 0;
      for (size_t i = 0; i < boxes.size(); ++i) {
        if (find_root(parent, static_cast<int>(i)) != static_cast<int>(root))
          continue;
        cx += boxes[i].center_x();
        cy += boxes[i].center_y();
        w += boxes[i].w;
        h += boxes[i].h;
        if (!std::isnan(boxes[i].score)) {
          score = std::max(score, boxes[i].score);
          any_score = true;
        }
        ++members;
      }
      cx /= members;
      cy /= members;
      BoundingBox box;
      box.w = std::max(1, static_cast<int>(std::lround(w / members)));
      box.h = std::max(1, static_cast<int>(std::lround(h / members)));
      box.x0 = static_cast<int>(std::lround(cx - 0.5 * box.w));
      box.y0 = static_cast<int>(std::lround(cy - 0.5 * box.h));
      box.score =
          any_score ? score : std::numeric_limits<double>::quiet_NaN();
      next.push_back(box);
    }
    boxes = std::move(next);
  }
  return boxes;
}

FrameEval evaluate_frame(std::span<const BoundingBox> detections,
                         std::span<const BoundingBox> truth) {
  std::vector<size_t> order(detections.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](size_t a, size_t b) {
    const double sa = std::isnan(detections[a].score)
                          ? -std::numeric_limits<double>::infinity()
                          : detections[a].score;
    const double sb = std::isnan(detections[b].score)
                          ? -std::numeric_limits<double>::infinity()
                          : detections[b].score;
    return sa > sb;
  });

  std::vector<std::uint8_t> truth_matched(truth.size(), 0);
  FrameEval eval;
  for (const size_t di : order) {
    double best_iou = 0.0;
    int best_truth = -1;
    for (size_t ti = 0; ti < truth.size(); ++ti) {
      if (truth_matched[ti]) continue;
      const double iou = box_iou(detections[di], truth[ti]);
      if (iou >= kHitIouThreshold && iou > best_iou) {
        best_iou = iou;
        best_truth = static_cast<int>(ti);
      }
    }
    if (best_truth >= 0) {
      truth_matched[best_truth] = 1;
      ++eval.hits;
    } else {
      ++eval.false_alarms;
    }
  }
  eval.misses = static_cast<int>(truth.size()) - eval.hits;
  return eval;
}

EvalReport build_roc(std::span<const RocFrame> frames,
                     const ThresholdLadder& ladder, int min_area) {
  ladder.validate();
  if (frames.empty()) throw Error("empty frames");

  long long total_truth = 0;
  for (const auto& f : frames) total_truth += static_cast<long long>(f.truth.size());

  EvalReport report;
  for (const double delta : ladder.deltas) {
    std::vector<FrameEval> evals;
    long long hits = 0, fas = 0;
    for (const auto& frame : frames) {
      const auto detections =
          merge_boxes(extract_components(frame.rho, delta, min_area));
      const FrameEval eval = evaluate_frame(detections, frame.truth);
      hits += eval.hits;
      fas += eval.false_alarms;
      evals.push_back(eval);
    }
    RocPoint point;
    point.delta = delta;
    point.hit_rate = total_truth > 0
                         ? static_cast<double>(hits) / static_cast<double>(total_truth)
                         : 0.0;
    point.fa_per_frame =
        static_cast<double>(fas) / static_cast<double>(frames.size());
    report.points.push_back(point);
    report.per_frame.push_back(std::move(evals));
  }
  return report;
}

void write_detections_csv(const std::string& path,
                          std::span<const FrameDetections> detections) {
  std::ofstream out(path);
  if (!out) throw Error("missing file", path + ": cannot open for write");
  out.precision(17);
  for (const auto& frame : detections)
    for (const auto& b : frame.boxes)
      out << frame.frame_id << ',' << b.x0 << ',' << b.y0 << ',' << b.w << ','
          << b.h << ',' << b.score << '\n';
}

std::vector<FrameDetections> load_detections_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("missing file", path);
  std::vector<FrameDetections> frames;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string field;
    std::vector<std::string> fields;
    while (std::getline(ss, field, ',')) fields.push_back(field);
    if (fields.size() != 6)
      throw Error("malformed csv", path + ": expected frame_id,x0,y0,w,h,score");
    const int frame_id = std::stoi(fields[0]);
    BoundingBox b;
    b.x0 = std::stoi(fields[1]);
    b.y0 = std::stoi(fields[2]);
    b.w = std::stoi(fields[3]);
    b.h = std::stoi(fields[4]);
    b.score = std::stod(fields[5]);
    if (frames.empty() || frames.back().frame_id != frame_id)
      frames.push_back({frame_id, {}});
    frames.back().boxes.push_back(b);
  }
  return frames;
}

void write_roc_csv(const std::string& path, const EvalReport& report) {
  std::ofstream out(path);
  if (!out) throw Error("missing file", path + ": cannot open for write");
  out.precision(17);
  out << "delta,hit_rate,fa_per_frame\n";
  for (const auto& p : report.points)
    out << p.delta << ',' << p.hit_rate << ',' << p.fa_per_frame << '\n';
}

}  // namespace irdet
