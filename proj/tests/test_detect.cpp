#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <random>

#include "irdet/detect.hpp"
#include "irdet/rng.hpp"

using namespace irdet;

namespace {

RatioMap flat_map(int w, int h, double value) {
  RatioMap map;
  map.width = w;
  map.height = h;
  map.log_rho.assign(static_cast<size_t>(w) * h, value);
  return map;
}

void paint(RatioMap& map, const BoundingBox& box, double value) {
  for (int y = box.y0; y < box.y1(); ++y)
    for (int x = box.x0; x < box.x1(); ++x)
      map.log_rho[y * map.width + x] = value;
}

BoundingBox box(int x0, int y0, int w, int h, double score = 1.0) {
  BoundingBox b{x0, y0, w, h};
  b.score = score;
  return b;
}

}  // namespace

TEST_CASE("extract_components: empty, exact square, min_area") {
  const RatioMap quiet = flat_map(32, 32, -5.0);
  CHECK(extract_components(quiet, 0.0).empty());

  RatioMap map = flat_map(32, 32, -5.0);
  paint(map, {10, 10, 5, 5}, 3.0);
  const auto boxes = extract_components(map, 0.0);
  REQUIRE(boxes.size() == 1);
  CHECK(boxes[0].x0 == 10);
  CHECK(boxes[0].y0 == 10);
  CHECK(boxes[0].w == 5);
  CHECK(boxes[0].h == 5);
  CHECK(boxes[0].score == doctest::Approx(3.0));

  // 3-pixel blob falls under the default min_area of 4
  RatioMap speck = flat_map(16, 16, -5.0);
  paint(speck, {2, 2, 3, 1}, 3.0);
  CHECK(extract_components(speck, 0.0).empty());
  CHECK(extract_components(speck, 0.0, 1).size() == 1);
}

TEST_CASE("extract_components: strict threshold and max score") {
  RatioMap map = flat_map(8, 8, 0.0);
  paint(map, {1, 1, 2, 2}, 1.5);
  map.log_rho[1 * 8 + 2] = 4.5;
  // threshold equal to the plateau keeps it out (strict >)
  CHECK(extract_components(map, 1.5, 1).size() == 1);
  const auto boxes = extract_components(map, 1.0, 1);
  REQUIRE(boxes.size() == 1);
  CHECK(boxes[0].score == doctest::Approx(4.5));
}

TEST_CASE("extract_components: diagonal blobs join under 8-connectivity") {
  RatioMap map = flat_map(20, 20, -1.0);
  paint(map, {2, 2, 3, 3}, 2.0);
  paint(map, {5, 5, 3, 3}, 2.0);  // touches only at the (4,4)-(5,5) diagonal
  const auto boxes = extract_components(map, 0.0);
  REQUIRE(boxes.size() == 1);
  CHECK(boxes[0].x0 == 2);
  CHECK(boxes[0].y0 == 2);
  CHECK(boxes[0].w == 6);
  CHECK(boxes[0].h == 6);
}

TEST_CASE("extract_components over an explicit mask") {
  RatioMap scores = flat_map(10, 6, 7.0);
  LabelGrid mask(10, 6, 0);
  for (int y = 1; y < 4; ++y)
    for (int x = 2; x < 6; ++x) mask.at(x, y) = 1;
  const auto boxes = extract_components(scores, mask);
  REQUIRE(boxes.size() == 1);
  CHECK(boxes[0].x0 == 2);
  CHECK(boxes[0].y0 == 1);
  CHECK(boxes[0].w == 4);
  CHECK(boxes[0].h == 3);
}

TEST_CASE("merge_boxes: examples") {
  // identical boxes collapse to one, geometry unchanged
  auto merged = merge_boxes({box(3, 4, 10, 8), box(3, 4, 10, 8)});
  REQUIRE(merged.size() == 1);
  CHECK(merged[0].x0 == 3);
  CHECK(merged[0].y0 == 4);
  CHECK(merged[0].w == 10);
  CHECK(merged[0].h == 8);

  // disjoint boxes pass through
  merged = merge_boxes({box(0, 0, 4, 4), box(20, 20, 4, 4)});
  CHECK(merged.size() == 2);

  // overlapping pair: centers (5,5) and (7,5) -> merged center (6,5)
  merged = merge_boxes({box(0, 0, 10, 10, 1.0), box(2, 0, 10, 10, 2.0)});
  REQUIRE(merged.size() == 1);
  CHECK(merged[0].center_x() == doctest::Approx(6.0));
  CHECK(merged[0].center_y() == doctest::Approx(5.0));
  CHECK(merged[0].w == 10);
  CHECK(merged[0].h == 10);
  CHECK(merged[0].score == doctest::Approx(2.0));
}

TEST_CASE("merge_boxes is idempotent") {
  std::mt19937_64 rng(19);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<BoundingBox> boxes;
    const int n = 1 + static_cast<int>(rng() % 8);
    for (int i = 0; i < n; ++i)
      boxes.push_back(box(static_cast<int>(rng() % 30), static_cast<int>(rng() % 30),
                          4 + static_cast<int>(rng() % 10),
                          4 + static_cast<int>(rng() % 10),
                          unit_uniform(rng)));
    const auto once = merge_boxes(boxes);
    const auto twice = merge_boxes(once);
    REQUIRE(once.size() == twice.size());
    for (size_t i = 0; i < once.size(); ++i) {
      CHECK(once[i].x0 == twice[i].x0);
      CHECK(once[i].y0 == twice[i].y0);
      CHECK(once[i].w == twice[i].w);
      CHECK(once[i].h == twice[i].h);
    }
    // no qualifying pair is left
    for (size_t i = 0; i < once.size(); ++i)
      for (size_t j = i + 1; j < once.size(); ++j)
        CHECK(box_iou(once[i], once[j]) < kMergeIouThreshold);
  }
}

TEST_CASE("evaluate_frame: examples") {
  const std::vector<BoundingBox> truth{box(5, 5, 10, 10), box(30, 30, 8, 8)};

  auto exact = evaluate_frame(truth, truth);
  CHECK(exact.hits == 2);
  CHECK(exact.misses == 0);
  CHECK(exact.false_alarms == 0);

  auto none = evaluate_frame({}, truth);
  CHECK(none.hits == 0);
  CHECK(none.misses == 2);
  CHECK(none.false_alarms == 0);

  // two detections on one truth box: one hit, one false alarm
  const std::vector<BoundingBox> doubled{box(5, 5, 10, 10, 2.0),
                                         box(6, 5, 10, 10, 1.0)};
  const std::vector<BoundingBox> single{box(5, 5, 10, 10)};
  auto dup = evaluate_frame(doubled, single);
  CHECK(dup.hits == 1);
  CHECK(dup.misses == 0);
  CHECK(dup.false_alarms == 1);
}

TEST_CASE("evaluate_frame: greedy matching prefers higher scores") {
  // one truth box, the higher-scored of two candidates takes it
  const std::vector<BoundingBox> truth{box(0, 0, 10, 10)};
  const std::vector<BoundingBox> dets{box(1, 0, 10, 10, 0.5),
                                      box(0, 0, 10, 10, 3.0)};
  const auto eval = evaluate_frame(dets, truth);
  CHECK(eval.hits == 1);
  CHECK(eval.false_alarms == 1);
}

TEST_CASE("evaluate_frame: counting identities hold") {
  std::mt19937_64 rng(37);
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<BoundingBox> dets, truth;
    for (int i = 0; i < static_cast<int>(rng() % 6); ++i)
      dets.push_back(box(static_cast<int>(rng() % 40), static_cast<int>(rng() % 40),
                         3 + static_cast<int>(rng() % 8),
                         3 + static_cast<int>(rng() % 8), unit_uniform(rng)));
    for (int i = 0; i < static_cast<int>(rng() % 4); ++i)
      truth.push_back(box(static_cast<int>(rng() % 40), static_cast<int>(rng() % 40),
                          3 + static_cast<int>(rng() % 8),
                          3 + static_cast<int>(rng() % 8)));
    const auto eval = evaluate_frame(dets, truth);
    CHECK(eval.hits + eval.misses == static_cast<int>(truth.size()));
    CHECK(eval.hits + eval.false_alarms == static_cast<int>(dets.size()));
    CHECK(eval.hits >= 0);
  }
}

TEST_CASE("threshold ladder from quantiles") {
  std::vector<double> pooled;
  std::mt19937_64 rng(41);
  for (int i = 0; i < 5000; ++i) pooled.push_back(10 * (unit_uniform(rng) - 0.5));

  const auto ladder = ThresholdLadder::from_quantiles(pooled, 21);
  CHECK(ladder.deltas.size() == 21);
  for (size_t i = 1; i < ladder.deltas.size(); ++i)
    CHECK(ladder.deltas[i] > ladder.deltas[i - 1]);
  CHECK(ladder.deltas.front() == *std::min_element(pooled.begin(), pooled.end()));
  CHECK(ladder.deltas.back() == *std::max_element(pooled.begin(), pooled.end()));

  // constant pool collapses to a single delta
  const std::vector<double> flat(100, 2.5);
  CHECK(ThresholdLadder::from_quantiles(flat, 21).deltas.size() == 1);

  CHECK_THROWS_AS(ThresholdLadder::from_quantiles({}, 5), Error);
  CHECK_THROWS_AS(ThresholdLadder{}.validate(), Error);
}

TEST_CASE("build_roc: extreme deltas and monotone ladder") {
  // two frames, one 6x4 super-threshold blob each matching truth
  std::vector<RocFrame> frames;
  for (int f = 0; f < 2; ++f) {
    RocFrame frame;
    frame.rho = flat_map(40, 30, -10.0);
    const BoundingBox blob{8 + 4 * f, 10, 6, 4};
    paint(frame.rho, blob, 5.0 + f);
    frame.truth.push_back(blob);
    frames.push_back(std::move(frame));
  }

  ThresholdLadder ladder;
  ladder.deltas = {-20.0, 0.0, 4.0, 5.5, 10.0};
  const EvalReport report = build_roc(frames, ladder);
  REQUIRE(report.points.size() == 5);

  // an all-pass delta fuses the frame into one giant component whose IoU
  // with the small truth box fails: one false alarm, no hit
  CHECK(report.points[0].hit_rate == 0.0);
  CHECK(report.points[0].fa_per_frame == doctest::Approx(1.0));
  // above the global max: nothing
  CHECK(report.points.back().hit_rate == 0.0);
  CHECK(report.points.back().fa_per_frame == 0.0);
  // at delta 0 both blobs are found exactly
  CHECK(report.points[1].hit_rate == doctest::Approx(1.0));
  CHECK(report.points[1].fa_per_frame == 0.0);
  // at delta 5.5 only the second frame's blob survives
  CHECK(report.points[3].hit_rate == doctest::Approx(0.5));

  // monotone over the candidate-score range (deltas >= 0)
  for (size_t i = 2; i < report.points.size(); ++i) {
    CHECK(report.points[i].hit_rate <= report.points[i - 1].hit_rate);
    CHECK(report.points[i].fa_per_frame <= report.points[i - 1].fa_per_frame);
  }

  CHECK_THROWS_AS(build_roc({}, ladder), Error);
  CHECK_THROWS_AS(build_roc(frames, ThresholdLadder{}), Error);
}

TEST_CASE("detections csv round-trips") {
  const auto path =
      (std::filesystem::temp_directory_path() / "irdet_dets.csv").string();
  std::vector<FrameDetections> dets;
  dets.push_back({0, {box(1, 2, 3, 4, 0.5), box(9, 9, 2, 2, -1.25)}});
  dets.push_back({2, {box(5, 5, 5, 5, 7.0)}});
  write_detections_csv(path, dets);
  const auto loaded = load_detections_csv(path);
  REQUIRE(loaded.size() == 2);
  CHECK(loaded[0].frame_id == 0);
  REQUIRE(loaded[0].boxes.size() == 2);
  CHECK(loaded[0].boxes[1].score == doctest::Approx(-1.25));
  CHECK(loaded[1].frame_id == 2);
}
