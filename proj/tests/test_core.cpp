#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <random>

#include "irdet/dataset.hpp"
#include "irdet/pgm.hpp"
#include "irdet/types.hpp"

using namespace irdet;
namespace fs = std::filesystem;

namespace {

fs::path scratch_dir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("irdet_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string read_bytes(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(in.good());
  return std::string(std::istreambuf_iterator<char>(in), {});
}

void write_bytes(const fs::path& path, const std::string& bytes) {
  std::ofstream out(path, std::ios::binary);
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
}

}  // namespace

TEST_CASE("grid constructors enforce invariants") {
  CHECK_THROWS_AS(PixelGrid(0, 3), Error);
  CHECK_THROWS_AS(PixelGrid(2, 2, {1.0, 2.0, 3.0}), Error);
  CHECK_THROWS_AS(PixelGrid(2, 1, {1.0, std::nan("")}), Error);
  CHECK_THROWS_AS(LabelGrid(2, 1, {0, 2}), Error);
  const PixelGrid g(3, 2, 7.0);
  CHECK(g.size() == 6);
  CHECK(g.at(2, 1) == 7.0);
}

TEST_CASE("neighbors: interior, corner, degenerate") {
  const auto center = neighbors(3, 3, 4);
  REQUIRE(center.count == 4);
  CHECK(center.refs[0].dir == Direction::Up);
  CHECK(center.refs[0].index == 1);
  CHECK(center.refs[1].dir == Direction::Left);
  CHECK(center.refs[1].index == 3);
  CHECK(center.refs[2].dir == Direction::Right);
  CHECK(center.refs[2].index == 5);
  CHECK(center.refs[3].dir == Direction::Down);
  CHECK(center.refs[3].index == 7);

  const auto corner = neighbors(3, 3, 0);
  REQUIRE(corner.count == 2);
  CHECK(corner.refs[0].dir == Direction::Right);
  CHECK(corner.refs[0].index == 1);
  CHECK(corner.refs[1].dir == Direction::Down);
  CHECK(corner.refs[1].index == 3);

  CHECK(neighbors(1, 1, 0).count == 0);
}

TEST_CASE("neighbors symmetry with opposite direction tags") {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 20; ++trial) {
    const int w = 1 + static_cast<int>(rng() % 7);
    const int h = 1 + static_cast<int>(rng() % 7);
    for (int site = 0; site < w * h; ++site) {
      for (const auto& n : neighbors(w, h, site)) {
        bool found = false;
        for (const auto& back : neighbors(w, h, n.index)) {
          if (back.index == site) {
            CHECK(back.dir == opposite_direction(n.dir));
            found = true;
          }
        }
        CHECK(found);
      }
    }
  }
}

TEST_CASE("box_iou examples and properties") {
  const BoundingBox a{0, 0, 10, 10};
  CHECK(box_iou(a, a) == doctest::Approx(1.0));
  CHECK(box_iou(a, {20, 20, 5, 5}) == doctest::Approx(0.0));
  // intersection 50, union 150
  CHECK(box_iou(a, {5, 0, 10, 10}) == doctest::Approx(50.0 / 150.0));

  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 200; ++trial) {
    const BoundingBox p{static_cast<int>(rng() % 20), static_cast<int>(rng() % 20),
                        1 + static_cast<int>(rng() % 10),
                        1 + static_cast<int>(rng() % 10)};
    const BoundingBox q{static_cast<int>(rng() % 20), static_cast<int>(rng() % 20),
                        1 + static_cast<int>(rng() % 10),
                        1 + static_cast<int>(rng() % 10)};
    const double pq = box_iou(p, q);
    CHECK(pq == box_iou(q, p));
    CHECK(pq >= 0.0);
    CHECK(pq <= 1.0);
    const bool identical = p.x0 == q.x0 && p.y0 == q.y0 && p.w == q.w && p.h == q.h;
    CHECK((pq == 1.0) == identical);
  }
}

TEST_CASE("pgm load: direct byte mapping") {
  const auto dir = scratch_dir("pgm_basic");
  write_bytes(dir / "a.pgm", std::string("P5\n2 2\n255\n") +
                                 std::string("\x00\xff\x80\x40", 4));
  const PixelGrid g = load_image((dir / "a.pgm").string());
  CHECK(g.width == 2);
  CHECK(g.height == 2);
  CHECK(g.values == std::vector<double>{0, 255, 128, 64});
}

TEST_CASE("pgm load: 16-bit maximal sample") {
  const auto dir = scratch_dir("pgm_16");
  write_bytes(dir / "a.pgm",
              std::string("P5\n1 1\n65535\n") + std::string("\xff\xff", 2));
  const PixelGrid g = load_image((dir / "a.pgm").string());
  CHECK(g.values[0] == 65535.0);
}

TEST_CASE("pgm load: error cases") {
  const auto dir = scratch_dir("pgm_err");
  CHECK_THROWS_WITH_AS(load_image((dir / "nope.pgm").string()),
                       doctest::Contains("missing file"), Error);

  write_bytes(dir / "trunc.pgm", "P5\n4 4\n255\n\x01\x02");
  try {
    load_image((dir / "trunc.pgm").string());
    FAIL("expected error");
  } catch (const Error& e) {
    CHECK(e.code() == "malformed image");
  }

  write_bytes(dir / "color.ppm", "P6\n1 1\n255\nxyz");
  try {
    load_image((dir / "color.ppm").string());
    FAIL("expected error");
  } catch (const Error& e) {
    CHECK(e.code() == "not grayscale");
  }

  write_bytes(dir / "junk.pgm", "hello world");
  CHECK_THROWS_AS(load_image((dir / "junk.pgm").string()), Error);
}

TEST_CASE("pgm round-trip is byte-identical for conforming files") {
  const auto dir = scratch_dir("pgm_roundtrip");
  std::mt19937_64 rng(3);

  PixelGrid small(5, 4, 0.0);
  for (auto& v : small.values) v = static_cast<double>(rng() % 256);
  write_pgm((dir / "8bit.pgm").string(), small);
  const PixelGrid loaded8 = load_image((dir / "8bit.pgm").string());
  write_pgm((dir / "8bit_again.pgm").string(), loaded8);
  CHECK(read_bytes(dir / "8bit.pgm") == read_bytes(dir / "8bit_again.pgm"));
  CHECK(loaded8.values == small.values);

  PixelGrid wide(3, 3, 0.0);
  for (auto& v : wide.values) v = static_cast<double>(rng() % 65536);
  wide.values[0] = 65535.0;
  write_pgm((dir / "16bit.pgm").string(), wide);
  const PixelGrid loaded16 = load_image((dir / "16bit.pgm").string());
  write_pgm((dir / "16bit_again.pgm").string(), loaded16);
  CHECK(read_bytes(dir / "16bit.pgm") == read_bytes(dir / "16bit_again.pgm"));
  CHECK(loaded16.values == wide.values);
}

TEST_CASE("label pgm uses {0,255} and rejects other samples") {
  const auto dir = scratch_dir("pgm_label");
  LabelGrid labels(4, 2, 0);
  labels.at(1, 0) = 1;
  labels.at(3, 1) = 1;
  write_label_pgm((dir / "mask.pgm").string(), labels);
  const LabelGrid loaded = load_label_pgm((dir / "mask.pgm").string());
  CHECK(loaded.labels == labels.labels);

  write_bytes(dir / "gray.pgm", std::string("P5\n1 1\n255\n") + '\x7f');
  CHECK_THROWS_AS(load_label_pgm((dir / "gray.pgm").string()), Error);
}

TEST_CASE("truth csv and manifest round-trip") {
  const auto dir = scratch_dir("dataset");
  const std::vector<BoundingBox> boxes{{2, 3, 4, 5}, {10, 0, 1, 1}};
  write_truth_csv((dir / "t.csv").string(), boxes);
  const auto loaded = load_truth_csv((dir / "t.csv").string());
  REQUIRE(loaded.size() == 2);
  CHECK(loaded[0].x0 == 2);
  CHECK(loaded[0].h == 5);
  CHECK(loaded[1].x0 == 10);

  // empty truth file means no boxes
  write_bytes(dir / "empty.csv", "");
  CHECK(load_truth_csv((dir / "empty.csv").string()).empty());

  write_bytes(dir / "bad.csv", "1,2,3\n");
  CHECK_THROWS_AS(load_truth_csv((dir / "bad.csv").string()), Error);

  const std::vector<FrameRef> refs{{"img_0000.pgm", "t.csv"}};
  write_manifest((dir / "manifest.txt").string(), refs);
  const auto resolved = load_manifest((dir / "manifest.txt").string());
  REQUIRE(resolved.size() == 1);
  // relative entries resolve against the manifest directory
  CHECK(resolved[0].truth_path == (dir / "t.csv").string());
}

TEST_CASE("load_frame validates truth against image bounds") {
  const auto dir = scratch_dir("frame");
  write_pgm((dir / "img.pgm").string(), PixelGrid(8, 8, 10.0));
  write_truth_csv((dir / "ok.csv").string(),
                  std::vector<BoundingBox>{{1, 1, 3, 3}});
  write_truth_csv((dir / "out.csv").string(),
                  std::vector<BoundingBox>{{6, 6, 5, 5}});

  const Frame frame = load_frame({(dir / "img.pgm").string(), (dir / "ok.csv").string()});
  CHECK(frame.truth.size() == 1);
  CHECK_THROWS_AS(
      load_frame({(dir / "img.pgm").string(), (dir / "out.csv").string()}), Error);
}
