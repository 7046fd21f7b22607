#include "irdet/dataset.hpp"

#include <filesystem>
#include <fstream>
#include <sstream>

#include "irdet/pgm.hpp"

namespace irdet {

namespace {

namespace fs = std::filesystem;

std::string strip(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r\n");
  if (a == std::string::npos) return "";
  const auto b = s.find_last_not_of(" \t\r\n");
  return s.substr(a, b - a + 1);
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> fields;
  std::stringstream ss(line);
  std::string field;
  while (std::getline(ss, field, ',')) fields.push_back(strip(field));
  return fields;
}

int parse_int(const std::string& s, const std::string& context) {
  try {
    size_t pos = 0;
    const int v = std::stoi(s, &pos);
    if (pos != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw Error("malformed csv", context + ": bad integer '" + s + "'");
  }
}

}  // namespace

std::vector<BoundingBox> load_truth_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("missing file", path);
  std::vector<BoundingBox> boxes;
  std::string line;
  while (std::getline(in, line)) {
    line = strip(line);
    if (line.empty()) continue;
    const auto fields = split_csv(line);
    if (fields.size() != 4)
      throw Error("malformed csv", path + ": expected x0,y0,w,h");
    BoundingBox b;
    b.x0 = parse_int(fields[0], path);
    b.y0 = parse_int(fields[1], path);
    b.w = parse_int(fields[2], path);
    b.h = parse_int(fields[3], path);
    if (b.w < 1 || b.h < 1)
      throw Error("malformed csv", path + ": non-positive box extent");
    boxes.push_back(b);
  }
  return boxes;
}

void write_truth_csv(const std::string& path, std::span<const BoundingBox> boxes) {
  std::ofstream out(path);
  if (!out) throw Error("missing file", path + ": cannot open for write");
  for (const auto& b : boxes)
    out << b.x0 << ',' << b.y0 << ',' << b.w << ',' << b.h << '\n';
}

std::vector<FrameRef> load_manifest(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("missing file", path);
  const fs::path base = fs::path(path).parent_path();
  const auto resolve = [&base](const std::string& p) {
    const fs::path q(p);
    return q.is_absolute() ? q.string() : (base / q).string();
  };

  std::vector<FrameRef> frames;
  std::string line;
  while (std::getline(in, line)) {
    line = strip(line);
    if (line.empty() || line[0] == '#') continue;
    const auto fields = split_csv(line);
    if (fields.size() != 2)
      throw Error("malformed csv", path + ": expected image-path,truth-path");
    frames.push_back({resolve(fields[0]), resolve(fields[1])});
  }
  return frames;
}

void write_manifest(const std::string& path, std::span<const FrameRef> frames) {
  std::ofstream out(path);
  if (!out) throw Error("missing file", path + ": cannot open for write");
  for (const auto& f : frames) out << f.image_path << ',' << f.truth_path << '\n';
}

Frame load_frame(const FrameRef& ref) {
  Frame frame;
  frame.image = load_image(ref.image_path);
  frame.truth = load_truth_csv(ref.truth_path);
  for (const auto& b : frame.truth)
    if (!b.inside(frame.image.width, frame.image.height))
      throw Error("malformed csv",
                  ref.truth_path + ": truth box outside image bounds");
  return frame;
}

}  // namespace irdet
