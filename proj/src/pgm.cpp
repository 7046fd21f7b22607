#include "irdet/pgm.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <vector>

namespace irdet {

namespace {

// Skips PGM whitespace and '#' comment lines, then parses one decimal token.
bool next_token_int(std::istream& in, int& out) {
  int c = in.get();
  while (c != EOF) {
    if (c == '#') {
      while (c != EOF && c != '\n') c = in.get();
    } else if (std::isspace(c)) {
      c = in.get();
    } else {
      break;
    }
  }
  if (c == EOF || !std::isdigit(c)) return false;
  long value = 0;
  while (c != EOF && std::isdigit(c)) {
    value = value * 10 + (c - '0');
    if (value > 1'000'000'000L) return false;
    c = in.get();
  }
  if (c != EOF) in.unget();
  out = static_cast<int>(value);
  return true;
}

}  // namespace

PixelGrid load_image(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("missing file", path);

  char magic[2] = {0, 0};
  in.read(magic, 2);
  if (in.gcount() != 2 || magic[0] != 'P')
    throw Error("malformed image", path + ": not a PNM file");
  if (magic[1] == '6' || magic[1] == '3')
    throw Error("not grayscale", path + ": PPM color input");
  if (magic[1] != '5')
    throw Error("malformed image", path + ": unsupported PNM variant P" +
                                        std::string(1, magic[1]));

  int width = 0, height = 0, maxval = 0;
  if (!next_token_int(in, width) || !next_token_int(in, height) ||
      !next_token_int(in, maxval))
    throw Error("malformed image", path + ": bad header");
  if (width <= 0 || height <= 0 || maxval <= 0 || maxval > 65535)
    throw Error("malformed image", path + ": bad dimensions or maxval");
  // Exactly one whitespace byte separates the header from the raster.
  const int sep = in.get();
  if (sep == EOF || !std::isspace(sep))
    throw Error("malformed image", path + ": missing raster separator");

  const size_t n = static_cast<size_t>(width) * height;
  const int bytes_per_sample = maxval > 255 ? 2 : 1;
  std::vector<unsigned char> raw(n * bytes_per_sample);
  in.read(reinterpret_cast<char*>(raw.data()),
          static_cast<std::streamsize>(raw.size()));
  if (static_cast<size_t>(in.gcount()) != raw.size())
    throw Error("malformed image", path + ": truncated raster");

  std::vector<double> values(n);
  if (bytes_per_sample == 1) {
    for (size_t i = 0; i < n; ++i) values[i] = raw[i];
  } else {
    for (size_t i = 0; i < n; ++i)  // 16-bit samples are big-endian
      values[i] = raw[2 * i] * 256 + raw[2 * i + 1];
  }
  return PixelGrid(width, height, std::move(values));
}

void write_pgm(const std::string& path, const PixelGrid& grid, int maxval) {
  if (maxval == 0) {
    maxval = 255;
    for (double v : grid.values)
      if (v > 255.5) {
        maxval = 65535;
        break;
      }
  }
  if (maxval != 255 && maxval != 65535)
    throw Error("bad config", "maxval must be 255 or 65535");

  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("missing file", path + ": cannot open for write");
  out << "P5\n" << grid.width << ' ' << grid.height << '\n' << maxval << '\n';
  for (double v : grid.values) {
    const long s = std::clamp(std::lround(v), 0L, static_cast<long>(maxval));
    if (maxval > 255) {
      out.put(static_cast<char>((s >> 8) & 0xff));
      out.put(static_cast<char>(s & 0xff));
    } else {
      out.put(static_cast<char>(s & 0xff));
    }
  }
  if (!out) throw Error("malformed image", path + ": write failed");
}

void write_label_pgm(const std::string& path, const LabelGrid& labels) {
  PixelGrid g(labels.width, labels.height, 0.0);
  for (int i = 0; i < labels.size(); ++i)
    g.values[i] = labels.labels[i] ? 255.0 : 0.0;
  write_pgm(path, g, 255);
}

LabelGrid load_label_pgm(const std::string& path) {
  const PixelGrid g = load_image(path);
  std::vector<std::uint8_t> labels(g.values.size());
  for (size_t i = 0; i < g.values.size(); ++i) {
    if (g.values[i] == 0.0)
      labels[i] = 0;
    else if (g.values[i] == 255.0)
      labels[i] = 1;
    else
      throw Error("malformed image", path + ": label sample not in {0,255}");
  }
  return LabelGrid(g.width, g.height, std::move(labels));
}

}  // namespace irdet
