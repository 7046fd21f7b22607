#include "irdet/sar.hpp"

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <Eigen/SparseLU>
#include <cmath>
#include <fstream>
#include <numbers>
#include <random>
#include <sstream>

#include "irdet/rng.hpp"

namespace irdet {

namespace {

constexpr double kLogTwoPi = 1.8378770664093454;

}  // namespace

void SarParams::validate() const {
  if (!(sigma2 > 0.0) || !std::isfinite(sigma2))
    throw Error("bad params", "sigma2 must be positive and finite");
  if (!std::isfinite(mu)) throw Error("bad params", "mu must be finite");
  for (double b : beta)
    if (!std::isfinite(b)) throw Error("bad params", "beta must be finite");
}

NeighborValues gather_neighbor_values(const PixelGrid& image, int site) {
  NeighborValues nv{};
  for (const auto& n : neighbors(image.width, image.height, site))
    nv[static_cast<int>(n.dir)] = image.values[n.index];
  return nv;
}

double sar_conditional_mean(const SarParams& p, const NeighborValues& nv) {
  double m = p.mu;
  for (int d = 0; d < kNumDirections; ++d)
    if (nv[d]) m += p.beta[d] * (*nv[d] - p.mu);
  return m;
}

double sar_conditional_logpdf(const SarParams& p, double y_i,
                              const NeighborValues& nv) {
  const double m = sar_conditional_mean(p, nv);
  const double d = y_i - m;
  return -0.5 * (kLogTwoPi + std::log(p.sigma2)) - d * d / (2.0 * p.sigma2);
}

SarPotentials sar_potentials(const SarParams& p, double y_i, double y_j,
                             Direction dir) {
  const double b = p.beta[static_cast<int>(dir)];
  const double di = y_i - p.mu;
  const double dj = y_j - p.mu;
  return {di * di / (2.0 * p.sigma2), b * b * di * dj / (2.0 * p.sigma2)};
}

SarParams fit_sar(std::span<const SarSample> samples, double ridge) {
  if (ridge < 0.0) throw Error("bad params", "negative ridge");

  double mu = 0.0;
  size_t complete = 0;
  for (const auto& s : samples) {
    mu += s.value;
    bool full = true;
    for (const auto& n : s.neighbors) full = full && n.has_value();
    if (full) complete += 1;
  }
  if (complete < 5)
    throw Error("insufficient samples",
                "need at least 5 samples with a complete neighborhood, got " +
                    std::to_string(complete));
  mu /= static_cast<double>(samples.size());

  // Normal equations over complete rows; deviations from the class mean.
  Eigen::Matrix4d xtx = Eigen::Matrix4d::Zero();
  Eigen::Vector4d xtz = Eigen::Vector4d::Zero();
  for (const auto& s : samples) {
    Eigen::Vector4d x;
    bool full = true;
    for (int d = 0; d < kNumDirections; ++d) {
      if (!s.neighbors[d]) {
        full = false;
        break;
      }
      x[d] = *s.neighbors[d] - mu;
    }
    if (!full) continue;
    xtx += x * x.transpose();
    xtz += x * (s.value - mu);
  }

  Eigen::Vector4d beta;
  if (ridge == 0.0) {
    const Eigen::FullPivLU<Eigen::Matrix4d> lu(xtx);
    if (!lu.isInvertible())
      throw Error("singular system",
                  "normal equations are singular; use a positive ridge");
    beta = lu.solve(xtz);
  } else {
    beta = (xtx + ridge * Eigen::Matrix4d::Identity()).ldlt().solve(xtz);
  }

  // Residual variance over every row, truncated neighborhoods included.
  double ss = 0.0;
  for (const auto& s : samples) {
    double m = mu;
    for (int d = 0; d < kNumDirections; ++d)
      if (s.neighbors[d]) m += beta[d] * (*s.neighbors[d] - mu);
    const double r = s.value - m;
    ss += r * r;
  }
  const double sigma2 =
      std::max(ss / static_cast<double>(samples.size()), kSarVarianceFloor);

  SarParams p;
  p.mu = mu;
  p.sigma2 = sigma2;
  for (int d = 0; d < kNumDirections; ++d) p.beta[d] = beta[d];
  p.validate();
  return p;
}

std::vector<SarSample> sar_samples_from_region(const PixelGrid& image,
                                               const BoundingBox& region) {
  if (!region.inside(image.width, image.height))
    throw Error("bad params", "region outside image bounds");
  std::vector<SarSample> samples;
  samples.reserve(static_cast<size_t>(region.area()));
  for (int y = region.y0; y < region.y1(); ++y) {
    for (int x = region.x0; x < region.x1(); ++x) {
      SarSample s;
      s.value = image.at(x, y);
      for (int d = 0; d < kNumDirections; ++d) {
        const int nx = x + kDirectionOffsets[d][0];
        const int ny = y + kDirectionOffsets[d][1];
        if (region.contains(nx, ny)) s.neighbors[d] = image.at(nx, ny);
      }
      samples.push_back(s);
    }
  }
  return samples;
}

PixelGrid sample_sar(const SarParams& p, int width, int height,
                     std::uint64_t seed) {
  p.validate();
  if (width <= 0 || height <= 0)
    throw Error("bad params", "non-positive field dimensions");
  const int n = width * height;

  Eigen::SparseMatrix<double> system(n, n);
  std::vector<Eigen::Triplet<double>> triplets;
  triplets.reserve(static_cast<size_t>(5) * n);
  for (int site = 0; site < n; ++site) {
    triplets.emplace_back(site, site, 1.0);
    for (const auto& nb : neighbors(width, height, site))
      triplets.emplace_back(site, nb.index,
                            -p.beta[static_cast<int>(nb.dir)]);
  }
  system.setFromTriplets(triplets.begin(), triplets.end());

  Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
  lu.analyzePattern(system);
  lu.factorize(system);
  if (lu.info() != Eigen::Success)
    throw Error("singular system", "I - B factorization failed");

  std::mt19937_64 rng(seed);
  Eigen::VectorXd eps(n);
  const double noise_sd = std::sqrt(p.sigma2);
  for (int i = 0; i < n; ++i) eps[i] = noise_sd * standard_normal(rng);
  const Eigen::VectorXd z = lu.solve(eps);

  std::vector<double> values(n);
  for (int i = 0; i < n; ++i) {
    values[i] = p.mu + z[i];
    if (!std::isfinite(values[i]))
      throw Error("singular system", "solve produced non-finite field");
  }
  return PixelGrid(width, height, std::move(values));
}

void save_sar_params(const std::string& path, const SarParams& p) {
  std::ofstream out(path);
  if (!out) throw Error("missing file", path + ": cannot open for write");
  out.precision(17);
  out << "mu " << p.mu << "\n"
      << "sigma2 " << p.sigma2 << "\n"
      << "beta_up " << p.beta[0] << "\n"
      << "beta_left " << p.beta[1] << "\n"
      << "beta_right " << p.beta[2] << "\n"
      << "beta_down " << p.beta[3] << "\n";
}

SarParams load_sar_params(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("missing file", path);
  SarParams p;
  bool seen[6] = {};
  std::string key;
  double value = 0.0;
  while (in >> key >> value) {
    if (key == "mu") p.mu = value, seen[0] = true;
    else if (key == "sigma2") p.sigma2 = value, seen[1] = true;
    else if (key == "beta_up") p.beta[0] = value, seen[2] = true;
    else if (key == "beta_left") p.beta[1] = value, seen[3] = true;
    else if (key == "beta_right") p.beta[2] = value, seen[4] = true;
    else if (key == "beta_down") p.beta[3] = value, seen[5] = true;
    else throw Error("bad config", path + ": unknown key '" + key + "'");
  }
  for (bool s : seen)
    if (!s) throw Error("bad config", path + ": incomplete SAR parameters");
  p.validate();
  return p;
}

}  // namespace irdet
