#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>

#include "irdet/types.hpp"

namespace irdet {

/// Simultaneous auto-regressive texture model for one class: the deviation
/// of a pixel from the class mean is a linear mix of its 4 neighbors'
/// deviations plus Gaussian noise,
///   y_i = mu + sum_d beta[d] * (y_d - mu) + eps,   eps ~ N(0, sigma2).
struct SarParams {
  double mu = 0.0;
  double sigma2 = 1.0;
  std::array<double, kNumDirections> beta{};  // indexed by Direction

  void validate() const;
};

struct ClassSarModel {
  SarParams target;
  SarParams background;
};

/// Per-direction neighbor intensities; nullopt marks an out-of-bounds
/// neighbor, which contributes nothing to conditional sums.
using NeighborValues = std::array<std::optional<double>, kNumDirections>;

NeighborValues gather_neighbor_values(const PixelGrid& image, int site);

/// Conditional mean mu + sum over present neighbors of beta_d (y_d - mu).
double sar_conditional_mean(const SarParams& p, const NeighborValues& nv);

/// log N(y_i; conditional mean, sigma2).
double sar_conditional_logpdf(const SarParams& p, double y_i,
                              const NeighborValues& nv);

/// Clique potentials as stated by the model definition; diagnostic only —
/// all probability arithmetic goes through sar_conditional_logpdf.
struct SarPotentials {
  double pointwise;  // (y_i - mu)^2 / (2 sigma2)
  double pairwise;   // beta_d^2 (y_i - mu)(y_j - mu) / (2 sigma2)
};
SarPotentials sar_potentials(const SarParams& p, double y_i, double y_j,
                             Direction d);

/// One regression row: a pixel value and its per-direction neighbors.
struct SarSample {
  double value = 0.0;
  NeighborValues neighbors{};
};

inline constexpr double kSarRidgeDefault = 1e-8;
inline constexpr double kSarVarianceFloor = 1e-9;

/// Least-squares fit: mu is the sample mean of all rows; beta solves the
/// ridge-regularized normal equations over rows with a complete
/// neighborhood (at least 5 required); sigma2 is the mean squared residual
/// over all rows, floored at kSarVarianceFloor.
/// Errors: "insufficient samples"; "singular system" (ridge == 0 only).
SarParams fit_sar(std::span<const SarSample> samples,
                  double ridge = kSarRidgeDefault);

/// Collects one SarSample per pixel of `region`; neighbors outside the
/// region are marked absent so the regression never mixes classes.
std::vector<SarSample> sar_samples_from_region(const PixelGrid& image,
                                               const BoundingBox& region);

/// Exact draw from the simultaneous model: y = mu + (I - B)^{-1} eps with
/// eps iid N(0, sigma2), where B holds beta_d at each in-bounds directional
/// neighbor. Solved by sparse LU; deterministic given the seed.
/// Error: "singular system" when I - B cannot be factorized.
PixelGrid sample_sar(const SarParams& p, int width, int height,
                     std::uint64_t seed);

/// Key-value text serialization: mu, sigma2, beta_up, beta_left,
/// beta_right, beta_down.
void save_sar_params(const std::string& path, const SarParams& p);
SarParams load_sar_params(const std::string& path);

}  // namespace irdet
