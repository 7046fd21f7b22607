#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "irdet/types.hpp"

namespace irdet {

/// Auto-logistic label prior. nu is shared across sites and gamma across
/// the four directions, so the local conditional is
///   p(x_i = 1 | x_Ni) = logistic(nu + gamma * sum of neighbor labels).
struct AutoParams {
  double nu = 0.0;
  double gamma = 0.0;

  void validate() const;
};

double logistic(double z);

/// Numerically safe log(1 + exp(z)).
double softplus(double z);

/// p(x_i = 1 | neighbors) given the number of active in-bounds neighbors.
double auto_conditional(const AutoParams& p, int active_neighbors);

/// Same, from explicit neighbor labels (0-4 of them; boundary truncation).
double auto_conditional(const AutoParams& p,
                        std::span<const std::uint8_t> neighbor_labels);

/// log p(x_i = label | neighbors).
double auto_conditional_log(const AutoParams& p, int label,
                            int active_neighbors);

// Clique potentials as the model states them; diagnostic evaluators only.
inline double auto_pointwise_potential(const AutoParams& p, int x_i) {
  return p.nu * x_i;
}
inline double auto_pairwise_potential(const AutoParams& p, int x_i, int x_j) {
  return p.gamma * x_i * x_j;
}

/// Sum of in-bounds neighbor labels at a site.
int neighbor_label_sum(const LabelGrid& labels, int site);

/// Log pseudo-likelihood: sum_i { nu x_i + gamma x_i S_i } -
/// sum_i softplus(nu + gamma S_i), with S_i the in-bounds neighbor sum.
/// Equals the sum of per-site log conditionals.
double log_pll(const AutoParams& p, const LabelGrid& labels);
double log_pll(const AutoParams& p, std::span<const LabelGrid> grids);

struct PllGradient {
  double d_nu = 0.0;
  double d_gamma = 0.0;
};
PllGradient log_pll_gradient(const AutoParams& p, const LabelGrid& labels);
PllGradient log_pll_gradient(const AutoParams& p,
                             std::span<const LabelGrid> grids);

inline constexpr double kAutoFitGradTol = 1e-6;
inline constexpr int kAutoFitMaxIters = 500;

struct AutoFitTrace {
  std::vector<double> lpll_per_step;  // value after each accepted step
  int iterations = 0;
  bool converged = false;
};

/// Maximizes the log pseudo-likelihood by damped Newton ascent with Armijo
/// backtracking (shrink 0.5, initial step 1.0). Converged when the gradient
/// infinity-norm drops below kAutoFitGradTol, capped at kAutoFitMaxIters.
/// Error: "degenerate labels" when the grids hold a single class.
AutoParams fit_auto(const LabelGrid& labels, AutoFitTrace* trace = nullptr);
AutoParams fit_auto(std::span<const LabelGrid> grids,
                    AutoFitTrace* trace = nullptr);

/// Systematic-scan Gibbs sampler over the local conditionals; starts from
/// the all-zero field and is deterministic given the seed.
LabelGrid sample_auto(const AutoParams& p, int width, int height, int sweeps,
                      std::uint64_t seed);

/// Key-value text serialization: nu, gamma.
void save_auto_params(const std::string& path, const AutoParams& p);
AutoParams load_auto_params(const std::string& path);

}  // namespace irdet
