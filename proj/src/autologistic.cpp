#include "irdet/autologistic.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <random>

#include "irdet/rng.hpp"

namespace irdet {

void AutoParams::validate() const {
  if (!std::isfinite(nu) || !std::isfinite(gamma))
    throw Error("bad params", "nu and gamma must be finite");
}

double logistic(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

double softplus(double z) {
  if (z > 0.0) return z + std::log1p(std::exp(-z));
  return std::log1p(std::exp(z));
}

double auto_conditional(const AutoParams& p, int active_neighbors) {
  return logistic(p.nu + p.gamma * active_neighbors);
}

double auto_conditional(const AutoParams& p,
                        std::span<const std::uint8_t> neighbor_labels) {
  if (neighbor_labels.size() > kNumDirections)
    throw Error("bad params", "more than 4 neighbor labels");
  int sum = 0;
  for (std::uint8_t l : neighbor_labels) {
    if (l > 1) throw Error("bad params", "neighbor label not in {0,1}");
    sum += l;
  }
  return auto_conditional(p, sum);
}

double auto_conditional_log(const AutoParams& p, int label,
                            int active_neighbors) {
  const double z = p.nu + p.gamma * active_neighbors;
  // log sigma(z) = -softplus(-z); log(1 - sigma(z)) = -softplus(z)
  return label ? -softplus(-z) : -softplus(z);
}

int neighbor_label_sum(const LabelGrid& labels, int site) {
  int sum = 0;
  for (const auto& n : neighbors(labels.width, labels.height, site))
    sum += labels.labels[n.index];
  return sum;
}

double log_pll(const AutoParams& p, const LabelGrid& labels) {
  const LabelGrid* one = &labels;
  return log_pll(p, std::span<const LabelGrid>(one, 1));
}

double log_pll(const AutoParams& p, std::span<const LabelGrid> grids) {
  p.validate();
  double total = 0.0;
  for (const auto& g : grids) {
    for (int site = 0; site < g.size(); ++site) {
      const int s = neighbor_label_sum(g, site);
      const double z = p.nu + p.gamma * s;
      total += g.labels[site] * z - softplus(z);
    }
  }
  return total;
}

PllGradient log_pll_gradient(const AutoParams& p, const LabelGrid& labels) {
  const LabelGrid* one = &labels;
  return log_pll_gradient(p, std::span<const LabelGrid>(one, 1));
}

PllGradient log_pll_gradient(const AutoParams& p,
                             std::span<const LabelGrid> grids) {
  p.validate();
  PllGradient g;
  for (const auto& grid : grids) {
    for (int site = 0; site < grid.size(); ++site) {
      const int s = neighbor_label_sum(grid, site);
      const double resid = grid.labels[site] - logistic(p.nu + p.gamma * s);
      g.d_nu += resid;
      g.d_gamma += s * resid;
    }
  }
  return g;
}

namespace {

struct PllCurvature {
  double h_nn = 0.0, h_ng = 0.0, h_gg = 0.0;  // negated Hessian entries
};

PllCurvature pll_curvature(const AutoParams& p,
                           std::span<const LabelGrid> grids) {
  PllCurvature c;
  for (const auto& grid : grids) {
    for (int site = 0; site < grid.size(); ++site) {
      const int s = neighbor_label_sum(grid, site);
      const double sig = logistic(p.nu + p.gamma * s);
      const double w = sig * (1.0 - sig);
      c.h_nn += w;
      c.h_ng += w * s;
      c.h_gg += w * s * s;
    }
  }
  return c;
}

}  // namespace

AutoParams fit_auto(const LabelGrid& labels, AutoFitTrace* trace) {
  const LabelGrid* one = &labels;
  return fit_auto(std::span<const LabelGrid>(one, 1), trace);
}

AutoParams fit_auto(std::span<const LabelGrid> grids, AutoFitTrace* trace) {
  if (grids.empty()) throw Error("degenerate labels", "no grids");
  long long ones = 0, total = 0;
  for (const auto& g : grids) {
    for (std::uint8_t l : g.labels) ones += l;
    total += g.size();
  }
  if (ones == 0 || ones == total)
    throw Error("degenerate labels", "grid contains a single class");

  AutoParams p;  // start from the uninformative prior (0, 0)
  double value = log_pll(p, grids);
  PllGradient grad = log_pll_gradient(p, grids);
  if (trace) *trace = AutoFitTrace{};

  int iter = 0;
  for (; iter < kAutoFitMaxIters; ++iter) {
    if (std::max(std::abs(grad.d_nu), std::abs(grad.d_gamma)) < kAutoFitGradTol)
      break;

    // Newton ascent direction; the PLL is concave, so the negated Hessian
    // is positive semidefinite. Fall back to a curvature-scaled gradient
    // step when it is numerically singular.
    const PllCurvature c = pll_curvature(p, grids);
    const double det = c.h_nn * c.h_gg - c.h_ng * c.h_ng;
    double dir_nu, dir_gamma;
    if (det > 1e-12 * std::max(1.0, c.h_nn * c.h_gg)) {
      dir_nu = (c.h_gg * grad.d_nu - c.h_ng * grad.d_gamma) / det;
      dir_gamma = (-c.h_ng * grad.d_nu + c.h_nn * grad.d_gamma) / det;
    } else {
      const double scale = std::max({c.h_nn, c.h_gg, 1e-12});
      dir_nu = grad.d_nu / scale;
      dir_gamma = grad.d_gamma / scale;
    }

    const double slope = grad.d_nu * dir_nu + grad.d_gamma * dir_gamma;
    if (!(slope > 0.0)) break;  // no ascent direction left

    // Close to the optimum the Newton improvement drops below the floating
    // point resolution of the objective; value-based backtracking cannot
    // make progress there, but the full Newton step still contracts the
    // gradient quadratically.
    const double value_resolution = (std::abs(value) + 1.0) * 1e-14;
    if (slope < value_resolution) {
      p.nu += dir_nu;
      p.gamma += dir_gamma;
      value = log_pll(p, grids);
      grad = log_pll_gradient(p, grids);
      continue;
    }

    double step = 1.0;
    bool accepted = false;
    for (int bt = 0; bt < 60; ++bt) {
      AutoParams cand{p.nu + step * dir_nu, p.gamma + step * dir_gamma};
      const double cand_value = log_pll(cand, grids);
      if (cand_value >= value + 1e-4 * step * slope) {
        p = cand;
        value = cand_value;
        grad = log_pll_gradient(p, grids);
        accepted = true;
        if (trace) trace->lpll_per_step.push_back(value);
        break;
      }
      step *= 0.5;
    }
    if (!accepted) break;
  }

  if (trace) {
    trace->iterations = iter;
    trace->converged =
        std::max(std::abs(grad.d_nu), std::abs(grad.d_gamma)) < kAutoFitGradTol;
  }
  return p;
}

LabelGrid sample_auto(const AutoParams& p, int width, int height, int sweeps,
                      std::uint64_t seed) {
  p.validate();
  if (sweeps < 1) throw Error("bad params", "sweeps must be >= 1");
  LabelGrid grid(width, height, 0);
  std::mt19937_64 rng(seed);
  for (int sweep = 0; sweep < sweeps; ++sweep) {
    for (int site = 0; site < grid.size(); ++site) {
      const double p1 = auto_conditional(p, neighbor_label_sum(grid, site));
      grid.labels[site] = unit_uniform(rng) < p1 ? 1 : 0;
    }
  }
  return grid;
}

void save_auto_params(const std::string& path, const AutoParams& p) {
  std::ofstream out(path);
  if (!out) throw Error("missing file", path + ": cannot open for write");
  out.precision(17);
  out << "nu " << p.nu << "\n"
      << "gamma " << p.gamma << "\n";
}

AutoParams load_auto_params(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("missing file", path);
  AutoParams p;
  bool seen_nu = false, seen_gamma = false;
  std::string key;
  double value = 0.0;
  while (in >> key >> value) {
    if (key == "nu") p.nu = value, seen_nu = true;
    else if (key == "gamma") p.gamma = value, seen_gamma = true;
    else throw Error("bad config", path + ": unknown key '" + key + "'");
  }
  if (!seen_nu || !seen_gamma)
    throw Error("bad config", path + ": incomplete auto-logistic parameters");
  p.validate();
  return p;
}

}  // namespace irdet
