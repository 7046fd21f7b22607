#pragma once

#include <cstdint>
#include <string>

#include "irdet/autologistic.hpp"
#include "irdet/sar.hpp"
#include "irdet/types.hpp"

namespace irdet {

enum class VariantTag { SarAuto, SarI, IAuto };

std::string variant_name(VariantTag tag);
VariantTag parse_variant(const std::string& name);

/// Coupled model under one of three coupling assumptions:
///   SAR-Auto — SAR intensity likelihood, auto-logistic label prior;
///   SAR-i    — SAR intensity likelihood, independent labels with target
///              rate pi_hat;
///   i-Auto   — iid Gaussian intensities (SAR with beta = 0), auto-logistic
///              label prior.
/// Built through the factories so each tag carries exactly its own fields.
struct ModelVariant {
  VariantTag tag = VariantTag::SarAuto;
  ClassSarModel sar;
  AutoParams prior;        // SarAuto, IAuto
  double target_rate = 0.5;  // SarI only, in (0,1)

  static ModelVariant sar_auto(const ClassSarModel& sar, const AutoParams& prior);
  static ModelVariant sar_i(const ClassSarModel& sar, double target_rate);
  static ModelVariant i_auto(double target_mean, double target_var,
                             double background_mean, double background_var,
                             const AutoParams& prior);
  void validate() const;
};

/// log of the local posterior factor p(y_i | x_i, y_Ni) p(x_i | x_Ni) for
/// the candidate label, under the variant's coupling assumptions.
double local_log_posterior(const ModelVariant& variant, const PixelGrid& image,
                           const LabelGrid& labels, int site,
                           int candidate_label);

/// Pointwise maximum-likelihood labels from the intensity term alone;
/// the standard deterministic ICM warm start.
LabelGrid ml_init_labels(const ModelVariant& variant, const PixelGrid& image);

inline constexpr int kIcmMaxSweepsDefault = 50;

struct IcmResult {
  LabelGrid labels;
  int sweeps_used = 0;
};

/// Iterated conditional modes with the alternating (checkerboard) schedule:
/// each full sweep updates all even-parity (row+col) sites, then all odd.
/// Sites move to the argmax of local_log_posterior; exact ties keep the
/// current label. Stops after a full sweep with no change, or max_sweeps.
IcmResult icm_infer(const ModelVariant& variant, const PixelGrid& image,
                    const LabelGrid& init_labels,
                    int max_sweeps = kIcmMaxSweepsDefault);

/// ml_init_labels + icm_infer.
IcmResult run_icm(const ModelVariant& variant, const PixelGrid& image,
                  int max_sweeps = kIcmMaxSweepsDefault);

/// Per-pixel posterior ratio, stored in log space:
/// log rho_i = local_log_posterior(..., 1) - local_log_posterior(..., 0),
/// evaluated at the converged labeling.
struct RatioMap {
  int width = 0;
  int height = 0;
  std::vector<double> log_rho;

  int size() const { return width * height; }
};

RatioMap ratio_map(const ModelVariant& variant, const PixelGrid& image,
                   const LabelGrid& labels);

/// Binary serialization: two little-endian uint32 (width, height) followed
/// by width*height little-endian doubles, row-major.
void write_ratio_map(const std::string& path, const RatioMap& map);
RatioMap load_ratio_map(const std::string& path);

}  // namespace irdet
