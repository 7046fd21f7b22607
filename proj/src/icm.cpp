#include "irdet/icm.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>

namespace irdet {

std::string variant_name(VariantTag tag) {
  switch (tag) {
    case VariantTag::SarAuto: return "sar-auto";
    case VariantTag::SarI: return "sar-i";
    default: return "i-auto";
  }
}

VariantTag parse_variant(const std::string& name) {
  if (name == "sar-auto") return VariantTag::SarAuto;
  if (name == "sar-i") return VariantTag::SarI;
  if (name == "i-auto") return VariantTag::IAuto;
  throw Error("bad config", "unknown variant '" + name + "'");
}

ModelVariant ModelVariant::sar_auto(const ClassSarModel& sar,
                                    const AutoParams& prior) {
  ModelVariant v;
  v.tag = VariantTag::SarAuto;
  v.sar = sar;
  v.prior = prior;
  v.validate();
  return v;
}

ModelVariant ModelVariant::sar_i(const ClassSarModel& sar, double target_rate) {
  ModelVariant v;
  v.tag = VariantTag::SarI;
  v.sar = sar;
  v.target_rate = target_rate;
  v.validate();
  return v;
}

ModelVariant ModelVariant::i_auto(double target_mean, double target_var,
                                  double background_mean, double background_var,
                                  const AutoParams& prior) {
  ModelVariant v;
  v.tag = VariantTag::IAuto;
  v.sar.target = SarParams{target_mean, target_var, {}};
  v.sar.background = SarParams{background_mean, background_var, {}};
  v.prior = prior;
  v.validate();
  return v;
}

void ModelVariant::validate() const {
  sar.target.validate();
  sar.background.validate();
  if (tag == VariantTag::SarI) {
    if (!(target_rate > 0.0) || !(target_rate < 1.0))
      throw Error("bad params", "target rate must lie in (0,1)");
  } else {
    prior.validate();
  }
  if (tag == VariantTag::IAuto) {
    for (int d = 0; d < kNumDirections; ++d)
      if (sar.target.beta[d] != 0.0 || sar.background.beta[d] != 0.0)
        throw Error("bad params", "i-Auto intensities must be iid (beta = 0)");
  }
}

namespace {

double intensity_log_term(const ModelVariant& v, const PixelGrid& image,
                          int site, int label) {
  const SarParams& p = label ? v.sar.target : v.sar.background;
  // i-Auto carries beta = 0, so the same evaluation is the iid Gaussian.
  return sar_conditional_logpdf(p, image.values[site],
                                gather_neighbor_values(image, site));
}

double prior_log_term(const ModelVariant& v, const LabelGrid& labels, int site,
                      int label) {
  if (v.tag == VariantTag::SarI)
    return std::log(label ? v.target_rate : 1.0 - v.target_rate);
  return auto_conditional_log(v.prior, label, neighbor_label_sum(labels, site));
}

}  // namespace

double local_log_posterior(const ModelVariant& variant, const PixelGrid& image,
                           const LabelGrid& labels, int site,
                           int candidate_label) {
  if (image.width != labels.width || image.height != labels.height)
    throw Error("dimension mismatch", "image and label grids differ");
  if (candidate_label != 0 && candidate_label != 1)
    throw Error("bad params", "candidate label not in {0,1}");
  return intensity_log_term(variant, image, site, candidate_label) +
         prior_log_term(variant, labels, site, candidate_label);
}

LabelGrid ml_init_labels(const ModelVariant& variant, const PixelGrid& image) {
  LabelGrid labels(image.width, image.height, 0);
  for (int site = 0; site < image.size(); ++site) {
    const double l1 = intensity_log_term(variant, image, site, 1);
    const double l0 = intensity_log_term(variant, image, site, 0);
    labels.labels[site] = l1 > l0 ? 1 : 0;
  }
  return labels;
}

IcmResult icm_infer(const ModelVariant& variant, const PixelGrid& image,
                    const LabelGrid& init_labels, int max_sweeps) {
  variant.validate();
  if (max_sweeps < 1) throw Error("bad params", "max_sweeps must be >= 1");
  if (image.width != init_labels.width || image.height != init_labels.height)
    throw Error("dimension mismatch", "image and init label grids differ");

  IcmResult result;
  result.labels = init_labels;
  LabelGrid& labels = result.labels;

  for (int sweep = 0; sweep < max_sweeps; ++sweep) {
    int changes = 0;
    for (int parity = 0; parity < 2; ++parity) {
      for (int y = 0; y < image.height; ++y) {
        for (int x = (y + parity) & 1; x < image.width; x += 2) {
          const int site = y * image.width + x;
          const double l0 = local_log_posterior(variant, image, labels, site, 0);
          const double l1 = local_log_posterior(variant, image, labels, site, 1);
          const std::uint8_t current = labels.labels[site];
          // Ties keep the current label, preserving fixed points.
          std::uint8_t next = current;
          if (l1 > l0) next = 1;
          else if (l0 > l1) next = 0;

          // Single-site updates never decrease the local posterior.
          const double before = current ? l1 : l0;
          const double after = next ? l1 : l0;
          if (after < before)
            throw Error("icm invariant",
                        "local posterior decreased during update");

          if (next != current) {
            labels.labels[site] = next;
            ++changes;
          }
        }
      }
    }
    ++result.sweeps_used;
    if (changes == 0) break;
  }
  return result;
}

IcmResult run_icm(const ModelVariant& variant, const PixelGrid& image,
                  int max_sweeps) {
  return icm_infer(variant, image, ml_init_labels(variant, image), max_sweeps);
}

RatioMap ratio_map(const ModelVariant& variant, const PixelGrid& image,
                   const LabelGrid& labels) {
  if (image.width != labels.width || image.height != labels.height)
    throw Error("dimension mismatch", "image and label grids differ");
  RatioMap map;
  map.width = image.width;
  map.height = image.height;
  map.log_rho.resize(image.size());
  for (int site = 0; site < image.size(); ++site) {
    map.log_rho[site] =
        local_log_posterior(variant, image, labels, site, 1) -
        local_log_posterior(variant, image, labels, site, 0);
    if (!std::isfinite(map.log_rho[site]))
      throw Error("bad params", "non-finite log ratio");
  }
  return map;
}

namespace {

static_assert(std::endian::native == std::endian::little,
              "ratio map serialization assumes a little-endian host");

void write_u32(std::ostream& out, std::uint32_t v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof v);
}

std::uint32_t read_u32(std::istream& in) {
  std::uint32_t v = 0;
  in.read(reinterpret_cast<char*>(&v), sizeof v);
  return v;
}

}  // namespace

void write_ratio_map(const std::string& path, const RatioMap& map) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("missing file", path + ": cannot open for write");
  write_u32(out, static_cast<std::uint32_t>(map.width));
  write_u32(out, static_cast<std::uint32_t>(map.height));
  out.write(reinterpret_cast<const char*>(map.log_rho.data()),
            static_cast<std::streamsize>(map.log_rho.size() * sizeof(double)));
  if (!out) throw Error("malformed image", path + ": write failed");
}

RatioMap load_ratio_map(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("missing file", path);
  RatioMap map;
  map.width = static_cast<int>(read_u32(in));
  map.height = static_cast<int>(read_u32(in));
  if (!in || map.width <= 0 || map.height <= 0)
    throw Error("malformed image", path + ": bad ratio map header");
  map.log_rho.resize(static_cast<size_t>(map.width) * map.height);
  in.read(reinterpret_cast<char*>(map.log_rho.data()),
          static_cast<std::streamsize>(map.log_rho.size() * sizeof(double)));
  if (static_cast<size_t>(in.gcount()) != map.log_rho.size() * sizeof(double))
    throw Error("malformed image", path + ": truncated ratio map");
  return map;
}

}  // namespace irdet
