#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "irdet/bgsub.hpp"
#include "irdet/detect.hpp"
#include "irdet/icm.hpp"
#include "irdet/types.hpp"

namespace irdet {

// Parameter files written by training and read by detection.
inline constexpr const char* kSarTargetFile = "sar_target.txt";
inline constexpr const char* kSarBackgroundFile = "sar_background.txt";
inline constexpr const char* kAutoPriorFile = "auto_prior.txt";
inline constexpr const char* kEmpiricalFile = "empirical.txt";

/// Batch run configuration; plain key=value text file, command line
/// overrides, no environment variables.
struct RunConfig {
  VariantTag variant = VariantTag::SarAuto;
  std::string model_dir = ".";
  int ladder_size = kLadderSizeDefault;
  int min_area = kMinAreaDefault;
  int bg_history = kBgHistoryDefault;
  double bg_sigma = kBgSigmaDefault;
  double bg_tau = kBgTauDefault;
  std::uint64_t seed = 0;
  int max_sweeps = kIcmMaxSweepsDefault;

  void validate() const;
};

RunConfig load_config(const std::string& path);
void save_config(const std::string& path, const RunConfig& config);
std::string serialize_config(const RunConfig& config);
std::uint64_t config_hash(const RunConfig& config);

/// Provenance record written beside every command's outputs (run.txt):
/// command, inputs, config hash, and the full config. Contains nothing
/// non-deterministic, so reruns are byte-identical.
void write_run_manifest(const std::string& out_dir, const std::string& command,
                        const std::vector<std::pair<std::string, std::string>>& inputs,
                        const RunConfig& config);

/// Marginal per-class statistics estimated from labeled training pixels;
/// SAR-i takes its target rate and i-Auto its iid Gaussians from here.
struct EmpiricalStats {
  double target_rate = 0.5;
  double target_mean = 0.0;
  double target_var = 1.0;
  double background_mean = 0.0;
  double background_var = 1.0;
};

void save_empirical_stats(const std::string& path, const EmpiricalStats& stats);
EmpiricalStats load_empirical_stats(const std::string& path);

struct TrainOutput {
  ClassSarModel sar;
  AutoParams prior;
  EmpiricalStats stats;
};

/// Fits the target SAR from in-box pixels, the background SAR from randomly
/// placed same-size patches clear of every truth box (seeded), and the
/// label prior from rasterized truth grids. Writes the parameter files
/// into out_dir. Errors: "empty manifest", "degenerate labels".
TrainOutput cmd_train(const std::string& manifest_path, const RunConfig& config,
                      const std::string& out_dir);

/// Reads the parameter files a variant needs from config.model_dir.
ModelVariant load_variant(const RunConfig& config);

struct DetectOutput {
  ThresholdLadder ladder;
  EvalReport report;
  std::vector<FrameDetections> detections;  // at the lowest ladder delta
  std::string detections_csv;
  std::string roc_csv;
};

/// Per frame: ICM inference, ratio map, ladder sweep. The ladder is built
/// from pooled log-rho quantiles. Detections are written at the lowest
/// (most permissive) delta; the ROC covers the whole ladder.
DetectOutput cmd_detect(const std::string& manifest_path, const RunConfig& config,
                        const std::string& out_dir);

struct FuseRow {
  std::string method;
  double hit_rate = 0.0;
  double fa_per_frame = 0.0;
};

struct FuseOutput {
  FuseRow bgsub_only;
  FuseRow before;  // MRF labels alone
  FuseRow after;   // labels AND kde foreground
  std::string table_csv;
};

/// Runs KDE background subtraction along the (temporally ordered) manifest
/// and fuses it with the MRF labeling per frame. Frame 0 only seeds the
/// history; frames 1..N-1 are scored against the frames before them and
/// enter the before/after table. Error: "manifest too short".
FuseOutput cmd_fuse(const std::string& manifest_path, const RunConfig& config,
                    const std::string& out_dir);

struct EvalOutput {
  FrameEval totals;
  double hit_rate = 0.0;
  double fa_per_frame = 0.0;
};

/// Re-scores a detections CSV against manifest ground truth.
EvalOutput cmd_eval(const std::string& detections_csv,
                    const std::string& manifest_path);

}  // namespace irdet
