#include "irdet/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include "irdet/dataset.hpp"
#include "irdet/rng.hpp"

namespace irdet {

namespace {

namespace fs = std::filesystem;

constexpr std::uint64_t kTrainStream = 0x7261696e;  // background patch draws
constexpr int kPatchPlaceTries = 200;

int uniform_int(std::mt19937_64& rng, int lo, int hi) {
  const double u = unit_uniform(rng);
  const int span = hi - lo + 1;
  return lo + std::min(span - 1, static_cast<int>(u * span));
}

}  // namespace

void RunConfig::validate() const {
  if (ladder_size < 1) throw Error("bad config", "ladder size must be >= 1");
  if (min_area < 0) throw Error("bad config", "min_area must be >= 0");
  if (bg_history < 1) throw Error("bad config", "bg_T must be >= 1");
  if (!(bg_sigma > 0.0)) throw Error("bad config", "bg_sigma must be positive");
  if (!(bg_tau > 0.0) || !(bg_tau < 1.0))
    throw Error("bad config", "bg_tau must lie in (0,1)");
  if (max_sweeps < 1) throw Error("bad config", "max_sweeps must be >= 1");
}

std::string serialize_config(const RunConfig& config) {
  std::ostringstream out;
  out.precision(17);
  out << "variant " << variant_name(config.variant) << "\n"
      << "model_dir " << config.model_dir << "\n"
      << "ladder " << config.ladder_size << "\n"
      << "min_area " << config.min_area << "\n"
      << "bg_T " << config.bg_history << "\n"
      << "bg_sigma " << config.bg_sigma << "\n"
      << "bg_tau " << config.bg_tau << "\n"
      << "seed " << config.seed << "\n"
      << "max_sweeps " << config.max_sweeps << "\n";
  return out.str();
}

void save_config(const std::string& path, const RunConfig& config) {
  std::ofstream out(path);
  if (!out) throw Error("missing file", path + ": cannot open for write");
  out << serialize_config(config);
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("missing file", path);
  RunConfig config;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::istringstream ls(line);
    std::string key, value;
    if (!(ls >> key >> value))
      throw Error("bad config", path + ": expected 'key value' lines");
    try {
      if (key == "variant") config.variant = parse_variant(value);
      else if (key == "model_dir") config.model_dir = value;
      else if (key == "ladder") config.ladder_size = std::stoi(value);
      else if (key == "min_area") config.min_area = std::stoi(value);
      else if (key == "bg_T") config.bg_history = std::stoi(value);
      else if (key == "bg_sigma") config.bg_sigma = std::stod(value);
      else if (key == "bg_tau") config.bg_tau = std::stod(value);
      else if (key == "seed") config.seed = std::stoull(value);
      else if (key == "max_sweeps") config.max_sweeps = std::stoi(value);
      else throw Error("bad config", path + ": unknown key '" + key + "'");
    } catch (const Error&) {
      throw;
    } catch (const std::exception&) {
      throw Error("bad config", path + ": bad value for '" + key + "'");
    }
  }
  config.validate();
  return config;
}

std::uint64_t config_hash(const RunConfig& config) {
  // FNV-1a over the canonical serialization.
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (const char c : serialize_config(config)) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001b3ULL;
  }
  return h;
}

void write_run_manifest(const std::string& out_dir, const std::string& command,
                        const std::vector<std::pair<std::string, std::string>>& inputs,
                        const RunConfig& config) {
  fs::create_directories(out_dir);
  std::ofstream out(fs::path(out_dir) / "run.txt");
  if (!out) throw Error("missing file", out_dir + "/run.txt: cannot open");
  out << "command " << command << "\n";
  for (const auto& [name, value] : inputs) out << "input " << name << ' ' << value << "\n";
  char hash[32];
  std::snprintf(hash, sizeof hash, "%016llx",
                static_cast<unsigned long long>(config_hash(config)));
  out << "config_hash " << hash << "\n" << serialize_config(config);
}

void save_empirical_stats(const std::string& path, const EmpiricalStats& stats) {
  std::ofstream out(path);
  if (!out) throw Error("missing file", path + ": cannot open for write");
  out.precision(17);
  out << "target_rate " << stats.target_rate << "\n"
      << "target_mean " << stats.target_mean << "\n"
      << "target_var " << stats.target_var << "\n"
      << "background_mean " << stats.background_mean << "\n"
      << "background_var " << stats.background_var << "\n";
}

EmpiricalStats load_empirical_stats(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("missing file", path);
  EmpiricalStats stats;
  std::string key;
  double value = 0.0;
  int seen = 0;
  while (in >> key >> value) {
    if (key == "target_rate") stats.target_rate = value;
    else if (key == "target_mean") stats.target_mean = value;
    else if (key == "target_var") stats.target_var = value;
    else if (key == "background_mean") stats.background_mean = value;
    else if (key == "background_var") stats.background_var = value;
    else throw Error("bad config", path + ": unknown key '" + key + "'");
    ++seen;
  }
  if (seen != 5) throw Error("bad config", path + ": incomplete stats");
  return stats;
}

namespace {

LabelGrid rasterize_truth(const Frame& frame) {
  LabelGrid labels(frame.image.width, frame.image.height, 0);
  for (const auto& box : frame.truth)
    for (int y = box.y0; y < box.y1(); ++y)
      for (int x = box.x0; x < box.x1(); ++x) labels.at(x, y) = 1;
  return labels;
}

bool clear_of_truth(const BoundingBox& patch,
                    const std::vector<BoundingBox>& truth) {
  for (const auto& t : truth)
    if (patch.x0 < t.x1() && t.x0 < patch.x1() && patch.y0 < t.y1() &&
        t.y0 < patch.y1())
      return false;
  return true;
}

struct RunningStats {
  double sum = 0.0, sum_sq = 0.0;
  long long n = 0;
  void add(double v) {
    sum += v;
    sum_sq += v * v;
    ++n;
  }
  double mean() const { return n > 0 ? sum / n : 0.0; }
  double var() const {
    if (n < 2) return 0.0;
    const double m = mean();
    return std::max(sum_sq / n - m * m, kSarVarianceFloor);
  }
};

}  // namespace

TrainOutput cmd_train(const std::string& manifest_path, const RunConfig& config,
                      const std::string& out_dir) {
  config.validate();
  const auto refs = load_manifest(manifest_path);
  if (refs.empty()) throw Error("empty manifest", manifest_path);

  std::mt19937_64 patch_rng(derive_seed(config.seed, kTrainStream));
  std::vector<SarSample> target_samples;
  std::vector<SarSample> background_samples;
  std::vector<LabelGrid> label_grids;
  RunningStats target_stats, background_stats;

  for (const auto& ref : refs) {
    const Frame frame = load_frame(ref);
    const LabelGrid labels = rasterize_truth(frame);
    label_grids.push_back(labels);

    for (int i = 0; i < frame.image.size(); ++i)
      (labels.labels[i] ? target_stats : background_stats)
          .add(frame.image.values[i]);

    for (const auto& box : frame.truth) {
      const auto samples = sar_samples_from_region(frame.image, box);
      target_samples.insert(target_samples.end(), samples.begin(), samples.end());

      // One same-size background patch per target box, rejection-placed
      // clear of every truth box.
      for (int attempt = 0; attempt < kPatchPlaceTries; ++attempt) {
        BoundingBox patch;
        patch.w = box.w;
        patch.h = box.h;
        patch.x0 = uniform_int(patch_rng, 0, frame.image.width - box.w);
        patch.y0 = uniform_int(patch_rng, 0, frame.image.height - box.h);
        if (!clear_of_truth(patch, frame.truth)) continue;
        const auto bg = sar_samples_from_region(frame.image, patch);
        background_samples.insert(background_samples.end(), bg.begin(), bg.end());
        break;
      }
    }
  }

  if (target_samples.empty()) throw Error("degenerate labels", "no truth boxes");

  TrainOutput output;
  output.sar.target = fit_sar(target_samples);
  output.sar.background = fit_sar(background_samples);
  output.prior = fit_auto(std::span<const LabelGrid>(label_grids));
  // Noise-free rasterized boxes are separable under the pseudo-likelihood
  // and drive the fit toward saturation, which would make the prior crush
  // the intensity evidence at inference. Cap the stored prior at strengths
  // where the logistic is still responsive over S in 0..4.
  output.prior.nu = std::clamp(output.prior.nu, -8.0, 8.0);
  output.prior.gamma = std::clamp(output.prior.gamma, -2.0, 2.0);
  output.stats.target_rate =
      static_cast<double>(target_stats.n) /
      static_cast<double>(target_stats.n + background_stats.n);
  output.stats.target_mean = target_stats.mean();
  output.stats.target_var = target_stats.var();
  output.stats.background_mean = background_stats.mean();
  output.stats.background_var = background_stats.var();

  fs::create_directories(out_dir);
  save_sar_params((fs::path(out_dir) / kSarTargetFile).string(), output.sar.target);
  save_sar_params((fs::path(out_dir) / kSarBackgroundFile).string(),
                  output.sar.background);
  save_auto_params((fs::path(out_dir) / kAutoPriorFile).string(), output.prior);
  save_empirical_stats((fs::path(out_dir) / kEmpiricalFile).string(), output.stats);
  write_run_manifest(out_dir, "train", {{"manifest", manifest_path}}, config);
  return output;
}

ModelVariant load_variant(const RunConfig& config) {
  const fs::path dir(config.model_dir);
  switch (config.variant) {
    case VariantTag::SarAuto: {
      ClassSarModel sar{load_sar_params((dir / kSarTargetFile).string()),
                        load_sar_params((dir / kSarBackgroundFile).string())};
      return ModelVariant::sar_auto(
          sar, load_auto_params((dir / kAutoPriorFile).string()));
    }
    case VariantTag::SarI: {
      ClassSarModel sar{load_sar_params((dir / kSarTargetFile).string()),
                        load_sar_params((dir / kSarBackgroundFile).string())};
      const auto stats = load_empirical_stats((dir / kEmpiricalFile).string());
      return ModelVariant::sar_i(sar, stats.target_rate);
    }
    default: {
      const auto stats = load_empirical_stats((dir / kEmpiricalFile).string());
      return ModelVariant::i_auto(
          stats.target_mean, stats.target_var, stats.background_mean,
          stats.background_var,
          load_auto_params((dir / kAutoPriorFile).string()));
    }
  }
}

DetectOutput cmd_detect(const std::string& manifest_path, const RunConfig& config,
                        const std::string& out_dir) {
  config.validate();
  const auto refs = load_manifest(manifest_path);
  if (refs.empty()) throw Error("empty manifest", manifest_path);
  const ModelVariant variant = load_variant(config);

  std::vector<RocFrame> roc_frames;
  std::vector<double> pooled;
  std::vector<double> pooled_positive;
  for (const auto& ref : refs) {
    const Frame frame = load_frame(ref);
    const IcmResult icm = run_icm(variant, frame.image, config.max_sweeps);
    RocFrame rf;
    rf.rho = ratio_map(variant, frame.image, icm.labels);
    rf.truth = frame.truth;
    for (const double r : rf.rho.log_rho) {
      pooled.push_back(r);
      if (r > 0.0) pooled_positive.push_back(r);
    }
    roc_frames.push_back(std::move(rf));
  }

  // The ladder spans the candidate-detection scores. Quantiles of the full
  // pooled map would start below the background mass, where everything
  // fuses into one frame-sized component and the ROC degenerates.
  DetectOutput output;
  output.ladder = ThresholdLadder::from_quantiles(
      pooled_positive.empty() ? pooled : pooled_positive, config.ladder_size);
  output.report = build_roc(roc_frames, output.ladder, config.min_area);

  const double lowest = output.ladder.deltas.front();
  for (size_t f = 0; f < roc_frames.size(); ++f) {
    FrameDetections fd;
    fd.frame_id = static_cast<int>(f);
    fd.boxes = merge_boxes(
        extract_components(roc_frames[f].rho, lowest, config.min_area));
    output.detections.push_back(std::move(fd));
  }

  fs::create_directories(out_dir);
  output.detections_csv = (fs::path(out_dir) / "detections.csv").string();
  output.roc_csv = (fs::path(out_dir) / "roc.csv").string();
  write_detections_csv(output.detections_csv, output.detections);
  write_roc_csv(output.roc_csv, output.report);
  write_run_manifest(out_dir, "detect", {{"manifest", manifest_path}}, config);
  return output;
}

namespace {

struct FuseTally {
  long long hits = 0, truths = 0, fas = 0;
  void add(const FrameEval& e, size_t truth_count) {
    hits += e.hits;
    fas += e.false_alarms;
    truths += static_cast<long long>(truth_count);
  }
  FuseRow row(const std::string& method, long long frames) const {
    FuseRow r;
    r.method = method;
    r.hit_rate = truths > 0 ? static_cast<double>(hits) / truths : 0.0;
    r.fa_per_frame = frames > 0 ? static_cast<double>(fas) / frames : 0.0;
    return r;
  }
};

}  // namespace

FuseOutput cmd_fuse(const std::string& manifest_path, const RunConfig& config,
                    const std::string& out_dir) {
  config.validate();
  const auto refs = load_manifest(manifest_path);
  if (refs.size() < 2)
    throw Error("manifest too short", "fusion needs at least 2 frames");
  const ModelVariant variant = load_variant(config);

  KdeModel kde(config.bg_history, config.bg_sigma);
  FuseTally bgsub_tally, before_tally, after_tally;
  long long scored_frames = 0;

  for (size_t f = 0; f < refs.size(); ++f) {
    const Frame frame = load_frame(refs[f]);
    if (f >= 1) {
      const IcmResult icm = run_icm(variant, frame.image, config.max_sweeps);
      const RatioMap rho = ratio_map(variant, frame.image, icm.labels);
      const LabelGrid mask =
          foreground_mask(kde.background_prob(frame.image), config.bg_tau);
      const LabelGrid fused = fuse_and(icm.labels, mask);

      const auto bgsub_dets =
          merge_boxes(extract_components(rho, mask, config.min_area));
      const auto before_dets =
          merge_boxes(extract_components(rho, icm.labels, config.min_area));
      const auto after_dets =
          merge_boxes(extract_components(rho, fused, config.min_area));

      bgsub_tally.add(evaluate_frame(bgsub_dets, frame.truth), frame.truth.size());
      before_tally.add(evaluate_frame(before_dets, frame.truth), frame.truth.size());
      after_tally.add(evaluate_frame(after_dets, frame.truth), frame.truth.size());
      ++scored_frames;
    }
    kde.update(frame.image);
  }

  FuseOutput output;
  output.bgsub_only = bgsub_tally.row("bgsub", scored_frames);
  output.before = before_tally.row(variant_name(config.variant) + "-before",
                                   scored_frames);
  output.after =
      after_tally.row(variant_name(config.variant) + "-after", scored_frames);

  fs::create_directories(out_dir);
  output.table_csv = (fs::path(out_dir) / "fusion_table.csv").string();
  std::ofstream table(output.table_csv);
  if (!table) throw Error("missing file", output.table_csv + ": cannot open");
  table.precision(17);
  table << "method,hit_rate,fa_per_frame\n";
  for (const auto& row : {output.bgsub_only, output.before, output.after})
    table << row.method << ',' << row.hit_rate << ',' << row.fa_per_frame << '\n';
  write_run_manifest(out_dir, "fuse", {{"manifest", manifest_path}}, config);
  return output;
}

EvalOutput cmd_eval(const std::string& detections_csv,
                    const std::string& manifest_path) {
  const auto refs = load_manifest(manifest_path);
  if (refs.empty()) throw Error("empty manifest", manifest_path);
  const auto detections = load_detections_csv(detections_csv);

  EvalOutput output;
  long long total_truth = 0;
  for (size_t f = 0; f < refs.size(); ++f) {
    const auto truth = load_truth_csv(refs[f].truth_path);
    total_truth += static_cast<long long>(truth.size());
    std::span<const BoundingBox> dets;
    for (const auto& fd : detections)
      if (fd.frame_id == static_cast<int>(f)) dets = fd.boxes;
    const FrameEval eval = evaluate_frame(dets, truth);
    output.totals.hits += eval.hits;
    output.totals.misses += eval.misses;
    output.totals.false_alarms += eval.false_alarms;
  }
  output.hit_rate = total_truth > 0
                        ? static_cast<double>(output.totals.hits) / total_truth
                        : 0.0;
  output.fa_per_frame = static_cast<double>(output.totals.false_alarms) /
                        static_cast<double>(refs.size());
  return output;
}

}  // namespace irdet
