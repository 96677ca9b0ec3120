#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "endemic/model.hpp"
#include "endemic/training.hpp"

namespace endemic {

struct ConfusionCounts {
  long tp = 0, fp = 0, fn = 0, tn = 0;
  long total() const { return tp + fp + fn + tn; }
};

struct MetricsReport {
  std::string run_name;
  std::string split;  // split kind name
  std::string mode;   // "plain" | "mask_detect"
  double accuracy = 0, precision = 0, recall = 0, f1 = 0;
  ConfusionCounts confusion;
  long excluded_unlabelled = 0;
  std::optional<double> delta_acc;  // vs the reference run
};

// accuracy = (TP+TN)/total, precision/recall with "fake" as the positive
// class, f1 = harmonic mean; empty denominators produce 0.
MetricsReport metrics_from_confusion(const ConfusionCounts& c);

enum class EvalMode { kPlain, kMaskDetect };

std::string eval_mode_name(EvalMode m);

// Replaces every time_variant-flagged entry with the masking token; other
// entries pass through. Idempotent.
Mat mask_time_variant(const Mat& features, const std::vector<bool>& flags,
                      double masking_token = 0.0);
FeatureVector mask_time_variant(const FeatureVector& features,
                                const FeatureSchema& schema,
                                double masking_token = 0.0);

// Evaluation dataset: assembled inputs keyed by tweet id. Inputs carry
// standardized context rows; mask-detect zeroes the flagged entries (the
// masking token standardizes to 0, i.e. train-mean imputation).
struct EvalDataset {
  std::map<std::string, ModelInput> inputs;
  std::vector<bool> time_variant;  // combined tweet+user schema flags
};

// Deterministic eval-mode inference over the split in sorted tweet-id
// order; unlabelled tweets are excluded and counted.
MetricsReport evaluate(const ModelParams& params, const EvalDataset& data,
                       const DatasetSplit& split, EvalMode mode);

struct ReportArtifacts {
  std::string csv_path;
  std::string txt_path;
  std::vector<std::string> plot_paths;
};

// Metrics table (CSV + formatted text) and one bar plot per run. delta_acc
// is filled against the first run. Requires at least one run.
ReportArtifacts report(std::vector<MetricsReport> runs,
                       const std::string& out_dir);

// metrics JSON round-trip used by the eval / report CLI commands.
void save_metrics_json(const MetricsReport& m, const std::string& path);
MetricsReport load_metrics_json(const std::string& path);

}  // namespace endemic
