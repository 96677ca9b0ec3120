#include "endemic/evalharness.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <stdexcept>

#include "endemic/png.hpp"
#include "json.hpp"

namespace endemic {

using nlohmann::json;

MetricsReport metrics_from_confusion(const ConfusionCounts& c) {
  MetricsReport m;
  m.confusion = c;
  const double total = static_cast<double>(c.total());
  m.accuracy = total > 0 ? static_cast<double>(c.tp + c.tn) / total : 0.0;
  m.precision =
      c.tp + c.fp > 0 ? static_cast<double>(c.tp) / (c.tp + c.fp) : 0.0;
  m.recall = c.tp + c.fn > 0 ? static_cast<double>(c.tp) / (c.tp + c.fn) : 0.0;
  m.f1 = m.precision + m.recall > 0
             ? 2.0 * m.precision * m.recall / (m.precision + m.recall)
             : 0.0;
  return m;
}

std::string eval_mode_name(EvalMode m) {
  return m == EvalMode::kPlain ? "plain" : "mask_detect";
}

Mat mask_time_variant(const Mat& features, const std::vector<bool>& flags,
                      double masking_token) {
  if (features.cols() != static_cast<long>(flags.size()))
    throw std::invalid_argument("mask_time_variant: flag count " +
                                std::to_string(flags.size()) +
                                " != feature count " +
                                std::to_string(features.cols()));
  Mat out = features;
  for (long j = 0; j < out.cols(); ++j)
    if (flags[static_cast<std::size_t>(j)]) out(0, j) = masking_token;
  return out;
}

FeatureVector mask_time_variant(const FeatureVector& features,
                                const FeatureSchema& schema,
                                double masking_token) {
  if (features.size() != schema.size())
    throw std::invalid_argument("mask_time_variant: schema size mismatch");
  FeatureVector out = features;
  for (std::size_t i = 0; i < out.size(); ++i)
    if (schema.time_variant[i]) out[i] = masking_token;
  return out;
}

MetricsReport evaluate(const ModelParams& params, const EvalDataset& data,
                       const DatasetSplit& split, EvalMode mode) {
  if (split.tweet_ids.empty())
    throw std::invalid_argument("evaluate: split is empty");
  std::vector<std::string> ids = split.tweet_ids;
  std::sort(ids.begin(), ids.end());

  ConfusionCounts c;
  long excluded = 0;
  for (const auto& id : ids) {
    auto it = data.inputs.find(id);
    if (it == data.inputs.end())
      throw std::runtime_error("evaluate: no assembled input for tweet " + id);
    const ModelInput& base = it->second;
    if (base.label == Label::kUnlabelled) {
      ++excluded;
      continue;
    }
    ModelInput input = base;
    if (mode == EvalMode::kMaskDetect)
      input.ctx = mask_time_variant(input.ctx, data.time_variant, 0.0);
    const Eigen::Vector2d probs = predict(params, input);
    const bool predicted_fake = probs[0] >= probs[1];
    const bool is_fake = base.label == Label::kFake;
    if (predicted_fake && is_fake) ++c.tp;
    else if (predicted_fake && !is_fake) ++c.fp;
    else if (!predicted_fake && is_fake) ++c.fn;
    else ++c.tn;
  }
  MetricsReport m = metrics_from_confusion(c);
  m.split = split_kind_name(split.kind);
  m.mode = eval_mode_name(mode);
  m.excluded_unlabelled = excluded;
  return m;
}

namespace {

std::string csv_row(const MetricsReport& m) {
  char buf[320];
  std::snprintf(buf, sizeof(buf),
                "%s,%s,%s,%.6f,%.6f,%.6f,%.6f,%ld,%ld,%ld,%ld,%ld,",
                m.run_name.c_str(), m.split.c_str(), m.mode.c_str(),
                m.accuracy, m.precision, m.recall, m.f1, m.confusion.tp,
                m.confusion.fp, m.confusion.fn, m.confusion.tn,
                m.excluded_unlabelled);
  std::string row(buf);
  if (m.delta_acc) {
    std::snprintf(buf, sizeof(buf), "%.6f", *m.delta_acc);
    row += buf;
  }
  return row;
}

}  // namespace

ReportArtifacts report(std::vector<MetricsReport> runs,
                       const std::string& out_dir) {
  if (runs.empty())
    throw std::invalid_argument("report: need at least one run");
  namespace fs = std::filesystem;
  fs::create_directories(out_dir);
  fs::create_directories(out_dir + "/plots");

  const double ref_acc = runs.front().accuracy;
  for (std::size_t i = 0; i < runs.size(); ++i) {
    if (runs[i].run_name.empty())
      runs[i].run_name = "run_" + std::to_string(i);
    if (i > 0 && !runs[i].delta_acc)
      runs[i].delta_acc = ref_acc - runs[i].accuracy;
  }

  ReportArtifacts art;
  art.csv_path = out_dir + "/report.csv";
  {
    std::ofstream csv(art.csv_path);
    if (!csv) throw std::runtime_error("cannot write " + art.csv_path);
    csv << "run,split,mode,accuracy,precision,recall,f1,tp,fp,fn,tn,"
           "excluded_unlabelled,delta_acc\n";
    for (const auto& m : runs) csv << csv_row(m) << "\n";
  }

  art.txt_path = out_dir + "/report.txt";
  {
    std::ofstream txt(art.txt_path);
    if (!txt) throw std::runtime_error("cannot write " + art.txt_path);
    char buf[320];
    std::snprintf(buf, sizeof(buf), "%-18s %-12s %-12s %8s %9s %8s %8s %8s\n",
                  "run", "split", "mode", "acc", "prec", "rec", "f1", "dacc");
    txt << buf;
    txt << std::string(88, '-') << "\n";
    for (const auto& m : runs) {
      std::string dacc = "-";
      if (m.delta_acc) {
        std::snprintf(buf, sizeof(buf), "%.1f%%", *m.delta_acc * 100.0);
        dacc = buf;
      }
      std::snprintf(buf, sizeof(buf),
                    "%-18s %-12s %-12s %8.3f %9.3f %8.3f %8.3f %8s\n",
                    m.run_name.c_str(), m.split.c_str(), m.mode.c_str(),
                    m.accuracy, m.precision, m.recall, m.f1, dacc.c_str());
      txt << buf;
    }
  }

  for (const auto& m : runs) {
    const std::string path =
        out_dir + "/plots/" + m.run_name + "_" + m.split + "_" + m.mode +
        ".png";
    write_bar_plot(path, m.run_name + " " + m.split + " " + m.mode,
                   {{"accuracy", m.accuracy},
                    {"precision", m.precision},
                    {"recall", m.recall},
                    {"f1", m.f1}});
    art.plot_paths.push_back(path);
  }
  return art;
}

void save_metrics_json(const MetricsReport& m, const std::string& path) {
  json j;
  j["run_name"] = m.run_name;
  j["split"] = m.split;
  j["mode"] = m.mode;
  j["accuracy"] = m.accuracy;
  j["precision"] = m.precision;
  j["recall"] = m.recall;
  j["f1"] = m.f1;
  j["tp"] = m.confusion.tp;
  j["fp"] = m.confusion.fp;
  j["fn"] = m.confusion.fn;
  j["tn"] = m.confusion.tn;
  j["excluded_unlabelled"] = m.excluded_unlabelled;
  if (m.delta_acc) j["delta_acc"] = *m.delta_acc;
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << j.dump(2) << "\n";
}

MetricsReport load_metrics_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  json j;
  in >> j;
  MetricsReport m;
  m.run_name = j.value("run_name", "");
  m.split = j.value("split", "");
  m.mode = j.value("mode", "plain");
  m.accuracy = j.at("accuracy");
  m.precision = j.at("precision");
  m.recall = j.at("recall");
  m.f1 = j.at("f1");
  m.confusion.tp = j.at("tp");
  m.confusion.fp = j.at("fp");
  m.confusion.fn = j.at("fn");
  m.confusion.tn = j.at("tn");
  m.excluded_unlabelled = j.value("excluded_unlabelled", 0L);
  if (j.contains("delta_acc")) m.delta_acc = j["delta_acc"].get<double>();
  return m;
}

}  // namespace endemic
