#pragma once

#include <functional>
#include <string>
#include <vector>

#include "endemic/model.hpp"

namespace endemic {

struct LossConfig {
  double lambda_ml = 1.0;
  double lambda_at = 1.0;
  double lambda_vat = 1.0;
  double eps_at = 2.0;
  double eps_vat = 2.0;
  double xi = 1e-6;
  int power_iters = 1;
};

inline constexpr double kProbFloor = 1e-12;

// -log p(label); probabilities below kProbFloor are clamped and counted.
double ml_loss(const Eigen::Vector2d& probs, int label_idx,
               long* clamp_warnings = nullptr);
ad::Var ml_loss(ad::Tape& tape, const ad::Var& probs, int label_idx);

// r = eps * g / ||g||_2 (Frobenius over the whole tensor); zero gradient
// maps to a zero perturbation.
Mat at_perturbation(const Mat& gradient, double eps);

// Differentiable map from an additive input perturbation to class
// probabilities; the base input enters via the closure.
using PerturbableModel =
    std::function<ad::Var(ad::Tape&, const ad::Var& perturbation)>;

// One-or-more rounds of the finite-difference power method at scale xi,
// then normalization to radius eps_vat.
Mat find_vat_perturbation(const PerturbableModel& model, long rows, long cols,
                          const LossConfig& cfg, Rng& rng);

// KL(p || q) for a constant p row and differentiable q row.
ad::Var kl_const_p(ad::Tape& tape, const Mat& p, const ad::Var& q);

// KL(p(x) || p(x + r_adv)) with p(x) treated as constant.
double vat_loss(const PerturbableModel& model, long rows, long cols,
                const LossConfig& cfg, Rng& rng);

struct TrainConfig {
  LossConfig loss;
  int epochs = 10;
  int batch_size = 32;
  double lr = 1e-3;
  std::uint64_t seed = 42;
  double divergence_threshold = 1e6;
  // AT on all continuous inputs (evidence, graph, context) instead of the
  // word embeddings alone; one shared radius over the concatenation.
  bool at_all_inputs = false;
  std::string checkpoint_dir;  // empty: keep checkpoints in memory only
  std::string config_hash;
};

struct EpochStats {
  int epoch = 0;
  double l_ml = 0, l_at = 0, l_vat = 0, total = 0;
  double train_acc = 0;
};

struct TrainResult {
  std::vector<EpochStats> log;
  long clamp_warnings = 0;
  bool aborted = false;
  std::string abort_reason;
  std::string final_checkpoint_path;
};

// Adam over the trainable entries of a parameter registry.
class AdamOptimizer {
 public:
  AdamOptimizer(double lr, double beta1 = 0.9, double beta2 = 0.999,
                double eps = 1e-8);
  void step(std::vector<NamedMat>& registry,
            const std::vector<Mat>& gradients);

 private:
  double lr_, beta1_, beta2_, eps_;
  long t_ = 0;
  std::vector<Mat> m_, v_;
};

// Semi-supervised loop: lambda_ml * L_ML + lambda_at * L_AT on labelled
// examples plus lambda_vat * L_VAT on labelled and unlabelled. Checkpoints
// each epoch when checkpoint_dir is set; aborts past the divergence
// threshold keeping the last good checkpoint.
TrainResult train(ModelParams& params, const std::vector<ModelInput>& labelled,
                  const std::vector<ModelInput>& unlabelled,
                  const TrainConfig& cfg);

void write_training_log_csv(const std::vector<EpochStats>& log,
                            const std::string& path);

}  // namespace endemic
