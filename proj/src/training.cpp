#include "endemic/training.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <stdexcept>

namespace endemic {

double ml_loss(const Eigen::Vector2d& probs, int label_idx,
               long* clamp_warnings) {
  double p = probs[label_idx];
  if (p < kProbFloor) {
    p = kProbFloor;
    if (clamp_warnings) ++(*clamp_warnings);
  }
  return -std::log(p);
}

ad::Var ml_loss(ad::Tape& tape, const ad::Var& probs, int label_idx) {
  (void)tape;
  return ad::scale(
      ad::log_clamped(ad::pick(probs, 0, label_idx), kProbFloor), -1.0);
}

Mat at_perturbation(const Mat& gradient, double eps) {
  if (!gradient.allFinite())
    throw std::runtime_error("at_perturbation: non-finite gradient");
  const double norm = gradient.norm();
  if (norm == 0.0) return Mat::Zero(gradient.rows(), gradient.cols());
  return (eps / norm) * gradient;
}

ad::Var kl_const_p(ad::Tape& tape, const Mat& p, const ad::Var& q) {
  Mat log_p = p.array().max(kProbFloor).log().matrix();
  const ad::Var p_leaf = tape.leaf(p);
  const ad::Var diff = ad::sub(tape.leaf(log_p), ad::log_clamped(q, kProbFloor));
  return ad::sum(ad::mul(p_leaf, diff));
}

Mat find_vat_perturbation(const PerturbableModel& model, long rows, long cols,
                          const LossConfig& cfg, Rng& rng) {
  // base prediction, no perturbation
  Mat p_base;
  {
    ad::Tape tape;
    const ad::Var zero = tape.leaf(Mat::Zero(rows, cols));
    p_base = model(tape, zero).value();
  }
  // random unit direction
  Mat d(rows, cols);
  for (long r = 0; r < rows; ++r)
    for (long c = 0; c < cols; ++c) d(r, c) = rng.normal();
  if (d.norm() == 0.0) d(0, 0) = 1.0;
  d /= d.norm();

  for (int it = 0; it < std::max(1, cfg.power_iters); ++it) {
    ad::Tape tape;
    const ad::Var r = tape.leaf(cfg.xi * d, true);
    const ad::Var q = model(tape, r);
    const ad::Var kl = kl_const_p(tape, p_base, q);
    tape.backward(kl);
    Mat g = r.grad();
    const double gn = g.norm();
    if (gn == 0.0) break;  // locally constant model: keep current direction
    d = g / gn;
  }
  // the quadratic regime leaves the sign ambiguous; settle it at the actual
  // radius
  auto kl_at = [&](const Mat& r) {
    ad::Tape tape;
    return kl_const_p(tape, p_base, model(tape, tape.leaf(r))).value()(0, 0);
  };
  const Mat pos = cfg.eps_vat * d;
  return kl_at(pos) >= kl_at(-pos) ? pos : Mat(-pos);
}

double vat_loss(const PerturbableModel& model, long rows, long cols,
                const LossConfig& cfg, Rng& rng) {
  Mat p_base;
  {
    ad::Tape tape;
    p_base = model(tape, tape.leaf(Mat::Zero(rows, cols))).value();
  }
  const Mat r_adv = find_vat_perturbation(model, rows, cols, cfg, rng);
  ad::Tape tape;
  const ad::Var q = model(tape, tape.leaf(r_adv));
  const double kl = kl_const_p(tape, p_base, q).value()(0, 0);
  if (!std::isfinite(kl))
    throw std::runtime_error("vat_loss: non-finite KL divergence");
  return std::max(0.0, kl);
}

AdamOptimizer::AdamOptimizer(double lr, double beta1, double beta2, double eps)
    : lr_(lr), beta1_(beta1), beta2_(beta2), eps_(eps) {}

void AdamOptimizer::step(std::vector<NamedMat>& registry,
                         const std::vector<Mat>& gradients) {
  if (m_.empty()) {
    m_.resize(registry.size());
    v_.resize(registry.size());
    for (std::size_t i = 0; i < registry.size(); ++i) {
      m_[i] = Mat::Zero(registry[i].mat->rows(), registry[i].mat->cols());
      v_[i] = m_[i];
    }
  }
  ++t_;
  const double bc1 = 1.0 - std::pow(beta1_, static_cast<double>(t_));
  const double bc2 = 1.0 - std::pow(beta2_, static_cast<double>(t_));
  for (std::size_t i = 0; i < registry.size(); ++i) {
    if (!registry[i].trainable) continue;
    const Mat& g = gradients[i];
    if (g.size() == 0) continue;
    m_[i] = beta1_ * m_[i] + (1.0 - beta1_) * g;
    v_[i] = beta2_ * v_[i] + (1.0 - beta2_) * g.cwiseProduct(g);
    const Mat m_hat = m_[i] / bc1;
    const Mat v_hat = v_[i] / bc2;
    *registry[i].mat -=
        lr_ * (m_hat.array() / (v_hat.array().sqrt() + eps_)).matrix();
  }
}

namespace {

struct BatchItem {
  const ModelInput* input;
  bool is_labelled;
};

PerturbableModel perturbable(const ModelParams& params, const ModelInput& in) {
  return [&params, &in](ad::Tape& tape, const ad::Var& r) {
    ad::Binder binder(tape, false);
    return model_forward(binder, params, in, ForwardMode::kEval, nullptr,
                         {.embedded = r})
        .probs;
  };
}

// AT direction(s) for one labelled example: gradient of the clean ML loss
// w.r.t. the perturbable inputs, normalized to radius eps over the
// concatenation.
struct AtDirections {
  Mat emb, evidence, tg, ug, ctx;
  bool all_inputs = false;
};

AtDirections at_directions(const ModelParams& params, const ModelInput& x,
                           double eps, bool all_inputs) {
  ad::Tape tape;
  ad::Binder binder(tape, false);
  InputPerturbations pert;
  const ad::Var r_emb = tape.leaf(
      Mat::Zero(static_cast<long>(x.token_ids.size()), params.dims.E), true);
  pert.embedded = r_emb;
  ad::Var r_ev, r_tg, r_ug, r_ctx;
  if (all_inputs) {
    r_ev = tape.leaf(Mat::Zero(x.evidence.rows(), x.evidence.cols()), true);
    r_tg = tape.leaf(Mat::Zero(1, x.tg.cols()), true);
    r_ug = tape.leaf(Mat::Zero(1, x.ug.cols()), true);
    r_ctx = tape.leaf(Mat::Zero(1, x.ctx.cols()), true);
    pert.evidence = r_ev;
    pert.tg = r_tg;
    pert.ug = r_ug;
    pert.ctx = r_ctx;
  }
  const auto out =
      model_forward(binder, params, x, ForwardMode::kEval, nullptr, pert);
  tape.backward(ml_loss(tape, out.probs, label_index(x.label)));

  AtDirections dirs;
  dirs.all_inputs = all_inputs;
  if (!all_inputs) {
    dirs.emb = at_perturbation(r_emb.grad(), eps);
    return dirs;
  }
  const Mat g_emb = r_emb.grad(), g_ev = r_ev.grad(), g_tg = r_tg.grad(),
            g_ug = r_ug.grad(), g_ctx = r_ctx.grad();
  const double norm = std::sqrt(
      g_emb.squaredNorm() + g_ev.squaredNorm() + g_tg.squaredNorm() +
      g_ug.squaredNorm() + g_ctx.squaredNorm());
  const double s = norm == 0.0 ? 0.0 : eps / norm;
  dirs.emb = s * g_emb;
  dirs.evidence = s * g_ev;
  dirs.tg = s * g_tg;
  dirs.ug = s * g_ug;
  dirs.ctx = s * g_ctx;
  return dirs;
}

}  // namespace

TrainResult train(ModelParams& params,
                  const std::vector<ModelInput>& labelled,
                  const std::vector<ModelInput>& unlabelled,
                  const TrainConfig& cfg) {
  if (labelled.empty())
    throw std::invalid_argument("train: need at least one labelled example");
  TrainResult result;
  auto registry = param_registry(params);
  AdamOptimizer opt(cfg.lr);
  Rng master(cfg.seed);

  std::vector<BatchItem> items;
  for (const auto& x : labelled) items.push_back({&x, true});
  // with the VAT weight off, unlabelled examples cannot contribute
  if (cfg.loss.lambda_vat != 0.0)
    for (const auto& x : unlabelled) items.push_back({&x, false});

  const LossConfig& L = cfg.loss;
  ModelParams last_good = params;

  auto checkpoint_path = [&](const std::string& stem) {
    return cfg.checkpoint_dir + "/" + stem + ".ckpt";
  };
  if (!cfg.checkpoint_dir.empty())
    std::filesystem::create_directories(cfg.checkpoint_dir);

  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    Rng rng_epoch = master.derive(static_cast<std::uint64_t>(epoch) + 1);
    // seed-derived batch order
    for (std::size_t i = items.size(); i > 1; --i)
      std::swap(items[i - 1], items[rng_epoch.uniform_int(i)]);

    EpochStats stats;
    stats.epoch = epoch;
    long n_ml = 0, n_vat = 0, n_correct = 0;
    const int bs = std::max(1, cfg.batch_size);

    for (std::size_t off = 0, batch_no = 0; off < items.size();
         off += static_cast<std::size_t>(bs), ++batch_no) {
      const std::size_t end =
          std::min(items.size(), off + static_cast<std::size_t>(bs));
      Rng rng_batch = rng_epoch.derive(batch_no + 1);

      // Pass 1: gradients of the clean ML loss give the AT directions for
      // the labelled part of the batch.
      std::vector<AtDirections> at_dirs(end - off);
      if (L.lambda_at != 0.0) {
        for (std::size_t i = off; i < end; ++i) {
          if (!items[i].is_labelled) continue;
          at_dirs[i - off] = at_directions(params, *items[i].input, L.eps_at,
                                           cfg.at_all_inputs);
        }
      }
      // VAT directions (labelled and unlabelled), params constant.
      std::vector<Mat> vat_dirs(end - off);
      if (L.lambda_vat != 0.0) {
        for (std::size_t i = off; i < end; ++i) {
          const ModelInput& x = *items[i].input;
          Rng rng_vat = rng_batch.derive(2 * (i - off) + 1);
          vat_dirs[i - off] = find_vat_perturbation(
              perturbable(params, x), static_cast<long>(x.token_ids.size()),
              params.dims.E, L, rng_vat);
        }
      }

      // Pass 2: the real objective on one tape. ML and AT run with dropout;
      // the VAT term compares deterministic eval-mode forwards so it is
      // exactly zero at r = 0.
      ad::Tape tape;
      ad::Binder binder(tape, true);
      std::vector<ad::Var> ml_terms, at_terms, vat_terms;
      for (std::size_t i = off; i < end; ++i) {
        const ModelInput& x = *items[i].input;
        Rng rng_drop = rng_batch.derive(2 * (i - off) + 2);
        if (items[i].is_labelled) {
          const int li = label_index(x.label);
          const auto out = model_forward(binder, params, x,
                                         ForwardMode::kTrain, &rng_drop);
          ml_terms.push_back(ml_loss(tape, out.probs, li));
          const auto pv = out.probs.value();
          if ((pv(0, 0) >= pv(0, 1)) == (li == 0)) ++n_correct;
          if (pv(0, li) < kProbFloor) ++result.clamp_warnings;
          ++n_ml;
          if (L.lambda_at != 0.0) {
            const AtDirections& dirs = at_dirs[i - off];
            InputPerturbations pert;
            pert.embedded = tape.leaf(dirs.emb);
            if (dirs.all_inputs) {
              pert.evidence = tape.leaf(dirs.evidence);
              pert.tg = tape.leaf(dirs.tg);
              pert.ug = tape.leaf(dirs.ug);
              pert.ctx = tape.leaf(dirs.ctx);
            }
            const auto out_at = model_forward(
                binder, params, x, ForwardMode::kTrain, &rng_drop, pert);
            at_terms.push_back(ml_loss(tape, out_at.probs, li));
          }
        }
        if (L.lambda_vat != 0.0) {
          const Mat p_base = predict(params, x).transpose();
          const auto out_vat = model_forward(
              binder, params, x, ForwardMode::kEval, nullptr,
              {.embedded = tape.leaf(vat_dirs[i - off])});
          vat_terms.push_back(kl_const_p(tape, p_base, out_vat.probs));
          ++n_vat;
        }
      }

      auto mean_of = [&](const std::vector<ad::Var>& terms) -> ad::Var {
        ad::Var total = terms.front();
        for (std::size_t i = 1; i < terms.size(); ++i)
          total = ad::add(total, terms[i]);
        return ad::scale(total, 1.0 / static_cast<double>(terms.size()));
      };

      ad::Var batch_loss = tape.leaf(Mat::Zero(1, 1));
      if (!ml_terms.empty()) {
        const ad::Var m = mean_of(ml_terms);
        stats.l_ml += m.value()(0, 0) * static_cast<double>(ml_terms.size());
        batch_loss = ad::add(batch_loss, ad::scale(m, L.lambda_ml));
      }
      if (!at_terms.empty()) {
        const ad::Var m = mean_of(at_terms);
        stats.l_at += m.value()(0, 0) * static_cast<double>(at_terms.size());
        batch_loss = ad::add(batch_loss, ad::scale(m, L.lambda_at));
      }
      if (!vat_terms.empty()) {
        const ad::Var m = mean_of(vat_terms);
        stats.l_vat += m.value()(0, 0) * static_cast<double>(vat_terms.size());
        batch_loss = ad::add(batch_loss, ad::scale(m, L.lambda_vat));
      }

      const double loss_val = batch_loss.value()(0, 0);
      if (!std::isfinite(loss_val) || loss_val > cfg.divergence_threshold) {
        params = last_good;
        result.aborted = true;
        result.abort_reason = "divergence at epoch " + std::to_string(epoch) +
                              " (loss " + std::to_string(loss_val) + ")";
        if (!cfg.checkpoint_dir.empty()) {
          save_checkpoint(params, checkpoint_path("last_good"),
                          cfg.config_hash);
          result.final_checkpoint_path = checkpoint_path("last_good");
        }
        return result;
      }

      tape.backward(batch_loss);
      std::vector<Mat> grads(registry.size());
      for (std::size_t i = 0; i < registry.size(); ++i)
        if (registry[i].trainable && binder.bound(*registry[i].mat))
          grads[i] = binder.grad_of(*registry[i].mat);
      opt.step(registry, grads);
    }

    if (n_ml > 0) {
      stats.l_ml /= static_cast<double>(n_ml);
      stats.l_at /= static_cast<double>(n_ml);
    }
    if (n_vat > 0) stats.l_vat /= static_cast<double>(n_vat);
    stats.total = L.lambda_ml * stats.l_ml + L.lambda_at * stats.l_at +
                  L.lambda_vat * stats.l_vat;
    stats.train_acc =
        n_ml > 0 ? static_cast<double>(n_correct) / static_cast<double>(n_ml)
                 : 0.0;
    result.log.push_back(stats);
    last_good = params;
    if (!cfg.checkpoint_dir.empty()) {
      char stem[32];
      std::snprintf(stem, sizeof(stem), "epoch_%04d", epoch);
      save_checkpoint(params, checkpoint_path(stem), cfg.config_hash);
    }
  }
  if (!cfg.checkpoint_dir.empty()) {
    save_checkpoint(params, checkpoint_path("final"), cfg.config_hash);
    result.final_checkpoint_path = checkpoint_path("final");
  }
  return result;
}

void write_training_log_csv(const std::vector<EpochStats>& log,
                            const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << "epoch,l_ml,l_at,l_vat,total,train_acc\n";
  char buf[160];
  for (const auto& s : log) {
    std::snprintf(buf, sizeof(buf), "%d,%.9g,%.9g,%.9g,%.9g,%.9g\n", s.epoch,
                  s.l_ml, s.l_at, s.l_vat, s.total, s.train_acc);
    out << buf;
  }
}

}  // namespace endemic
