#include "eegraph/trainer.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <stdexcept>

#include "eegraph/adam.hpp"
#include "eegraph/checkpoint.hpp"
#include "eegraph/errors.hpp"
#include "eegraph/rng.hpp"

namespace eegraph {

double lr_for_epoch(double lr0, std::size_t epoch, std::size_t period) {
  if (period == 0) return lr0;
  return lr0 * std::pow(0.5, static_cast<double>(epoch / period));
}

Tensor loss(const Tensor& logits, const std::vector<int>& labels,
            const ParamList& params, const RegSpec& reg) {
  Tensor total = cross_entropy(logits, labels);
  if (reg.alpha > 0.0 || reg.beta > 0.0) {
    Tensor l1, l2;
    for (const auto& p : params) {
      if (!p.learnable || !p.regularize) continue;
      if (reg.alpha > 0.0) {
        Tensor term = sum(abs(p.tensor));
        l1 = l1.defined() ? add(l1, term) : term;
      }
      if (reg.beta > 0.0) {
        Tensor term = sum(mul(p.tensor, p.tensor));
        l2 = l2.defined() ? add(l2, term) : term;
      }
    }
    if (l1.defined()) total = add(total, scale(l1, reg.alpha));
    if (l2.defined()) total = add(total, scale(l2, reg.beta));
  }
  return total;
}

EvalResult evaluate(Network& net, const TrialSet& data) {
  if (net.n_classes() != data.n_classes)
    throw std::invalid_argument(
        "evaluate: model has " + std::to_string(net.n_classes()) +
        " classes but the data has " + std::to_string(data.n_classes));
  NoGradGuard guard;
  EvalResult r;
  r.confusion.assign(data.n_classes,
                     std::vector<std::size_t>(data.n_classes, 0));
  std::size_t correct = 0;
  for (std::size_t t = 0; t < data.n_trials; ++t) {
    const Tensor logits = net.forward(data.trial(t), false);
    std::size_t pred = 0;
    for (std::size_t c = 1; c < logits.size(); ++c)
      if (logits.at(c) > logits.at(pred)) pred = c;
    const std::size_t truth = static_cast<std::size_t>(data.labels[t]);
    r.confusion[truth][pred] += 1;
    if (pred == truth) ++correct;
  }
  r.accuracy = data.n_trials == 0
                   ? 0.0
                   : static_cast<double>(correct) /
                         static_cast<double>(data.n_trials);
  return r;
}

std::string format_epochs_csv(const std::vector<EpochRow>& rows) {
  std::string out = "epoch,train_loss,val_acc,lr\n";
  char buf[128];
  for (const auto& r : rows) {
    std::snprintf(buf, sizeof(buf), "%zu,%.17g,%.17g,%.17g\n", r.epoch,
                  r.train_loss, r.val_acc, r.lr);
    out += buf;
  }
  return out;
}

RunReport train(Network& net, const TrialSet& train_set,
                const TrialSet& val_set, const TrainConfig& cfg,
                const std::string& out_dir) {
  namespace fs = std::filesystem;
  const auto t0 = std::chrono::steady_clock::now();
  if (train_set.n_trials == 0)
    throw std::invalid_argument("train: empty training set");
  if (cfg.batch_size == 0)
    throw std::invalid_argument("train: batch_size must be >= 1");
  if (!out_dir.empty()) fs::create_directories(out_dir);

  Adam adam;
  RunReport report;
  report.param_count = net.param_count();
  double best = -1.0;

  std::vector<std::size_t> order(train_set.n_trials);
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;

  for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    const double lr =
        lr_for_epoch(cfg.lr, epoch, cfg.lr_halving_period_epochs);
    auto shuffle_rng = make_rng(cfg.seed, "shuffle", epoch);
    shuffle_vector(order, shuffle_rng);

    double loss_sum = 0.0;
    for (std::size_t start = 0, step = 0; start < order.size();
         start += cfg.batch_size, ++step) {
      const std::size_t stop =
          std::min(order.size(), start + cfg.batch_size);
      std::vector<Tensor> trials;
      std::vector<int> labels;
      trials.reserve(stop - start);
      for (std::size_t i = start; i < stop; ++i) {
        trials.push_back(train_set.trial(order[i]));
        labels.push_back(train_set.labels[order[i]]);
      }
      for (auto& p : net.params()) p.tensor.zero_grad();
      const Tensor logits = net.forward_batch(trials, true);
      const Tensor batch_loss = loss(logits, labels, net.params(), cfg.reg);
      const double lv = batch_loss.at(0);
      if (!std::isfinite(lv))
        throw DivergenceError("training diverged: non-finite loss at epoch " +
                              std::to_string(epoch) + ", step " +
                              std::to_string(step));
      backward(batch_loss);
      adam.step(net.params(), lr);
      loss_sum += lv * static_cast<double>(stop - start);
    }
    const double train_loss =
        loss_sum / static_cast<double>(train_set.n_trials);

    const double val_acc = evaluate(net, val_set).accuracy;
    report.epochs.push_back({epoch, train_loss, val_acc, lr});
    if (val_acc > best) {
      best = val_acc;
      report.best_val_acc = val_acc;
      report.best_epoch = epoch;
      if (!out_dir.empty())
        save_checkpoint((fs::path(out_dir) / "best.ckpt").string(),
                        net.params());
    }
    if (cfg.early_stop_val_acc && val_acc >= *cfg.early_stop_val_acc) break;
  }

  if (!out_dir.empty()) {
    std::ofstream os(fs::path(out_dir) / "epochs.csv", std::ios::trunc);
    os << format_epochs_csv(report.epochs);
    if (!os) throw DataError("cannot write epochs.csv under " + out_dir);
  }
  report.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
          .count();
  return report;
}

}  // namespace eegraph
