#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "eegraph/dataset.hpp"
#include "eegraph/model.hpp"
#include "eegraph/params.hpp"
#include "eegraph/tensor.hpp"

namespace eegraph {

/// L1/L2 penalty coefficients; both zero means unregularized, both positive
/// is the elastic net.
struct RegSpec {
  double alpha = 0.0;
  double beta = 0.0;
};

struct TrainConfig {
  std::size_t batch_size = 256;
  std::size_t epochs = 400;
  double lr = 0.001;
  std::size_t lr_halving_period_epochs = 50;
  std::uint64_t seed = 0;
  RegSpec reg;
  /// Stop once validation accuracy reaches this value (after recording the
  /// epoch), used by the synthetic end-to-end checks.
  std::optional<double> early_stop_val_acc;
};

struct EpochRow {
  std::size_t epoch;  // 0-indexed
  double train_loss;
  double val_acc;
  double lr;
};

struct RunReport {
  std::vector<EpochRow> epochs;
  double best_val_acc = 0.0;
  std::size_t best_epoch = 0;
  std::size_t param_count = 0;
  double wall_seconds = 0.0;
};

/// Learning rate for a 0-indexed epoch: lr halves at every period boundary,
/// so with period 50 epochs 0..49 run at lr and epoch 50 at lr/2.
double lr_for_epoch(double lr0, std::size_t epoch, std::size_t period);

/// Mean cross-entropy plus alpha * sum |w| + beta * sum w^2 over the
/// regularizable weights (biases, batch-norm affine pairs and GIN lambda are
/// exempt).
Tensor loss(const Tensor& logits, const std::vector<int>& labels,
            const ParamList& params, const RegSpec& reg);

struct EvalResult {
  double accuracy = 0.0;
  std::vector<std::vector<std::size_t>> confusion;  // rows = true class
};

EvalResult evaluate(Network& net, const TrialSet& data);

/// Full protocol: shuffled minibatches, Adam with the halving schedule, one
/// validation pass per epoch, checkpoint on strict improvement. Writes
/// best.ckpt and epochs.csv into out_dir when it is non-empty. Throws
/// DivergenceError naming the epoch and step if the loss leaves the finite
/// range.
RunReport train(Network& net, const TrialSet& train_set,
                const TrialSet& val_set, const TrainConfig& cfg,
                const std::string& out_dir);

std::string format_epochs_csv(const std::vector<EpochRow>& rows);

}  // namespace eegraph
