#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "ecgraph/crtnet.hpp"

namespace ecgraph {

// One labelled example: x is [length, leads].
struct LabeledExample {
  Tensor x;
  int label = 0;
};

using Dataset = std::vector<LabeledExample>;

enum class Optimizer { Adam, Sgd };

struct TrainConfig {
  double lr0 = 1e-4;
  int lr_halve_every = 4; // epochs per halving step
  int max_epochs = 100;
  int batch_size = 16;
  int patience = 10; // epochs without val-loss improvement before stopping
  Optimizer optimizer = Optimizer::Adam;
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  double adam_eps = 1e-8;
  std::uint64_t seed = 0;
  bool verbose = false;

  void validate() const;
};

// Learning rate for a zero-based epoch index: lr0 halved once every
// lr_halve_every epochs. Uses ldexp so the halving is exact.
double epoch_learning_rate(const TrainConfig& cfg, int epoch);

struct EpochStats {
  int epoch = 0; // zero-based
  double lr = 0.0;
  double train_loss = 0.0;
  double train_acc = 0.0;
  double val_loss = 0.0;
  double val_acc = 0.0;
};

struct TrainResult {
  std::vector<EpochStats> history;
  int best_epoch = -1;        // epoch with the lowest validation loss
  double best_val_loss = 0.0;
  bool early_stopped = false; // stopped by patience rather than max_epochs
};

// Optimizes params in place. Examples are visited in a seeded shuffle each
// epoch; gradients are averaged per batch. Loss is cross-entropy.
TrainResult train(const ModelConfig& model, CrtNetParams& params, const Dataset& train_set,
                  const Dataset& val_set, const TrainConfig& cfg);

// Mean cross-entropy and accuracy without dropout.
std::pair<double, double> evaluate_loss_acc(const ModelConfig& model, const CrtNetParams& params,
                                            const Dataset& set);

// history as "epoch,lr,train_loss,val_loss,val_acc" CSV rows. train_acc is
// kept in EpochStats for callers but stays out of the file format.
std::string format_history_csv(const std::vector<EpochStats>& history);

} // namespace ecgraph
