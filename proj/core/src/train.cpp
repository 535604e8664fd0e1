#include "ecgraph/train.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>

#include "ecgraph/log.hpp"

namespace ecgraph {

void TrainConfig::validate() const {
  if (lr0 <= 0.0) fail(Errc::ConfigShapeMismatch, "lr0 must be positive");
  if (lr_halve_every <= 0) fail(Errc::ConfigShapeMismatch, "lr_halve_every must be positive");
  if (max_epochs <= 0) fail(Errc::ConfigShapeMismatch, "max_epochs must be positive");
  if (batch_size <= 0) fail(Errc::ConfigShapeMismatch, "batch_size must be positive");
  if (patience <= 0) fail(Errc::ConfigShapeMismatch, "patience must be positive");
}

double epoch_learning_rate(const TrainConfig& cfg, int epoch) {
  return std::ldexp(cfg.lr0, -(epoch / cfg.lr_halve_every));
}

namespace {

void check_dataset(const ModelConfig& model, const Dataset& set, const char* what) {
  if (set.empty()) fail(Errc::EmptyDataset, std::string(what) + " set is empty");
  for (const auto& ex : set) {
    if (ex.label < 0 || ex.label >= model.n_classes)
      fail(Errc::LabelOutOfRange,
           std::string(what) + " label " + std::to_string(ex.label) + " outside [0," +
               std::to_string(model.n_classes) + ")");
    if (ex.x.rank() != 2 || ex.x.rows() != std::size_t(model.input_length) ||
        ex.x.cols() != std::size_t(model.input_leads))
      fail(Errc::ShapeMismatch, std::string(what) + " example shape " + ex.x.shape_str() +
                                    " does not match the model input");
  }
}

struct AdamState {
  nn::ParamTensors m, v;
  long t = 0;
};

void apply_update(CrtNetParams& params, const nn::ParamTensors& grads, const TrainConfig& cfg,
                  double lr, AdamState& adam) {
  if (cfg.optimizer == Optimizer::Sgd) {
    for (auto& [name, p] : params.tensors) {
      const Tensor& g = grads.at(name);
      for (std::size_t i = 0; i < p.numel(); ++i) p[i] -= lr * g[i];
    }
    return;
  }
  adam.t += 1;
  double b1 = cfg.adam_beta1, b2 = cfg.adam_beta2;
  double corr1 = 1.0 - std::pow(b1, double(adam.t));
  double corr2 = 1.0 - std::pow(b2, double(adam.t));
  for (auto& [name, p] : params.tensors) {
    const Tensor& g = grads.at(name);
    Tensor& m = adam.m.at(name);
    Tensor& v = adam.v.at(name);
    for (std::size_t i = 0; i < p.numel(); ++i) {
      m[i] = b1 * m[i] + (1.0 - b1) * g[i];
      v[i] = b2 * v[i] + (1.0 - b2) * g[i] * g[i];
      double mhat = m[i] / corr1;
      double vhat = v[i] / corr2;
      p[i] -= lr * mhat / (std::sqrt(vhat) + cfg.adam_eps);
    }
  }
}

} // namespace

std::pair<double, double> evaluate_loss_acc(const ModelConfig& model, const CrtNetParams& params,
                                            const Dataset& set) {
  if (set.empty()) fail(Errc::EmptyDataset, "evaluation set is empty");
  auto bound = nn::bind_params(params.tensors, false);
  double loss = 0.0;
  long correct = 0;
  for (const auto& ex : set) {
    auto res = crtnet_forward(model, bound, ex.x);
    loss += ad::cross_entropy_logits(res.logits, std::size_t(ex.label)).value()[0];
    const Tensor& p = res.probs.value();
    std::size_t best = 0;
    for (std::size_t j = 1; j < p.numel(); ++j)
      if (p[j] > p[best]) best = j;
    correct += long(best) == long(ex.label);
  }
  return {loss / double(set.size()), double(correct) / double(set.size())};
}

TrainResult train(const ModelConfig& model, CrtNetParams& params, const Dataset& train_set,
                  const Dataset& val_set, const TrainConfig& cfg) {
  model.validate();
  cfg.validate();
  check_params(model, params);
  check_dataset(model, train_set, "training");
  check_dataset(model, val_set, "validation");

  Rng rng = Rng::seeded(cfg.seed);
  Rng shuffle_rng = rng.fork(1);
  Rng dropout_rng = rng.fork(2);

  AdamState adam;
  if (cfg.optimizer == Optimizer::Adam)
    for (const auto& [name, t] : params.tensors) {
      adam.m.emplace(name, Tensor(t.shape()));
      adam.v.emplace(name, Tensor(t.shape()));
    }

  TrainResult result;
  double best_val = 0.0;
  int since_best = 0;

  std::vector<std::size_t> order(train_set.size());
  std::iota(order.begin(), order.end(), 0);

  for (int epoch = 0; epoch < cfg.max_epochs; ++epoch) {
    double lr = epoch_learning_rate(cfg, epoch);
    shuffle_rng.shuffle(order);

    double loss_sum = 0.0;
    for (std::size_t start = 0; start < order.size(); start += std::size_t(cfg.batch_size)) {
      std::size_t end = std::min(order.size(), start + std::size_t(cfg.batch_size));
      nn::ParamTensors grads;
      for (const auto& [name, t] : params.tensors) grads.emplace(name, Tensor(t.shape()));
      for (std::size_t k = start; k < end; ++k) {
        const auto& ex = train_set[order[k]];
        auto bound = nn::bind_params(params.tensors, true);
        auto res = crtnet_forward(model, bound, ex.x, true, &dropout_rng);
        ad::Var loss = ad::cross_entropy_logits(res.logits, std::size_t(ex.label));
        ad::backward(loss);
        loss_sum += loss.value()[0];
        for (auto& [name, g] : grads) {
          const Tensor& pg = bound.at(name).grad();
          for (std::size_t i = 0; i < g.numel(); ++i) g[i] += pg[i];
        }
      }
      double inv = 1.0 / double(end - start);
      for (auto& [name, g] : grads)
        for (std::size_t i = 0; i < g.numel(); ++i) g[i] *= inv;
      apply_update(params, grads, cfg, lr, adam);
    }

    EpochStats stats;
    stats.epoch = epoch;
    stats.lr = lr;
    stats.train_loss = loss_sum / double(train_set.size());
    auto [tl_eval, ta_eval] = evaluate_loss_acc(model, params, train_set);
    (void)tl_eval;
    stats.train_acc = ta_eval;
    auto [vl, va] = evaluate_loss_acc(model, params, val_set);
    stats.val_loss = vl;
    stats.val_acc = va;
    result.history.push_back(stats);

    if (cfg.verbose)
      log::info("epoch ", epoch, " lr ", lr, " train_loss ", stats.train_loss, " train_acc ",
                stats.train_acc, " val_loss ", vl, " val_acc ", va);

    if (result.best_epoch < 0 || vl < best_val) {
      best_val = vl;
      result.best_epoch = epoch;
      since_best = 0;
    } else if (++since_best >= cfg.patience) {
      result.early_stopped = true;
      break;
    }
  }
  result.best_val_loss = best_val;
  return result;
}

std::string format_history_csv(const std::vector<EpochStats>& history) {
  std::string out = "epoch,lr,train_loss,val_loss,val_acc\n";
  char buf[192];
  for (const auto& s : history) {
    std::snprintf(buf, sizeof buf, "%d,%.12g,%.6f,%.6f,%.6f\n", s.epoch, s.lr, s.train_loss,
                  s.val_loss, s.val_acc);
    out += buf;
  }
  return out;
}

} // namespace ecgraph
