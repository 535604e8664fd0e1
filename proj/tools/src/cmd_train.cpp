#include <algorithm>
#include <cstdio>
#include <memory>
#include <string>

#include "CLI11.hpp"
#include "commands.hpp"
#include "ecgraph/checkpoint.hpp"
#include "ecgraph/datasets.hpp"
#include "ecgraph/signal_io.hpp"
#include "ecgraph/train.hpp"

namespace ecgraph::cli {
namespace {

struct TrainOpts {
  // data
  int synthetic = 0; // examples per class; 0 means --data
  std::string manifest;
  int length = 200;
  double val_fraction = 0.2;
  // model
  int blocks = 1;
  int channels = 32;
  int kernel = 3;
  int pool = 2;
  int gru_hidden = 32;
  int encoders = 2;
  int heads = 4;
  int ff = 128;
  double dropout = 0.2;
  double leaky = 0.01;
  // optimization
  double lr0 = TrainConfig{}.lr0;
  int halve_every = TrainConfig{}.lr_halve_every;
  int epochs = TrainConfig{}.max_epochs;
  int batch = TrainConfig{}.batch_size;
  int patience = TrainConfig{}.patience;
  std::string optimizer = "adam";
  std::uint64_t seed = 0;
  bool verbose = false;
  // outputs
  std::string out;
  std::string history;
};

int run_train(const TrainOpts& o) {
  try {
    Dataset all;
    int n_classes = 0;
    if (o.synthetic > 0) {
      all = synthetic_task(o.synthetic, o.length, o.seed);
      n_classes = 2;
    } else {
      if (o.manifest.empty()) {
        std::fprintf(stderr, "train: need --synthetic N or --data manifest\n");
        return 1;
      }
      DatasetManifest m = load_manifest(o.manifest);
      all = load_dataset(o.manifest, o.length);
      n_classes = int(m.class_names.size());
      for (const auto& ex : all) n_classes = std::max(n_classes, ex.label + 1);
    }
    auto [train_set, val_set] = stratified_split(all, o.val_fraction, o.seed);
    std::printf("dataset: %zu train, %zu val, %d classes\n", train_set.size(), val_set.size(),
                n_classes);

    ModelConfig model;
    model.input_length = o.length;
    model.input_leads = int(all.front().x.cols());
    model.n_classes = n_classes;
    model.n_cnn_blocks = o.blocks;
    model.conv_channels = o.channels;
    model.kernel_size = o.kernel;
    model.pool_size = o.pool;
    model.gru_hidden = o.gru_hidden;
    model.n_encoders = o.encoders;
    model.n_heads = o.heads;
    model.ff_dim = o.ff;
    model.dropout_rate = o.dropout;
    model.leaky_slope = o.leaky;
    model.validate();

    Rng rng = Rng::seeded(o.seed);
    CrtNetParams params = init_params(model, rng);
    std::printf("model: %zu parameters, reduced length %d, width %d\n", param_count(params),
                model.reduced_length(), model.d_model());

    TrainConfig cfg;
    cfg.lr0 = o.lr0;
    cfg.lr_halve_every = o.halve_every;
    cfg.max_epochs = o.epochs;
    cfg.batch_size = o.batch;
    cfg.patience = o.patience;
    cfg.optimizer = o.optimizer == "sgd" ? Optimizer::Sgd : Optimizer::Adam;
    cfg.seed = o.seed;
    cfg.verbose = o.verbose;

    TrainResult result = train(model, params, train_set, val_set, cfg);
    const EpochStats& last = result.history.back();
    std::printf("trained %zu epochs%s: train acc %.4f, val acc %.4f, best val loss %.6f @ epoch %d\n",
                result.history.size(), result.early_stopped ? " (early stop)" : "", last.train_acc,
                last.val_acc, result.best_val_loss, result.best_epoch);

    save_checkpoint(o.out, model, params);
    std::printf("saved %s\n", o.out.c_str());
    if (!o.history.empty()) {
      atomic_write_file(o.history, format_history_csv(result.history));
      std::printf("saved %s\n", o.history.c_str());
    }
    return 0;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "train: %s\n", e.what());
    return 1;
  }
}

} // namespace

void add_train_command(CLI::App& app, int& exit_code) {
  auto o = std::make_shared<TrainOpts>();
  CLI::App* cmd = app.add_subcommand("train", "Fit the classifier on a dataset");
  cmd->add_option("--synthetic", o->synthetic, "use the built-in two-class task, N per class");
  cmd->add_option("--data", o->manifest, "dataset manifest JSON");
  cmd->add_option("--length", o->length, "input rows per example")->capture_default_str();
  cmd->add_option("--val-fraction", o->val_fraction)->capture_default_str();
  cmd->add_option("--blocks", o->blocks, "conv blocks")->capture_default_str();
  cmd->add_option("--channels", o->channels, "conv channels")->capture_default_str();
  cmd->add_option("--kernel", o->kernel, "conv kernel (odd)")->capture_default_str();
  cmd->add_option("--pool", o->pool, "pool size per block")->capture_default_str();
  cmd->add_option("--gru-hidden", o->gru_hidden, "GRU state size per direction")
      ->capture_default_str();
  cmd->add_option("--encoders", o->encoders, "transformer encoder layers")->capture_default_str();
  cmd->add_option("--heads", o->heads, "attention heads")->capture_default_str();
  cmd->add_option("--ff", o->ff, "encoder feed-forward width")->capture_default_str();
  cmd->add_option("--dropout", o->dropout)->capture_default_str();
  cmd->add_option("--leaky", o->leaky, "leaky ReLU slope")->capture_default_str();
  cmd->add_option("--lr0", o->lr0, "initial learning rate")->capture_default_str();
  cmd->add_option("--halve-every", o->halve_every, "epochs per learning-rate halving")
      ->capture_default_str();
  cmd->add_option("--epochs", o->epochs)->capture_default_str();
  cmd->add_option("--batch", o->batch)->capture_default_str();
  cmd->add_option("--patience", o->patience)->capture_default_str();
  cmd->add_option("--optimizer", o->optimizer)
      ->check(CLI::IsMember({"adam", "sgd"}))
      ->capture_default_str();
  cmd->add_option("--seed", o->seed)->capture_default_str();
  cmd->add_flag("-v,--verbose", o->verbose, "per-epoch progress");
  cmd->add_option("-o,--out", o->out, "checkpoint file to write")->required();
  cmd->add_option("--history", o->history, "training history CSV to write");
  cmd->callback([o, &exit_code] { exit_code = run_train(*o); });
}

} // namespace ecgraph::cli
