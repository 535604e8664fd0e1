#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "doctest.h"

#include "ecgraph/datasets.hpp"
#include "ecgraph/train.hpp"
#include "helpers.hpp"

using namespace ecgraph;

namespace {

ModelConfig micro_model(int length, int classes) {
  ModelConfig cfg;
  cfg.input_length = length;
  cfg.input_leads = 1;
  cfg.n_classes = classes;
  cfg.n_cnn_blocks = 1;
  cfg.conv_channels = 4;
  cfg.kernel_size = 3;
  cfg.pool_size = 2;
  cfg.gru_hidden = 3;
  cfg.n_encoders = 1;
  cfg.n_heads = 2;
  cfg.ff_dim = 8;
  cfg.dropout_rate = 0.0;
  return cfg;
}

} // namespace

TEST_SUITE("train") {

  TEST_CASE("the learning-rate schedule halves exactly on the epoch boundaries") {
    TrainConfig cfg;
    cfg.lr0 = 1e-4;
    cfg.lr_halve_every = 4;
    CHECK(epoch_learning_rate(cfg, 0) == 1e-4);
    CHECK(epoch_learning_rate(cfg, 3) == 1e-4);
    CHECK(epoch_learning_rate(cfg, 4) == 0.5e-4);
    CHECK(epoch_learning_rate(cfg, 7) == 0.5e-4);
    CHECK(epoch_learning_rate(cfg, 8) == 0.25e-4);
    CHECK(epoch_learning_rate(cfg, 100) == std::ldexp(1e-4, -25));
  }

  TEST_CASE("train config validation") {
    TrainConfig cfg;
    CHECK_NOTHROW(cfg.validate());
    cfg.lr0 = 0.0;
    CHECK_THROWS_AS(cfg.validate(), Error);
    cfg = TrainConfig{};
    cfg.batch_size = 0;
    CHECK_THROWS_AS(cfg.validate(), Error);
    cfg = TrainConfig{};
    cfg.patience = -1;
    CHECK_THROWS_AS(cfg.validate(), Error);
    cfg = TrainConfig{};
    cfg.max_epochs = 0;
    CHECK_THROWS_AS(cfg.validate(), Error);
  }

  TEST_CASE("a few epochs on one example drive its loss down") {
    ModelConfig model = micro_model(16, 2);
    Rng rng = Rng::seeded(21);
    CrtNetParams params = init_params(model, rng);

    Dataset one;
    Tensor x({16, 1});
    for (std::size_t i = 0; i < 16; ++i) x[i] = std::sin(0.5 * double(i));
    one.push_back({x, 1});

    auto [loss_before, acc_before] = evaluate_loss_acc(model, params, one);
    TrainConfig cfg;
    cfg.lr0 = 5e-3;
    cfg.lr_halve_every = 1000;
    cfg.max_epochs = 20;
    cfg.batch_size = 1;
    cfg.patience = 1000;
    cfg.seed = 5;
    TrainResult r = train(model, params, one, one, cfg);
    auto [loss_after, acc_after] = evaluate_loss_acc(model, params, one);
    CHECK(loss_after < loss_before);
    CHECK(r.history.size() == 20);
    CHECK(r.history.front().lr == 5e-3);
    // history losses match a fresh evaluation of the final parameters
    CHECK(r.history.back().val_loss == doctest::Approx(loss_after).epsilon(1e-9));
  }

  TEST_CASE("patience stops training when the validation loss cannot improve") {
    ModelConfig model = micro_model(16, 2);
    Rng rng = Rng::seeded(22);
    CrtNetParams params = init_params(model, rng);
    Dataset set = synthetic_task(4, 16, 3);

    TrainConfig cfg;
    cfg.lr0 = 1e-30; // updates vanish, so no epoch can beat epoch 0
    cfg.max_epochs = 100;
    cfg.batch_size = 4;
    cfg.patience = 3;
    TrainResult r = train(model, params, set, set, cfg);
    CHECK(r.early_stopped);
    CHECK(r.best_epoch == 0);
    CHECK(r.history.size() == std::size_t(cfg.patience) + 1);
  }

  TEST_CASE("runs to max_epochs without early stop when patience allows") {
    ModelConfig model = micro_model(16, 2);
    Rng rng = Rng::seeded(23);
    CrtNetParams params = init_params(model, rng);
    Dataset set = synthetic_task(2, 16, 4);
    TrainConfig cfg;
    cfg.max_epochs = 3;
    cfg.patience = 50;
    cfg.batch_size = 2;
    TrainResult r = train(model, params, set, set, cfg);
    CHECK_FALSE(r.early_stopped);
    CHECK(r.history.size() == 3);
    for (int e = 0; e < 3; ++e) {
      CHECK(r.history[std::size_t(e)].epoch == e);
      CHECK(r.history[std::size_t(e)].lr == epoch_learning_rate(cfg, e));
    }
  }

  TEST_CASE("training is seed-deterministic") {
    ModelConfig model = micro_model(16, 2);
    Dataset set = synthetic_task(3, 16, 9);
    TrainConfig cfg;
    cfg.max_epochs = 3;
    cfg.batch_size = 2;
    cfg.seed = 77;

    Rng r1 = Rng::seeded(30);
    CrtNetParams p1 = init_params(model, r1);
    Rng r2 = Rng::seeded(30);
    CrtNetParams p2 = init_params(model, r2);

    TrainResult a = train(model, p1, set, set, cfg);
    TrainResult b = train(model, p2, set, set, cfg);
    CHECK(format_history_csv(a.history) == format_history_csv(b.history));
    for (const auto& [name, t] : p1.tensors) CHECK(t.data() == p2.tensors.at(name).data());
  }

  TEST_CASE("sgd also trains") {
    ModelConfig model = micro_model(16, 2);
    Rng rng = Rng::seeded(24);
    CrtNetParams params = init_params(model, rng);
    Dataset one;
    Tensor x({16, 1}, 0.3);
    one.push_back({x, 0});
    auto [before, acc0] = evaluate_loss_acc(model, params, one);
    TrainConfig cfg;
    cfg.optimizer = Optimizer::Sgd;
    cfg.lr0 = 0.05;
    cfg.lr_halve_every = 1000;
    cfg.max_epochs = 10;
    cfg.batch_size = 1;
    cfg.patience = 100;
    train(model, params, one, one, cfg);
    auto [after, acc1] = evaluate_loss_acc(model, params, one);
    CHECK(after < before);
  }

  TEST_CASE("labels outside the class range and empty sets are rejected") {
    ModelConfig model = micro_model(16, 2);
    Rng rng = Rng::seeded(25);
    CrtNetParams params = init_params(model, rng);
    TrainConfig cfg;
    cfg.max_epochs = 1;

    Dataset bad;
    Tensor x({16, 1}, 0.1);
    bad.push_back({x, 2}); // n_classes == 2, labels are 0..1
    CHECK_THROWS_AS(train(model, params, bad, bad, cfg), Error);

    Dataset empty;
    Dataset ok;
    ok.push_back({x, 0});
    CHECK_THROWS_AS(train(model, params, empty, ok, cfg), Error);
    CHECK_THROWS_AS(train(model, params, ok, empty, cfg), Error);
  }

  TEST_CASE("history csv carries one row per epoch") {
    std::vector<EpochStats> h;
    h.push_back({0, 1e-4, 1.5, 0.5, 1.4, 0.6});
    h.push_back({1, 1e-4, 1.2, 0.7, 1.1, 0.8});
    std::string csv = format_history_csv(h);
    CHECK(csv.find("epoch,lr,train_loss,val_loss,val_acc") == 0);
    CHECK(csv.find("\n0,") != std::string::npos);
    CHECK(csv.find("\n1,") != std::string::npos);
    // two data rows plus the header
    std::size_t lines = std::size_t(std::count(csv.begin(), csv.end(), '\n'));
    CHECK(lines == 3);
  }
}
