#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "catlab/errors.hpp"
#include "catlab/trainers.hpp"
#include "support.hpp"

using namespace catlab;
using namespace catlab::testing;

namespace {

Dataset small_blobs(std::size_t n = 30, double sigma = 0.4) {
  const auto centers = random_centers(2, 3, 1.0, 5);
  return gen_gaussian_blobs(n, 2, 3, centers, sigma, 6);
}

bool same_params(const Network& a, const Network& b) { return a == b; }

TrainConfig quick(std::size_t epochs = 3) {
  TrainConfig c;
  c.epochs = epochs;
  c.batch_size = 8;
  c.lr = 0.05;
  c.seed = 11;
  return c;
}

struct Recorder : TrainObserver {
  std::vector<LossTarget> targets;
  std::vector<std::pair<double, double>> steps;
  std::vector<std::pair<double, double>> linf;  // (||delta||_inf, eps)
  void on_target(std::size_t, const Sample&, const LossTarget& t) override { targets.push_back(t); }
  void on_ledger(std::size_t, double before, double after) override { steps.emplace_back(before, after); }
  void on_adversarial(const Sample&, const AdvExample& a, double eps) override {
    linf.emplace_back(a.linf_norm(), eps);
  }
};

}  // namespace

TEST_CASE("ledger transitions") {
  EpsilonLedger l(3, 0.05, 0.12);
  l.update(0, false);
  CHECK(l.eps(0) == 0.05);
  l.update(0, true);
  CHECK(l.eps(0) == 0.05);
  l.update(0, false);
  l.update(0, false);
  CHECK(l.eps(0) == 0.12);
  CHECK(l.tentative(1) == 0.05);
  const EpsilonLedger moved = ledger_update(l, 2, false);
  CHECK(moved.eps(2) == 0.05);
  CHECK(l.eps(2) == 0.0);
  CHECK_THROWS_AS(EpsilonLedger(2, 0.0, 1.0), ConfigError);
  CHECK_THROWS_AS(EpsilonLedger::from_snapshot({{0.5}, 0.1, 0.2}), ConfigError);
}

TEST_CASE("ledger invariants over random transition sequences") {
  std::mt19937_64 r(2024);
  std::uniform_real_distribution<double> eta_d(1e-3, 0.2), max_d(1e-2, 1.0);
  std::bernoulli_distribution coin(0.5);
  for (int seq = 0; seq < 10000; ++seq) {
    const double eta = eta_d(r), eps_max = max_d(r);
    EpsilonLedger l(4, eta, eps_max);
    for (int t = 0; t < 40; ++t) {
      const std::size_t id = static_cast<std::size_t>(t % 4);
      const double before = l.eps(id);
      const bool success = coin(r);
      l.update(id, success);
      const double after = l.eps(id);
      REQUIRE(after >= 0.0);
      REQUIRE(after <= eps_max);
      if (success) REQUIRE(after == before);
      else REQUIRE(after == std::min(eps_max, before + eta));
    }
  }
}

TEST_CASE("config validation and schedule") {
  TrainConfig c;
  c.batch_size = 0;
  CHECK_THROWS_AS(c.validate(), ConfigError);
  c = TrainConfig{};
  c.lr = 0.0;
  CHECK_THROWS_AS(c.validate(), ConfigError);
  c = TrainConfig{};
  c.lr = 1.0;
  c.lr_milestones = {2, 4};
  CHECK(c.lr_at(1) == 1.0);
  CHECK(c.lr_at(2) == doctest::Approx(0.1));
  CHECK(c.lr_at(5) == doctest::Approx(0.01));
  CHECK(trainer_kind_from_string("cat") == TrainerKind::cat);
  CHECK_THROWS_AS(trainer_kind_from_string("fgsm"), ConfigError);
}

TEST_CASE("zero epochs leave the network unchanged") {
  const Dataset ds = small_blobs();
  const Network net = random_net({3, 4, 2}, 3);
  TrainConfig c = quick(0);
  CHECK(same_params(train_natural(net, ds, nullptr, c).net, net));
  c.eps_max = 0.1;
  c.eta = 0.01;
  CHECK(same_params(train_cat(net, ds, nullptr, c).net, net));
}

TEST_CASE("full-batch training of a convex model does not increase the loss") {
  const Dataset ds = small_blobs(40, 0.8);
  TrainConfig c = quick(40);
  c.batch_size = ds.size();
  c.momentum = 0.0;
  c.weight_decay = 0.0;
  c.lr = 0.05;
  const TrainReport r = train_natural(random_net({3, 2}, 1), ds, nullptr, c);
  for (std::size_t e = 1; e < r.epochs.size(); ++e)
    CHECK(r.epochs[e].mean_loss <= r.epochs[e - 1].mean_loss + 1e-12);
}

TEST_CASE("reductions to natural training") {
  const Dataset ds = small_blobs();
  const Network init = random_net({3, 5, 2}, 4);
  const TrainConfig c = quick();
  const Network nat = train_natural(init, ds, nullptr, c).net;
  CHECK(same_params(train_adv(init, ds, nullptr, c, 0.0).net, nat));
  TrainConfig t = c;
  t.eps = 0.0;
  CHECK(same_params(train_trades(init, ds, nullptr, t).net, nat));
  t.eps = 0.2;
  t.beta = 0.0;
  CHECK(same_params(train_trades(init, ds, nullptr, t).net, nat));
}

TEST_CASE("CAT with c = 0 trains on one-hot labels") {
  const Dataset ds = small_blobs();
  TrainConfig c = quick();
  c.c = 0.0;
  c.eps_max = 0.3;
  c.eta = 0.05;
  Recorder rec;
  (void)train_cat(random_net({3, 5, 2}, 4), ds, nullptr, c, &rec);
  REQUIRE(rec.targets.size() == 3 * ds.size());
  for (const LossTarget& t : rec.targets)
    CHECK(t.dist == LossTarget::one_hot(t.label, 2).dist);
}

TEST_CASE("CAT ledger observations") {
  const Dataset ds = small_blobs();
  TrainConfig c = quick(6);
  c.eps_max = 0.12;
  c.eta = 0.05;
  Recorder rec;
  const TrainReport r = train_cat(random_net({3, 5, 2}, 4), ds, nullptr, c, &rec);
  REQUIRE(rec.steps.size() == 6 * ds.size());
  for (const auto& [before, after] : rec.steps) {
    const double d = after - before;
    CHECK((d == 0.0 || std::abs(d - 0.05) < 1e-15 || after == 0.12));
    CHECK(after <= 0.12);
  }
  for (const auto& [norm, eps] : rec.linf) CHECK(norm <= eps + 1e-12);
  for (const LossTarget& t : rec.targets) {
    CHECK(t.dist.minCoeff() >= 0.0);
    CHECK(std::abs(t.dist.sum() - 1.0) < 1e-12);
  }
  REQUIRE(r.ledger.has_value());
  CHECK(r.epochs.back().mean_eps == doctest::Approx(r.ledger->mean()));
}

TEST_CASE("ledger extremes") {
  // two points that no classifier separates robustly: the ledger stays at 0
  // for both, while a lone far-away pair becomes robust and climbs to eps_max
  Dataset ds;
  ds.dim = 1;
  ds.num_classes = 2;
  auto add = [&](double x, std::size_t y) {
    Vector v(1);
    v << x;
    ds.samples.push_back({v, y, ds.samples.size()});
  };
  add(0.0, 0);
  add(0.0, 1);
  add(-10.0, 0);
  add(10.0, 1);
  Matrix w(2, 1);
  w << -1.0, 1.0;
  const Network net = single_layer(w, Vector::Zero(2));
  TrainConfig c = quick(8);
  c.lr = 1e-9;
  c.batch_size = 4;
  c.eps_max = 0.3;
  c.eta = 0.05;
  const TrainReport r = train_cat(net, ds, nullptr, c);
  REQUIRE(r.ledger.has_value());
  // id 1 starts misclassified, id 0 flips under any positive shift
  CHECK(r.ledger->eps(0) == 0.0);
  CHECK(r.ledger->eps(1) == 0.0);
  CHECK(r.ledger->eps(2) == doctest::Approx(0.3));
  CHECK(r.ledger->eps(3) == doctest::Approx(0.3));
  // ceil(eps_max / eta) = 6 epochs suffice
  c.epochs = 6;
  CHECK(train_cat(net, ds, nullptr, c).ledger->eps(2) == doctest::Approx(0.3));
}

TEST_CASE("training is deterministic and thread-count independent") {
  const Dataset ds = small_blobs();
  for (TrainerKind k : {TrainerKind::natural, TrainerKind::adv, TrainerKind::trades, TrainerKind::cat}) {
    TrainConfig c = quick();
    c.trainer = k;
    c.eps = 0.1;
    c.eps_max = 0.1;
    c.eta = 0.02;
    const Network init = random_net({3, 5, 2}, 8);
    const TrainReport a = train(init, ds, &ds, c);
    const TrainReport b = train(init, ds, &ds, c);
    c.exec = Exec::serial;
    const TrainReport s = train(init, ds, &ds, c);
    CHECK(same_params(a.net, b.net));
    CHECK(same_params(a.net, s.net));
    CHECK(metrics_csv(a.epochs) == metrics_csv(s.epochs));
  }
}

TEST_CASE("metrics csv") {
  const Dataset ds = small_blobs();
  const TrainReport r = train_natural(random_net({3, 2}, 1), ds, nullptr, quick(2));
  const std::string csv = metrics_csv(r.epochs);
  CHECK(csv.rfind("epoch,clean_train_acc,clean_test_acc,mean_eps,mean_loss\n", 0) == 0);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 3);
  CHECK(std::isnan(r.epochs[0].clean_test_acc));
}

TEST_CASE("mismatched data is rejected") {
  const Dataset ds = small_blobs();
  CHECK_THROWS_AS(train_natural(random_net({4, 2}, 1), ds, nullptr, quick()), DimensionError);
  CHECK_THROWS_AS(train_natural(random_net({3, 3}, 1), ds, nullptr, quick()), DimensionError);
}
