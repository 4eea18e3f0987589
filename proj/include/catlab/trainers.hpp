#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "catlab/checkpoint.hpp"
#include "catlab/data.hpp"
#include "catlab/kernels.hpp"
#include "catlab/net.hpp"

namespace catlab {

/// Per-sample perturbation budgets. Entries start at 0, move by +eta or 0 per
/// visit, and never leave [0, eps_max].
class EpsilonLedger {
 public:
  EpsilonLedger(std::size_t n, double eta, double eps_max);

  double eps(std::size_t id) const { return eps_.at(id); }
  /// Budget the next attack on `id` runs at: eps(id) + eta.
  double tentative(std::size_t id) const { return eps(id) + eta_; }
  /// Failed attack: eps += eta; successful attack: unchanged; then clamp.
  void update(std::size_t id, bool attack_succeeded);

  double eta() const { return eta_; }
  double eps_max() const { return eps_max_; }
  std::size_t size() const { return eps_.size(); }
  const std::vector<double>& values() const { return eps_; }
  double mean() const;

  LedgerSnapshot snapshot() const { return {eps_, eta_, eps_max_}; }
  static EpsilonLedger from_snapshot(const LedgerSnapshot& s);

 private:
  std::vector<double> eps_;
  double eta_;
  double eps_max_;
};

/// Functional form of EpsilonLedger::update.
EpsilonLedger ledger_update(EpsilonLedger ledger, std::size_t id, bool attack_succeeded);

enum class TrainerKind { natural, adv, trades, cat };
enum class CatLoss { ce, mix };

std::string to_string(TrainerKind k);
TrainerKind trainer_kind_from_string(const std::string& s);
std::string to_string(CatLoss k);
CatLoss cat_loss_from_string(const std::string& s);

struct TrainConfig {
  TrainerKind trainer = TrainerKind::natural;
  std::size_t epochs = 10;
  std::size_t batch_size = 32;
  double lr = 0.01;
  double momentum = 0.9;
  double weight_decay = 5e-4;
  std::vector<std::size_t> lr_milestones;  // epochs at which lr *= lr_decay
  double lr_decay = 0.1;
  int attack_steps = 10;
  double attack_step_size = 0.0;  // 0: max(2.5 eps / m, 1e-4)
  double eps = 8.0 / 255.0;       // fixed budget for adv / trades
  double eps_max = 8.0 / 255.0;   // cat
  double eta = 0.005;
  double c = 10.0;
  double kappa = 10.0;
  CatLoss loss = CatLoss::ce;
  double beta = 1.0;              // TRADES weight
  bool label_smoothing = false;   // adv only: smooth labels at the fixed eps
  std::uint64_t seed = 0;
  Exec exec = Exec::parallel;

  void validate() const;
  double lr_at(std::size_t epoch) const;
};

struct EpochMetrics {
  std::size_t epoch = 0;
  double clean_train_acc = 0.0;
  double clean_test_acc = 0.0;  // NaN without a test set
  double mean_eps = 0.0;
  double mean_loss = 0.0;
};

struct TrainReport {
  Network net;
  std::vector<EpochMetrics> epochs;
  std::optional<EpsilonLedger> ledger;
};

/// Optional hook for inspecting every per-sample training target (used by
/// tests and the label-adaption ablation).
struct TrainObserver {
  virtual ~TrainObserver() = default;
  virtual void on_target(std::size_t /*epoch*/, const Sample& /*s*/, const LossTarget& /*t*/) {}
  virtual void on_adversarial(const Sample& /*s*/, const AdvExample& /*adv*/, double /*eps*/) {}
  virtual void on_ledger(std::size_t /*id*/, double /*before*/, double /*after*/) {}
};

TrainReport train_natural(Network net, const Dataset& train, const Dataset* test,
                          const TrainConfig& cfg, TrainObserver* obs = nullptr);
TrainReport train_adv(Network net, const Dataset& train, const Dataset* test,
                      const TrainConfig& cfg, double eps_fixed, TrainObserver* obs = nullptr);
TrainReport train_trades(Network net, const Dataset& train, const Dataset* test,
                         const TrainConfig& cfg, TrainObserver* obs = nullptr);
TrainReport train_cat(Network net, const Dataset& train, const Dataset* test,
                      const TrainConfig& cfg, TrainObserver* obs = nullptr);

/// Dispatches on cfg.trainer (adv and trades use cfg.eps).
TrainReport train(Network net, const Dataset& train, const Dataset* test, const TrainConfig& cfg,
                  TrainObserver* obs = nullptr);

std::string metrics_csv(const std::vector<EpochMetrics>& epochs);

}  // namespace catlab
