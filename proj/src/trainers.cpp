#include "catlab/trainers.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numeric>
#include <sstream>

#include "catlab/attacks.hpp"
#include "catlab/errors.hpp"
#include "catlab/losses.hpp"
#include "catlab/rng.hpp"

namespace catlab {

EpsilonLedger::EpsilonLedger(std::size_t n, double eta, double eps_max)
    : eps_(n, 0.0), eta_(eta), eps_max_(eps_max) {
  if (!(eta > 0.0)) throw ConfigError("eta must be positive");
  if (!(eps_max > 0.0)) throw ConfigError("eps_max must be positive");
}

void EpsilonLedger::update(std::size_t id, bool attack_succeeded) {
  double& e = eps_.at(id);
  if (!attack_succeeded) e = e + eta_;
  e = std::min(eps_max_, e);
}

double EpsilonLedger::mean() const {
  if (eps_.empty()) return 0.0;
  return std::accumulate(eps_.begin(), eps_.end(), 0.0) / static_cast<double>(eps_.size());
}

EpsilonLedger EpsilonLedger::from_snapshot(const LedgerSnapshot& s) {
  EpsilonLedger l(s.eps.size(), s.eta, s.eps_max);
  for (std::size_t i = 0; i < s.eps.size(); ++i) {
    if (!(s.eps[i] >= 0.0 && s.eps[i] <= s.eps_max))
      throw ConfigError("ledger entry " + std::to_string(i) + " outside [0, eps_max]");
    l.eps_[i] = s.eps[i];
  }
  return l;
}

EpsilonLedger ledger_update(EpsilonLedger ledger, std::size_t id, bool attack_succeeded) {
  ledger.update(id, attack_succeeded);
  return ledger;
}

std::string to_string(TrainerKind k) {
  switch (k) {
    case TrainerKind::natural: return "natural";
    case TrainerKind::adv: return "adv";
    case TrainerKind::trades: return "trades";
    case TrainerKind::cat: return "cat";
  }
  return "?";
}

TrainerKind trainer_kind_from_string(const std::string& s) {
  if (s == "natural") return TrainerKind::natural;
  if (s == "adv") return TrainerKind::adv;
  if (s == "trades") return TrainerKind::trades;
  if (s == "cat") return TrainerKind::cat;
  throw ConfigError("unknown trainer '" + s + "'");
}

std::string to_string(CatLoss k) { return k == CatLoss::ce ? "ce" : "mix"; }

CatLoss cat_loss_from_string(const std::string& s) {
  if (s == "ce") return CatLoss::ce;
  if (s == "mix") return CatLoss::mix;
  throw ConfigError("unknown CAT loss '" + s + "'");
}

void TrainConfig::validate() const {
  if (batch_size == 0) throw ConfigError("batch_size must be positive");
  if (!(lr > 0.0)) throw ConfigError("lr must be positive");
  if (!(momentum >= 0.0 && momentum < 1.0)) throw ConfigError("momentum must lie in [0, 1)");
  if (!(weight_decay >= 0.0)) throw ConfigError("weight_decay must be >= 0");
  if (attack_steps < 1) throw ConfigError("attack_steps must be >= 1");
  if (!(eps >= 0.0)) throw ConfigError("eps must be >= 0");
  if (!(eps_max > 0.0)) throw ConfigError("eps_max must be positive");
  if (!(eta > 0.0)) throw ConfigError("eta must be positive");
  if (!(c >= 0.0)) throw ConfigError("c must be >= 0");
  if (!(kappa >= 0.0)) throw ConfigError("kappa must be >= 0");
  if (!(beta >= 0.0)) throw ConfigError("beta must be >= 0");
  if (!(lr_decay > 0.0)) throw ConfigError("lr_decay must be positive");
}

double TrainConfig::lr_at(std::size_t epoch) const {
  double r = lr;
  for (std::size_t m : lr_milestones)
    if (epoch >= m) r *= lr_decay;
  return r;
}

namespace {

struct SampleStep {
  GradientBundle grad;
  double loss = 0.0;
  std::optional<bool> attack_succeeded;  // cat only
  // observer payload
  std::optional<LossTarget> target;
  std::optional<AdvExample> adv;
  double eps = 0.0;
};

using SampleFn = std::function<SampleStep(std::size_t epoch, const Sample& s, const Network& net)>;

std::uint64_t epoch_seed(std::uint64_t seed, std::size_t epoch) {
  return mix64(seed ^ mix64(0x5eedULL + epoch));
}

AttackSpec train_attack(const TrainConfig& cfg, const Dataset& train, double eps, LossKind kind) {
  AttackSpec spec = AttackSpec::training(eps, cfg.attack_steps, kind, cfg.kappa);
  if (cfg.attack_step_size > 0.0) spec.step_size = cfg.attack_step_size;
  spec.with_domain(train);
  return spec;
}

SampleStep sgd_sample(const Network& net, const Vector& x, const LossTarget& target,
                      LossKind kind) {
  const ForwardTrace tr = forward(net, x);
  SampleStep step;
  step.loss = loss_value(kind, tr, target);
  step.grad = backward(net, tr, target, kind, false);
  return step;
}

TrainReport run_trainer(Network net, const Dataset& train, const Dataset* test,
                        const TrainConfig& cfg, const SampleFn& fn,
                        EpsilonLedger* ledger, double fixed_eps,
                        TrainObserver* obs) {
  cfg.validate();
  train.validate();
  if (train.dim != net.input_dim()) throw DimensionError("dataset dim does not match network");
  if (train.num_classes != net.num_classes())
    throw DimensionError("dataset classes do not match network");
  TrainReport report{net, {}, std::nullopt};
  MomentumState momentum;
  for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    const SgdParams sgd{cfg.lr_at(epoch), cfg.momentum, cfg.weight_decay};
    double loss_sum = 0.0;
    for (const auto& batch : batch_iter(train, cfg.batch_size, epoch_seed(cfg.seed, epoch))) {
      const Network& snapshot = net;
      std::vector<SampleStep> steps = map_indices<SampleStep>(
          batch.size(),
          [&](std::size_t k) { return fn(epoch, train.samples[batch[k]], snapshot); },
          cfg.exec);
      GradientBundle total = GradientBundle::zeros_like(net);
      for (std::size_t k = 0; k < steps.size(); ++k) {
        const Sample& s = train.samples[batch[k]];
        SampleStep& st = steps[k];
        total.add(st.grad);
        loss_sum += st.loss;
        if (ledger && st.attack_succeeded) {
          const double before = ledger->eps(s.id);
          ledger->update(s.id, *st.attack_succeeded);
          if (obs) obs->on_ledger(s.id, before, ledger->eps(s.id));
        }
        if (obs) {
          if (st.adv) obs->on_adversarial(s, *st.adv, st.eps);
          if (st.target) obs->on_target(epoch, s, *st.target);
        }
      }
      total.scale(1.0 / static_cast<double>(batch.size()));
      sgd_step(net, total, sgd, momentum);
    }
    EpochMetrics m;
    m.epoch = epoch + 1;
    m.clean_train_acc = accuracy(net, train);
    m.clean_test_acc = test ? accuracy(net, *test) : std::numeric_limits<double>::quiet_NaN();
    m.mean_eps = ledger ? ledger->mean() : fixed_eps;
    m.mean_loss = train.size() ? loss_sum / static_cast<double>(train.size()) : 0.0;
    report.epochs.push_back(m);
  }
  report.net = std::move(net);
  if (ledger) report.ledger = *ledger;
  return report;
}

}  // namespace

TrainReport train_natural(Network net, const Dataset& train, const Dataset* test,
                          const TrainConfig& cfg, TrainObserver* obs) {
  const bool keep = obs != nullptr;
  const std::size_t K = train.num_classes;
  SampleFn fn = [&, keep](std::size_t, const Sample& s, const Network& snap) {
    const LossTarget target = LossTarget::one_hot(s.y, K);
    SampleStep st = sgd_sample(snap, s.x, target, LossKind::ce);
    if (keep) st.target = target;
    return st;
  };
  return run_trainer(std::move(net), train, test, cfg, fn, nullptr, 0.0, obs);
}

TrainReport train_adv(Network net, const Dataset& train, const Dataset* test,
                      const TrainConfig& cfg, double eps_fixed, TrainObserver* obs) {
  if (!(eps_fixed >= 0.0)) throw ConfigError("eps_fixed must be >= 0");
  const bool keep = obs != nullptr;
  const std::size_t K = train.num_classes;
  const AttackSpec spec = train_attack(cfg, train, eps_fixed, LossKind::ce);
  SampleFn fn = [&, keep](std::size_t epoch, const Sample& s, const Network& snap) {
    LossTarget target = LossTarget::one_hot(s.y, K);
    if (cfg.label_smoothing) {
      Rng urng = make_stream(cfg.seed, "dirichlet-train", epoch, s.id);
      target.dist = smooth_label(s.y, K, eps_fixed, cfg.c, sample_dirichlet_uniform(K, urng)).dist;
    }
    Rng rng = make_stream(cfg.seed, "train-attack", epoch, s.id);
    AdvExample adv = pgd(snap, s.x, target, spec, rng);
    SampleStep st = sgd_sample(snap, adv.x_adv, target, LossKind::ce);
    if (keep) {
      st.target = target;
      st.adv = std::move(adv);
      st.eps = eps_fixed;
    }
    return st;
  };
  return run_trainer(std::move(net), train, test, cfg, fn, nullptr, eps_fixed, obs);
}

TrainReport train_trades(Network net, const Dataset& train, const Dataset* test,
                         const TrainConfig& cfg, TrainObserver* obs) {
  const bool keep = obs != nullptr;
  const std::size_t K = train.num_classes;
  AttackSpec spec = train_attack(cfg, train, cfg.eps, LossKind::kl);
  spec.random_start = true;  // KL has a zero gradient at delta = 0
  SampleFn fn = [&, keep](std::size_t epoch, const Sample& s, const Network& snap) {
    const LossTarget onehot = LossTarget::one_hot(s.y, K);
    const ForwardTrace clean = forward(snap, s.x);
    LossTarget kl_target;
    kl_target.dist = clean.probs;
    kl_target.label = s.y;
    Rng rng = make_stream(cfg.seed, "trades-start", epoch, s.id);
    AdvExample adv = pgd(snap, s.x, kl_target, spec, rng);
    const ForwardTrace adv_tr = forward(snap, adv.x_adv);

    // CE(clean, y) + beta * KL(p_clean || p_adv), differentiated through both
    // arguments.
    const double kl = kl_divergence(clean.probs, adv_tr.probs);
    Vector r = clean.log_probs - adv_tr.log_probs.cwiseMax(std::log(kLogFloor));
    Vector clean_grad = loss_logit_gradient(LossKind::ce, clean, onehot);
    clean_grad += cfg.beta * clean.probs.cwiseProduct(
                                 (r.array() - clean.probs.dot(r)).matrix());
    const Vector adv_grad = cfg.beta * (adv_tr.probs - clean.probs);

    SampleStep st;
    st.loss = loss_value(LossKind::ce, clean, onehot) + cfg.beta * kl;
    st.grad = backprop_logits(snap, clean, clean_grad, false);
    st.grad.add(backprop_logits(snap, adv_tr, adv_grad, false));
    if (keep) {
      st.target = onehot;
      st.adv = std::move(adv);
      st.eps = cfg.eps;
    }
    return st;
  };
  return run_trainer(std::move(net), train, test, cfg, fn, nullptr, cfg.eps, obs);
}

TrainReport train_cat(Network net, const Dataset& train, const Dataset* test,
                      const TrainConfig& cfg, TrainObserver* obs) {
  const bool keep = obs != nullptr;
  const std::size_t K = train.num_classes;
  const LossKind kind = cfg.loss == CatLoss::ce ? LossKind::ce : LossKind::mix;
  EpsilonLedger ledger(train.id_span(), cfg.eta, cfg.eps_max);
  const EpsilonLedger* view = &ledger;
  SampleFn fn = [&, keep](std::size_t epoch, const Sample& s, const Network& snap) {
    const double eps_before = view->eps(s.id);

    // label for the attack: smoothed at the pre-increment budget
    Rng u_attack = make_stream(cfg.seed, "dirichlet-attack", epoch, s.id);
    LossTarget attack_target;
    attack_target.dist =
        smooth_label(s.y, K, eps_before, cfg.c, sample_dirichlet_uniform(K, u_attack)).dist;
    attack_target.label = s.y;
    attack_target.kappa = cfg.kappa;

    const double eps_try = view->tentative(s.id);
    const AttackSpec spec = train_attack(cfg, train, eps_try, kind);
    Rng rng = make_stream(cfg.seed, "train-attack", epoch, s.id);
    AdvExample adv = pgd(snap, s.x, attack_target, spec, rng);

    // success is judged against the true label
    const bool succeeded = adv.success;
    const double eps_after =
        std::min(cfg.eps_max, succeeded ? eps_before : eps_before + cfg.eta);

    Rng u_train = make_stream(cfg.seed, "dirichlet-train", epoch, s.id);
    LossTarget target;
    target.dist =
        smooth_label(s.y, K, eps_after, cfg.c, sample_dirichlet_uniform(K, u_train)).dist;
    target.label = s.y;
    target.kappa = cfg.kappa;

    SampleStep st = sgd_sample(snap, adv.x_adv, target, kind);
    st.attack_succeeded = succeeded;
    if (keep) {
      st.target = target;
      st.adv = std::move(adv);
      st.eps = eps_try;
    }
    return st;
  };
  // Ledger updates are committed after each batch, so every sample in a batch
  // reads the pre-batch budget.
  return run_trainer(std::move(net), train, test, cfg, fn, &ledger, cfg.eps_max, obs);
}

TrainReport train(Network net, const Dataset& train_set, const Dataset* test,
                  const TrainConfig& cfg, TrainObserver* obs) {
  switch (cfg.trainer) {
    case TrainerKind::natural: return train_natural(std::move(net), train_set, test, cfg, obs);
    case TrainerKind::adv: return train_adv(std::move(net), train_set, test, cfg, cfg.eps, obs);
    case TrainerKind::trades: return train_trades(std::move(net), train_set, test, cfg, obs);
    case TrainerKind::cat: return train_cat(std::move(net), train_set, test, cfg, obs);
  }
  throw ConfigError("unknown trainer");
}

std::string metrics_csv(const std::vector<EpochMetrics>& epochs) {
  std::ostringstream out;
  out.precision(17);
  out << "epoch,clean_train_acc,clean_test_acc,mean_eps,mean_loss\n";
  for (const EpochMetrics& m : epochs)
    out << m.epoch << ',' << m.clean_train_acc << ',' << m.clean_test_acc << ',' << m.mean_eps
        << ',' << m.mean_loss << '\n';
  return out.str();
}

}  // namespace catlab
