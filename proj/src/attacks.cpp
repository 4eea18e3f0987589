#include "catlab/attacks.hpp"

#include <algorithm>
#include <cmath>

#include "catlab/errors.hpp"
#include "catlab/kernels.hpp"
#include "catlab/losses.hpp"

namespace catlab {
namespace {

Vector sign_of(const Vector& g) {
  return g.unaryExpr([](double v) { return v > 0.0 ? 1.0 : (v < 0.0 ? -1.0 : 0.0); });
}

struct Projector {
  const Vector& x;
  const AttackSpec& spec;

  // Projects delta onto the eps-ball, then the domain; returns x_adv.
  Vector operator()(Vector& delta) const {
    delta = delta.cwiseMax(-spec.eps).cwiseMin(spec.eps);
    Vector x_adv = x + delta;
    if (spec.clamp_to_domain && spec.domain) {
      x_adv = x_adv.cwiseMax(spec.domain->lo).cwiseMin(spec.domain->hi);
      delta = x_adv - x;
    }
    return x_adv;
  }
};

LossTarget with_kappa(const LossTarget& target, double kappa) {
  LossTarget t = target;
  t.kappa = kappa;
  return t;
}

void check_input(const Network& net, const Vector& x, const LossTarget& target) {
  if (static_cast<std::size_t>(x.size()) != net.input_dim())
    throw DimensionError("attack input has the wrong dimension");
  if (target.label >= net.num_classes()) throw DimensionError("attack label out of range");
}

AdvExample identity_example(const Network& net, const Vector& x, const LossTarget& t,
                            LossKind kind) {
  const ForwardTrace tr = forward(net, x);
  return AdvExample{x, Vector::Zero(x.size()), tr.predicted() != t.label,
                    loss_value(kind, tr, t)};
}

AdvExample finish(const Network& net, Vector x_adv, Vector delta, const LossTarget& t,
                  LossKind kind) {
  const ForwardTrace tr = forward(net, x_adv);
  const double loss = loss_value(kind, tr, t);
  if (!std::isfinite(loss)) throw AttackError("attack produced a non-finite loss");
  return AdvExample{std::move(x_adv), std::move(delta), tr.predicted() != t.label, loss};
}

}  // namespace

void AttackSpec::validate() const {
  if (!(eps >= 0.0) || !std::isfinite(eps)) throw ConfigError("attack eps must be >= 0");
  if (steps < 1) throw ConfigError("attack needs at least one step");
  if (!(step_size > 0.0)) throw ConfigError("attack step size must be positive");
  if (!(kappa >= 0.0)) throw ConfigError("kappa must be >= 0");
}

AttackSpec AttackSpec::evaluation(double eps, LossKind loss, double kappa) {
  AttackSpec s;
  s.eps = eps;
  s.steps = 20;
  s.step_size = eps > 0.0 ? eps / 5.0 : 1e-4;
  s.random_start = true;
  s.loss = loss;
  s.kappa = kappa;
  return s;
}

double training_step_size(double eps, int steps) {
  return std::max(2.5 * eps / static_cast<double>(steps), 1e-4);
}

AttackSpec AttackSpec::training(double eps, int steps, LossKind loss, double kappa) {
  AttackSpec s;
  s.eps = eps;
  s.steps = steps;
  s.step_size = training_step_size(eps, steps);
  s.random_start = false;
  s.loss = loss;
  s.kappa = kappa;
  return s;
}

AttackSpec& AttackSpec::with_domain(const Dataset& ds) {
  domain = ds.bounds;
  clamp_to_domain = ds.bounds.has_value();
  return *this;
}

bool attack_success(const Network& net, const Vector& x_adv, std::size_t y_true) {
  return predict(net, x_adv) != y_true;
}

AdvExample fgsm(const Network& net, const Vector& x, const LossTarget& target,
                const AttackSpec& spec) {
  spec.validate();
  check_input(net, x, target);
  const LossTarget t = with_kappa(target, spec.kappa);
  if (spec.eps == 0.0) return identity_example(net, x, t, spec.loss);
  double loss = 0.0;
  const Vector g = input_gradient(net, x, t, spec.loss, &loss);
  if (!std::isfinite(loss) || !g.allFinite())
    throw AttackError("non-finite loss or gradient in FGSM");
  Vector delta = spec.eps * sign_of(g);
  Vector x_adv = Projector{x, spec}(delta);
  return finish(net, std::move(x_adv), std::move(delta), t, spec.loss);
}

AdvExample pgd(const Network& net, const Vector& x, const LossTarget& target,
               const AttackSpec& spec, Rng& rng, std::vector<Vector>* iterates) {
  spec.validate();
  check_input(net, x, target);
  const LossTarget t = with_kappa(target, spec.kappa);
  if (spec.eps == 0.0) return identity_example(net, x, t, spec.loss);
  const Projector project{x, spec};
  Vector delta = Vector::Zero(x.size());
  if (spec.random_start) {
    for (Eigen::Index j = 0; j < delta.size(); ++j) delta[j] = spec.eps * uniform(rng, -1.0, 1.0);
  }
  Vector x_adv = project(delta);
  if (iterates) iterates->push_back(delta);
  for (int step = 0; step < spec.steps; ++step) {
    double loss = 0.0;
    const Vector g = input_gradient(net, x_adv, t, spec.loss, &loss);
    if (!std::isfinite(loss) || !g.allFinite())
      throw AttackError("non-finite loss or gradient at PGD step " + std::to_string(step));
    delta += spec.step_size * sign_of(g);
    x_adv = project(delta);
    if (iterates) iterates->push_back(delta);
  }
  return finish(net, std::move(x_adv), std::move(delta), t, spec.loss);
}

Vector random_start_direction(std::uint64_t seed, std::size_t sample_id, std::size_t dim) {
  Rng rng = make_stream(seed, "attack-start", sample_id);
  Vector r(static_cast<Eigen::Index>(dim));
  for (Eigen::Index j = 0; j < r.size(); ++j) r[j] = uniform(rng, -1.0, 1.0);
  return r;
}

AdvExample pgd_for_sample(const Network& net, const Sample& sample, std::size_t num_classes,
                          const AttackSpec& spec, std::uint64_t seed) {
  // pgd() draws its start as eps * uniform(-1, 1) from this stream, which is
  // exactly eps * random_start_direction(seed, id, d).
  Rng rng = make_stream(seed, "attack-start", sample.id);
  return pgd(net, sample.x, LossTarget::one_hot(sample.y, num_classes, spec.kappa), spec, rng);
}

double transfer_attack(const Network& source_net, const Network& target_net,
                       const Dataset& dataset, const AttackSpec& spec, std::uint64_t seed) {
  if (source_net.input_dim() != target_net.input_dim() ||
      source_net.num_classes() != target_net.num_classes())
    throw DimensionError("source and target networks disagree on input dim or classes");
  if (source_net.input_dim() != dataset.dim)
    throw DimensionError("dataset dimension does not match the networks");
  if (dataset.size() == 0) return 0.0;
  const std::vector<AdvExample> advs = attack_dataset(source_net, dataset, spec, seed);
  return accuracy_on(target_net, dataset, advs);
}

}  // namespace catlab
