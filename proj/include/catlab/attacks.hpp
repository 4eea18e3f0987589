#pragma once

#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <vector>

#include "catlab/data.hpp"
#include "catlab/net.hpp"
#include "catlab/rng.hpp"

namespace catlab {

/// Margin floor that never binds. Evaluation uses it because a floor at or
/// above the correct-class gap leaves the ascent with a zero gradient.
inline constexpr double kNoFloor = std::numeric_limits<double>::infinity();

/// l-infinity attack configuration. `loss` selects what the signed-gradient
/// ascent maximises; `kappa` is only read by the margin terms.
struct AttackSpec {
  double eps = 0.0;
  int steps = 20;
  double step_size = 0.0;
  bool random_start = false;
  LossKind loss = LossKind::ce;
  double kappa = 0.0;
  bool clamp_to_domain = false;
  std::optional<Box> domain;

  void validate() const;

  /// 20 steps of size eps/5 from a random start.
  static AttackSpec evaluation(double eps, LossKind loss = LossKind::ce, double kappa = kNoFloor);
  /// Zero start and step max(2.5 eps / m, 1e-4).
  static AttackSpec training(double eps, int steps, LossKind loss = LossKind::ce,
                             double kappa = 0.0);
  AttackSpec& with_domain(const Dataset& ds);
};

double training_step_size(double eps, int steps);

struct AdvExample {
  Vector x_adv;
  Vector delta;
  bool success = false;  // prediction at x_adv differs from the true label
  double loss_achieved = 0.0;

  double linf_norm() const { return delta.size() ? delta.lpNorm<Eigen::Infinity>() : 0.0; }
};

/// true iff argmax logits (lowest-index tie-break) differs from y_true.
bool attack_success(const Network& net, const Vector& x_adv, std::size_t y_true);

AdvExample fgsm(const Network& net, const Vector& x, const LossTarget& target,
                const AttackSpec& spec);

/// Multi-step signed-gradient ascent with projection onto the eps-ball (and
/// the domain, when clamping) after every step. When `iterates` is given the
/// delta after every projection is appended to it.
AdvExample pgd(const Network& net, const Vector& x, const LossTarget& target,
               const AttackSpec& spec, Rng& rng, std::vector<Vector>* iterates = nullptr);

/// Random start direction in [-1,1]^d for a sample; shared across eps values
/// so evaluations at different radii start from proportionally scaled points.
Vector random_start_direction(std::uint64_t seed, std::size_t sample_id, std::size_t dim);

/// PGD whose random start is seed-derived per sample (see above).
AdvExample pgd_for_sample(const Network& net, const Sample& sample, std::size_t num_classes,
                          const AttackSpec& spec, std::uint64_t seed);

/// Fraction of `dataset` that `target_net` still classifies correctly on
/// examples crafted against `source_net`.
double transfer_attack(const Network& source_net, const Network& target_net,
                       const Dataset& dataset, const AttackSpec& spec, std::uint64_t seed);

}  // namespace catlab
