#pragma once

#include <cstddef>
#include <vector>

#include "catlab/net.hpp"
#include "catlab/rng.hpp"

namespace catlab {

inline constexpr double kLogFloor = 1e-30;

/// -sum_k target_k log probs_k, with probs floored at 1e-30.
double cross_entropy(const Vector& probs, const Vector& target);

/// sum_k p_k log(p_k / q_k); q floored at 1e-30, terms with p_k = 0 vanish.
double kl_divergence(const Vector& p, const Vector& q);

/// max(max_{i != y0} Z_i - Z_{y0}, -kappa).
double cw_margin_loss(const Vector& logits, std::size_t y0, double kappa);

/// Runner-up class for the margin term: largest logit other than y0, lowest
/// index on ties.
std::size_t cw_runner_up(const Vector& logits, std::size_t y0);

/// Value of the selected loss at a forward trace.
double loss_value(LossKind kind, const ForwardTrace& trace, const LossTarget& target);

/// Gradient of the selected loss with respect to the logits.
Vector loss_logit_gradient(LossKind kind, const ForwardTrace& trace, const LossTarget& target);

/// Uniform draw on the (K-1)-simplex: Dirichlet with all-ones concentration,
/// sampled as K independent Exp(1) variates normalised by their sum.
Vector sample_dirichlet_uniform(std::size_t num_classes, Rng& rng);

struct SmoothedLabel {
  Vector dist;
  std::size_t source_class = 0;
  double eps_used = 0.0;
  double c = 0.0;
  Vector u;
  bool saturated = false;  // c * eps exceeded 1 and was clamped
};

/// (1 - c*eps) onehot(y) + c*eps u, with the weight c*eps clamped to [0, 1].
SmoothedLabel smooth_label(std::size_t y, std::size_t num_classes, double eps, double c,
                           const Vector& u);

/// CE(softmax(Z), smoothed) + cw_margin_loss(Z, y0, kappa).
double mixed_loss(const ForwardTrace& trace, const SmoothedLabel& smoothed, std::size_t y0,
                  double kappa);

}  // namespace catlab
