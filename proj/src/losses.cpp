#include "catlab/losses.hpp"

#include <algorithm>
#include <cmath>

#include "catlab/errors.hpp"

namespace catlab {
namespace {

const double kLogOfFloor = std::log(kLogFloor);

double floored_log(double p) { return std::log(std::max(p, kLogFloor)); }

// -sum t_k max(logp_k, log floor), gradient p * sum(t over unfloored) - t on
// unfloored coordinates.
double ce_from_log_probs(const Vector& log_probs, const Vector& target) {
  double s = 0.0;
  for (Eigen::Index k = 0; k < target.size(); ++k) {
    if (target[k] == 0.0) continue;
    s -= target[k] * std::max(log_probs[k], kLogOfFloor);
  }
  return s;
}

Vector ce_logit_gradient(const ForwardTrace& t, const Vector& target) {
  double mass = 0.0;
  Vector g = Vector::Zero(t.logits.size());
  for (Eigen::Index k = 0; k < target.size(); ++k) {
    if (t.log_probs[k] > kLogOfFloor) {
      mass += target[k];
      g[k] -= target[k];
    }
  }
  g += mass * t.probs;
  return g;
}

void check_classes(const ForwardTrace& t, const LossTarget& target, LossKind kind) {
  if (kind != LossKind::cw_margin && target.dist.size() != t.logits.size())
    throw DimensionError("target distribution size does not match the number of classes");
  if ((kind == LossKind::cw_margin || kind == LossKind::mix) && t.logits.size() < 2)
    throw ConfigError("margin loss needs at least 2 classes");
  if (static_cast<Eigen::Index>(target.label) >= t.logits.size())
    throw DimensionError("label out of range");
}

}  // namespace

double cross_entropy(const Vector& probs, const Vector& target) {
  if (probs.size() != target.size()) throw DimensionError("cross_entropy size mismatch");
  double s = 0.0;
  for (Eigen::Index k = 0; k < probs.size(); ++k)
    if (target[k] != 0.0) s -= target[k] * floored_log(probs[k]);
  return s;
}

double kl_divergence(const Vector& p, const Vector& q) {
  if (p.size() != q.size()) throw DimensionError("kl_divergence size mismatch");
  double s = 0.0;
  for (Eigen::Index k = 0; k < p.size(); ++k)
    if (p[k] > 0.0) s += p[k] * (std::log(p[k]) - floored_log(q[k]));
  return s;
}

std::size_t cw_runner_up(const Vector& logits, std::size_t y0) {
  std::size_t best = (y0 == 0) ? 1 : 0;
  for (Eigen::Index i = 0; i < logits.size(); ++i) {
    const auto iu = static_cast<std::size_t>(i);
    if (iu == y0) continue;
    if (logits[i] > logits[static_cast<Eigen::Index>(best)]) best = iu;
  }
  return best;
}

double cw_margin_loss(const Vector& logits, std::size_t y0, double kappa) {
  if (logits.size() < 2) throw ConfigError("margin loss needs at least 2 classes");
  const std::size_t j = cw_runner_up(logits, y0);
  const double gap =
      logits[static_cast<Eigen::Index>(j)] - logits[static_cast<Eigen::Index>(y0)];
  return std::max(gap, -kappa);
}

double loss_value(LossKind kind, const ForwardTrace& t, const LossTarget& target) {
  check_classes(t, target, kind);
  switch (kind) {
    case LossKind::ce:
      return ce_from_log_probs(t.log_probs, target.dist);
    case LossKind::kl: {
      double s = 0.0;
      for (Eigen::Index k = 0; k < target.dist.size(); ++k) {
        const double p = target.dist[k];
        if (p > 0.0) s += p * (std::log(p) - std::max(t.log_probs[k], kLogOfFloor));
      }
      return s;
    }
    case LossKind::cw_margin:
      return cw_margin_loss(t.logits, target.label, target.kappa);
    case LossKind::mix:
      return ce_from_log_probs(t.log_probs, target.dist) +
             cw_margin_loss(t.logits, target.label, target.kappa);
  }
  return 0.0;
}

Vector loss_logit_gradient(LossKind kind, const ForwardTrace& t, const LossTarget& target) {
  check_classes(t, target, kind);
  auto margin_grad = [&] {
    Vector g = Vector::Zero(t.logits.size());
    const std::size_t j = cw_runner_up(t.logits, target.label);
    const auto y = static_cast<Eigen::Index>(target.label);
    const double gap = t.logits[static_cast<Eigen::Index>(j)] - t.logits[y];
    if (gap > -target.kappa) {
      g[static_cast<Eigen::Index>(j)] += 1.0;
      g[y] -= 1.0;
    }
    return g;
  };
  switch (kind) {
    case LossKind::ce:
    case LossKind::kl:
      // KL(target || p) differs from CE(p, target) by the target entropy only.
      return ce_logit_gradient(t, target.dist);
    case LossKind::cw_margin:
      return margin_grad();
    case LossKind::mix:
      return ce_logit_gradient(t, target.dist) + margin_grad();
  }
  return Vector::Zero(t.logits.size());
}

Vector sample_dirichlet_uniform(std::size_t num_classes, Rng& rng) {
  if (num_classes < 2) throw ConfigError("Dirichlet draw needs K >= 2");
  Vector u(static_cast<Eigen::Index>(num_classes));
  double total = 0.0;
  do {
    for (Eigen::Index k = 0; k < u.size(); ++k) {
      u[k] = -std::log1p(-uniform01(rng));
    }
    total = u.sum();
  } while (!(total > 0.0));
  return u / total;
}

SmoothedLabel smooth_label(std::size_t y, std::size_t num_classes, double eps, double c,
                           const Vector& u) {
  if (static_cast<std::size_t>(u.size()) != num_classes)
    throw DimensionError("smoothing draw has the wrong number of classes");
  if (y >= num_classes) throw DimensionError("label out of range");
  SmoothedLabel s;
  s.source_class = y;
  s.eps_used = eps;
  s.c = c;
  s.u = u;
  double w = c * eps;
  if (w > 1.0) {
    w = 1.0;
    s.saturated = true;
  }
  w = std::max(w, 0.0);
  s.dist = w * u;
  s.dist[static_cast<Eigen::Index>(y)] += 1.0 - w;
  return s;
}

double mixed_loss(const ForwardTrace& trace, const SmoothedLabel& smoothed, std::size_t y0,
                  double kappa) {
  return cross_entropy(trace.probs, smoothed.dist) + cw_margin_loss(trace.logits, y0, kappa);
}

}  // namespace catlab
