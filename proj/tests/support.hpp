#pragma once

// Test-side oracles. These recompute losses from probabilities directly so
// that finite-difference checks do not lean on the library's own loss code.

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include "catlab/net.hpp"

namespace catlab::testing {

inline Vector softmax_ref(const Vector& z) {
  Vector e = (z.array() - z.maxCoeff()).exp().matrix();
  return e / e.sum();
}

inline double ref_loss(LossKind kind, const Vector& logits, const LossTarget& t) {
  const Vector p = softmax_ref(logits);
  double ce = 0.0;
  for (Eigen::Index k = 0; k < p.size(); ++k)
    if (t.dist[k] != 0.0) ce -= t.dist[k] * std::log(std::max(p[k], 1e-30));
  double kl = 0.0;
  for (Eigen::Index k = 0; k < p.size(); ++k)
    if (t.dist[k] > 0.0) kl += t.dist[k] * std::log(t.dist[k] / std::max(p[k], 1e-30));
  const auto y = static_cast<Eigen::Index>(t.label);
  double best = -INFINITY;
  for (Eigen::Index k = 0; k < logits.size(); ++k)
    if (k != y) best = std::max(best, logits[k]);
  const double cw = std::max(best - logits[y], -t.kappa);
  switch (kind) {
    case LossKind::ce: return ce;
    case LossKind::kl: return kl;
    case LossKind::cw_margin: return cw;
    case LossKind::mix: return ce + cw;
  }
  return NAN;
}

inline Vector ref_logits(const Network& net, const Vector& x) {
  Vector a = x;
  for (const Layer& l : net.layers()) {
    Vector z = l.weight * a + l.bias;
    a = l.activation == Activation::relu ? Vector(z.cwiseMax(0.0)) : z;
  }
  return a;
}

inline Network random_net(const std::vector<std::size_t>& arch, std::uint64_t seed,
                          double bias_scale = 0.3) {
  Network net = init_network(arch, arch.back(), seed);
  std::mt19937_64 rng(seed ^ 0xb1a5);
  std::normal_distribution<double> n(0.0, 1.0);
  for (std::size_t k = 0; k < net.depth(); ++k)
    for (Eigen::Index r = 0; r < net.layer(k).bias.size(); ++r)
      net.layer(k).bias[r] = bias_scale * n(rng);
  return net;
}

inline Vector random_vector(std::size_t d, std::mt19937_64& rng, double scale = 1.0) {
  std::normal_distribution<double> n(0.0, scale);
  Vector v(static_cast<Eigen::Index>(d));
  for (Eigen::Index i = 0; i < v.size(); ++i) v[i] = n(rng);
  return v;
}

inline Vector random_simplex(std::size_t k, std::mt19937_64& rng) {
  std::exponential_distribution<double> e(1.0);
  Vector v(static_cast<Eigen::Index>(k));
  for (Eigen::Index i = 0; i < v.size(); ++i) v[i] = e(rng);
  return v / v.sum();
}

inline Network single_layer(const Matrix& w, const Vector& b) {
  return Network({Layer{w, b, Activation::identity}});
}

}  // namespace catlab::testing
