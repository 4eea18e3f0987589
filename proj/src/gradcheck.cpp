#include "catlab/gradcheck.hpp"

#include <cmath>
#include <random>
#include <sstream>
#include <vector>

#include "catlab/losses.hpp"
#include "catlab/rng.hpp"

namespace catlab {
namespace {

double loss_at(const Network& net, const Vector& x, const LossTarget& target, LossKind kind) {
  return loss_value(kind, forward(net, x), target);
}

struct Tracker {
  GradCheckResult r;
  void add(double analytic, double numeric, const std::string& where) {
    const double denom = std::max({std::abs(analytic), std::abs(numeric), 1e-12});
    const double err = std::abs(analytic - numeric) / denom;
    if (err > r.max_relative_error || r.worst.empty()) {
      if (err >= r.max_relative_error) {
        r.max_relative_error = err;
        r.worst = where;
        r.worst_analytic = analytic;
        r.worst_numeric = numeric;
      }
    }
  }
};

}  // namespace

GradCheckResult grad_check(const Network& net, const Vector& x, const LossTarget& target,
                           LossKind kind, double step, const BackwardFn& backward_fn) {
  const ForwardTrace trace = forward(net, x);
  const GradientBundle g = backward_fn ? backward_fn(net, trace, target, kind)
                                       : backward(net, trace, target, kind, true);
  Tracker t;
  Network probe = net;
  for (std::size_t k = 0; k < net.depth(); ++k) {
    Layer& l = probe.layer(k);
    for (Eigen::Index r = 0; r < l.weight.rows(); ++r) {
      for (Eigen::Index c = 0; c < l.weight.cols(); ++c) {
        const double saved = l.weight(r, c);
        l.weight(r, c) = saved + step;
        const double up = loss_at(probe, x, target, kind);
        l.weight(r, c) = saved - step;
        const double down = loss_at(probe, x, target, kind);
        l.weight(r, c) = saved;
        std::ostringstream where;
        where << "layer" << k << ".weight[" << r << ',' << c << ']';
        t.add(g.weight[k](r, c), (up - down) / (2.0 * step), where.str());
      }
    }
    for (Eigen::Index r = 0; r < l.bias.size(); ++r) {
      const double saved = l.bias[r];
      l.bias[r] = saved + step;
      const double up = loss_at(probe, x, target, kind);
      l.bias[r] = saved - step;
      const double down = loss_at(probe, x, target, kind);
      l.bias[r] = saved;
      t.add(g.bias[k][r], (up - down) / (2.0 * step),
            "layer" + std::to_string(k) + ".bias[" + std::to_string(r) + "]");
    }
  }
  if (g.input) {
    Vector xp = x;
    for (Eigen::Index j = 0; j < x.size(); ++j) {
      xp[j] = x[j] + step;
      const double up = loss_at(net, xp, target, kind);
      xp[j] = x[j] - step;
      const double down = loss_at(net, xp, target, kind);
      xp[j] = x[j];
      t.add((*g.input)[j], (up - down) / (2.0 * step), "input[" + std::to_string(j) + "]");
    }
  }
  return t.r;
}

bool near_kink(const Network& net, const Vector& x, const LossTarget& target, LossKind kind,
               double tol) {
  const ForwardTrace tr = forward(net, x);
  for (std::size_t k = 0; k < net.depth(); ++k)
    if (net.layer(k).activation == Activation::relu && (tr.pre[k].array().abs() < tol).any())
      return true;
  if (kind == LossKind::cw_margin || kind == LossKind::mix) {
    const std::size_t j = cw_runner_up(tr.logits, target.label);
    const double zj = tr.logits[static_cast<Eigen::Index>(j)];
    for (Eigen::Index i = 0; i < tr.logits.size(); ++i) {
      const auto iu = static_cast<std::size_t>(i);
      if (iu == j || iu == target.label) continue;
      if (std::abs(tr.logits[i] - zj) < tol) return true;
    }
    const double gap = zj - tr.logits[static_cast<Eigen::Index>(target.label)];
    if (std::abs(gap + target.kappa) < tol) return true;
  }
  return false;
}

namespace {

struct Fixture {
  Network net;
  Vector x;
  LossTarget target;
};

Fixture random_fixture(LossKind kind, Rng& rng) {
  std::uniform_int_distribution<int> dim(2, 6), classes(2, 5), hidden_layers(0, 2), width(3, 8);
  std::normal_distribution<double> normal(0.0, 1.0);
  const auto K = static_cast<std::size_t>(classes(rng));
  std::vector<std::size_t> arch{static_cast<std::size_t>(dim(rng))};
  const int h = hidden_layers(rng);
  for (int i = 0; i < h; ++i) arch.push_back(static_cast<std::size_t>(width(rng)));
  arch.push_back(K);
  Network net = init_network(arch, K, rng());
  for (std::size_t k = 0; k < net.depth(); ++k)
    for (Eigen::Index r = 0; r < net.layer(k).bias.size(); ++r)
      net.layer(k).bias[r] = 0.3 * normal(rng);
  Vector x(static_cast<Eigen::Index>(arch.front()));
  for (Eigen::Index j = 0; j < x.size(); ++j) x[j] = normal(rng);
  std::uniform_int_distribution<std::size_t> label(0, K - 1);
  LossTarget t;
  t.label = label(rng);
  t.kappa = uniform(rng, 0.5, 5.0);
  if (kind == LossKind::cw_margin) {
    t.dist = LossTarget::one_hot(t.label, K).dist;
  } else {
    const double eps = uniform(rng, 0.0, 0.05);
    t.dist = smooth_label(t.label, K, eps, 10.0, sample_dirichlet_uniform(K, rng)).dist;
  }
  return {std::move(net), std::move(x), std::move(t)};
}

}  // namespace

GradcheckSuiteReport run_gradcheck_suite(const GradcheckSuiteOptions& opts,
                                         const BackwardFn& backward_fn) {
  GradcheckSuiteReport report;
  for (LossKind kind : {LossKind::ce, LossKind::kl, LossKind::cw_margin, LossKind::mix}) {
    GradcheckKindReport kr;
    Rng rng = make_stream(opts.seed, "gradcheck", static_cast<std::uint64_t>(kind));
    while (kr.fixtures < opts.fixtures) {
      Fixture f = random_fixture(kind, rng);
      if (near_kink(f.net, f.x, f.target, kind, opts.kink_tol)) {
        ++kr.resampled;
        continue;
      }
      const GradCheckResult r = grad_check(f.net, f.x, f.target, kind, opts.step, backward_fn);
      if (r.max_relative_error >= kr.max_relative_error) {
        kr.max_relative_error = r.max_relative_error;
        kr.worst = "fixture " + std::to_string(kr.fixtures) + " " + r.worst;
      }
      ++kr.fixtures;
    }
    kr.passed = kr.max_relative_error < opts.threshold;
    report.passed = report.passed && kr.passed;
    report.kinds[to_string(kind)] = kr;
  }
  return report;
}

}  // namespace catlab
