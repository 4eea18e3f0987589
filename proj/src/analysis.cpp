#include "catlab/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>
#include <sstream>

#include "catlab/errors.hpp"
#include "catlab/losses.hpp"
#include "catlab/rng.hpp"

namespace catlab {

AttackSpec EvalOptions::spec(double eps, LossKind loss) const {
  AttackSpec s;
  s.eps = eps;
  s.steps = steps;
  s.step_size = eps > 0.0 ? step_ratio * eps : 1e-4;
  s.random_start = random_start;
  s.loss = loss;
  s.kappa = cw_kappa;
  return s;
}

RobustCurve robust_curve(const Network& net, const Dataset& ds, const std::vector<double>& eps_grid,
                         const EvalOptions& opts) {
  if (eps_grid.empty() || eps_grid.front() != 0.0)
    throw ConfigError("eps grid must start at 0");
  if (!std::is_sorted(eps_grid.begin(), eps_grid.end()))
    throw ConfigError("eps grid must be ascending");
  RobustCurve c;
  c.eps_grid = eps_grid;
  c.clean_acc = opts.exec == Exec::parallel ? accuracy(net, ds) : accuracy_serial(net, ds);
  for (double eps : eps_grid) {
    if (eps == 0.0) {
      c.pgd_acc.push_back(c.clean_acc);
      c.cw_acc.push_back(c.clean_acc);
      continue;
    }
    AttackSpec pgd_spec = opts.spec(eps, LossKind::ce);
    AttackSpec cw_spec = opts.spec(eps, LossKind::cw_margin);
    pgd_spec.with_domain(ds);
    cw_spec.with_domain(ds);
    c.pgd_acc.push_back(robust_accuracy(net, ds, pgd_spec, opts.seed, opts.exec));
    c.cw_acc.push_back(robust_accuracy(net, ds, cw_spec, opts.seed, opts.exec));
  }
  return c;
}

std::string curve_csv(const RobustCurve& c) {
  std::ostringstream out;
  out.precision(17);
  out << "eps,pgd_acc,cw_acc\n";
  for (std::size_t i = 0; i < c.eps_grid.size(); ++i)
    out << c.eps_grid[i] << ',' << c.pgd_acc[i] << ',' << c.cw_acc[i] << '\n';
  return out.str();
}

LandscapeGrid landscape_grid(const Network& net, const Vector& x, std::size_t y, double extent,
                             std::size_t grid_size, std::uint64_t seed) {
  if (grid_size == 0 || grid_size % 2 == 0)
    throw ConfigError("landscape grid size must be odd so the center is the clean point");
  if (!(extent >= 0.0)) throw ConfigError("landscape extent must be >= 0");
  const LossTarget target = LossTarget::one_hot(y, net.num_classes());
  LandscapeGrid g;
  g.grid_size = grid_size;
  g.seed = seed;
  double clean = 0.0;
  const Vector grad = input_gradient(net, x, target, LossKind::ce, &clean);
  g.clean_loss = clean;
  g.u = grad.unaryExpr([](double v) { return v > 0.0 ? 1.0 : (v < 0.0 ? -1.0 : 0.0); });
  Rng rng = make_stream(seed, "rademacher");
  g.v.resize(x.size());
  for (Eigen::Index j = 0; j < x.size(); ++j) g.v[j] = (rng() & 1ULL) ? 1.0 : -1.0;
  for (std::size_t i = 0; i < grid_size; ++i) {
    const double t = grid_size == 1
                         ? 0.0
                         : static_cast<double>(2 * i) / static_cast<double>(grid_size - 1) - 1.0;
    g.u_magnitudes.push_back(extent * t);
  }
  g.v_magnitudes = g.u_magnitudes;
  g.loss.resize(grid_size * grid_size);
  for (std::size_t i = 0; i < grid_size; ++i) {
    for (std::size_t j = 0; j < grid_size; ++j) {
      const Vector p = x + g.u_magnitudes[i] * g.u + g.v_magnitudes[j] * g.v;
      g.loss[i * grid_size + j] = loss_value(LossKind::ce, forward(net, p), target);
    }
  }
  return g;
}

double complexity_proxy(const Network& net) {
  double c = 1.0;
  for (const Layer& l : net.layers()) c *= l.weight.norm();
  return c;
}

Vector bilateral_output(const Network& net, const Vector& x, const Vector& d_in,
                        const Vector& d_out) {
  const Vector z = x + d_in * x.norm();
  return forward(net, z).probs + d_out * z.norm();
}

namespace {

// Margin search over the input-side perturbation; the output-side
// perturbation is solved in closed form: to lift class j over y it needs
// d_out_j - d_out_y >= (p_y - p_j) / s, whose minimum-norm solution has norm
// (p_y - p_j) / (sqrt(2) s), where s = ||x + d_in ||x|| ||.
struct MarginProblem {
  const Network& net;
  const Vector& x;
  std::size_t y;
  double xnorm;

  double rho(const Vector& d_in, Vector* grad) const {
    const Vector z = x + d_in * xnorm;
    const ForwardTrace t = forward(net, z);
    if (t.predicted() != y) {
      if (grad) *grad = Vector::Zero(d_in.size());
      return 0.0;
    }
    const double s = z.norm();
    if (s == 0.0) {
      if (grad) *grad = Vector::Zero(d_in.size());
      return std::numeric_limits<double>::infinity();
    }
    const std::size_t j = cw_runner_up(t.logits, y);
    const auto yi = static_cast<Eigen::Index>(y);
    const auto ji = static_cast<Eigen::Index>(j);
    const double gap = t.probs[yi] - t.probs[ji];
    const double r = gap / (std::numbers::sqrt2 * s);
    if (grad) {
      // d(p_y - p_j)/d logits = p (e_y - e_j) - p gap
      Vector gl = -gap * t.probs;
      gl[yi] += t.probs[yi];
      gl[ji] -= t.probs[ji];
      const Vector gz = input_gradient_from_logits(net, t, gl);
      const Vector drho_dz = gz / (std::numbers::sqrt2 * s) - (r / (s * s)) * z;
      *grad = xnorm * drho_dz;
    }
    return r;
  }

  double phi2(const Vector& d, Vector* grad) const {
    Vector g_rho;
    const double r = rho(d, grad ? &g_rho : nullptr);
    if (grad) *grad = 2.0 * d + 2.0 * r * g_rho;
    return d.squaredNorm() + r * r;
  }
};

struct SearchResult {
  double phi = std::numeric_limits<double>::infinity();
  Vector d;
};

Vector project_ball(Vector d, double r) {
  const double n = d.norm();
  if (n > r && n > 0.0) d *= r / n;
  return d;
}

SearchResult search_ball(const MarginProblem& prob, double r, const MarginOptions& opts, Rng& rng) {
  const auto dim = prob.x.size();
  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<std::pair<double, Vector>> pool;
  pool.emplace_back(prob.phi2(Vector::Zero(dim), nullptr), Vector::Zero(dim));
  for (std::size_t k = 0; k < opts.random_samples; ++k) {
    Vector d(dim);
    for (Eigen::Index j = 0; j < dim; ++j) d[j] = normal(rng);
    const double n = d.norm();
    if (n == 0.0) continue;
    const double radius = r * std::pow(uniform01(rng), 1.0 / static_cast<double>(dim));
    d *= radius / n;
    pool.emplace_back(prob.phi2(d, nullptr), std::move(d));
  }
  const std::size_t keep = std::min(pool.size(), opts.refine_starts + 1);
  std::partial_sort(pool.begin(), pool.begin() + static_cast<std::ptrdiff_t>(keep), pool.end(),
                    [](const auto& a, const auto& b) { return a.first < b.first; });
  SearchResult best{std::sqrt(pool.front().first), pool.front().second};
  for (std::size_t k = 0; k < keep; ++k) {
    Vector d = pool[k].second;
    Vector g;
    double f = prob.phi2(d, &g);
    double step = std::max(r, 1e-6);
    for (int it = 0; it < opts.refine_steps && step > 1e-12; ++it) {
      const Vector cand = project_ball(d - step * g, r);
      Vector g2;
      const double f2 = prob.phi2(cand, &g2);
      if (f2 < f) {
        d = cand;
        f = f2;
        g = std::move(g2);
        step *= 1.5;
      } else {
        step *= 0.5;
      }
    }
    if (std::sqrt(f) < best.phi) best = {std::sqrt(f), d};
  }
  return best;
}

}  // namespace

double min_output_flip_norm(const Network& net, const Vector& x, std::size_t y,
                            const Vector& d_in) {
  const MarginProblem prob{net, x, y, x.norm()};
  return prob.rho(d_in, nullptr);
}

MarginEstimate estimate_bilateral_margin(const Network& net, const Vector& x, std::size_t y,
                                         const MarginOptions& opts, std::size_t id) {
  if (static_cast<std::size_t>(x.size()) != net.input_dim())
    throw DimensionError("margin input has the wrong dimension");
  if (y >= net.num_classes()) throw DimensionError("margin label out of range");
  if (x.norm() == 0.0)
    throw PreconditionError("bilateral margin is undefined at x = 0 (relative input perturbation)");
  if (!(opts.tol > 0.0)) throw ConfigError("margin tolerance must be positive");
  MarginEstimate est;
  est.id = id;
  if (predict(net, x) != y) return est;  // constraint already satisfied

  const MarginProblem prob{net, x, y, x.norm()};
  double hi = prob.rho(Vector::Zero(x.size()), nullptr);  // d_in = 0 always flips at this radius
  double lo = 0.0;
  std::vector<double> failed{0.0};
  std::uint64_t round = 0;
  auto search = [&](double r) {
    Rng rng = make_stream(opts.seed, "margin", id, round++);
    return search_ball(prob, r, opts, rng);
  };

  if (hi > opts.cap) {
    const SearchResult at_cap = search(opts.cap);
    if (at_cap.phi > opts.cap) {
      est.m_f = est.certified_lower = est.attack_upper = opts.cap;
      est.capped = true;
      return est;
    }
    hi = at_cap.phi;
  }
  {
    const SearchResult global = search(hi);
    hi = std::min(hi, global.phi);
  }
  while (hi - lo > opts.tol) {
    const double mid = 0.5 * (lo + hi);
    const SearchResult res = search(mid);
    if (res.phi <= mid) {
      hi = res.phi;
      if (hi < lo) {
        // an earlier failed search was incomplete; fall back to the largest
        // failed radius still below the new flip
        double keep = 0.0;
        for (double f : failed)
          if (f <= hi) keep = std::max(keep, f);
        lo = keep;
      }
    } else {
      lo = mid;
      failed.push_back(mid);
    }
  }
  est.certified_lower = lo;
  est.attack_upper = hi;
  est.m_f = hi;
  return est;
}

BoundReport bound_terms_from(const Network& net, std::vector<MarginEstimate> margins) {
  BoundReport r;
  r.complexity = complexity_proxy(net);
  double sum = 0.0;
  for (const MarginEstimate& m : margins) {
    if (m.m_f > 0.0) {
      sum += 1.0 / m.m_f;
      ++r.n;
    } else {
      ++r.excluded;
    }
  }
  if (r.n == 0)
    throw PreconditionError(
        "bound terms require training error 0: every sample is misclassified (m_F = 0)");
  r.mean_inverse_margin = sum / static_cast<double>(r.n);
  r.margins = std::move(margins);
  return r;
}

BoundReport bound_terms(const Network& net, const Dataset& ds, const MarginOptions& opts,
                        Exec exec) {
  std::vector<MarginEstimate> margins = map_indices<MarginEstimate>(
      ds.size(),
      [&](std::size_t i) {
        const Sample& s = ds.samples[i];
        return estimate_bilateral_margin(net, s.x, s.y, opts, s.id);
      },
      exec);
  return bound_terms_from(net, std::move(margins));
}

}  // namespace catlab
