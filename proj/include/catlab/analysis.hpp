#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "catlab/attacks.hpp"
#include "catlab/data.hpp"
#include "catlab/kernels.hpp"
#include "catlab/net.hpp"

namespace catlab {

struct EvalOptions {
  int steps = 20;
  double step_ratio = 0.2;  // step size = ratio * eps
  bool random_start = true;
  double cw_kappa = kNoFloor;
  std::uint64_t seed = 0;
  Exec exec = Exec::parallel;

  AttackSpec spec(double eps, LossKind loss) const;
};

struct RobustCurve {
  std::vector<double> eps_grid;
  std::vector<double> pgd_acc;
  std::vector<double> cw_acc;
  double clean_acc = 0.0;
};

/// PGD and margin-loss PGD robust accuracy at each eps. The grid must be
/// ascending and start at 0; the eps = 0 entry is the clean accuracy.
RobustCurve robust_curve(const Network& net, const Dataset& ds, const std::vector<double>& eps_grid,
                         const EvalOptions& opts = {});

std::string curve_csv(const RobustCurve& c);

struct LandscapeGrid {
  std::size_t grid_size = 0;
  std::vector<double> u_magnitudes;  // a axis
  std::vector<double> v_magnitudes;  // b axis
  std::vector<double> loss;          // loss[i * grid_size + j] at (a_i, b_j)
  Vector u;                          // sign of the input gradient of CE
  Vector v;                          // Rademacher direction
  std::uint64_t seed = 0;
  double clean_loss = 0.0;

  double at(std::size_t i, std::size_t j) const { return loss[i * grid_size + j]; }
};

/// CE loss at x + a u + b v over an odd grid spanning [-extent, extent].
LandscapeGrid landscape_grid(const Network& net, const Vector& x, std::size_t y, double extent,
                             std::size_t grid_size, std::uint64_t seed);

/// Product over layers of the Frobenius norm of the weight matrix.
double complexity_proxy(const Network& net);

struct MarginOptions {
  double tol = 1e-3;
  std::size_t random_samples = 512;  // uniform draws in the radius-r ball per feasibility check
  std::size_t refine_starts = 4;     // best random draws refined by projected descent
  int refine_steps = 60;
  double cap = 1e3;                  // largest radius searched
  std::uint64_t seed = 0;
};

struct MarginEstimate {
  std::size_t id = 0;
  double m_f = 0.0;
  double certified_lower = 0.0;
  double attack_upper = 0.0;
  bool capped = false;  // no flip found up to opts.cap
};

/// Softmax outputs perturbed on both sides of the network:
/// h(x + d_in ||x||) + d_out ||x + d_in ||x|| ||.
Vector bilateral_output(const Network& net, const Vector& x, const Vector& d_in,
                        const Vector& d_out);

/// Smallest output perturbation norm that flips the prediction away from y
/// for a fixed input perturbation (0 if already flipped).
double min_output_flip_norm(const Network& net, const Vector& x, std::size_t y,
                            const Vector& d_in);

/// Brackets the bilateral margin by bisection on the joint radius.
/// attack_upper is the smallest radius at which the search found a flipping
/// (d_in, d_out); certified_lower is the largest radius at which it found
/// none. m_f = attack_upper.
MarginEstimate estimate_bilateral_margin(const Network& net, const Vector& x, std::size_t y,
                                         const MarginOptions& opts = {}, std::size_t id = 0);

struct BoundReport {
  double complexity = 0.0;
  double mean_inverse_margin = 0.0;  // (1/n) sum 1/m_F over samples with m_F > 0
  std::size_t n = 0;                 // samples entering the average
  std::size_t excluded = 0;          // samples with m_F = 0
  std::vector<MarginEstimate> margins;
};

/// Throws PreconditionError when no sample has a positive margin.
BoundReport bound_terms(const Network& net, const Dataset& ds, const MarginOptions& opts = {},
                        Exec exec = Exec::parallel);

/// Same terms from already estimated margins.
BoundReport bound_terms_from(const Network& net, std::vector<MarginEstimate> margins);

}  // namespace catlab
