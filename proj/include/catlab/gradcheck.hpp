#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <map>
#include <string>

#include "catlab/net.hpp"

namespace catlab {

using BackwardFn = std::function<GradientBundle(const Network&, const ForwardTrace&,
                                                const LossTarget&, LossKind)>;

struct GradCheckResult {
  double max_relative_error = 0.0;
  std::string worst;  // e.g. "layer1.weight[2,0]" or "input[1]"
  double worst_analytic = 0.0;
  double worst_numeric = 0.0;
};

/// Max over all parameters and input coordinates of
/// |analytic - central difference| / max(|analytic|, |numeric|, 1e-12).
/// The numeric side only evaluates forward() and the loss value.
GradCheckResult grad_check(const Network& net, const Vector& x, const LossTarget& target,
                           LossKind kind, double step = 1e-5, const BackwardFn& backward_fn = {});

/// True when a central difference of the given step could straddle a kink:
/// a ReLU pre-activation, a runner-up tie in the margin term, or the -kappa
/// floor lies within `tol`.
bool near_kink(const Network& net, const Vector& x, const LossTarget& target, LossKind kind,
               double tol);

struct GradcheckSuiteOptions {
  std::size_t fixtures = 50;  // per loss kind
  std::uint64_t seed = 0;
  double threshold = 1e-4;
  double step = 1e-5;
  double kink_tol = 1e-3;
};

struct GradcheckKindReport {
  double max_relative_error = 0.0;
  std::string worst;
  std::size_t fixtures = 0;
  std::size_t resampled = 0;  // fixtures redrawn because they sat near a kink
  bool passed = true;
};

struct GradcheckSuiteReport {
  std::map<std::string, GradcheckKindReport> kinds;
  bool passed = true;
};

/// Random small networks, inputs and targets for every loss kind.
GradcheckSuiteReport run_gradcheck_suite(const GradcheckSuiteOptions& opts,
                                         const BackwardFn& backward_fn = {});

}  // namespace catlab
