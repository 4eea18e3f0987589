#pragma once

// Per-sample data-parallel kernels. Every kernel has an OpenMP version and a
// serial reference twin; both write results into per-index slots and reduce
// in index order, so they agree bit-for-bit for any thread count.

#include <cstddef>
#include <cstdint>
#include <exception>
#include <vector>

#include "catlab/attacks.hpp"
#include "catlab/data.hpp"
#include "catlab/net.hpp"

namespace catlab {

enum class Exec { serial, parallel };

template <typename T, typename Fn>
std::vector<T> map_indices(std::size_t n, Fn&& fn, Exec exec = Exec::parallel) {
  std::vector<T> out(n);
  if (exec == Exec::parallel) {
    // exceptions must not cross the parallel region; the first one is
    // rethrown after the join
    std::exception_ptr error;
    const auto count = static_cast<std::ptrdiff_t>(n);
#pragma omp parallel for schedule(dynamic, 4)
    for (std::ptrdiff_t i = 0; i < count; ++i) {
      try {
        out[static_cast<std::size_t>(i)] = fn(static_cast<std::size_t>(i));
      } catch (...) {
#pragma omp critical(catlab_map_error)
        if (!error) error = std::current_exception();
      }
    }
    if (error) std::rethrow_exception(error);
  } else {
    for (std::size_t i = 0; i < n; ++i) out[i] = fn(i);
  }
  return out;
}

/// Clean accuracy over a dataset.
double accuracy(const Network& net, const Dataset& ds);
double accuracy_serial(const Network& net, const Dataset& ds);

/// PGD against every sample (one-hot target on the true label), each sample
/// drawing its random start from its own (seed, id) stream.
std::vector<AdvExample> attack_dataset(const Network& net, const Dataset& ds,
                                       const AttackSpec& spec, std::uint64_t seed);
std::vector<AdvExample> attack_dataset_serial(const Network& net, const Dataset& ds,
                                              const AttackSpec& spec, std::uint64_t seed);

/// Fraction of samples whose adversarial point `net` classifies correctly.
double accuracy_on(const Network& net, const Dataset& ds, const std::vector<AdvExample>& advs);

/// Robust accuracy: PGD on every sample, then the fraction still correct.
double robust_accuracy(const Network& net, const Dataset& ds, const AttackSpec& spec,
                       std::uint64_t seed, Exec exec = Exec::parallel);

/// Sum of per-sample gradient bundles of `kind` at the given points, reduced
/// in index order. Used by the trainers and by the benchmark.
GradientBundle summed_gradients(const Network& net, const std::vector<Vector>& xs,
                                const std::vector<LossTarget>& targets, LossKind kind,
                                Exec exec = Exec::parallel);

}  // namespace catlab
