#include "catlab/kernels.hpp"

#include "catlab/errors.hpp"

namespace catlab {
namespace {

double fraction(const std::vector<char>& hits) {
  if (hits.empty()) return 0.0;
  std::size_t n = 0;
  for (char h : hits) n += h ? 1 : 0;
  return static_cast<double>(n) / static_cast<double>(hits.size());
}

std::vector<AdvExample> attack_dataset_impl(const Network& net, const Dataset& ds,
                                            const AttackSpec& spec, std::uint64_t seed,
                                            Exec exec) {
  return map_indices<AdvExample>(
      ds.size(),
      [&](std::size_t i) { return pgd_for_sample(net, ds.samples[i], ds.num_classes, spec, seed); },
      exec);
}

}  // namespace

double accuracy(const Network& net, const Dataset& ds) {
  std::vector<char> hits(ds.size());
  const auto n = static_cast<std::ptrdiff_t>(ds.size());
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    const Sample& s = ds.samples[static_cast<std::size_t>(i)];
    hits[static_cast<std::size_t>(i)] = predict(net, s.x) == s.y;
  }
  return fraction(hits);
}

double accuracy_serial(const Network& net, const Dataset& ds) {
  std::vector<char> hits(ds.size());
  for (std::size_t i = 0; i < ds.size(); ++i)
    hits[i] = predict(net, ds.samples[i].x) == ds.samples[i].y;
  return fraction(hits);
}

std::vector<AdvExample> attack_dataset(const Network& net, const Dataset& ds,
                                       const AttackSpec& spec, std::uint64_t seed) {
  return attack_dataset_impl(net, ds, spec, seed, Exec::parallel);
}

std::vector<AdvExample> attack_dataset_serial(const Network& net, const Dataset& ds,
                                              const AttackSpec& spec, std::uint64_t seed) {
  return attack_dataset_impl(net, ds, spec, seed, Exec::serial);
}

double accuracy_on(const Network& net, const Dataset& ds, const std::vector<AdvExample>& advs) {
  if (advs.size() != ds.size()) throw DimensionError("one adversarial example per sample needed");
  std::vector<char> hits(ds.size());
  for (std::size_t i = 0; i < ds.size(); ++i)
    hits[i] = predict(net, advs[i].x_adv) == ds.samples[i].y;
  return fraction(hits);
}

double robust_accuracy(const Network& net, const Dataset& ds, const AttackSpec& spec,
                       std::uint64_t seed, Exec exec) {
  const std::vector<AdvExample> advs = attack_dataset_impl(net, ds, spec, seed, exec);
  std::vector<char> hits(ds.size());
  for (std::size_t i = 0; i < ds.size(); ++i) hits[i] = !advs[i].success;
  return fraction(hits);
}

GradientBundle summed_gradients(const Network& net, const std::vector<Vector>& xs,
                                const std::vector<LossTarget>& targets, LossKind kind,
                                Exec exec) {
  if (xs.size() != targets.size()) throw DimensionError("one target per input needed");
  const std::vector<GradientBundle> parts = map_indices<GradientBundle>(
      xs.size(), [&](std::size_t i) { return backward(net, forward(net, xs[i]), targets[i], kind, false); },
      exec);
  GradientBundle total = GradientBundle::zeros_like(net);
  for (const GradientBundle& g : parts) total.add(g);
  return total;
}

}  // namespace catlab
