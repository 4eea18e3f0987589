// Serial reference kernels against their OpenMP twins on a desk-sized
// workload. Also checks that both produce identical results.

#include <omp.h>

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <vector>

#include "catlab/data.hpp"
#include "catlab/kernels.hpp"
#include "catlab/net.hpp"

using namespace catlab;

namespace {

double seconds(const std::function<void()>& fn, int reps) {
  const auto t0 = std::chrono::steady_clock::now();
  for (int i = 0; i < reps; ++i) fn();
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count() / reps;
}

void report(const char* name, double serial, double parallel, bool same) {
  std::printf("%-18s serial %9.3f ms  parallel %9.3f ms  speedup %5.2fx  %s\n", name,
              serial * 1e3, parallel * 1e3, serial / parallel, same ? "identical" : "MISMATCH");
}

}  // namespace

int main(int argc, char** argv) {
  const std::size_t dim = argc > 1 ? static_cast<std::size_t>(std::atoi(argv[1])) : 50;
  const int reps = argc > 2 ? std::atoi(argv[2]) : 3;
  std::printf("threads: %d, dim %zu\n", omp_get_max_threads(), dim);

  const auto centers = random_centers(2, dim, 0.3, 11);
  const Dataset ds = gen_gaussian_blobs(500, 2, dim, centers, 0.06, 21);
  const std::vector<std::size_t> arch{dim, 128, 128, 2};
  const Network net = init_network(arch, 2, 5);
  const AttackSpec spec = AttackSpec::evaluation(0.03);

  double acc_s = 0, acc_p = 0;
  const double ts = seconds([&] { acc_s = accuracy_serial(net, ds); }, reps * 10);
  const double tp = seconds([&] { acc_p = accuracy(net, ds); }, reps * 10);
  report("accuracy", ts, tp, acc_s == acc_p);

  std::vector<AdvExample> as, ap;
  const double as_t = seconds([&] { as = attack_dataset_serial(net, ds, spec, 9); }, reps);
  const double ap_t = seconds([&] { ap = attack_dataset(net, ds, spec, 9); }, reps);
  bool same = as.size() == ap.size();
  for (std::size_t i = 0; same && i < as.size(); ++i) same = as[i].x_adv == ap[i].x_adv;
  report("pgd20 attack", as_t, ap_t, same);

  std::vector<Vector> xs;
  std::vector<LossTarget> targets;
  for (const Sample& s : ds.samples) {
    xs.push_back(s.x);
    targets.push_back(LossTarget::one_hot(s.y, 2));
  }
  GradientBundle gs, gp;
  const double gs_t =
      seconds([&] { gs = summed_gradients(net, xs, targets, LossKind::ce, Exec::serial); }, reps);
  const double gp_t =
      seconds([&] { gp = summed_gradients(net, xs, targets, LossKind::ce, Exec::parallel); }, reps);
  bool gsame = true;
  for (std::size_t k = 0; k < gs.weight.size(); ++k)
    gsame = gsame && gs.weight[k] == gp.weight[k] && gs.bias[k] == gp.bias[k];
  report("summed gradients", gs_t, gp_t, gsame);
  return same && gsame && acc_s == acc_p ? 0 : 1;
}
