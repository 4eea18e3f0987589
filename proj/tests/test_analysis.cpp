#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "catlab/analysis.hpp"
#include "catlab/errors.hpp"
#include "support.hpp"

using namespace catlab;
using namespace catlab::testing;

namespace {

Dataset blobs2d(std::size_t n, std::uint64_t seed) {
  const auto centers = random_centers(2, 2, 1.0, seed);
  return gen_gaussian_blobs(n, 2, 2, centers, 0.5, seed + 1);
}

Network constant_net(double p0) {
  Vector b(2);
  b << std::log(p0), std::log(1.0 - p0);
  return single_layer(Matrix::Zero(2, 2), b);
}

}  // namespace

TEST_CASE("robust curve") {
  const std::vector<double> grid{0.0, 0.1, 0.2, 0.4};
  const Dataset ds = blobs2d(50, 3);

  SUBCASE("a zero network sits at chance everywhere") {
    const RobustCurve c = robust_curve(single_layer(Matrix::Zero(2, 2), Vector::Zero(2)), ds, grid);
    // ties go to class 0, which is half of the data
    for (double a : c.pgd_acc) CHECK(a == 0.5);
  }
  SUBCASE("eps = 0 is the clean accuracy and the curve is monotone") {
    Matrix w(2, 2);
    w << 1.0, 0.5, -1.0, -0.5;
    const Network net = single_layer(w, Vector::Zero(2));
    const RobustCurve c = robust_curve(net, ds, grid);
    CHECK(c.pgd_acc[0] == accuracy(net, ds));
    CHECK(c.cw_acc[0] == accuracy(net, ds));
    CHECK(c.clean_acc == accuracy(net, ds));
    for (std::size_t i = 1; i < grid.size(); ++i) {
      CHECK(c.pgd_acc[i] <= c.pgd_acc[i - 1]);
      CHECK(c.cw_acc[i] <= c.cw_acc[i - 1]);
    }
    const std::string csv = curve_csv(c);
    CHECK(csv.rfind("eps,pgd_acc,cw_acc\n", 0) == 0);
  }
  CHECK_THROWS_AS(robust_curve(random_net({2, 2}, 1), ds, {0.1, 0.2}), ConfigError);
  CHECK_THROWS_AS(robust_curve(random_net({2, 2}, 1), ds, {0.0, 0.2, 0.1}), ConfigError);
}

TEST_CASE("loss landscape") {
  const Network net = random_net({3, 6, 2}, 5);
  Vector x(3);
  x << 0.2, -0.1, 0.4;
  const LandscapeGrid g = landscape_grid(net, x, 1, 0.5, 11, 4);
  CHECK(g.loss.size() == 121);
  CHECK(g.u_magnitudes.front() == -0.5);
  CHECK(g.u_magnitudes[5] == 0.0);
  CHECK(g.u_magnitudes.back() == 0.5);
  CHECK(g.at(5, 5) == g.clean_loss);
  CHECK(g.clean_loss == doctest::Approx(ref_loss(LossKind::ce, ref_logits(net, x), LossTarget::one_hot(1, 2))));
  for (Eigen::Index j = 0; j < 3; ++j) {
    CHECK(std::abs(g.v[j]) == 1.0);
    CHECK(std::abs(g.u[j]) <= 1.0);
  }
  CHECK(landscape_grid(net, x, 1, 0.5, 11, 4).v == g.v);
  CHECK_THROWS_AS(landscape_grid(net, x, 1, 0.5, 10, 4), ConfigError);

  SUBCASE("loss rises along the gradient sign for a linear model") {
    Matrix w(2, 3);
    w << 1.0, -1.0, 0.5, -1.0, 1.0, -0.5;
    const Network lin = single_layer(w, Vector::Zero(2));
    const LandscapeGrid l = landscape_grid(lin, x, 0, 1.0, 9, 2);
    for (std::size_t i = 1; i < 9; ++i) CHECK(l.at(i, 4) > l.at(i - 1, 4));
  }
}

TEST_CASE("complexity proxy") {
  Matrix a = Matrix::Identity(2, 2);
  CHECK(complexity_proxy(single_layer(a, Vector::Zero(2))) == doctest::Approx(std::sqrt(2.0)));

  const Network net = random_net({4, 5, 3}, 6);
  Network scaled = net;
  scaled.layer(0).weight *= 3.0;
  CHECK(complexity_proxy(scaled) == doctest::Approx(3.0 * complexity_proxy(net)));

  Matrix w1(2, 2), w2(2, 2);
  w1 << 1, 2, 3, 4;
  w2 << 0, 1, 1, 0;
  Network two({{w1, Vector::Zero(2)}, {w2, Vector::Zero(2), Activation::identity}});
  CHECK(complexity_proxy(two) == doctest::Approx(std::sqrt(30.0) * std::sqrt(2.0)));
}

TEST_CASE("bilateral margin on a constant network") {
  // outputs are (0.9, 0.1) regardless of the input. The output flip needs
  // norm a = 0.8 / sqrt(2) scaled by ||x + d_in||, so the best d_in stretches
  // x by t and the margin is min_t sqrt(t^2 + a^2 / (1 + t)^2).
  const Network net = constant_net(0.9);
  Vector x(2);
  x << 0.6, 0.8;
  const double a = 0.8 / std::sqrt(2.0);
  CHECK(min_output_flip_norm(net, x, 0, Vector::Zero(2)) == doctest::Approx(a).epsilon(1e-12));
  double exact = a;
  for (int i = 0; i <= 1000000; ++i) {
    const double t = i * 1e-6;
    exact = std::min(exact, std::sqrt(t * t + a * a / ((1 + t) * (1 + t))));
  }
  const MarginEstimate m = estimate_bilateral_margin(net, x, 0);
  CHECK(m.m_f <= 0.57);
  CHECK(m.certified_lower <= exact + 1e-9);
  CHECK(m.attack_upper >= exact - 1e-9);
  CHECK(m.attack_upper - m.certified_lower <= 1e-3 + 1e-12);

  const MarginEstimate wrong = estimate_bilateral_margin(net, x, 1);
  CHECK(wrong.m_f == 0.0);
  CHECK(wrong.certified_lower == 0.0);
  CHECK_THROWS_AS(estimate_bilateral_margin(net, Vector::Zero(2), 0), PreconditionError);
  CHECK_THROWS_AS(estimate_bilateral_margin(net, Vector::Zero(3), 0), DimensionError);
}

TEST_CASE("margin bracket on random networks") {
  std::mt19937_64 r(8);
  for (std::uint64_t t = 0; t < 25; ++t) {
    const Network net = random_net({3, 6, 3}, 40 + t);
    const Vector x = random_vector(3, r);
    const std::size_t y = predict(net, x);
    MarginOptions o;
    o.seed = t;
    const MarginEstimate m = estimate_bilateral_margin(net, x, y, o);
    CHECK(m.certified_lower <= m.attack_upper);
    CHECK(m.m_f == m.attack_upper);
    CHECK(m.m_f > 0.0);
    // the output-only flip is always available and bounds the margin
    CHECK(m.attack_upper <= min_output_flip_norm(net, x, y, Vector::Zero(3)) + 1e-3);
  }
}

TEST_CASE("bound terms") {
  const Network net = constant_net(0.9);
  Dataset ds;
  ds.dim = 2;
  ds.num_classes = 2;
  Vector x(2);
  x << 0.6, 0.8;
  ds.samples.push_back({x, 0, 0});
  ds.samples.push_back({-x, 0, 1});
  ds.samples.push_back({x, 1, 2});
  const BoundReport b = bound_terms(net, ds);
  CHECK(b.n == 2);
  CHECK(b.excluded == 1);
  CHECK(b.complexity == 0.0);
  CHECK(b.mean_inverse_margin == doctest::Approx(1.0 / b.margins[0].m_f));

  std::vector<MarginEstimate> ms(2);
  ms[0].m_f = 0.5;
  ms[1].m_f = 0.25;
  CHECK(bound_terms_from(net, ms).mean_inverse_margin == doctest::Approx(3.0));
  ms[0].m_f = 1.0;
  ms[1].m_f = 0.5;
  CHECK(bound_terms_from(net, ms).mean_inverse_margin == doctest::Approx(1.5));

  Dataset wrong = ds;
  wrong.samples = {ds.samples[2]};
  CHECK_THROWS_AS(bound_terms(net, wrong), PreconditionError);
}
