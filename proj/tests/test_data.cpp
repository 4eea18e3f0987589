#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <set>

#include "catlab/data.hpp"
#include "catlab/errors.hpp"
#include "catlab/kernels.hpp"
#include "catlab/trainers.hpp"

using namespace catlab;

namespace {

std::string be32(std::uint32_t v) {
  std::string s(4, '\0');
  for (int i = 0; i < 4; ++i) s[static_cast<std::size_t>(i)] = static_cast<char>((v >> (24 - 8 * i)) & 0xff);
  return s;
}

std::pair<std::string, std::string> idx_fixture(std::size_t n) {
  std::string img = be32(0x803) + be32(static_cast<std::uint32_t>(n)) + be32(28) + be32(28);
  std::string lbl = be32(0x801) + be32(static_cast<std::uint32_t>(n));
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t p = 0; p < 784; ++p) img.push_back(static_cast<char>((p + i) % 256));
    lbl.push_back(static_cast<char>(i % 3));
  }
  return {img, lbl};
}

}  // namespace

TEST_CASE("linear-margin generator") {
  for (std::uint64_t seed : {1u, 2u, 3u}) {
    const Dataset ds = gen_linear_margin(200, 1.75, seed);
    REQUIRE(ds.size() == 400);
    REQUIRE(ds.boundary.has_value());
    ds.validate();
    double min_dist = INFINITY;
    for (const Sample& s : ds.samples) {
      const Vector& n = ds.boundary->normal;
      const double d = (n[0] * s.x[0] + n[1] * s.x[1] + ds.boundary->offset) / n.norm();
      CHECK((d > 0) == (s.y == 1));
      min_dist = std::min(min_dist, std::abs(d));
    }
    CHECK(min_dist >= 1.75 - 1e-12);
    CHECK(std::abs(min_dist - ds.margin) < 1e-9);
    CHECK(ds.samples.back().id == 399);
  }
  const Dataset a = gen_linear_margin(50, 1.0, 4), b = gen_linear_margin(50, 1.0, 4);
  for (std::size_t i = 0; i < a.size(); ++i) CHECK(a.samples[i].x == b.samples[i].x);
  CHECK_THROWS_AS(gen_linear_margin(10, 0.0, 1), ConfigError);
}

TEST_CASE("standard training separates the linear-margin set") {
  const Dataset ds = gen_linear_margin(200, 1.75, 1);
  TrainConfig cfg;
  cfg.epochs = 30;
  cfg.lr = 0.05;
  const std::vector<std::size_t> arch{2, 2};
  const TrainReport r = train_natural(init_network(arch, 2, 0), ds, nullptr, cfg);
  CHECK(accuracy(r.net, ds) == 1.0);
}

TEST_CASE("gaussian blobs") {
  const auto centers = random_centers(3, 4, 5.0, 2);
  SUBCASE("tiny sigma collapses onto the centers") {
    const Dataset ds = gen_gaussian_blobs(5, 3, 4, centers, 1e-14, 1);
    for (const Sample& s : ds.samples) CHECK((s.x - centers[s.y]).norm() < 1e-9);
  }
  SUBCASE("deterministic") {
    const Dataset a = gen_gaussian_blobs(20, 3, 4, centers, 0.5, 7);
    const Dataset b = gen_gaussian_blobs(20, 3, 4, centers, 0.5, 7);
    for (std::size_t i = 0; i < a.size(); ++i) CHECK(a.samples[i].x == b.samples[i].x);
  }
  SUBCASE("well separated centers: nearest center is always right") {
    double min_pair = INFINITY;
    for (std::size_t i = 0; i < 3; ++i)
      for (std::size_t j = i + 1; j < 3; ++j)
        min_pair = std::min(min_pair, (centers[i] - centers[j]).norm());
    const double sigma = min_pair / 12.0;
    const Dataset ds = gen_gaussian_blobs(300, 3, 4, centers, sigma, 9);
    for (const Sample& s : ds.samples) {
      std::size_t best = 0;
      for (std::size_t k = 1; k < 3; ++k)
        if ((s.x - centers[k]).norm() < (s.x - centers[best]).norm()) best = k;
      CHECK(best == s.y);
    }
  }
  CHECK_THROWS_AS(gen_gaussian_blobs(5, 3, 4, centers, 0.0, 1), ConfigError);
}

TEST_CASE("IDX parsing") {
  const auto [img, lbl] = idx_fixture(4);
  const Dataset ds = parse_idx(img, lbl);
  CHECK(ds.size() == 4);
  CHECK(ds.dim == 784);
  REQUIRE(ds.bounds.has_value());
  CHECK(ds.samples[0].x[0] == 0.0);
  CHECK(ds.samples[0].x[255] == 1.0);
  CHECK(ds.samples[3].y == 0);
  CHECK(ds.num_classes == 3);

  CHECK_THROWS_AS(parse_idx(img.substr(0, img.size() - 1), lbl), ParseError);
  CHECK_THROWS_AS(parse_idx(img.substr(0, 10), lbl), ParseError);
  CHECK_THROWS_AS(parse_idx(lbl, lbl), ParseError);
  const auto [img5, lbl5] = idx_fixture(5);
  CHECK_THROWS_AS(parse_idx(img5, lbl), ParseError);

  const auto dir = std::filesystem::temp_directory_path() / "catlab_idx_test";
  std::filesystem::create_directories(dir);
  std::ofstream(dir / "img", std::ios::binary) << img;
  std::ofstream(dir / "lbl", std::ios::binary) << lbl;
  CHECK(load_idx(dir / "img", dir / "lbl").size() == 4);
  CHECK_THROWS(load_idx(dir / "missing", dir / "lbl"));
  std::filesystem::remove_all(dir);
}

TEST_CASE("CSV parsing") {
  const Dataset ds = parse_csv("label,f0,f1\n0,0.5,1.5\n1,-2,3e-1\n");
  CHECK(ds.size() == 2);
  CHECK(ds.dim == 2);
  CHECK(ds.samples[1].x[1] == 0.3);
  CHECK(ds.samples[1].y == 1);
  CHECK_THROWS_AS(parse_csv("y,f0\n0,1\n"), ParseError);
  CHECK_THROWS_AS(parse_csv("label,f0\n0,abc\n"), ParseError);
  CHECK_THROWS_AS(parse_csv("label,f0\n0,1,2\n"), ParseError);
  CHECK_THROWS_AS(parse_csv(""), ParseError);
}

TEST_CASE("split") {
  const auto centers = random_centers(2, 2, 3.0, 1);
  const Dataset ds = gen_gaussian_blobs(5, 2, 2, centers, 0.1, 1);
  const auto [a, b] = split(ds, 0.5, 3);
  CHECK(a.size() == 5);
  CHECK(b.size() == 5);
  std::set<std::size_t> ids;
  for (const Sample& s : a.samples) ids.insert(s.id);
  for (const Sample& s : b.samples) ids.insert(s.id);
  CHECK(ids.size() == 10);
  const auto [a2, b2] = split(ds, 0.5, 3);
  for (std::size_t i = 0; i < a.size(); ++i) CHECK(a.samples[i].id == a2.samples[i].id);
  CHECK(b.split == Split::test);
  CHECK_THROWS_AS(split(ds, 1.0, 3), ConfigError);
  CHECK_THROWS_AS(split(ds, 0.0, 3), ConfigError);
}

TEST_CASE("batch_iter") {
  const Dataset ds = gen_linear_margin(25, 1.0, 1);
  CHECK(batch_iter(ds, ds.size(), 1).size() == 1);
  const auto e1 = batch_iter(ds, 8, 1), e2 = batch_iter(ds, 8, 2);
  std::vector<std::size_t> f1, f2;
  for (const auto& b : e1) f1.insert(f1.end(), b.begin(), b.end());
  for (const auto& b : e2) f2.insert(f2.end(), b.begin(), b.end());
  CHECK(f1.size() == ds.size());
  CHECK(f1 != f2);
  std::sort(f1.begin(), f1.end());
  std::sort(f2.begin(), f2.end());
  CHECK(f1 == f2);
  std::vector<std::size_t> all(ds.size());
  for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
  CHECK(f1 == all);
  CHECK(batch_iter(ds, 8, 1) == e1);
  CHECK_THROWS_AS(batch_iter(ds, 0, 1), ConfigError);
}

TEST_CASE("take_per_class keeps ids") {
  const Dataset ds = gen_linear_margin(20, 1.0, 1);
  const Dataset small = take_per_class(ds, 3);
  CHECK(small.size() == 6);
  for (const Sample& s : small.samples) CHECK(ds.samples[s.id].x == s.x);
}
