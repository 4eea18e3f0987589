#include "catlab/data.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>
#include <numeric>
#include <random>
#include <set>
#include <sstream>

#include "catlab/checkpoint.hpp"
#include "catlab/errors.hpp"
#include "catlab/rng.hpp"

namespace catlab {

Box Box::uniform(std::size_t dim, double lo, double hi) {
  const auto n = static_cast<Eigen::Index>(dim);
  return Box{Vector::Constant(n, lo), Vector::Constant(n, hi)};
}

bool Box::contains(const Vector& x, double slack) const {
  return ((x.array() >= lo.array() - slack) && (x.array() <= hi.array() + slack)).all();
}

void Dataset::validate() const {
  if (num_classes < 2) throw ConfigError("dataset needs at least 2 classes");
  std::set<std::size_t> ids;
  for (const Sample& s : samples) {
    if (static_cast<std::size_t>(s.x.size()) != dim)
      throw DimensionError("sample " + std::to_string(s.id) + " has the wrong dimension");
    if (s.y >= num_classes)
      throw ConfigError("sample " + std::to_string(s.id) + " label out of range");
    if (!s.x.allFinite())
      throw ConfigError("sample " + std::to_string(s.id) + " has non-finite features");
    if (!ids.insert(s.id).second)
      throw ConfigError("duplicate sample id " + std::to_string(s.id));
    if (bounds && !bounds->contains(s.x))
      throw ConfigError("sample " + std::to_string(s.id) + " violates domain bounds");
  }
}

std::size_t Dataset::id_span() const {
  std::size_t m = 0;
  for (const Sample& s : samples) m = std::max(m, s.id + 1);
  return m;
}

Vector linear_margin_normal() {
  Vector n(2);
  n << 0.6, 0.8;
  return n;
}

Dataset gen_linear_margin(std::size_t n_per_class, double margin, std::uint64_t seed,
                          double half_width) {
  if (!(margin > 0.0)) throw ConfigError("margin must be positive");
  if (!(half_width > margin)) throw ConfigError("sampling box must be wider than the margin");
  Dataset ds;
  ds.dim = 2;
  ds.num_classes = 2;
  ds.boundary = Hyperplane{linear_margin_normal(), 0.0};
  ds.margin = margin;
  Rng rng = make_stream(seed, "linear-margin");
  const Hyperplane& h = *ds.boundary;
  // class 0 on the negative side, class 1 on the positive side
  std::array<std::vector<Vector>, 2> pts;
  while (pts[0].size() < n_per_class || pts[1].size() < n_per_class) {
    Vector x(2);
    x << uniform(rng, -half_width, half_width), uniform(rng, -half_width, half_width);
    const double d = h.signed_distance(x);
    if (std::abs(d) < margin) continue;
    const std::size_t cls = d > 0.0 ? 1 : 0;
    if (pts[cls].size() < n_per_class) pts[cls].push_back(x);
  }
  for (std::size_t cls = 0; cls < 2; ++cls) {
    if (pts[cls].empty()) continue;
    std::size_t closest = 0;
    for (std::size_t i = 1; i < pts[cls].size(); ++i)
      if (std::abs(h.signed_distance(pts[cls][i])) <
          std::abs(h.signed_distance(pts[cls][closest])))
        closest = i;
    Vector& x = pts[cls][closest];
    const double sign = cls == 1 ? 1.0 : -1.0;
    x -= (h.signed_distance(x) - sign * margin) * h.normal;
  }
  std::size_t id = 0;
  for (std::size_t i = 0; i < n_per_class; ++i)
    for (std::size_t cls = 0; cls < 2; ++cls) ds.samples.push_back({pts[cls][i], cls, id++});
  return ds;
}

Dataset gen_gaussian_blobs(std::size_t n_per_class, std::size_t num_classes, std::size_t dim,
                           const std::vector<Vector>& centers, double sigma, std::uint64_t seed) {
  if (!(sigma > 0.0)) throw ConfigError("sigma must be positive");
  if (num_classes < 2) throw ConfigError("need at least 2 classes");
  if (centers.size() != num_classes) throw ConfigError("need one center per class");
  for (const Vector& c : centers)
    if (static_cast<std::size_t>(c.size()) != dim) throw DimensionError("center has wrong dim");
  Dataset ds;
  ds.dim = dim;
  ds.num_classes = num_classes;
  Rng rng = make_stream(seed, "blobs");
  std::normal_distribution<double> normal(0.0, 1.0);
  std::size_t id = 0;
  for (std::size_t i = 0; i < n_per_class; ++i) {
    for (std::size_t k = 0; k < num_classes; ++k) {
      Vector x(static_cast<Eigen::Index>(dim));
      for (Eigen::Index j = 0; j < x.size(); ++j) x[j] = centers[k][j] + sigma * normal(rng);
      ds.samples.push_back({std::move(x), k, id++});
    }
  }
  return ds;
}

std::vector<Vector> random_centers(std::size_t num_classes, std::size_t dim, double radius,
                                   std::uint64_t seed) {
  Rng rng = make_stream(seed, "centers");
  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<Vector> centers;
  for (std::size_t k = 0; k < num_classes; ++k) {
    Vector c(static_cast<Eigen::Index>(dim));
    for (Eigen::Index j = 0; j < c.size(); ++j) c[j] = normal(rng);
    centers.push_back(c * (radius / c.norm()));
  }
  return centers;
}

namespace {

std::uint32_t read_be32(const std::string& bytes, std::size_t offset) {
  if (offset + 4 > bytes.size()) throw ParseError("IDX header truncated");
  const auto* p = reinterpret_cast<const unsigned char*>(bytes.data() + offset);
  return (std::uint32_t{p[0]} << 24) | (std::uint32_t{p[1]} << 16) | (std::uint32_t{p[2]} << 8) |
         std::uint32_t{p[3]};
}

}  // namespace

Dataset parse_idx(const std::string& image_bytes, const std::string& label_bytes) {
  if (read_be32(image_bytes, 0) != 0x00000803) throw ParseError("bad IDX image magic");
  if (read_be32(label_bytes, 0) != 0x00000801) throw ParseError("bad IDX label magic");
  const std::size_t n = read_be32(image_bytes, 4);
  const std::size_t rows = read_be32(image_bytes, 8);
  const std::size_t cols = read_be32(image_bytes, 12);
  const std::size_t n_labels = read_be32(label_bytes, 4);
  if (n != n_labels)
    throw ParseError("IDX image count " + std::to_string(n) + " != label count " +
                     std::to_string(n_labels));
  const std::size_t dim = rows * cols;
  if (image_bytes.size() != 16 + n * dim) throw ParseError("IDX image payload length mismatch");
  if (label_bytes.size() != 8 + n) throw ParseError("IDX label payload length mismatch");
  Dataset ds;
  ds.dim = dim;
  std::size_t max_label = 0;
  for (std::size_t i = 0; i < n; ++i) {
    Vector x(static_cast<Eigen::Index>(dim));
    const auto* px = reinterpret_cast<const unsigned char*>(image_bytes.data() + 16 + i * dim);
    for (std::size_t j = 0; j < dim; ++j) x[static_cast<Eigen::Index>(j)] = px[j] / 255.0;
    const std::size_t y = static_cast<unsigned char>(label_bytes[8 + i]);
    max_label = std::max(max_label, y);
    ds.samples.push_back({std::move(x), y, i});
  }
  ds.num_classes = std::max<std::size_t>(2, max_label + 1);
  ds.bounds = Box::uniform(dim, 0.0, 1.0);
  ds.validate();
  return ds;
}

Dataset load_idx(const std::filesystem::path& images, const std::filesystem::path& labels) {
  return parse_idx(read_file(images), read_file(labels));
}

Dataset parse_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line)) throw ParseError("CSV is empty");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  std::vector<std::string> header;
  {
    std::istringstream hs(line);
    std::string cell;
    while (std::getline(hs, cell, ',')) header.push_back(cell);
  }
  if (header.size() < 2 || header[0] != "label")
    throw ParseError("CSV header must be label,f0,f1,...");
  for (std::size_t j = 1; j < header.size(); ++j)
    if (header[j] != "f" + std::to_string(j - 1))
      throw ParseError("CSV header column " + std::to_string(j) + " must be f" +
                       std::to_string(j - 1));
  Dataset ds;
  ds.dim = header.size() - 1;
  std::size_t max_label = 0;
  std::size_t row = 0;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::istringstream ls(line);
    std::string cell;
    std::vector<double> vals;
    while (std::getline(ls, cell, ',')) {
      try {
        std::size_t used = 0;
        vals.push_back(std::stod(cell, &used));
        if (used != cell.size()) throw std::invalid_argument(cell);
      } catch (const std::exception&) {
        throw ParseError("CSV row " + std::to_string(row + 1) + ": bad number '" + cell + "'");
      }
    }
    if (vals.size() != header.size())
      throw ParseError("CSV row " + std::to_string(row + 1) + " has the wrong column count");
    if (vals[0] < 0 || vals[0] != std::floor(vals[0]))
      throw ParseError("CSV row " + std::to_string(row + 1) + ": label must be a class index");
    const auto y = static_cast<std::size_t>(vals[0]);
    max_label = std::max(max_label, y);
    ds.samples.push_back(
        {Eigen::Map<const Vector>(vals.data() + 1, static_cast<Eigen::Index>(ds.dim)), y, row});
    ++row;
  }
  ds.num_classes = std::max<std::size_t>(2, max_label + 1);
  ds.validate();
  return ds;
}

Dataset load_csv(const std::filesystem::path& path) { return parse_csv(read_file(path)); }

std::pair<Dataset, Dataset> split(const Dataset& dataset, double train_fraction,
                                  std::uint64_t seed) {
  if (!(train_fraction > 0.0 && train_fraction < 1.0))
    throw ConfigError("train fraction must lie in (0, 1)");
  std::vector<std::size_t> order(dataset.size());
  std::iota(order.begin(), order.end(), 0);
  Rng rng = make_stream(seed, "split");
  std::shuffle(order.begin(), order.end(), rng);
  const auto n_train = static_cast<std::size_t>(
      std::llround(train_fraction * static_cast<double>(dataset.size())));
  Dataset train = dataset;
  Dataset test = dataset;
  train.samples.clear();
  test.samples.clear();
  train.split = Split::train;
  test.split = Split::test;
  for (std::size_t i = 0; i < order.size(); ++i)
    (i < n_train ? train : test).samples.push_back(dataset.samples[order[i]]);
  return {std::move(train), std::move(test)};
}

std::vector<std::vector<std::size_t>> batch_iter(const Dataset& dataset, std::size_t batch_size,
                                                 std::uint64_t epoch_seed) {
  if (batch_size == 0) throw ConfigError("batch size must be positive");
  std::vector<std::size_t> order(dataset.size());
  std::iota(order.begin(), order.end(), 0);
  Rng rng = make_stream(epoch_seed, "batches");
  std::shuffle(order.begin(), order.end(), rng);
  std::vector<std::vector<std::size_t>> batches;
  for (std::size_t start = 0; start < order.size(); start += batch_size) {
    const std::size_t stop = std::min(order.size(), start + batch_size);
    batches.emplace_back(order.begin() + static_cast<std::ptrdiff_t>(start),
                         order.begin() + static_cast<std::ptrdiff_t>(stop));
  }
  return batches;
}

Dataset take_per_class(const Dataset& dataset, std::size_t n_per_class) {
  Dataset out = dataset;
  out.samples.clear();
  std::vector<std::size_t> counts(dataset.num_classes, 0);
  for (const Sample& s : dataset.samples)
    if (counts[s.y]++ < n_per_class) out.samples.push_back(s);
  return out;
}

}  // namespace catlab
