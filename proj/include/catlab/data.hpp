#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "catlab/net.hpp"

namespace catlab {

struct Sample {
  Vector x;
  std::size_t y = 0;
  std::size_t id = 0;  // stable index into the epsilon ledger
};

/// Per-coordinate domain bounds.
struct Box {
  Vector lo;
  Vector hi;

  static Box uniform(std::size_t dim, double lo, double hi);
  bool contains(const Vector& x, double slack = 0.0) const;
};

/// Ground-truth separating hyperplane n.x + offset = 0 with ||n|| = 1.
struct Hyperplane {
  Vector normal;
  double offset = 0.0;

  double signed_distance(const Vector& x) const { return normal.dot(x) + offset; }
};

enum class Split { train, test };

struct Dataset {
  std::vector<Sample> samples;
  std::size_t dim = 0;
  std::size_t num_classes = 0;
  std::optional<Box> bounds;
  Split split = Split::train;
  std::optional<Hyperplane> boundary;  // linear-margin generator only
  double margin = 0.0;                 // linear-margin generator only

  std::size_t size() const { return samples.size(); }
  /// Checks shared dimension, label range, finiteness, id uniqueness, bounds.
  void validate() const;
  /// Largest sample id + 1; the size an epsilon ledger must have.
  std::size_t id_span() const;
};

/// Fixed normal of the linear-margin generator's ground-truth boundary
/// (the boundary passes through the origin).
Vector linear_margin_normal();

/// Two classes in the plane on either side of a hyperplane through the
/// origin. Points are drawn uniformly in [-half_width, half_width]^2 and
/// rejected inside the margin band; the closest point of each class is then
/// slid along the normal onto the band edge, so the recorded margin equals the
/// realised minimum distance.
Dataset gen_linear_margin(std::size_t n_per_class, double margin, std::uint64_t seed,
                          double half_width = 6.0);

Dataset gen_gaussian_blobs(std::size_t n_per_class, std::size_t num_classes, std::size_t dim,
                           const std::vector<Vector>& centers, double sigma, std::uint64_t seed);

/// Seed-derived centers: Gaussian directions rescaled to the given norm.
std::vector<Vector> random_centers(std::size_t num_classes, std::size_t dim, double radius,
                                   std::uint64_t seed);

/// Big-endian IDX images (magic 0x00000803) and labels (0x00000801). Pixels
/// scaled by 1/255; bounds [0,1].
Dataset load_idx(const std::filesystem::path& images, const std::filesystem::path& labels);
Dataset parse_idx(const std::string& image_bytes, const std::string& label_bytes);

/// CSV with header `label,f0,f1,...`.
Dataset load_csv(const std::filesystem::path& path);
Dataset parse_csv(const std::string& text);

std::pair<Dataset, Dataset> split(const Dataset& dataset, double train_fraction,
                                  std::uint64_t seed);

/// Deterministic shuffled partition of sample positions for one epoch.
std::vector<std::vector<std::size_t>> batch_iter(const Dataset& dataset, std::size_t batch_size,
                                                 std::uint64_t epoch_seed);

/// Keeps the first n samples of each class; ids are preserved.
Dataset take_per_class(const Dataset& dataset, std::size_t n_per_class);

}  // namespace catlab
