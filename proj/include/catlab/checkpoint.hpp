#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "catlab/net.hpp"

namespace catlab {

inline constexpr int kFormatVersion = 1;

struct LedgerSnapshot {
  std::vector<double> eps;
  double eta = 0.0;
  double eps_max = 0.0;
};

struct Checkpoint {
  Network net;
  std::uint64_t seed = 0;
  std::size_t epoch = 0;
  std::string config_hash;
  std::optional<LedgerSnapshot> ledger;
};

std::string checkpoint_to_json(const Checkpoint& ck);
Checkpoint checkpoint_from_json(const std::string& text);

/// Writes to a sibling temp file and renames it into place.
void write_file_atomic(const std::filesystem::path& path, const std::string& contents);
std::string read_file(const std::filesystem::path& path);

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ck);
Checkpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace catlab
