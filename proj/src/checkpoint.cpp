#include "catlab/checkpoint.hpp"

#include <fstream>
#include <json.hpp>
#include <sstream>

#include "catlab/errors.hpp"

namespace catlab {

using nlohmann::json;

std::string checkpoint_to_json(const Checkpoint& ck) {
  json j;
  j["format_version"] = kFormatVersion;
  j["arch"] = ck.net.arch();
  json acts = json::array();
  json weights = json::array();
  json biases = json::array();
  for (const Layer& l : ck.net.layers()) {
    acts.push_back(to_string(l.activation));
    std::vector<double> w(l.weight.data(), l.weight.data() + l.weight.size());
    weights.push_back(w);
    biases.push_back(std::vector<double>(l.bias.data(), l.bias.data() + l.bias.size()));
  }
  j["activations"] = acts;
  j["weights"] = weights;
  j["biases"] = biases;
  j["seed"] = ck.seed;
  j["epoch"] = ck.epoch;
  j["config_hash"] = ck.config_hash;
  if (ck.ledger) {
    j["epsilon_ledger"] = {{"eps", ck.ledger->eps},
                           {"eta", ck.ledger->eta},
                           {"eps_max", ck.ledger->eps_max}};
  }
  return j.dump(1) + "\n";
}

Checkpoint checkpoint_from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw ParseError(std::string("checkpoint is not valid JSON: ") + e.what());
  }
  try {
    const int version = j.at("format_version").get<int>();
    if (version != kFormatVersion)
      throw ParseError("unsupported checkpoint format_version " + std::to_string(version));
    const auto arch = j.at("arch").get<std::vector<std::size_t>>();
    const auto acts = j.at("activations").get<std::vector<std::string>>();
    const auto& weights = j.at("weights");
    const auto& biases = j.at("biases");
    if (arch.size() < 2 || acts.size() + 1 != arch.size() || weights.size() + 1 != arch.size() ||
        biases.size() + 1 != arch.size())
      throw ParseError("checkpoint arch/activations/weights/biases lengths disagree");
    std::vector<Layer> layers;
    for (std::size_t i = 0; i + 1 < arch.size(); ++i) {
      const auto w = weights[i].get<std::vector<double>>();
      const auto b = biases[i].get<std::vector<double>>();
      if (w.size() != arch[i] * arch[i + 1] || b.size() != arch[i + 1])
        throw ParseError("checkpoint layer " + std::to_string(i) + " has the wrong size");
      Layer l;
      l.weight = Eigen::Map<const Matrix>(w.data(), static_cast<Eigen::Index>(arch[i + 1]),
                                          static_cast<Eigen::Index>(arch[i]));
      l.bias = Eigen::Map<const Vector>(b.data(), static_cast<Eigen::Index>(b.size()));
      l.activation = activation_from_string(acts[i]);
      layers.push_back(std::move(l));
    }
    Checkpoint ck{Network(std::move(layers)), 0, 0, {}, std::nullopt};
    ck.seed = j.value("seed", std::uint64_t{0});
    ck.epoch = j.value("epoch", std::size_t{0});
    ck.config_hash = j.value("config_hash", std::string{});
    if (j.contains("epsilon_ledger") && !j["epsilon_ledger"].is_null()) {
      const auto& led = j["epsilon_ledger"];
      ck.ledger = LedgerSnapshot{led.at("eps").get<std::vector<double>>(),
                                 led.at("eta").get<double>(), led.at("eps_max").get<double>()};
    }
    return ck;
  } catch (const json::exception& e) {
    throw ParseError(std::string("malformed checkpoint: ") + e.what());
  }
}

void write_file_atomic(const std::filesystem::path& path, const std::string& contents) {
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + tmp.string());
    out << contents;
    out.flush();
    if (!out) throw std::runtime_error("short write to " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ck) {
  write_file_atomic(path, checkpoint_to_json(ck));
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  return checkpoint_from_json(read_file(path));
}

}  // namespace catlab
