// catlab command-line driver. Every command computes all of its outputs in
// memory first and only then writes them, each through a temp file + rename,
// so a failing run leaves nothing behind.

#include <CLI11.hpp>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <json.hpp>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "catlab/analysis.hpp"
#include "catlab/attacks.hpp"
#include "catlab/checkpoint.hpp"
#include "catlab/data.hpp"
#include "catlab/errors.hpp"
#include "catlab/gradcheck.hpp"
#include "catlab/kernels.hpp"
#include "catlab/recipes.hpp"
#include "catlab/rng.hpp"
#include "catlab/trainers.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace catlab;

namespace {

struct Options {
  std::string config;
  std::uint64_t seed = 0;
  std::string out = ".";
  std::string checkpoint;
  std::string dataset = "linear-margin";
  std::string test_dataset;
  std::string split = "";  // evaluation split; empty picks the command default
  bool serial = false;

  // generators
  std::size_t n_per_class = 200;
  double margin = 1.75;
  std::size_t dim = 10;
  std::size_t classes = 2;
  double sigma = 0.05;
  double radius = 0.3;
  std::uint64_t data_seed = 1;

  // train
  std::string trainer = "natural";
  std::vector<std::size_t> hidden;
  std::size_t epochs = 10;
  std::size_t batch_size = 32;
  double lr = 0.01;
  double momentum = 0.9;
  double weight_decay = 5e-4;
  std::vector<std::size_t> lr_milestones;
  double lr_decay = 0.1;
  int attack_steps = 10;
  double attack_step_size = 0.0;
  double eps = 8.0 / 255.0;
  double eps_max = 8.0 / 255.0;
  double eta = 0.005;
  double c = 10.0;
  double kappa = 10.0;
  std::string loss = "ce";
  double beta = 1.0;
  bool label_smoothing = false;

  // attack / evaluation
  int steps = 20;
  double step_size = 0.0;  // 0: eps / 5
  std::string attack_loss = "ce";
  double attack_kappa = kNoFloor;
  bool no_random_start = false;
  std::vector<double> eps_grid{0.0,  0.005, 0.01,  0.015, 0.02, 0.025,
                               0.03, 0.035, 0.04,  0.045, 0.05};
  std::string source;

  // landscape
  std::size_t index = 0;
  double extent = 0.1;
  std::size_t grid_size = 21;

  // margin / bound
  std::size_t max_samples = 0;  // 0: all
  double tol = 1e-3;
  std::size_t random_samples = 512;
  double cap = 1e3;

  // gradcheck
  std::size_t fixtures = 50;

  // recipe
  std::string recipe;
};

json options_json(const Options& o, const std::string& command) {
  // --out and --config are deliberately absent: the hash identifies what was
  // computed, not where it was written.
  return {{"command", command},
          {"seed", o.seed},
          {"checkpoint", o.checkpoint},
          {"dataset", o.dataset},
          {"test_dataset", o.test_dataset},
          {"split", o.split},
          {"n_per_class", o.n_per_class},
          {"margin", o.margin},
          {"dim", o.dim},
          {"classes", o.classes},
          {"sigma", o.sigma},
          {"radius", o.radius},
          {"data_seed", o.data_seed},
          {"trainer", o.trainer},
          {"hidden", o.hidden},
          {"epochs", o.epochs},
          {"batch_size", o.batch_size},
          {"lr", o.lr},
          {"momentum", o.momentum},
          {"weight_decay", o.weight_decay},
          {"lr_milestones", o.lr_milestones},
          {"lr_decay", o.lr_decay},
          {"attack_steps", o.attack_steps},
          {"attack_step_size", o.attack_step_size},
          {"eps", o.eps},
          {"eps_max", o.eps_max},
          {"eta", o.eta},
          {"c", o.c},
          {"kappa", o.kappa},
          {"loss", o.loss},
          {"beta", o.beta},
          {"label_smoothing", o.label_smoothing},
          {"steps", o.steps},
          {"step_size", o.step_size},
          {"attack_loss", o.attack_loss},
          {"attack_kappa", o.attack_kappa},
          {"no_random_start", o.no_random_start},
          {"eps_grid", o.eps_grid},
          {"source", o.source},
          {"index", o.index},
          {"extent", o.extent},
          {"grid_size", o.grid_size},
          {"max_samples", o.max_samples},
          {"tol", o.tol},
          {"random_samples", o.random_samples},
          {"cap", o.cap},
          {"fixtures", o.fixtures},
          {"recipe", o.recipe}};
}

std::string config_hash(const Options& o, const std::string& command) {
  const std::string canon = options_json(o, command).dump();
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : canon) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

/// Outputs of one command, written together at the end.
class Outputs {
 public:
  Outputs(const Options& o, std::string command)
      : out_(o.out), seed_(o.seed), command_(std::move(command)), hash_(config_hash(o, command_)) {}

  const std::string& hash() const { return hash_; }

  json header() const {
    return {{"format_version", kFormatVersion},
            {"config_hash", hash_},
            {"seed", seed_},
            {"command", command_}};
  }

  void add_json(const std::string& name, json body) {
    json doc = header();
    doc.update(body);
    files_.emplace_back(name, doc.dump(1) + "\n");
  }

  /// CSV plus a `<name>.meta.json` sidecar carrying the run header and any
  /// extra metadata.
  void add_csv(const std::string& name, std::string contents, json extra = json::object()) {
    files_.emplace_back(name, std::move(contents));
    json meta = header();
    meta["file"] = name;
    meta.update(extra);
    files_.emplace_back(name + ".meta.json", meta.dump(1) + "\n");
  }

  void add_raw(const std::string& name, std::string contents) {
    files_.emplace_back(name, std::move(contents));
  }

  void commit() const {
    std::error_code ec;
    fs::create_directories(out_, ec);
    if (ec || !fs::is_directory(out_))
      throw ConfigError("cannot create output directory '" + out_.string() + "'");
    for (const auto& [name, contents] : files_) write_file_atomic(out_ / name, contents);
  }

 private:
  fs::path out_;
  std::uint64_t seed_;
  std::string command_;
  std::string hash_;
  std::vector<std::pair<std::string, std::string>> files_;
};

Exec exec_of(const Options& o) { return o.serial ? Exec::serial : Exec::parallel; }

void require_file(const std::string& path, const std::string& what) {
  if (path.empty()) throw ConfigError(what + " is required");
  if (!fs::is_regular_file(path)) throw ConfigError(what + " '" + path + "' does not exist");
}

std::vector<std::string> split_spec(const std::string& spec) {
  std::vector<std::string> parts;
  std::stringstream ss(spec);
  std::string item;
  while (std::getline(ss, item, ':')) parts.push_back(item);
  return parts;
}

/// Checks that dataset files named in a spec exist.
void check_dataset_spec(const std::string& spec) {
  const auto parts = split_spec(spec);
  if (parts.empty()) throw ConfigError("empty dataset spec");
  if (parts[0] == "idx") {
    if (parts.size() != 3) throw ConfigError("idx dataset spec is idx:<images>:<labels>");
    require_file(parts[1], "dataset file");
    require_file(parts[2], "dataset file");
  } else if (parts[0] == "csv") {
    if (parts.size() != 2) throw ConfigError("csv dataset spec is csv:<path>");
    require_file(parts[1], "dataset file");
  } else if (parts[0] != "linear-margin" && parts[0] != "blobs") {
    throw ConfigError("unknown dataset '" + spec +
                      "' (linear-margin, blobs, idx:<images>:<labels>, csv:<path>)");
  }
}

Dataset load_dataset(const Options& o, const std::string& spec, bool test) {
  const auto parts = split_spec(spec);
  const std::uint64_t s = o.data_seed;
  if (parts[0] == "linear-margin") {
    Dataset d = gen_linear_margin(o.n_per_class, o.margin, test ? s + 1 : s);
    d.split = test ? Split::test : Split::train;
    return d;
  }
  if (parts[0] == "blobs") {
    const auto centers = random_centers(o.classes, o.dim, o.radius, s);
    Dataset d = gen_gaussian_blobs(o.n_per_class, o.classes, o.dim, centers, o.sigma,
                                   test ? s + 2 : s + 1);
    d.split = test ? Split::test : Split::train;
    return d;
  }
  Dataset d = parts[0] == "idx" ? load_idx(parts[1], parts[2]) : load_csv(parts[1]);
  d.split = test ? Split::test : Split::train;
  return d;
}

struct Data {
  Dataset train;
  Dataset test;
  const Dataset& pick(const std::string& split) const { return split == "train" ? train : test; }
};

Data load_data(const Options& o) {
  check_dataset_spec(o.dataset);
  if (!o.test_dataset.empty()) check_dataset_spec(o.test_dataset);
  Data d;
  d.train = load_dataset(o, o.dataset, false);
  const auto parts = split_spec(o.dataset);
  const bool generated = parts[0] == "linear-margin" || parts[0] == "blobs";
  if (!o.test_dataset.empty())
    d.test = load_dataset(o, o.test_dataset, true);
  else if (generated)
    d.test = load_dataset(o, o.dataset, true);
  else {
    d.test = d.train;
    d.test.split = Split::test;
  }
  return d;
}

Checkpoint load_checked(const std::string& path, const Dataset& ds) {
  require_file(path, "checkpoint");
  Checkpoint ck = load_checkpoint(path);
  if (ck.net.input_dim() != ds.dim)
    throw DimensionError("checkpoint input dim " + std::to_string(ck.net.input_dim()) +
                         " does not match dataset dim " + std::to_string(ds.dim));
  if (ck.net.num_classes() != ds.num_classes)
    throw DimensionError("checkpoint has " + std::to_string(ck.net.num_classes()) +
                         " classes, dataset has " + std::to_string(ds.num_classes));
  return ck;
}

std::string eval_split(const Options& o, const char* fallback) {
  const std::string s = o.split.empty() ? fallback : o.split;
  if (s != "train" && s != "test") throw ConfigError("--split must be train or test");
  return s;
}

AttackSpec attack_spec(const Options& o, double eps, const Dataset& ds) {
  const LossKind loss = o.attack_loss == "cw" ? LossKind::cw_margin : loss_kind_from_string(o.attack_loss);
  AttackSpec spec = AttackSpec::evaluation(eps, loss, o.attack_kappa);
  spec.steps = o.steps;
  if (o.step_size > 0.0) spec.step_size = o.step_size;
  spec.random_start = !o.no_random_start;
  spec.with_domain(ds);
  spec.validate();
  return spec;
}

int cmd_train(const Options& o) {
  const Data d = load_data(o);
  TrainConfig cfg;
  cfg.trainer = trainer_kind_from_string(o.trainer);
  cfg.epochs = o.epochs;
  cfg.batch_size = o.batch_size;
  cfg.lr = o.lr;
  cfg.momentum = o.momentum;
  cfg.weight_decay = o.weight_decay;
  cfg.lr_milestones = o.lr_milestones;
  cfg.lr_decay = o.lr_decay;
  cfg.attack_steps = o.attack_steps;
  cfg.attack_step_size = o.attack_step_size;
  cfg.eps = o.eps;
  cfg.eps_max = o.eps_max;
  cfg.eta = o.eta;
  cfg.c = o.c;
  cfg.kappa = o.kappa;
  cfg.loss = cat_loss_from_string(o.loss);
  cfg.beta = o.beta;
  cfg.label_smoothing = o.label_smoothing;
  cfg.seed = o.seed;
  cfg.exec = exec_of(o);
  cfg.validate();

  std::vector<std::size_t> arch{d.train.dim};
  arch.insert(arch.end(), o.hidden.begin(), o.hidden.end());
  arch.push_back(d.train.num_classes);
  TrainReport r = train(init_network(arch, d.train.num_classes, o.seed), d.train, &d.test, cfg);

  Outputs out(o, "train");
  Checkpoint ck{r.net, o.seed, cfg.epochs, out.hash(), std::nullopt};
  if (r.ledger) ck.ledger = r.ledger->snapshot();
  out.add_raw("checkpoint.json", checkpoint_to_json(ck));
  out.add_csv("metrics.csv", metrics_csv(r.epochs), {{"trainer", o.trainer}});
  out.commit();
  if (!r.epochs.empty()) {
    const EpochMetrics& m = r.epochs.back();
    std::cout << "trained " << o.trainer << " for " << m.epoch << " epochs: train acc "
              << m.clean_train_acc << ", test acc " << m.clean_test_acc << '\n';
  }
  return 0;
}

int cmd_attack(const Options& o) {
  const Data d = load_data(o);
  const Dataset& ds = d.pick(eval_split(o, "test"));
  const Checkpoint ck = load_checked(o.checkpoint, ds);
  const AttackSpec spec = attack_spec(o, o.eps, ds);
  const auto advs = attack_dataset(ck.net, ds, spec, o.seed);
  json results = json::array();
  for (std::size_t i = 0; i < advs.size(); ++i)
    results.push_back({{"id", ds.samples[i].id},
                       {"eps", spec.eps},
                       {"success", advs[i].success},
                       {"loss_achieved", advs[i].loss_achieved},
                       {"linf_norm", advs[i].linf_norm()}});
  const double acc = accuracy_on(ck.net, ds, advs);
  Outputs out(o, "attack");
  out.add_json("attack.json", {{"attack_loss", o.attack_loss},
                               {"steps", spec.steps},
                               {"step_size", spec.step_size},
                               {"random_start", spec.random_start},
                               {"robust_accuracy", acc},
                               {"results", results}});
  out.commit();
  std::cout << "robust accuracy " << acc << " at eps " << spec.eps << '\n';
  return 0;
}

int cmd_eval_curve(const Options& o) {
  const Data d = load_data(o);
  const Dataset& ds = d.pick(eval_split(o, "test"));
  const Checkpoint ck = load_checked(o.checkpoint, ds);
  EvalOptions eo;
  eo.steps = o.steps;
  eo.random_start = !o.no_random_start;
  eo.cw_kappa = o.attack_kappa;
  eo.seed = o.seed;
  eo.exec = exec_of(o);
  const RobustCurve c = robust_curve(ck.net, ds, o.eps_grid, eo);
  Outputs out(o, "eval-curve");
  out.add_csv("curve.csv", curve_csv(c), {{"clean_acc", c.clean_acc}});
  out.commit();
  std::cout << "clean accuracy " << c.clean_acc << '\n';
  return 0;
}

int cmd_transfer(const Options& o) {
  const Data d = load_data(o);
  const Dataset& ds = d.pick(eval_split(o, "test"));
  const Checkpoint target = load_checked(o.checkpoint, ds);
  const Checkpoint source = load_checked(o.source, ds);
  const AttackSpec spec = attack_spec(o, o.eps, ds);
  const double acc = transfer_attack(source.net, target.net, ds, spec, o.seed);
  Outputs out(o, "transfer");
  out.add_json("transfer.json", {{"source", o.source},
                                 {"target", o.checkpoint},
                                 {"eps", spec.eps},
                                 {"robust_accuracy", acc}});
  out.commit();
  std::cout << "transfer robust accuracy " << acc << '\n';
  return 0;
}

int cmd_landscape(const Options& o) {
  const Data d = load_data(o);
  const Dataset& ds = d.pick(eval_split(o, "test"));
  const Checkpoint ck = load_checked(o.checkpoint, ds);
  if (o.index >= ds.size()) throw ConfigError("--index is past the end of the dataset");
  const Sample& s = ds.samples[o.index];
  const LandscapeGrid g = landscape_grid(ck.net, s.x, s.y, o.extent, o.grid_size, o.seed);
  std::ostringstream csv;
  csv.precision(17);
  csv << "a,b,loss\n";
  for (std::size_t i = 0; i < g.grid_size; ++i)
    for (std::size_t j = 0; j < g.grid_size; ++j)
      csv << g.u_magnitudes[i] << ',' << g.v_magnitudes[j] << ',' << g.at(i, j) << '\n';
  Outputs out(o, "landscape");
  out.add_csv("landscape.csv", csv.str(),
              {{"sample_id", s.id},
               {"grid_size", g.grid_size},
               {"extent", o.extent},
               {"clean_loss", g.clean_loss},
               {"u", std::vector<double>(g.u.data(), g.u.data() + g.u.size())},
               {"v", std::vector<double>(g.v.data(), g.v.data() + g.v.size())},
               {"direction_seed", g.seed}});
  out.commit();
  return 0;
}

MarginOptions margin_options(const Options& o) {
  MarginOptions m;
  m.tol = o.tol;
  m.random_samples = o.random_samples;
  m.cap = o.cap;
  m.seed = o.seed;
  return m;
}

Dataset limited(const Dataset& ds, std::size_t max_samples) {
  if (max_samples == 0 || max_samples >= ds.size()) return ds;
  Dataset out = ds;
  out.samples.resize(max_samples);
  return out;
}

json margins_json(const std::vector<MarginEstimate>& ms) {
  json arr = json::array();
  for (const MarginEstimate& m : ms)
    arr.push_back({{"id", m.id},
                   {"m_f", m.m_f},
                   {"certified_lower", m.certified_lower},
                   {"attack_upper", m.attack_upper},
                   {"capped", m.capped}});
  return arr;
}

int cmd_margin(const Options& o) {
  const Data d = load_data(o);
  const Dataset ds = limited(d.pick(eval_split(o, "train")), o.max_samples);
  const Checkpoint ck = load_checked(o.checkpoint, ds);
  const MarginOptions mo = margin_options(o);
  std::vector<MarginEstimate> ms = map_indices<MarginEstimate>(
      ds.size(),
      [&](std::size_t i) {
        const Sample& s = ds.samples[i];
        return estimate_bilateral_margin(ck.net, s.x, s.y, mo, s.id);
      },
      exec_of(o));
  Outputs out(o, "margin");
  out.add_json("margin.json", {{"tol", o.tol}, {"margins", margins_json(ms)}});
  out.commit();
  return 0;
}

int cmd_bound(const Options& o) {
  const Data d = load_data(o);
  const Dataset ds = limited(d.pick(eval_split(o, "train")), o.max_samples);
  const Checkpoint ck = load_checked(o.checkpoint, ds);
  const BoundReport b = bound_terms(ck.net, ds, margin_options(o), exec_of(o));
  Outputs out(o, "bound");
  out.add_json("bound.json", {{"complexity", b.complexity},
                              {"mean_inverse_margin", b.mean_inverse_margin},
                              {"n", b.n},
                              {"excluded", b.excluded},
                              {"margins", margins_json(b.margins)}});
  out.commit();
  std::cout << "complexity " << b.complexity << ", mean 1/m_F " << b.mean_inverse_margin
            << " over " << b.n << " samples (" << b.excluded << " excluded)\n";
  return 0;
}

int cmd_gradcheck(const Options& o) {
  GradcheckSuiteOptions go;
  go.fixtures = o.fixtures;
  go.seed = o.seed;
  const GradcheckSuiteReport r = run_gradcheck_suite(go);
  json kinds = json::object();
  for (const auto& [name, k] : r.kinds) {
    kinds[name] = {{"max_relative_error", k.max_relative_error},
                   {"worst", k.worst},
                   {"fixtures", k.fixtures},
                   {"resampled", k.resampled},
                   {"passed", k.passed}};
    std::cout << name << ": max relative error " << k.max_relative_error << " at " << k.worst
              << (k.passed ? "  ok" : "  FAILED") << '\n';
  }
  Outputs out(o, "gradcheck");
  out.add_json("gradcheck.json",
               {{"threshold", go.threshold}, {"passed", r.passed}, {"kinds", kinds}});
  out.commit();
  return r.passed ? 0 : 1;
}

int cmd_recipe(const Options& o) {
  const RecipeFiles r = run_recipe(o.recipe, o.seed, exec_of(o));
  Outputs out(o, "recipe " + o.recipe);
  for (const auto& [name, contents] : r.files) out.add_csv(name, contents);
  out.commit();
  std::cout << r.summary;
  if (!r.summary.empty() && r.summary.back() != '\n') std::cout << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"catlab: adversarial training laboratory"};
  app.require_subcommand(1);
  app.fallthrough();  // global flags may follow the subcommand
  app.set_config("--config", "", "key = value configuration file; flags win");
  Options o;

  app.add_option("--seed", o.seed, "global seed");
  app.add_option("--out", o.out, "output directory");
  app.add_option("--checkpoint", o.checkpoint, "checkpoint JSON");
  app.add_option("--dataset", o.dataset,
                 "linear-margin | blobs | idx:<images>:<labels> | csv:<path>");
  app.add_option("--test-dataset", o.test_dataset, "held-out set (same syntax as --dataset)");
  app.add_option("--split", o.split, "split evaluated by analysis commands: train | test");
  app.add_flag("--serial", o.serial, "run per-sample kernels serially");
  app.add_option("--n-per-class", o.n_per_class, "generated samples per class");
  app.add_option("--margin", o.margin, "linear-margin band half width");
  app.add_option("--dim", o.dim, "blob dimension");
  app.add_option("--classes", o.classes, "blob classes");
  app.add_option("--sigma", o.sigma, "blob standard deviation");
  app.add_option("--radius", o.radius, "blob center norm");
  app.add_option("--data-seed", o.data_seed, "generator seed (test set uses the next seeds)");

  auto* train = app.add_subcommand("train", "train a model; writes checkpoint.json, metrics.csv");
  train->add_option("--trainer", o.trainer, "natural | adv | trades | cat");
  train->add_option("--hidden", o.hidden, "hidden layer widths")->delimiter(',');
  train->add_option("--epochs", o.epochs);
  train->add_option("--batch-size", o.batch_size);
  train->add_option("--lr", o.lr);
  train->add_option("--momentum", o.momentum);
  train->add_option("--weight-decay", o.weight_decay);
  train->add_option("--lr-milestones", o.lr_milestones)->delimiter(',');
  train->add_option("--lr-decay", o.lr_decay);
  train->add_option("--attack-steps", o.attack_steps);
  train->add_option("--attack-step-size", o.attack_step_size, "0 selects max(2.5 eps/m, 1e-4)");
  train->add_option("--eps", o.eps, "fixed budget (adv, trades)");
  train->add_option("--eps-max", o.eps_max, "budget cap (cat)");
  train->add_option("--eta", o.eta, "budget increment (cat)");
  train->add_option("--c", o.c, "label smoothing weight (cat, adv with --label-smoothing)");
  train->add_option("--kappa", o.kappa, "margin floor of the mix loss");
  train->add_option("--loss", o.loss, "cat loss: ce | mix");
  train->add_option("--beta", o.beta, "TRADES weight");
  train->add_flag("--label-smoothing", o.label_smoothing, "adv: smooth labels at the fixed eps");

  auto add_attack_flags = [&](CLI::App* cmd) {
    cmd->add_option("--eps", o.eps, "attack budget");
    cmd->add_option("--steps", o.steps);
    cmd->add_option("--step-size", o.step_size, "0 selects eps/5");
    cmd->add_option("--attack-loss", o.attack_loss, "ce | cw");
    cmd->add_option("--attack-kappa", o.attack_kappa, "margin floor (default: none)");
    cmd->add_flag("--no-random-start", o.no_random_start);
  };
  auto* attack = app.add_subcommand("attack", "PGD every sample; writes attack.json");
  add_attack_flags(attack);
  auto* curve = app.add_subcommand("eval-curve", "robust accuracy sweep; writes curve.csv");
  curve->add_option("--eps-grid", o.eps_grid, "ascending, starting at 0")->delimiter(',');
  curve->add_option("--steps", o.steps);
  curve->add_option("--attack-kappa", o.attack_kappa, "margin floor (default: none)");
  curve->add_flag("--no-random-start", o.no_random_start);
  auto* transfer = app.add_subcommand("transfer", "transfer attack; writes transfer.json");
  transfer->add_option("--source", o.source, "checkpoint the examples are crafted against")
      ->required();
  add_attack_flags(transfer);
  auto* landscape = app.add_subcommand("landscape", "loss grid; writes landscape.csv");
  landscape->add_option("--index", o.index, "sample position in the split");
  landscape->add_option("--extent", o.extent);
  landscape->add_option("--grid-size", o.grid_size, "odd");
  auto add_margin_flags = [&](CLI::App* cmd) {
    cmd->add_option("--max-samples", o.max_samples, "0 for all");
    cmd->add_option("--tol", o.tol);
    cmd->add_option("--random-samples", o.random_samples);
    cmd->add_option("--cap", o.cap);
  };
  auto* margin = app.add_subcommand("margin", "bilateral margins; writes margin.json");
  add_margin_flags(margin);
  auto* bound = app.add_subcommand("bound", "generalization bound terms; writes bound.json");
  add_margin_flags(bound);
  auto* gradcheck = app.add_subcommand("gradcheck", "finite-difference check of every loss");
  gradcheck->add_option("--fixtures", o.fixtures, "random fixtures per loss kind");
  auto* recipe = app.add_subcommand("recipe", "run a canonical experiment");
  recipe->add_option("name", o.recipe, "fig1 | table1-trend | cat-vs-advtrain-curve | "
                                       "pgd-iteration-ablation | label-adaption-ablation")
      ->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (*train) return cmd_train(o);
    if (*attack) return cmd_attack(o);
    if (*curve) return cmd_eval_curve(o);
    if (*transfer) return cmd_transfer(o);
    if (*landscape) return cmd_landscape(o);
    if (*margin) return cmd_margin(o);
    if (*bound) return cmd_bound(o);
    if (*gradcheck) return cmd_gradcheck(o);
    if (*recipe) return cmd_recipe(o);
  } catch (const std::exception& e) {
    std::cerr << "catlab: error: " << e.what() << '\n';
    return 1;
  }
  return 1;
}
