#pragma once

// Canonical experiment protocols shared by the `recipe` subcommand and the
// acceptance suite. Every protocol is a plain struct of fixed defaults so a
// run is fully determined by it and the global seed.

#include <cstddef>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "catlab/analysis.hpp"
#include "catlab/data.hpp"
#include "catlab/trainers.hpp"

namespace catlab {

struct Fig1Protocol {
  std::size_t n_per_class = 200;  // 400 train, 400 test
  double margin = 1.75;
  std::uint64_t train_data_seed = 1;
  std::uint64_t test_data_seed = 2;
  std::size_t epochs = 100;
  std::size_t batch_size = 32;
  double lr = 0.05;
  std::vector<std::size_t> lr_milestones{50, 75};
  int attack_steps = 10;
  double small_eps = 1.0;
  double large_eps = 4.0;
  double cat_eps_max = 4.0;
  double cat_eta = 0.05;
  double cat_c = 10.0;
};

struct Fig1Row {
  std::string method;
  double clean_train_acc = 0.0;
  double clean_test_acc = 0.0;
  Vector normal;  // logit-difference weight (class 1 minus class 0)
  double offset = 0.0;
  double mean_eps = 0.0;
};

struct Fig1Result {
  std::vector<Fig1Row> rows;  // natural, adv-small, adv-large, cat-ce, cat-mix
  const Fig1Row& row(const std::string& method) const;
};

Fig1Result run_fig1(const Fig1Protocol& p, std::uint64_t seed, Exec exec = Exec::parallel);

/// Two classes, each a mixture of Gaussian blobs, standing in for a small
/// image subset; trained with a two-hidden-layer ReLU network.
struct DeskProtocol {
  std::size_t dim = 10;
  double center_radius = 0.2;
  double sigma = 0.05;
  std::size_t clusters_per_class = 4;  // blob k belongs to class k mod 2
  std::size_t train_per_class = 1000;
  std::size_t test_per_class = 500;
  std::uint64_t center_seed = 11;
  std::uint64_t train_data_seed = 21;
  std::uint64_t test_data_seed = 22;
  std::size_t hidden = 64;
  std::size_t epochs = 30;
  std::size_t batch_size = 64;
  double lr = 0.05;
  double weight_decay = 5e-4;
  std::vector<std::size_t> lr_milestones{20, 25};
  int attack_steps = 10;
  std::vector<double> fixed_eps{0.01, 0.02, 0.03};
  double cat_eps_max = 0.03;
  double cat_eta = 0.005;
  double cat_c = 10.0;
  double probe_eps = 0.01;  // robust accuracy reported in the fixed-eps table
  std::vector<double> curve_grid{0.0,   0.005, 0.01,  0.015, 0.02, 0.025,
                                 0.03,  0.035, 0.04,  0.045, 0.05};
  std::vector<int> ablation_steps{10, 20, 50, 100, 200, 500};

  std::vector<std::size_t> arch() const { return {dim, hidden, hidden, 2}; }
  TrainConfig base_config(std::uint64_t seed, Exec exec) const;
};

std::pair<Dataset, Dataset> desk_data(const DeskProtocol& p);

struct DeskModel {
  std::string name;
  Network net;
  double train_eps = 0.0;  // fixed eps, or eps_max for CAT
};

/// Trains one model of the desk protocol; `trainer` is adv or cat.
DeskModel train_desk(const DeskProtocol& p, const Dataset& train, TrainerKind trainer,
                     double eps, std::uint64_t seed, Exec exec = Exec::parallel,
                     double c_override = -1.0, bool label_smoothing = false);

struct FixedEpsRow {
  double train_eps = 0.0;
  double clean_train_acc = 0.0;
  double clean_test_acc = 0.0;
  double robust_train_acc = 0.0;  // at probe_eps
  double robust_test_acc = 0.0;
  double complexity = 0.0;
};

struct Table1Result {
  std::vector<FixedEpsRow> rows;
  FixedEpsRow cat;  // CAT-CE at eps_max, same measurements
  std::vector<DeskModel> models;  // fixed-eps models then CAT
};

Table1Result run_table1(const DeskProtocol& p, std::uint64_t seed, Exec exec = Exec::parallel);

struct CurveComparison {
  RobustCurve cat;
  RobustCurve adv;
  std::size_t cat_at_least_adv = 0;  // grid points where cat pgd_acc >= adv pgd_acc
};

CurveComparison compare_curves(const Network& cat, const Network& adv, const Dataset& test,
                               const std::vector<double>& grid, std::uint64_t seed,
                               Exec exec = Exec::parallel);

struct StepAblation {
  double eps = 0.0;
  std::vector<int> steps;
  std::vector<double> robust_acc;
};

StepAblation pgd_step_ablation(const Network& net, const Dataset& test, double eps,
                               const std::vector<int>& steps, std::uint64_t seed,
                               Exec exec = Exec::parallel);

struct LabelAblationRow {
  std::string method;  // adv, adv+ls, adp-adv, cat
  RobustCurve curve;
};

std::vector<LabelAblationRow> run_label_ablation(const DeskProtocol& p, std::uint64_t seed,
                                                 Exec exec = Exec::parallel);

/// Serialised outputs of a named recipe: (file name, contents) pairs.
struct RecipeFiles {
  std::vector<std::pair<std::string, std::string>> files;
  std::string summary;
};

std::vector<std::string> recipe_names();
RecipeFiles run_recipe(const std::string& name, std::uint64_t seed, Exec exec = Exec::parallel);

}  // namespace catlab
