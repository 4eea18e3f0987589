#include "catlab/recipes.hpp"

#include <sstream>

#include "catlab/errors.hpp"
#include "catlab/rng.hpp"

namespace catlab {
namespace {

std::uint64_t eval_seed(std::uint64_t seed) { return mix64(seed ^ hash_purpose("evaluation")); }

std::ostringstream csv_stream() {
  std::ostringstream out;
  out.precision(17);
  return out;
}

Fig1Row fig1_row(const std::string& method, const TrainReport& r, const Dataset& train,
                 const Dataset& test) {
  const Layer& l = r.net.layer(0);
  Fig1Row row;
  row.method = method;
  row.clean_train_acc = accuracy(r.net, train);
  row.clean_test_acc = accuracy(r.net, test);
  row.normal = (l.weight.row(1) - l.weight.row(0)).transpose();
  row.offset = l.bias[1] - l.bias[0];
  row.mean_eps = r.epochs.empty() ? 0.0 : r.epochs.back().mean_eps;
  return row;
}

}  // namespace

const Fig1Row& Fig1Result::row(const std::string& method) const {
  for (const Fig1Row& r : rows)
    if (r.method == method) return r;
  throw ConfigError("no fig1 row named '" + method + "'");
}

Fig1Result run_fig1(const Fig1Protocol& p, std::uint64_t seed, Exec exec) {
  Dataset train = gen_linear_margin(p.n_per_class, p.margin, p.train_data_seed);
  Dataset test = gen_linear_margin(p.n_per_class, p.margin, p.test_data_seed);
  test.split = Split::test;
  const std::vector<std::size_t> arch{2, 2};

  TrainConfig cfg;
  cfg.epochs = p.epochs;
  cfg.batch_size = p.batch_size;
  cfg.lr = p.lr;
  cfg.lr_milestones = p.lr_milestones;
  cfg.attack_steps = p.attack_steps;
  cfg.seed = seed;
  cfg.exec = exec;
  cfg.eps_max = p.cat_eps_max;
  cfg.eta = p.cat_eta;
  cfg.c = p.cat_c;

  Fig1Result out;
  auto fresh = [&] { return init_network(arch, 2, seed); };
  out.rows.push_back(fig1_row("natural", train_natural(fresh(), train, &test, cfg), train, test));
  out.rows.push_back(
      fig1_row("adv-small", train_adv(fresh(), train, &test, cfg, p.small_eps), train, test));
  out.rows.push_back(
      fig1_row("adv-large", train_adv(fresh(), train, &test, cfg, p.large_eps), train, test));
  cfg.loss = CatLoss::ce;
  out.rows.push_back(fig1_row("cat-ce", train_cat(fresh(), train, &test, cfg), train, test));
  cfg.loss = CatLoss::mix;
  out.rows.push_back(fig1_row("cat-mix", train_cat(fresh(), train, &test, cfg), train, test));
  return out;
}

TrainConfig DeskProtocol::base_config(std::uint64_t seed, Exec exec) const {
  TrainConfig cfg;
  cfg.epochs = epochs;
  cfg.batch_size = batch_size;
  cfg.lr = lr;
  cfg.weight_decay = weight_decay;
  cfg.lr_milestones = lr_milestones;
  cfg.attack_steps = attack_steps;
  cfg.eps_max = cat_eps_max;
  cfg.eta = cat_eta;
  cfg.c = cat_c;
  cfg.seed = seed;
  cfg.exec = exec;
  return cfg;
}

namespace {

Dataset mixture_blobs(const DeskProtocol& p, std::size_t per_class, std::uint64_t seed) {
  const std::size_t m = p.clusters_per_class;
  if (m == 0) throw ConfigError("clusters_per_class must be positive");
  if (per_class % m != 0) throw ConfigError("samples per class must divide into the clusters");
  const auto centers = random_centers(2 * m, p.dim, p.center_radius, p.center_seed);
  Dataset ds = gen_gaussian_blobs(per_class / m, 2 * m, p.dim, centers, p.sigma, seed);
  for (Sample& s : ds.samples) s.y %= 2;
  ds.num_classes = 2;
  return ds;
}

}  // namespace

std::pair<Dataset, Dataset> desk_data(const DeskProtocol& p) {
  Dataset train = mixture_blobs(p, p.train_per_class, p.train_data_seed);
  Dataset test = mixture_blobs(p, p.test_per_class, p.test_data_seed);
  test.split = Split::test;
  return {std::move(train), std::move(test)};
}

DeskModel train_desk(const DeskProtocol& p, const Dataset& train, TrainerKind trainer,
                     double eps, std::uint64_t seed, Exec exec, double c_override,
                     bool label_smoothing) {
  TrainConfig cfg = p.base_config(seed, exec);
  if (c_override >= 0.0) cfg.c = c_override;
  cfg.label_smoothing = label_smoothing;
  const auto arch = p.arch();
  Network init = init_network(arch, 2, seed);
  std::ostringstream name;
  switch (trainer) {
    case TrainerKind::adv: {
      name << "adv-" << eps << (label_smoothing ? "-ls" : "");
      return {name.str(), train_adv(std::move(init), train, nullptr, cfg, eps).net, eps};
    }
    case TrainerKind::cat: {
      cfg.eps_max = eps;
      name << "cat-c" << cfg.c << "-" << eps;
      return {name.str(), train_cat(std::move(init), train, nullptr, cfg).net, eps};
    }
    default:
      throw ConfigError("desk protocol trains adv or cat models only");
  }
}

namespace {

FixedEpsRow measure(const DeskModel& m, const Dataset& train, const Dataset& test, double probe,
                    std::uint64_t seed, Exec exec) {
  const AttackSpec spec = AttackSpec::evaluation(probe);
  FixedEpsRow r;
  r.train_eps = m.train_eps;
  r.clean_train_acc = accuracy(m.net, train);
  r.clean_test_acc = accuracy(m.net, test);
  r.robust_train_acc = robust_accuracy(m.net, train, spec, eval_seed(seed), exec);
  r.robust_test_acc = robust_accuracy(m.net, test, spec, eval_seed(seed), exec);
  r.complexity = complexity_proxy(m.net);
  return r;
}

EvalOptions eval_options(std::uint64_t seed, Exec exec) {
  EvalOptions eo;
  eo.seed = eval_seed(seed);
  eo.exec = exec;
  return eo;
}

}  // namespace

Table1Result run_table1(const DeskProtocol& p, std::uint64_t seed, Exec exec) {
  const auto [train, test] = desk_data(p);
  Table1Result out;
  for (double eps : p.fixed_eps) {
    out.models.push_back(train_desk(p, train, TrainerKind::adv, eps, seed, exec));
    out.rows.push_back(measure(out.models.back(), train, test, p.probe_eps, seed, exec));
  }
  out.models.push_back(train_desk(p, train, TrainerKind::cat, p.cat_eps_max, seed, exec));
  out.cat = measure(out.models.back(), train, test, p.probe_eps, seed, exec);
  return out;
}

CurveComparison compare_curves(const Network& cat, const Network& adv, const Dataset& test,
                               const std::vector<double>& grid, std::uint64_t seed, Exec exec) {
  const EvalOptions eo = eval_options(seed, exec);
  CurveComparison c{robust_curve(cat, test, grid, eo), robust_curve(adv, test, grid, eo), 0};
  for (std::size_t i = 0; i < grid.size(); ++i)
    if (c.cat.pgd_acc[i] >= c.adv.pgd_acc[i]) ++c.cat_at_least_adv;
  return c;
}

StepAblation pgd_step_ablation(const Network& net, const Dataset& test, double eps,
                               const std::vector<int>& steps, std::uint64_t seed, Exec exec) {
  StepAblation a;
  a.eps = eps;
  a.steps = steps;
  for (int m : steps) {
    AttackSpec spec = AttackSpec::evaluation(eps);
    spec.steps = m;
    a.robust_acc.push_back(robust_accuracy(net, test, spec, eval_seed(seed), exec));
  }
  return a;
}

std::vector<LabelAblationRow> run_label_ablation(const DeskProtocol& p, std::uint64_t seed,
                                                 Exec exec) {
  const auto [train, test] = desk_data(p);
  const EvalOptions eo = eval_options(seed, exec);
  const double eps = p.cat_eps_max;
  std::vector<LabelAblationRow> rows;
  auto add = [&](const std::string& method, const DeskModel& m) {
    rows.push_back({method, robust_curve(m.net, test, p.curve_grid, eo)});
  };
  add("adv", train_desk(p, train, TrainerKind::adv, eps, seed, exec));
  add("adv+ls", train_desk(p, train, TrainerKind::adv, eps, seed, exec, -1.0, true));
  add("adp-adv", train_desk(p, train, TrainerKind::cat, eps, seed, exec, 0.0));
  add("cat", train_desk(p, train, TrainerKind::cat, eps, seed, exec));
  return rows;
}

std::vector<std::string> recipe_names() {
  return {"fig1", "table1-trend", "cat-vs-advtrain-curve", "pgd-iteration-ablation",
          "label-adaption-ablation"};
}

RecipeFiles run_recipe(const std::string& name, std::uint64_t seed, Exec exec) {
  RecipeFiles out;
  const DeskProtocol desk;
  if (name == "fig1") {
    const Fig1Result r = run_fig1(Fig1Protocol{}, seed, exec);
    auto csv = csv_stream();
    csv << "method,clean_train_acc,clean_test_acc,w0,w1,offset,mean_eps\n";
    std::ostringstream summary;
    for (const Fig1Row& row : r.rows) {
      csv << row.method << ',' << row.clean_train_acc << ',' << row.clean_test_acc << ','
          << row.normal[0] << ',' << row.normal[1] << ',' << row.offset << ',' << row.mean_eps
          << '\n';
      summary << row.method << ": test acc " << row.clean_test_acc << '\n';
    }
    out.files.emplace_back("fig1.csv", csv.str());
    out.summary = summary.str();
  } else if (name == "table1-trend") {
    const Table1Result r = run_table1(desk, seed, exec);
    auto csv = csv_stream();
    csv << "model,train_eps,clean_train_acc,clean_test_acc,robust_train_acc,robust_test_acc,"
           "complexity\n";
    auto put = [&](const std::string& model, const FixedEpsRow& row) {
      csv << model << ',' << row.train_eps << ',' << row.clean_train_acc << ','
          << row.clean_test_acc << ',' << row.robust_train_acc << ',' << row.robust_test_acc
          << ',' << row.complexity << '\n';
    };
    for (const FixedEpsRow& row : r.rows) put("adv", row);
    put("cat", r.cat);
    out.files.emplace_back("table1.csv", csv.str());
    out.summary = "fixed-eps robust train/test accuracy at eps " + std::to_string(desk.probe_eps);
  } else if (name == "cat-vs-advtrain-curve") {
    const auto [train, test] = desk_data(desk);
    const DeskModel cat = train_desk(desk, train, TrainerKind::cat, desk.cat_eps_max, seed, exec);
    const DeskModel adv = train_desk(desk, train, TrainerKind::adv, desk.cat_eps_max, seed, exec);
    const CurveComparison c = compare_curves(cat.net, adv.net, test, desk.curve_grid, seed, exec);
    out.files.emplace_back("curve_cat.csv", curve_csv(c.cat));
    out.files.emplace_back("curve_adv.csv", curve_csv(c.adv));
    out.summary = "cat >= adv at " + std::to_string(c.cat_at_least_adv) + " of " +
                  std::to_string(desk.curve_grid.size()) + " grid points";
  } else if (name == "pgd-iteration-ablation") {
    const auto [train, test] = desk_data(desk);
    const DeskModel cat = train_desk(desk, train, TrainerKind::cat, desk.cat_eps_max, seed, exec);
    const StepAblation a =
        pgd_step_ablation(cat.net, test, desk.cat_eps_max, desk.ablation_steps, seed, exec);
    auto csv = csv_stream();
    csv << "steps,robust_acc\n";
    for (std::size_t i = 0; i < a.steps.size(); ++i)
      csv << a.steps[i] << ',' << a.robust_acc[i] << '\n';
    out.files.emplace_back("pgd_ablation.csv", csv.str());
    out.summary = "robust accuracy at eps " + std::to_string(a.eps) + " vs attack steps";
  } else if (name == "label-adaption-ablation") {
    const auto rows = run_label_ablation(desk, seed, exec);
    auto csv = csv_stream();
    csv << "method,eps,pgd_acc,cw_acc\n";
    for (const LabelAblationRow& r : rows)
      for (std::size_t i = 0; i < r.curve.eps_grid.size(); ++i)
        csv << r.method << ',' << r.curve.eps_grid[i] << ',' << r.curve.pgd_acc[i] << ','
            << r.curve.cw_acc[i] << '\n';
    out.files.emplace_back("label_ablation.csv", csv.str());
    out.summary = "adv, adv+ls, adp-adv and cat robust curves";
  } else {
    std::string known;
    for (const auto& n : recipe_names()) known += (known.empty() ? "" : ", ") + n;
    throw ConfigError("unknown recipe '" + name + "' (known: " + known + ")");
  }
  return out;
}

}  // namespace catlab
