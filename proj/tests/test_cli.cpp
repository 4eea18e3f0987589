#include <doctest.h>

#include <sys/wait.h>

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

#include "catlab/checkpoint.hpp"
#include "support.hpp"

using namespace catlab;
namespace fs = std::filesystem;
using json = nlohmann::json;

namespace {

struct Sandbox {
  fs::path dir;
  explicit Sandbox(const std::string& name)
      : dir(fs::temp_directory_path() / ("catlab_cli_" + name)) {
    fs::remove_all(dir);
    fs::create_directories(dir);
  }
  ~Sandbox() { fs::remove_all(dir); }

  // runs the binary, capturing stdout and stderr in dir/log
  int run(const std::string& args) const {
    const std::string cmd =
        std::string(CATLAB_BIN) + " " + args + " > '" + (dir / "log").string() + "' 2>&1";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  }
  std::string log() const { return read_file(dir / "log"); }
  std::string path(const std::string& name) const { return (dir / name).string(); }
  json load(const std::string& name) const { return json::parse(read_file(dir / name)); }
};

std::string last_line(const std::string& text) {
  std::istringstream in(text);
  std::string line, last;
  while (std::getline(in, line))
    if (!line.empty()) last = line;
  return last;
}

const char* kTrain = "train --epochs 30 --lr 0.05 --batch-size 32";

}  // namespace

TEST_CASE("train on the linear-margin set and reproduce it bitwise") {
  Sandbox sb("train");
  REQUIRE(sb.run(std::string(kTrain) + " --seed 3 --out " + sb.path("a")) == 0);
  REQUIRE(sb.run(std::string(kTrain) + " --seed 3 --out " + sb.path("b")) == 0);
  const std::string metrics = read_file(sb.path("a/metrics.csv"));
  CHECK(metrics.rfind("epoch,clean_train_acc", 0) == 0);
  CHECK(last_line(metrics).rfind("30,1,", 0) == 0);
  CHECK(read_file(sb.path("a/checkpoint.json")) == read_file(sb.path("b/checkpoint.json")));
  CHECK(metrics == read_file(sb.path("b/metrics.csv")));

  const json meta = sb.load("a/metrics.csv.meta.json");
  CHECK(meta["format_version"] == 1);
  CHECK(meta["seed"] == 3);
  CHECK(meta["command"] == "train");
  CHECK(meta["config_hash"].is_string());

  REQUIRE(sb.run(std::string(kTrain) + " --seed 4 --out " + sb.path("c")) == 0);
  CHECK(read_file(sb.path("a/checkpoint.json")) != read_file(sb.path("c/checkpoint.json")));
}

TEST_CASE("analysis commands") {
  Sandbox sb("analysis");
  REQUIRE(sb.run(std::string(kTrain) + " --seed 1 --out " + sb.path("m")) == 0);
  const std::string ck = sb.path("m/checkpoint.json");
  const std::string before = read_file(ck);

  SUBCASE("eval-curve at eps 0 is the clean accuracy") {
    REQUIRE(sb.run("eval-curve --checkpoint " + ck + " --eps-grid 0 --out " + sb.path("o")) == 0);
    const std::string csv = read_file(sb.path("o/curve.csv"));
    const double clean = sb.load("o/curve.csv.meta.json")["clean_acc"].get<double>();
    std::ostringstream want;
    want.precision(17);
    want << "eps,pgd_acc,cw_acc\n0," << clean << ',' << clean << '\n';
    CHECK(csv == want.str());
  }
  SUBCASE("attack and self-transfer agree") {
    REQUIRE(sb.run("attack --checkpoint " + ck + " --eps 1.5 --out " + sb.path("o")) == 0);
    REQUIRE(sb.run("transfer --checkpoint " + ck + " --source " + ck + " --eps 1.5 --out " +
                   sb.path("o")) == 0);
    const json a = sb.load("o/attack.json");
    CHECK(a["results"].size() == 400);
    for (const json& r : a["results"]) CHECK(r["linf_norm"].get<double>() <= 1.5 + 1e-12);
    CHECK(a["robust_accuracy"] == sb.load("o/transfer.json")["robust_accuracy"]);
    CHECK(a["command"] == "attack");
  }
  SUBCASE("landscape writes its grid and directions") {
    REQUIRE(sb.run("landscape --checkpoint " + ck + " --grid-size 5 --extent 1 --out " +
                   sb.path("o")) == 0);
    const std::string csv = read_file(sb.path("o/landscape.csv"));
    CHECK(std::count(csv.begin(), csv.end(), '\n') == 26);
    const json meta = sb.load("o/landscape.csv.meta.json");
    CHECK(meta["u"].size() == 2);
    CHECK(meta["v"].size() == 2);
    CHECK(sb.run("landscape --checkpoint " + ck + " --grid-size 4 --out " + sb.path("p")) != 0);
  }
  SUBCASE("margin and bound") {
    REQUIRE(sb.run("margin --checkpoint " + ck + " --max-samples 5 --out " + sb.path("o")) == 0);
    const json m = sb.load("o/margin.json");
    REQUIRE(m["margins"].size() == 5);
    for (const json& e : m["margins"])
      CHECK(e["certified_lower"].get<double>() <= e["attack_upper"].get<double>());
    REQUIRE(sb.run("bound --checkpoint " + ck + " --max-samples 5 --out " + sb.path("o")) == 0);
    CHECK(sb.load("o/bound.json")["complexity"].get<double>() > 0.0);
  }
  CHECK(read_file(ck) == before);
}

TEST_CASE("bound refuses a model with no correctly classified sample") {
  Sandbox sb("bound");
  {
    std::ofstream(sb.path("d.csv")) << "label,f0,f1\n1,0.5,0.5\n1,-0.5,1.0\n0,3,3\n";
  }
  Vector b(2);
  b << 1.0, 0.0;
  Matrix w(2, 2);
  w << 0.0, 0.0, 0.0, 0.0;
  save_checkpoint(sb.path("ck.json"), {testing::single_layer(w, b), 0, 0, "", std::nullopt});
  // the only class-0 sample is excluded with --max-samples 2
  const int rc = sb.run("bound --checkpoint " + sb.path("ck.json") + " --dataset csv:" +
                        sb.path("d.csv") + " --split train --max-samples 2 --out " + sb.path("o"));
  CHECK(rc != 0);
  CHECK(sb.log().find("training error 0") != std::string::npos);
  CHECK_FALSE(fs::exists(sb.path("o/bound.json")));
}

TEST_CASE("errors leave no outputs behind") {
  Sandbox sb("errors");
  CHECK(sb.run("attack --checkpoint " + sb.path("missing.json") + " --out " + sb.path("o")) != 0);
  CHECK(sb.log().find("catlab: error:") != std::string::npos);
  CHECK_FALSE(fs::exists(sb.path("o")));
  CHECK(sb.run("train --dataset idx:" + sb.path("no_img") + ":" + sb.path("no_lbl") + " --out " +
               sb.path("o")) != 0);
  CHECK_FALSE(fs::exists(sb.path("o/checkpoint.json")));
  CHECK(sb.run("train --trainer fgsm --out " + sb.path("o")) != 0);
  CHECK(sb.run("") != 0);
}

TEST_CASE("config files fill in flags that are not given") {
  Sandbox sb("config");
  {
    std::ofstream(sb.path("run.toml")) << "seed = 5\n";
  }
  const std::string base = "train --epochs 1 --config " + sb.path("run.toml");
  REQUIRE(sb.run(base + " --out " + sb.path("a")) == 0);
  CHECK(sb.load("a/metrics.csv.meta.json")["seed"] == 5);
  REQUIRE(sb.run(base + " --seed 9 --out " + sb.path("b")) == 0);
  CHECK(sb.load("b/metrics.csv.meta.json")["seed"] == 9);
}

TEST_CASE("gradcheck command") {
  Sandbox sb("gradcheck");
  REQUIRE(sb.run("gradcheck --fixtures 10 --out " + sb.path("o")) == 0);
  const json g = sb.load("o/gradcheck.json");
  CHECK(g["passed"] == true);
  for (const char* k : {"ce", "kl", "cw_margin", "mix"})
    CHECK(g["kinds"][k]["max_relative_error"].get<double>() < 1e-4);
}
