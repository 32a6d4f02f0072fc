#include <doctest.h>

#include <sys/wait.h>

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "monogrove/types.hpp"

namespace fs = std::filesystem;

namespace {

struct RunResult {
  int exit_code;
  std::string out;
  std::string err;
};

const fs::path kWork = fs::temp_directory_path() / "monogrove_cli_fixture";

std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

RunResult run(const std::string& args) {
  fs::path out = kWork / "stdout.txt";
  fs::path err = kWork / "stderr.txt";
  std::string cmd = std::string(MONOGROVE_BIN) + " " + args + " > " + out.string() + " 2> " +
                    err.string();
  int status = std::system(cmd.c_str());
  RunResult r;
  r.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  r.out = read_file(out);
  r.err = read_file(err);
  return r;
}

// Two count features: the dominant one barely matters in the data, so an
// unconstrained additive fit violates the declared strong pair.
void write_fixture() {
  fs::remove_all(kWork);
  fs::create_directories(kWork);
  monogrove::Rng rng(42);
  std::string csv = "u,v,label\n";
  for (int i = 0; i < 240; ++i) {
    int u = static_cast<int>(rng.integer(4));
    int v = static_cast<int>(rng.integer(4));
    double score = 0.15 * u + 1.1 * v - 1.8;
    double p = 1.0 / (1.0 + std::exp(-score));
    csv += std::to_string(u) + "," + std::to_string(v) + "," +
           (rng.uniform() < p ? "1" : "0") + "\n";
  }
  std::ofstream(kWork / "data.csv") << csv;
  std::ofstream(kWork / "spec.json") << R"({
    "features": [
      {"name": "u", "kind": "count", "domain": [0, 3]},
      {"name": "v", "kind": "count", "domain": [0, 3]}
    ],
    "individual": ["u", "v"],
    "strong_pairs": [["u", "v"]],
    "subnet": {"hidden": [2]}
  })";
}

std::string fixture(const std::string& name) { return (kWork / name).string(); }

}  // namespace

TEST_CASE("cli end to end: train, certify, evaluate, export") {
  write_fixture();
  std::string base = "--data " + fixture("data.csv") + " --spec " + fixture("spec.json") +
                     " --target label --seed 11 --epochs 250 --lr 0.05";

  SUBCASE("constrained training certifies and writes its artifacts") {
    RunResult train = run("train " + base + " --model mgnam --out-dir " + fixture("mg"));
    CHECK(train.exit_code == 0);
    for (const char* f : {"model.json", "trace.csv", "metrics.json", "manifest.json"})
      CHECK(fs::exists(kWork / "mg" / f));
    std::string trace = read_file(kWork / "mg" / "trace.csv");
    CHECK(trace.rfind("round,lambda1,lambda2,lambda3,loss,h1,h2,h3,metric,auc", 0) == 0);

    RunResult cert = run("certify --model " + fixture("mg/model.json") + " --spec " +
                         fixture("spec.json") + " --out-dir " + fixture("mg"));
    CHECK(cert.exit_code == 0);
    CHECK(cert.out.find("certification: PASS") != std::string::npos);
    CHECK(fs::exists(kWork / "mg" / "certification.json"));

    RunResult eval = run("evaluate --model " + fixture("mg/model.json") + " --data " +
                         fixture("data.csv") + " --target label --seed 11 --out-dir " +
                         fixture("mg"));
    CHECK(eval.exit_code == 0);
    CHECK(eval.out.find("auc") != std::string::npos);

    RunResult tables = run("export-tables --model " + fixture("mg/model.json") + " --out-dir " +
                           fixture("mg"));
    CHECK(tables.exit_code == 0);
    std::string table_csv = read_file(kWork / "mg" / "tables.csv");
    CHECK(table_csv.rfind("group,point,features,value", 0) == 0);
    // 4x4 lattice plus header
    CHECK(std::count(table_csv.begin(), table_csv.end(), '\n') == 17);

    RunResult curves = run("export-curves --model " + fixture("mg/model.json") + " --out-dir " +
                           fixture("mg"));
    CHECK(curves.exit_code == 0);
    CHECK(read_file(kWork / "mg" / "curves.csv").rfind("feature,x,value", 0) == 0);

    RunResult bad_group = run("export-tables --model " + fixture("mg/model.json") +
                              " --group nope --out-dir " + fixture("mg"));
    CHECK(bad_group.exit_code == 1);
  }

  SUBCASE("unconstrained training passes but certification then fails") {
    RunResult train = run("train " + base + " --model nam --out-dir " + fixture("nam"));
    CHECK(train.exit_code == 0);  // no penalties requested, nothing to escalate
    RunResult cert = run("certify --model " + fixture("nam/model.json") + " --spec " +
                         fixture("spec.json") + " --out-dir " + fixture("nam"));
    CHECK(cert.exit_code == 2);
    CHECK(cert.out.find("FAIL") != std::string::npos);
    CHECK(cert.out.find("witness") != std::string::npos);

    RunResult discrete = run("certify --discrete --model " + fixture("nam/model.json") +
                             " --spec " + fixture("spec.json") + " --out-dir " + fixture("nam"));
    CHECK(discrete.exit_code == 2);
  }

  SUBCASE("two identical runs produce byte-identical models") {
    RunResult a = run("train " + base + " --model mgnam --out-dir " + fixture("da"));
    RunResult b = run("train " + base + " --model mgnam --out-dir " + fixture("db"));
    CHECK(a.exit_code == 0);
    CHECK(b.exit_code == 0);
    std::string ma = read_file(kWork / "da" / "model.json");
    std::string mb = read_file(kWork / "db" / "model.json");
    CHECK(!ma.empty());
    CHECK(ma == mb);
  }

  SUBCASE("io and usage errors exit 1 and nonzero") {
    RunResult missing = run("train --data " + fixture("absent.csv") + " --target label");
    CHECK(missing.exit_code == 1);
    CHECK(missing.err.find("error:") != std::string::npos);
    RunResult usage = run("certify");
    CHECK(usage.exit_code != 0);
  }
}
