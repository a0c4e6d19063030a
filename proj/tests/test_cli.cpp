// End-to-end checks of the command line tool: files written, exit codes,
// and byte-level reproducibility under a fixed seed.

#include <sys/wait.h>

#include <catch2/catch_amalgamated.hpp>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <nlohmann/json.hpp>
#include <sstream>
#include <string>

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

int run_cli(const std::string& args) {
  const std::string command =
      std::string(GTSEL_CLI_PATH) + " " + args + " > /dev/null 2>&1";
  const int status = std::system(command.c_str());
  REQUIRE(status != -1);
  REQUIRE(WIFEXITED(status));
  return WEXITSTATUS(status);
}

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(in.good());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

json parse_file(const fs::path& path) { return json::parse(slurp(path)); }

fs::path fresh_dir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / "gtsel_cli" / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

long line_count(const std::string& text) {
  long lines = 0;
  for (char c : text) {
    lines += c == '\n';
  }
  return lines;
}

}  // namespace

TEST_CASE("simulate writes dataset, truth and manifest reproducibly") {
  const fs::path dir = fresh_dir("simulate");
  const std::string out = (dir / "sim.csv").string();
  REQUIRE(run_cli("simulate --n 120 --p 6 --pool-size 3 --seed 9 --out " +
                  out) == 0);

  const std::string data = slurp(out);
  CHECK(data.rfind("pool_id,z,x1,x2,x3,x4,x5,x6\n", 0) == 0);
  CHECK(line_count(data) == 121);

  const std::string truth = slurp(dir / "sim.truth.csv");
  CHECK(truth.rfind("id,y_true\n", 0) == 0);
  CHECK(line_count(truth) == 121);

  const json manifest = parse_file(dir / "sim.csv.manifest.json");
  CHECK(manifest.at("command") == "simulate");
  CHECK(manifest.at("seed") == 9);
  CHECK(manifest.at("config").at("n") == 120);
  CHECK(manifest.contains("version"));
  CHECK(manifest.contains("timestamp"));

  const std::string out2 = (dir / "sim2.csv").string();
  REQUIRE(run_cli("simulate --n 120 --p 6 --pool-size 3 --seed 9 --out " +
                  out2) == 0);
  CHECK(slurp(out2) == data);
  CHECK(slurp(dir / "sim2.truth.csv") == truth);

  const std::string out3 = (dir / "sim3.csv").string();
  REQUIRE(run_cli("simulate --n 120 --p 6 --pool-size 3 --seed 10 --out " +
                  out3) == 0);
  CHECK(slurp(out3) != data);
}

TEST_CASE("simulate validates the coefficient list length") {
  const fs::path dir = fresh_dir("simulate_theta");
  const std::string out = (dir / "sim.csv").string();
  CHECK(run_cli("simulate --n 50 --p 4 --theta -4,1.5,0 --out " + out) == 2);
  REQUIRE(run_cli("simulate --n 50 --p 4 --theta -4,1.5,0,0,2 --seed 2 --out " +
                  out) == 0);
  const json manifest = parse_file(dir / "sim.csv.manifest.json");
  CHECK(manifest.at("config").at("alpha") == -4.0);
  CHECK(manifest.at("config").at("beta") == json({1.5, 0.0, 0.0, 2.0}));
}

TEST_CASE("infer reports a criterion-chosen penalty consistently") {
  const fs::path dir = fresh_dir("infer");
  const std::string data = (dir / "data.csv").string();
  REQUIRE(run_cli("simulate --n 400 --pool-size 2 --seed 11 --out " + data) ==
          0);

  const std::string aic_out = (dir / "aic.json").string();
  REQUIRE(run_cli("infer --data " + data +
                  " --lambda aic --method all --seed 5 --out " + aic_out) == 0);
  const json report = parse_file(aic_out);
  CHECK(report.at("schema") == "gtsel-infer-1");
  CHECK(report.at("lambda_rule") == "aic");
  CHECK(report.at("lambda").get<double>() > 0.0);
  CHECK(report.at("converged").get<bool>());
  REQUIRE(report.contains("criterion_path"));
  CHECK(report.at("criterion_path").size() == 25);
  REQUIRE_FALSE(report.at("model").empty());
  for (const json& column : report.at("model")) {
    CHECK(column.get<int>() >= 1);  // columns are 1-based in reports
  }
  REQUIRE_FALSE(report.at("intervals").empty());
  for (const json& ci : report.at("intervals")) {
    CHECK(ci.contains("method"));
    CHECK(ci.contains("lower"));
    CHECK(ci.contains("upper"));
  }

  // Passing the chosen value explicitly must reproduce the same inference.
  const std::string fixed_out = (dir / "fixed.json").string();
  std::ostringstream lambda;
  lambda.precision(17);
  lambda << report.at("lambda").get<double>();
  REQUIRE(run_cli("infer --data " + data + " --lambda " + lambda.str() +
                  " --method all --seed 5 --out " + fixed_out) == 0);
  const json fixed = parse_file(fixed_out);
  CHECK(fixed.at("lambda_rule") == "fixed");
  CHECK(fixed.at("model") == report.at("model"));
  CHECK(fixed.at("intervals") == report.at("intervals"));

  // Re-running the criterion path byte-identically reproduces the report.
  const std::string again = (dir / "again.json").string();
  REQUIRE(run_cli("infer --data " + data +
                  " --lambda aic --method all --seed 5 --out " + again) == 0);
  CHECK(slurp(again) == slurp(aic_out));
}

TEST_CASE("infer keeps the report valid when nothing is selected") {
  const fs::path dir = fresh_dir("infer_empty");
  const std::string data = (dir / "data.csv").string();
  REQUIRE(run_cli("simulate --n 80 --p 4 --seed 3 --out " + data) == 0);
  const std::string out = (dir / "report.json").string();
  REQUIRE(run_cli("infer --data " + data +
                  " --lambda 400 --method all --out " + out) == 0);
  const json report = parse_file(out);
  CHECK(report.at("model").empty());
  CHECK(report.at("signs").empty());
  CHECK(report.at("beta_hat").empty());
  CHECK(report.at("intervals").is_array());
}

TEST_CASE("exit codes separate usage, validation and io failures") {
  const fs::path dir = fresh_dir("exit_codes");
  const std::string out = (dir / "r.json").string();

  CHECK(run_cli("--help") == 0);
  CHECK(run_cli("infer --help") == 0);
  CHECK(run_cli("") == 2);                       // missing subcommand
  CHECK(run_cli("infer --out " + out) == 2);     // missing --data
  CHECK(run_cli("infer --data x --frob 1 --out " + out) == 2);
  CHECK(run_cli("study --preset nope --out-dir " + dir.string()) == 2);

  CHECK(run_cli("infer --data " + (dir / "missing.csv").string() + " --out " +
                out) == 3);

  std::ofstream bad_header(dir / "bad_header.csv");
  bad_header << "pool,z,x1\ng1,0,0.1\n";
  bad_header.close();
  CHECK(run_cli("infer --data " + (dir / "bad_header.csv").string() +
                " --lambda 1 --out " + out) == 2);

  std::ofstream bad_row(dir / "bad_row.csv");
  bad_row << "pool_id,z,x1\ng1,0,0.1\ng2,0\n";
  bad_row.close();
  CHECK(run_cli("infer --data " + (dir / "bad_row.csv").string() +
                " --lambda 1 --out " + out) == 2);

  CHECK(run_cli("infer --data " + (dir / "bad_row.csv").string() +
                " --lambda frogs --out " + out) == 2);
}

TEST_CASE("study preset writes reports and is reproducible") {
  const fs::path dir = fresh_dir("study");
  const std::string base = "study --preset appendixC --replicates 8 --seed 21 "
                           "--threads 1 --out-dir ";
  REQUIRE(run_cli(base + (dir / "a").string()) == 0);

  const json report = parse_file(dir / "a" / "appendixC.json");
  CHECK(report.at("schema") == "gtsel-study-1");
  CHECK(report.at("replicates") == 8);
  REQUIRE(report.at("cells").size() == 1);
  CHECK(report.at("cells")[0].at("split").at("attempts").get<long>() > 0);
  CHECK(parse_file(dir / "a" / "appendixC_selection.json")
            .at("grid")
            .size() == 25);

  const std::string csv = slurp(dir / "a" / "appendixC.csv");
  CHECK(csv.rfind("lambda,method,metric,coef,value\n", 0) == 0);

  const json manifest = parse_file(dir / "a" / "appendixC.manifest.json");
  CHECK(manifest.at("command") == "study");
  CHECK(manifest.at("config").at("preset") == "appendixC");

  REQUIRE(run_cli(base + (dir / "b").string()) == 0);
  CHECK(slurp(dir / "b" / "appendixC.json") == slurp(dir / "a" / "appendixC.json"));
  CHECK(slurp(dir / "b" / "appendixC.csv") == slurp(dir / "a" / "appendixC.csv"));
}
