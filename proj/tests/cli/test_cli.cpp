#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <sys/wait.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

namespace fs = std::filesystem;

namespace {

struct Run {
  int code;
  std::string out;
};

Run cli(const std::string& args) {
  const std::string cmd = std::string("'") + HTE_CLI_PATH + "' " + args + " 2>&1";
  FILE* p = popen(cmd.c_str(), "r");
  REQUIRE(p != nullptr);
  std::string out;
  char buf[4096];
  while (std::fgets(buf, sizeof buf, p)) out += buf;
  const int status = pclose(p);
  return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, out};
}

std::string preset(const char* name) { return std::string("'") + HTE_PRESET_DIR + "/" + name + ".json'"; }

fs::path scratch() {
  const fs::path d = fs::temp_directory_path() / "hte_cli_test";
  fs::create_directories(d);
  return d;
}

std::vector<std::vector<std::string>> read_csv(const fs::path& p) {
  std::ifstream in(p);
  std::vector<std::vector<std::string>> rows;
  std::string line;
  while (std::getline(in, line)) {
    std::vector<std::string> row;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) row.push_back(cell);
    rows.push_back(row);
  }
  return rows;
}

}  // namespace

TEST_CASE("missing config file") {
  const Run r = cli("simulate --config /no/such/config.json");
  CHECK(r.code == 2);
  CHECK(r.out.find("/no/such/config.json") != std::string::npos);
}

TEST_CASE("usage errors") {
  CHECK(cli("").code == 2);
  CHECK(cli("simulate").code == 2);
  CHECK(cli("--help").code == 0);
  const Run bad = cli("simulate --config " + preset("example1_cauchy") + " --override run.colour=1");
  CHECK(bad.code == 2);
  CHECK(bad.out.find("run.colour") != std::string::npos);
}

TEST_CASE("malformed JSON reports the line") {
  const fs::path p = scratch() / "broken.json";
  std::ofstream(p) << "{\n  \"run\": {\n    \"trials\": ,\n  }\n}\n";
  const Run r = cli("simulate --config " + p.string());
  CHECK(r.code == 2);
  CHECK(r.out.find(":3:") != std::string::npos);
}

TEST_CASE("command-line overrides") {
  const fs::path rec = scratch() / "rec.csv";
  const Run r = cli("simulate --config " + preset("example1_cauchy") + " --trials 10 --epsilon 0.1 --override output.records_path=" +
                    rec.string() + " --override output.report_path=" + (scratch() / "rep.json").string());
  REQUIRE(r.code == 0);
  CHECK(r.out.find("eps=0.1 N=10 ") != std::string::npos);
  const auto rows = read_csv(rec);
  REQUIRE(rows.size() == 11);
  CHECK(rows[0].size() == 8);
  CHECK(rows[1][1] == "0.10000000000000001");
}

TEST_CASE("predict on example1") {
  const Run r = cli("predict --config " + preset("example1_cauchy") + " --epsilon 0.01");
  REQUIRE(r.code == 0);
  CHECK(r.out.find("mean_exit=35.355") != std::string::npos);
}

TEST_CASE("predict refuses an empty exit set") {
  const Run r = cli("predict --config " + preset("additive_control") + " --override system.parameters.F=[[0.0,0.0]]");
  CHECK(r.code == 2);
  CHECK(r.out.find("hypothesis") != std::string::npos);
}

TEST_CASE("reduce on exp1d") {
  const Run r = cli("reduce --config " + preset("exp1d_marcus"));
  REQUIRE(r.code == 0);
  CHECK(r.out.find("boundaries=(-0.6321, 1.7183)") != std::string::npos);
  CHECK(r.out.find("M=1.08") != std::string::npos);
}

TEST_CASE("exit-sets grid for example1") {
  const fs::path g = scratch() / "grid_e1.csv";
  const Run r = cli("exit-sets --config " + preset("example1_cauchy") + " --override output.grid_path=" + g.string());
  REQUIRE(r.code == 0);
  const auto rows = read_csv(g);
  REQUIRE(rows.size() == 161 * 161 + 1);
  CHECK(rows[0] == std::vector<std::string>{"z1", "z2", "in_E", "in_E_marcus"});
  long wrong = 0, marcus_in = 0;
  for (std::size_t i = 1; i < rows.size(); ++i) {
    const double s = std::abs(std::stod(rows[i][0]) + std::stod(rows[i][1]));
    if (std::abs(s - 2.0) > 1e-9 && (rows[i][2] == "1") != (s >= 2.0)) ++wrong;
    marcus_in += rows[i][3] == "1";
  }
  CHECK(wrong == 0);
  CHECK(marcus_in > 0);
}

TEST_CASE("exit-sets agree for a constant field") {
  const fs::path g = scratch() / "grid_add.csv";
  const Run r = cli("exit-sets --config " + preset("additive_control") + " --override output.grid_path=" + g.string());
  REQUIRE(r.code == 0);
  const auto rows = read_csv(g);
  for (std::size_t i = 1; i < rows.size(); ++i) CHECK(rows[i][2] == rows[i][3]);
}

TEST_CASE("exit-sets on exp1d locate the Marcus boundary") {
  const fs::path g = scratch() / "grid_exp.csv";
  const double step = 0.01;
  const Run r = cli("exit-sets --config " + preset("exp1d_marcus") + " --lo -1 --hi 3 --step 0.01 --override output.grid_path=" +
                    g.string());
  REQUIRE(r.code == 0);
  const auto rows = read_csv(g);
  REQUIRE(rows[0].size() == 3);
  std::vector<double> flips;
  for (std::size_t i = 2; i < rows.size(); ++i)
    if (rows[i][2] != rows[i - 1][2]) flips.push_back(std::stod(rows[i][0]));
  REQUIRE(flips.size() == 2);
  CHECK(std::abs(flips[0] - (std::exp(-1.0) - 1.0)) <= step);
  CHECK(std::abs(flips[1] - (std::exp(1.0) - 1.0)) <= step);
}

TEST_CASE("event stream dump") {
  const fs::path ev = scratch() / "events.csv";
  const Run r = cli("simulate --config " + preset("example1_cauchy") + " --trials 2 --epsilon 0.1 --dump-events " +
                    ev.string() + " --override output.records_path= --override output.report_path= --quiet");
  REQUIRE(r.code == 0);
  const auto rows = read_csv(ev);
  REQUIRE(rows.size() > 1);
  CHECK(rows[0] == std::vector<std::string>{"t", "kind", "v1", "v2"});
}
