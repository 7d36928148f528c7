#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "ctmceq/explorer.hpp"
#include "ctmceq/pcp.hpp"
#include "doctest.h"
#include "json.hpp"
#include "test_support.hpp"

namespace fs = std::filesystem;

namespace {

const char* kCli = CTMCEQ_CLI_PATH;
const char* kData = CTMCEQ_DATA_DIR;

struct RunResult {
  int exit_code;
};

RunResult run(const std::string& args) {
  std::string cmd = std::string(kCli) + " " + args + " >/dev/null 2>&1";
  int rc = std::system(cmd.c_str());
  return {WEXITSTATUS(rc)};
}

fs::path tmp_dir() {
  fs::path d = fs::temp_directory_path() / "ctmceq_cli_tests";
  fs::create_directories(d);
  return d;
}

nlohmann::json read_json(const fs::path& p) {
  std::ifstream in(p);
  REQUIRE(in.good());
  nlohmann::json j;
  in >> j;
  return j;
}

std::string data(const std::string& name) {
  return (fs::path(kData) / name).string();
}

}  // namespace

TEST_CASE("usage errors exit with 2") {
  CHECK(run("").exit_code == 2);
  CHECK(run("check --bound 4").exit_code == 2);          // missing inputs
  CHECK(run("frobnicate").exit_code == 2);               // unknown command
  CHECK(run("solve-pcp --instance nope.json").exit_code == 3);  // bad file
}

TEST_CASE("solve-pcp matches the library") {
  fs::path out = tmp_dir() / "sols.json";
  auto r = run("solve-pcp --instance " + data("post.json") +
               " --max-len 3 -o " + out.string());
  REQUIRE(r.exit_code == 0);
  auto j = read_json(out);
  auto direct = ctmceq::solve_pcp_bounded(ctmceq::testing::worked_instance(), 3);
  REQUIRE(j["count"].get<std::size_t>() == direct.size());
  for (std::size_t k = 0; k < direct.size(); ++k)
    CHECK(j["solutions"][k].get<std::vector<int>>() == direct[k]);
}

TEST_CASE("compile writes a parseable model") {
  fs::path out = tmp_dir() / "model.ka";
  auto r = run("compile --instance " + data("post.json") + " --params " +
               data("params.json") + " --extended -o " + out.string());
  REQUIRE(r.exit_code == 0);
  std::ifstream in(out);
  std::stringstream ss;
  ss << in.rdbuf();
  ctmceq::Model m = ctmceq::parse_model(ss.str());
  CHECK(m.pairs.size() == 9);
  CHECK(m.inits.count("start") == 1);
}

TEST_CASE("check report agrees with the library call") {
  fs::path out = tmp_dir() / "report.json";
  auto r = run("check --instance " + data("post.json") + " --params " +
               data("params.json") + " --bound 4 -o " + out.string());
  REQUIRE(r.exit_code == 0);
  auto j = read_json(out);
  CHECK(j["verdict"] == "violation");
  CHECK(j["witness"]["traverses_switch2"].get<bool>());
  CHECK(std::abs(j["witness"]["energy_sum"].get<double>() - 2.5) < 1e-9);

  auto direct = ctmceq::run_check(ctmceq::testing::worked_instance(),
                                  ctmceq::testing::default_params(), 4);
  CHECK(j["chain"]["states"].get<int>() == direct.chain.graph.num_states());
  CHECK(j["chain"]["edges"].get<std::size_t>() == direct.chain.graph.num_edges());
}

TEST_CASE("check on the unsolvable instance") {
  fs::path out = tmp_dir() / "report2.json";
  fs::path params = tmp_dir() / "p1.json";
  std::ofstream(params) << "{\"epsilon\": 1.0, \"e_switch\": 1.0}";
  auto r = run("check --instance " + data("no_solution.json") + " --params " +
               params.string() + " --bound 6 -o " + out.string());
  REQUIRE(r.exit_code == 0);
  auto j = read_json(out);
  CHECK(j["verdict"] == "energy");
  CHECK(j["energy"]["max_state_function_deviation"].get<double>() < 1e-9);
  CHECK(j["partition"]["verdict"] == "converges");
  CHECK(j["census"]["exceeded_levels"].empty());
}

TEST_CASE("explore emits census and dot") {
  fs::path out = tmp_dir() / "explore.json";
  fs::path dot = tmp_dir() / "chain.dot";
  fs::path csv = tmp_dir() / "census.csv";
  auto r = run("explore --instance " + data("post.json") + " --params " +
               data("params.json") + " --bound 2 --source oracle -o " +
               out.string() + " --dot " + dot.string() + " --csv " +
               csv.string());
  REQUIRE(r.exit_code == 0);
  auto j = read_json(out);
  CHECK(j["states"].get<int>() > 8);
  CHECK(fs::exists(dot));
  CHECK(fs::exists(csv));
}

TEST_CASE("simulate a model file deterministically") {
  fs::path model = tmp_dir() / "petri.ka";
  std::ofstream(model) << "%agent: A()\n%agent: B()\n"
                       << "%rule: mkA . -> A() @ 1, 2.718281828459045\n"
                       << "%rule: flip A() -> B() @ 1, 1.6487212707001282\n"
                       << "%init: start\n";
  fs::path out1 = tmp_dir() / "t1.json";
  fs::path out2 = tmp_dir() / "t2.json";
  std::string base = "simulate --model " + model.string() +
                     " --events 500 --seed 9 --rate-mode unit_rate -o ";
  REQUIRE(run(base + out1.string()).exit_code == 0);
  REQUIRE(run(base + out2.string()).exit_code == 0);
  auto a = read_json(out1);
  auto b = read_json(out2);
  CHECK(a["events"] == b["events"]);
  CHECK(a["total_time"] == b["total_time"]);
  CHECK(a["top_states"] == b["top_states"]);
}

TEST_CASE("petri experiment report") {
  fs::path out = tmp_dir() / "petri.json";
  auto r = run("petri --e1 1.0 --e2 0.5 --events 20000 --seed 7 -o " +
               out.string());
  REQUIRE(r.exit_code == 0);
  auto j = read_json(out);
  CHECK(j["tv"].get<double>() < 0.2);
  CHECK(j["closed_form_p00"].get<double>() ==
        doctest::Approx((1 - std::exp(-1.0)) * (1 - std::exp(-1.5))));
}

TEST_CASE("pcp simulation counts success visits") {
  fs::path out = tmp_dir() / "sim.json";
  auto r = run("simulate --instance " + data("post.json") + " --params " +
               data("params.json") + " --events 200000 --seed 5 "
               "--stop-on-success -o " + out.string());
  REQUIRE(r.exit_code == 0);
  auto j = read_json(out);
  CHECK(j["flagged_hits"].get<int>() >= 1);
}
