#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>

#include <catch2/catch_amalgamated.hpp>

#include <json.hpp>

namespace {

const std::string cli = CQT_CLI_PATH;
const std::string scenario_dir = CQT_SCENARIO_DIR;

struct RunResult {
  int exit_code = -1;
  std::string output;
};

RunResult run(const std::string& args) {
  const std::string out_file = std::string(std::tmpnam(nullptr)) + "_cqt_cli.out";
  const std::string command = cli + " " + args + " > " + out_file + " 2>&1";
  const int raw = std::system(command.c_str());
  RunResult result;
  result.exit_code = WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
  std::ifstream in(out_file);
  std::ostringstream buf;
  buf << in.rdbuf();
  result.output = buf.str();
  std::remove(out_file.c_str());
  return result;
}

}  // namespace

TEST_CASE("check: the unmarked two-slit scenario exits 3 with |D| = 0.25") {
  const RunResult r = run("check " + scenario_dir + "/two_slit.json");
  CHECK(r.exit_code == 3);
  CHECK(r.output.find("Inconsistent") != std::string::npos);
  CHECK(r.output.find("0.25") != std::string::npos);
}

TEST_CASE("check: the marked two-slit scenario exits 0") {
  const RunResult r = run("check " + scenario_dir + "/two_slit_marked.json");
  CHECK(r.exit_code == 0);
  CHECK(r.output.find("MediumConsistent") != std::string::npos);
}

TEST_CASE("check --format json emits the versioned report schema") {
  const RunResult r = run("--format json check " + scenario_dir + "/two_slit.json");
  CHECK(r.exit_code == 3);
  const nlohmann::json j = nlohmann::json::parse(r.output);
  CHECK(j.at("version") == 1);
  CHECK(j.at("verdict") == "Inconsistent");
  CHECK(j.at("D_offdiag_max").get<double>() == Catch::Approx(0.25).margin(1e-12));
  CHECK(j.at("probabilities").size() == 4);
  CHECK(j.contains("scenario_hash"));
}

TEST_CASE("check on a malformed file exits 1 and names the field") {
  const std::string bad = std::string(std::tmpnam(nullptr)) + "_bad.json";
  {
    std::ofstream out(bad);
    out << R"({"dim": 2, "state": {"pure": [[1.0,0.0],[0.0,0.0]]},
               "steps": [{"t": 1.0, "space": {"members": [
                 {"basis": [[[1.0,0.0],[0.0]]]},
                 {"basis": [[[0.0,0.0],[1.0,0.0]]]}
               ]}}]})";
  }
  const RunResult r = run("check " + bad);
  CHECK(r.exit_code == 1);
  CHECK(r.output.find("steps[0].space.members[0].basis[0]") != std::string::npos);
  std::remove(bad.c_str());
}

TEST_CASE("prob: elementary two-slit history prints 0.250000000000") {
  const RunResult r = run("prob " + scenario_dir + "/two_slit.json --history 1,1");
  CHECK(r.exit_code == 0);
  CHECK(r.output.find("0.250000000000") != std::string::npos);
}

TEST_CASE("prob: an atom matching the state prints 1.000000000000") {
  const RunResult r = run("prob " + scenario_dir + "/spin_z.json --history 1");
  CHECK(r.exit_code == 0);
  CHECK(r.output.find("1.000000000000") != std::string::npos);
}

TEST_CASE("prob: compound queries on the inconsistent family are refused") {
  const RunResult r = run("prob " + scenario_dir + "/two_slit.json --history 1+2,1");
  CHECK(r.exit_code == 1);
  CHECK(r.output.find("not a framework") != std::string::npos);
}

TEST_CASE("prob: compound queries on a consistent family succeed") {
  const RunResult r = run("prob " + scenario_dir + "/two_slit_marked.json --history 1+2,1");
  CHECK(r.exit_code == 0);
  CHECK(r.output.find("1.000000000000") != std::string::npos);
}

TEST_CASE("static: event probabilities and truth values") {
  const RunResult full = run("static " + scenario_dir + "/spin_z.json --event 1,2");
  CHECK(full.exit_code == 0);
  CHECK(full.output.find("1.000000000000") != std::string::npos);
  CHECK(full.output.find("True") != std::string::npos);

  const RunResult miss = run("static " + scenario_dir + "/spin_z.json --event 2");
  CHECK(miss.exit_code == 0);
  CHECK(miss.output.find("0.000000000000") != std::string::npos);
  CHECK(miss.output.find("False") != std::string::npos);
}

TEST_CASE("demo subcommands run their oracles") {
  const RunResult mermin = run("demo mermin");
  CHECK(mermin.exit_code == 0);
  CHECK(mermin.output.find("0 satisfying assignments of 512") != std::string::npos);

  const RunResult cz = run("demo cz");
  CHECK(cz.exit_code == 0);
  CHECK(cz.output.find("FAIL") == std::string::npos);

  const RunResult two_slit = run("demo two-slit");
  CHECK(two_slit.exit_code == 0);
  CHECK(two_slit.output.find("Inconsistent") != std::string::npos);
  CHECK(two_slit.output.find("MediumConsistent") != std::string::npos);

  const RunResult diosi = run("demo diosi");
  CHECK(diosi.exit_code == 0);
  CHECK(diosi.output.find("witness") != std::string::npos);

  const RunResult unknown = run("demo frobnicate");
  CHECK(unknown.exit_code == 1);
}

TEST_CASE("the CLI check output is byte-stable across repeated runs") {
  const std::string args = "--format json check " + scenario_dir + "/two_slit_marked.json";
  const RunResult a = run(args);
  const RunResult b = run(args);
  CHECK(a.output == b.output);
}
