#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <sys/wait.h>
#include <unistd.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

// Process-level checks of the installed command-line interface. The binary
// path comes from the build system.
#ifndef ODFLOW_CLI_PATH
#error "ODFLOW_CLI_PATH must be defined"
#endif

namespace {

namespace fs = std::filesystem;

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() /
           ("odflow_cli_test_" + std::to_string(::getpid()));
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

int run_cli(const std::string& args) {
  std::string command = std::string(ODFLOW_CLI_PATH) + " " + args + " > /dev/null 2>&1";
  int status = std::system(command.c_str());
  return WEXITSTATUS(status);
}

void write_file(const fs::path& path, const std::string& content) {
  std::ofstream out(path);
  out << content;
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path);
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

void write_toy_inputs(const fs::path& dir) {
  write_file(dir / "zones.txt",
             "A;0,0;1,0;1,1;0,1\n"
             "B;1,0;2,0;2,1;1,1\n");
  write_file(dir / "presence.csv",
             "A,2017-03-06T08:15:00Z,3\n"
             "B,2017-03-06T08:15:00Z,1\n"
             "A,2017-03-06T08:30:00Z,2\n"
             "B,2017-03-06T08:30:00Z,2\n");
}

}  // namespace

TEST_CASE("estimate reproduces the toy instance deterministically") {
  TempDir dir;
  write_toy_inputs(dir.path);
  std::string base = "estimate " + (dir.path / "presence.csv").string() + " " +
                     (dir.path / "zones.txt").string() +
                     " --total 4 --noise 0 --randomizations 1 --steps 2";

  CHECK(run_cli(base + " --out " + (dir.path / "run1").string()) == 0);
  CHECK(run_cli(base + " --out " + (dir.path / "run2").string()) == 0);

  std::string flow = read_file(dir.path / "run1" / "flow_avg.csv");
  CHECK(flow == "zone,A,B\nA,2,1\nB,0,1\n");
  std::string one_step = read_file(dir.path / "run1" / "transition_1step.csv");
  CHECK(one_step ==
        "zone,A,B\nA,0.6666666666666666,0.3333333333333333\nB,0,1\n");

  CHECK(read_file(dir.path / "run1" / "marginals.csv") ==
        "from,to,zone_id,gamma,eta\n"
        "2017-03-06T08:15:00Z,2017-03-06T08:30:00Z,A,3,2\n"
        "2017-03-06T08:15:00Z,2017-03-06T08:30:00Z,B,1,2\n");

  for (const char* name :
       {"flow_avg.csv", "transition_1step.csv", "transition_2step.csv",
        "snapshots.csv", "marginals.csv"}) {
    CHECK(read_file(dir.path / "run1" / name) == read_file(dir.path / "run2" / name));
  }
}

TEST_CASE("estimate accepts an explicit cost file") {
  TempDir dir;
  write_toy_inputs(dir.path);
  write_file(dir.path / "cost.csv", "zone,A,B\nA,0,5\nB,5,0\n");
  std::string command = "estimate " + (dir.path / "presence.csv").string() + " " +
                        (dir.path / "zones.txt").string() +
                        " --total 4 --noise 0 --randomizations 1 --cost-file " +
                        (dir.path / "cost.csv").string() + " --out " +
                        (dir.path / "out").string();
  CHECK(run_cli(command) == 0);
  CHECK(read_file(dir.path / "out" / "flow_avg.csv") == "zone,A,B\nA,2,1\nB,0,1\n");
}

TEST_CASE("extrapolate powers a saved transition matrix") {
  TempDir dir;
  write_file(dir.path / "matrix.csv",
             "zone,A,B\nA,0.6666666666666666,0.3333333333333333\nB,0,1\n");
  std::string command = "extrapolate " + (dir.path / "matrix.csv").string() +
                        " --steps 2 --out " + (dir.path / "out").string();
  CHECK(run_cli(command) == 0);
  CHECK(read_file(dir.path / "out" / "extrapolated_2step.csv") ==
        "zone,A,B\nA,0.4444444444444444,0.5555555555555556\nB,0,1\n");
}

TEST_CASE("extrapolate reports non-convergent stationary distributions") {
  TempDir dir;
  // Bipartite periodic chain: power iteration oscillates forever.
  write_file(dir.path / "periodic.csv",
             "zone,A,B,C\nA,0,0.5,0.5\nB,1,0,0\nC,1,0,0\n");
  std::string command = "extrapolate " + (dir.path / "periodic.csv").string() +
                        " --steps 2 --stationary --max-iter 200 --out " +
                        (dir.path / "out").string();
  CHECK(run_cli(command) == 3);
}

TEST_CASE("gravity subcommand emits the averaged fit") {
  TempDir dir;
  write_toy_inputs(dir.path);
  std::string command = "gravity " + (dir.path / "presence.csv").string() + " " +
                        (dir.path / "zones.txt").string() +
                        " --total 4 --compare --out " + (dir.path / "out").string();
  CHECK(run_cli(command) == 0);
  CHECK(fs::exists(dir.path / "out" / "gravity_avg.csv"));
  CHECK(fs::exists(dir.path / "out" / "gravity_vs_lp.csv"));
}

TEST_CASE("synth subcommand writes scores and flows") {
  TempDir dir;
  std::string command = "synth --zones 9 --total 10000 --seed 3 --truth optimal --out " +
                        (dir.path / "out").string();
  CHECK(run_cli(command) == 0);
  CHECK(fs::exists(dir.path / "out" / "ground_truth.csv"));
  CHECK(fs::exists(dir.path / "out" / "estimate_flow.csv"));
  CHECK(fs::exists(dir.path / "out" / "gravity_flow.csv"));
  CHECK(fs::exists(dir.path / "out" / "scores.csv"));
}

TEST_CASE("bench subcommand writes the table and chart") {
  TempDir dir;
  std::string command = "bench --sizes 64,128 --trials 3 --out " +
                        (dir.path / "out").string();
  CHECK(run_cli(command) == 0);
  std::string csv = read_file(dir.path / "out" / "bench.csv");
  CHECK(csv.rfind("solver,n,trials,", 0) == 0);
  CHECK(csv.find("closed_form,64,3,") != std::string::npos);
  CHECK(fs::exists(dir.path / "out" / "bench.svg"));
}

TEST_CASE("input errors exit with code 1") {
  TempDir dir;
  CHECK(run_cli("estimate /nonexistent.csv /nonexistent.txt") == 1);
  CHECK(run_cli("bogus-subcommand") == 1);
  write_toy_inputs(dir.path);
  CHECK(run_cli("estimate " + (dir.path / "presence.csv").string() + " " +
                (dir.path / "zones.txt").string() + " --cost nosuchmetric") == 1);
  CHECK(run_cli("bench --sizes 128,64 --trials 3") == 1);
}
