// End-to-end tests driving the real binary against the shipped KB fixtures.

#include <array>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "doctest.h"

namespace {

namespace fs = std::filesystem;

struct CmdResult {
  int exit_code;
  std::string output;  // stdout + stderr
};

CmdResult run(const std::string& args) {
  std::string cmd = std::string(CABL_BIN) + " " + args + " 2>&1";
  std::array<char, 4096> buf{};
  std::string out;
  FILE* pipe = popen(cmd.c_str(), "r");
  REQUIRE(pipe != nullptr);
  while (fgets(buf.data(), buf.size(), pipe)) out += buf.data();
  int status = pclose(pipe);
  return {WEXITSTATUS(status), out};
}

std::string kb_path(const std::string& name) { return std::string(CABL_KB_DIR) + "/" + name; }

std::string golden(const std::string& name) {
  std::ifstream in(std::string(CABL_GOLDEN_DIR) + "/" + name);
  REQUIRE(in);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

std::string file_text(const fs::path& p) {
  std::ifstream in(p);
  REQUIRE(in);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

// metrics.csv with the wall_ms column blanked (wall time is the one
// legitimately nondeterministic column).
std::string strip_wall(const std::string& csv) {
  std::istringstream in(csv);
  std::ostringstream out;
  std::string line;
  while (std::getline(in, line)) {
    int commas = 0;
    std::string rebuilt;
    for (char ch : line) {
      if (ch == ',') ++commas;
      if (commas == 6 && ch != ',')
        continue;  // inside the wall_ms cell
      rebuilt += ch;
    }
    out << rebuilt << '\n';
  }
  return out.str();
}

fs::path temp_dir(const std::string& name) {
  fs::path dir = fs::temp_directory_path() / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

}  // namespace

TEST_CASE("cli partition: chess matches the golden phases") {
  CmdResult r = run("partition --kb " + kb_path("chess.pl"));
  CHECK(r.exit_code == 0);
  CHECK(r.output.find(golden("chess_curriculum.txt")) == 0);
  CHECK(r.output.find("partition time:") != std::string::npos);
}

TEST_CASE("cli partition: tau equal to the concept count gives one phase") {
  CmdResult r = run("partition --kb " + kb_path("addition_base10.pl") + " --tau 10");
  CHECK(r.exit_code == 0);
  CHECK(r.output.find("phase 1:") != std::string::npos);
  CHECK(r.output.find("phase 2:") == std::string::npos);
}

TEST_CASE("cli partition: malformed KB exits 2 with a line number") {
  fs::path bad = temp_dir("cabl_cli_bad") / "bad.pl";
  std::ofstream(bad) << "@target t/1.\nt(1).\nbroken(((\n";
  CmdResult r = run("partition --kb " + bad.string());
  CHECK(r.exit_code == 2);
  CHECK(r.output.find("line 3") != std::string::npos);
}

TEST_CASE("cli partition: dot output") {
  fs::path dir = temp_dir("cabl_cli_dot");
  fs::path dot = dir / "graph.dot";
  CmdResult r =
      run("partition --kb " + kb_path("chess.pl") + " --dot " + dot.string());
  CHECK(r.exit_code == 0);
  std::string text = file_text(dot);
  CHECK(text.find("digraph") != std::string::npos);
  CHECK(text.find("subgraph cluster_phase1") != std::string::npos);
}

TEST_CASE("cli abspace: golden header and the d=2 fixture row") {
  fs::path dir = temp_dir("cabl_cli_abspace");
  fs::path csv = dir / "abspace.csv";
  CmdResult r = run("abspace --task addition --base 10 --digits 1..2 --tau 2 --out " +
                    csv.string());
  CHECK(r.exit_code == 0);
  std::string text = file_text(csv);
  CHECK(text.find("task,base,d,m,tau,phase,domain_size,space_size,bound_Nm,"
                  "conditioned_size,wall_ms") == 0);
  // full-space row for d=2: |S| = 87, bound 10^4
  CHECK(text.find("addition,10,2,4,2,0,10,87,10000,87,") != std::string::npos);
  // d=1 rows carry bound N^m = 100
  CHECK(text.find("addition,10,1,2,2,0,10,9,100,9,") != std::string::npos);
}

TEST_CASE("cli entail-check: passes on the decimal curriculum") {
  CmdResult r =
      run("entail-check --kb " + kb_path("addition_base10.pl") + " --tau 2 --samples 60");
  CHECK(r.exit_code == 0);
  CHECK(r.output.find("RESULT: PASS") != std::string::npos);
}

TEST_CASE("cli train: deterministic metrics modulo wall time") {
  fs::path a = temp_dir("cabl_cli_train_a");
  fs::path b = temp_dir("cabl_cli_train_b");
  std::string flags =
      " --task addition --base 10 --digits 1 --method cabl --tau 2 --iters 200 --seed 3"
      " --train-size 800 --val-size 100 --out ";
  CHECK(run("train" + flags + a.string()).exit_code == 0);
  CHECK(run("train" + flags + b.string()).exit_code == 0);
  CHECK(strip_wall(file_text(a / "metrics.csv")) == strip_wall(file_text(b / "metrics.csv")));
  CHECK(file_text(a / "config.txt") == file_text(b / "config.txt"));
}

TEST_CASE("cli train + compare: table for two runs, error for one") {
  fs::path a = temp_dir("cabl_cli_cmp_a");
  fs::path b = temp_dir("cabl_cli_cmp_b");
  std::string common =
      " --task addition --base 10 --digits 1 --iters 200 --seed 4 --train-size 800"
      " --val-size 100 --out ";
  CHECK(run("train --method cabl --tau 2" + common + a.string()).exit_code == 0);
  CHECK(run("train --method abl" + common + b.string()).exit_code == 0);

  CmdResult cmp = run("compare " + a.string() + " " + b.string());
  CHECK(cmp.exit_code == 0);
  CHECK(cmp.output.find("final_mean_concept_acc") != std::string::npos);
  CHECK(cmp.output.find("iterations_to_90pct") != std::string::npos);
  CHECK(cmp.output.find("cabl") != std::string::npos);
  CHECK(cmp.output.find("abl") != std::string::npos);

  CHECK(run("compare " + a.string()).exit_code != 0);
}

TEST_CASE("cli train: config file values are overridden by flags") {
  fs::path dir = temp_dir("cabl_cli_cfg");
  fs::path cfg = dir / "run.cfg";
  std::ofstream(cfg) << "iters=100\nseed=9\ntrain-size=600\nval-size=80\n";
  fs::path out = dir / "run";
  CmdResult r = run("train --task addition --base 10 --digits 1 --method cabl --config " +
                    cfg.string() + " --iters 150 --out " + out.string());
  CHECK(r.exit_code == 0);
  std::string config_echo = file_text(out / "config.txt");
  CHECK(config_echo.find("iters=150") != std::string::npos);  // flag beats config file
  CHECK(config_echo.find("seed=9") != std::string::npos);     // config file beats default
}

TEST_CASE("cli: unknown flags are errors") {
  CHECK(run("partition --kb " + kb_path("chess.pl") + " --bogus 1").exit_code != 0);
  CHECK(run("train --task addition --frobnicate --out /tmp/x").exit_code != 0);
}
