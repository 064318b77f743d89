#include <doctest.h>

#include <array>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>

namespace fs = std::filesystem;

namespace {

struct CmdResult {
  int exit_code;
  std::string output;
};

CmdResult run(const std::string &args) {
  std::string cmd = std::string(SATKIT_CLI_PATH) + " " + args + " 2>&1";
  FILE *pipe = popen(cmd.c_str(), "r");
  REQUIRE(pipe != nullptr);
  std::string out;
  std::array<char, 4096> buf;
  size_t got;
  while ((got = fread(buf.data(), 1, buf.size(), pipe)) > 0)
    out.append(buf.data(), got);
  int status = pclose(pipe);
  return {WEXITSTATUS(status), out};
}

fs::path work_dir() {
  fs::path p = fs::temp_directory_path() / "satkit_cli_tests";
  fs::create_directories(p);
  return p;
}

std::string write_file(const std::string &name, const std::string &content) {
  fs::path p = work_dir() / name;
  std::ofstream out(p);
  out << content;
  return p.string();
}

} // namespace

TEST_CASE("solve/backbone/count on a unit instance") {
  std::string f = write_file("unit.cnf", "p cnf 1 1\n1 0\n");
  CmdResult solve = run("solve " + f);
  CHECK(solve.exit_code == 0);
  CHECK(solve.output.find("SATISFIABLE") == 0);

  CmdResult backbone = run("backbone " + f);
  CHECK(backbone.exit_code == 0);
  CHECK(backbone.output.find("1 : +1") != std::string::npos);
  CHECK(backbone.output.find("size 1") != std::string::npos);

  CmdResult count = run("count " + f);
  CHECK(count.exit_code == 0);
  CHECK(count.output.find("1\n") == 0);
}

TEST_CASE("unsatisfiable input reported, backbone refuses it") {
  std::string f = write_file("unsat.cnf", "p cnf 1 2\n1 0\n-1 0\n");
  CmdResult solve = run("solve " + f);
  CHECK(solve.exit_code == 0);
  CHECK(solve.output.find("UNSATISFIABLE") == 0);
  CmdResult backbone = run("backbone " + f);
  CHECK(backbone.exit_code == 2);
}

TEST_CASE("exit codes: usage 1, input error 2, budget 3") {
  CHECK(run("frobnicate").exit_code == 1);
  CHECK(run("solve --no-such-flag x").exit_code == 1);

  std::string bad = write_file("bad.cnf", "p cnf 1 1\n2 0\n");
  CHECK(run("solve " + bad).exit_code == 2);
  CHECK(run("solve /no/such/file.cnf").exit_code == 2);

  CmdResult gen = run("gen --n 40 --ratio 4.26 --count 1 --seed 3 --out-dir " +
                      (work_dir() / "hard").string());
  REQUIRE(gen.exit_code == 0);
  CmdResult budget =
      run("solve --max-decisions 1 " + (work_dir() / "hard/inst_00000.cnf").string());
  CHECK(budget.exit_code == 3);
}

TEST_CASE("stdin input via '-'") {
  std::string f = write_file("pipe.cnf", "p cnf 2 1\n1 -2 0\n");
  CmdResult piped = run("count - < " + f);
  CHECK(piped.exit_code == 0);
  CHECK(piped.output.find("3\n") == 0);
}

TEST_CASE("gen writes numbered instances plus a manifest") {
  fs::path dir = work_dir() / "gen_out";
  fs::remove_all(dir);
  CmdResult gen = run("gen --n 12 --ratio 4.3 --count 3 --seed 5 "
                      "--satisfiable --out-dir " +
                      dir.string());
  CHECK(gen.exit_code == 0);
  CHECK(fs::exists(dir / "inst_00000.cnf"));
  CHECK(fs::exists(dir / "inst_00002.cnf"));
  std::ifstream manifest(dir / "manifest.csv");
  std::string header;
  std::getline(manifest, header);
  CHECK(header == "index,file,seed,n,m,k,satisfiable,backbone_size,attempts");
  int rows = 0;
  std::string line;
  while (std::getline(manifest, line))
    rows += !line.empty();
  CHECK(rows == 3);
}

TEST_CASE("wsat output is deterministic for a fixed seed") {
  fs::path dir = work_dir() / "wsat_in";
  fs::remove_all(dir);
  REQUIRE(run("gen --n 20 --ratio 4.0 --count 1 --seed 9 --satisfiable "
              "--out-dir " +
              dir.string())
              .exit_code == 0);
  std::string f = (dir / "inst_00000.cnf").string();
  CmdResult a = run("wsat --runs 9 --seed 7 " + f);
  CmdResult b = run("wsat --runs 9 --seed 7 " + f);
  CHECK(a.exit_code == 0);
  CHECK(a.output == b.output);
  CHECK(a.output.find("median") != std::string::npos);
  CmdResult c = run("wsat --runs 9 --seed 8 --format json " + f);
  CHECK(c.exit_code == 0);
  CHECK(c.output.find("\"median\"") != std::string::npos);
}

TEST_CASE("robustness and bms commands run end to end") {
  fs::path dir = work_dir() / "rob_in";
  fs::remove_all(dir);
  REQUIRE(run("gen --n 14 --ratio 4.3 --count 1 --seed 11 --backbone-size 5 "
              "--tolerance 2 --out-dir " +
              dir.string())
              .exit_code == 0);
  std::string f = (dir / "inst_00000.cnf").string();
  CmdResult rob = run("robustness --min-trials 20 --max-trials 50 --seed 2 " + f);
  CHECK(rob.exit_code == 0);
  CHECK(rob.output.find("mean") != std::string::npos);

  fs::path bms_dir = work_dir() / "bms_out";
  fs::remove_all(bms_dir);
  CmdResult bms = run("bms --seed 3 --out-dir " + bms_dir.string() + " " + f);
  CHECK(bms.exit_code == 0);
  int cnfs = 0, sidecars = 0;
  for (auto &entry : fs::directory_iterator(bms_dir)) {
    cnfs += entry.path().extension() == ".cnf";
    sidecars += entry.path().extension() == ".json";
  }
  CHECK(cnfs == 1);
  CHECK(sidecars == 1);
}

TEST_CASE("experiment subcommand emits Table-5-shaped summary CSV") {
  fs::path dir = work_dir() / "exp_out";
  fs::remove_all(dir);
  CmdResult exp = run(
      "experiment --experiment bms-interpolation --n 12 --ratio 4.3 "
      "--instances 2 --runs 10 --seed 13 --workers 2 --out " +
      dir.string());
  CHECK(exp.exit_code == 0);
  std::ifstream summary(dir / "summary.csv");
  std::string header;
  std::getline(summary, header);
  CHECK(header.find("procedure") != std::string::npos);
  CHECK(header.find("cost_p10") != std::string::npos);
  CHECK(header.find("cost_median") != std::string::npos);
  CHECK(header.find("cost_p90") != std::string::npos);
}

TEST_CASE("key=value config file mirrors the flags") {
  std::string f = write_file("cfg.cnf", "p cnf 2 1\n1 -2 0\n");
  std::string cfg = write_file("wsat.cfg", "[wsat]\nruns=9\nseed=7\n");
  CmdResult from_cfg = run("--config " + cfg + " wsat " + f);
  CmdResult from_flags = run("wsat --runs 9 --seed 7 " + f);
  CHECK(from_cfg.exit_code == 0);
  CHECK(from_cfg.output == from_flags.output);
}

TEST_CASE("stats subcommand on CSV from stdin") {
  std::string csv = write_file("xy.csv", "x,y\n1,2\n2,4\n3,6\n4,8\n");
  CmdResult pearson = run("stats --op pearson --x x --y y " + csv);
  CHECK(pearson.exit_code == 0);
  CHECK(pearson.output.find("\"r\": 1.0") != std::string::npos);
  CmdResult ols = run("stats --op ols --x x --y y - < " + csv);
  CHECK(ols.exit_code == 0);
  CHECK(ols.output.find("\"gradient\": 2.0") != std::string::npos);
}
