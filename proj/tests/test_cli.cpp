#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <sys/wait.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <sstream>
#include <string>

#include "ail/io.hpp"
#include "json.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct RunResult {
  int status = -1;
  std::string output;
};

RunResult run_cli(const std::string& args) {
  const std::string cmd = std::string(AIL_CLI_PATH) + " " + args + " 2>&1";
  FILE* pipe = popen(cmd.c_str(), "r");
  REQUIRE(pipe != nullptr);
  std::string out;
  char buf[4096];
  while (fgets(buf, sizeof buf, pipe) != nullptr) out += buf;
  const int rc = pclose(pipe);
  RunResult r;
  r.status = WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
  r.output = out;
  return r;
}

fs::path fresh_dir(const std::string& name) {
  fs::path dir = fs::temp_directory_path() / ("ail_cli_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

void write_file(const fs::path& path, const std::string& content) {
  std::ofstream out(path);
  REQUIRE(out.good());
  out << content;
}

std::string slurp(const fs::path& path) {
  std::ifstream in(path);
  REQUIRE(in.good());
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

double csv_field(const std::string& line, int field) {
  std::stringstream ss(line);
  std::string cell;
  for (int i = 0; i <= field; ++i) REQUIRE(std::getline(ss, cell, ','));
  return std::stod(cell);
}

}  // namespace

TEST_CASE("shadow writes the orbit and its report") {
  auto dir = fresh_dir("shadow");
  write_file(dir / "code.json", R"({"multiples":[0,1],"periodic":true})");

  auto r = run_cli("shadow --model standard --code " +
                   (dir / "code.json").string() + " --lambda 20 --out " +
                   dir.string());
  CHECK(r.status == 0);

  const std::string csv = slurp(dir / "orbit.csv");
  std::stringstream ss(csv);
  std::string header, row0, row1;
  REQUIRE(std::getline(ss, header));
  REQUIRE(std::getline(ss, row0));
  REQUIRE(std::getline(ss, row1));
  CHECK(header == "index,x_0,local_residual");
  const double dev = std::asin(std::numbers::pi / 10.0);
  CHECK(csv_field(row0, 1) == doctest::Approx(dev).epsilon(1e-12));
  CHECK(csv_field(row1, 1) ==
        doctest::Approx(std::numbers::pi + dev).epsilon(1e-12));
  CHECK(csv_field(row0, 2) <= 1e-10);

  const json report = ail::io::parse_json_file((dir / "report.json").string());
  CHECK(report.at("converged").get<bool>());
  CHECK(report.at("residual").get<double>() <= 1e-10);
  CHECK(report.at("rho").get<double>() == doctest::Approx(dev).epsilon(1e-12));
  CHECK_FALSE(report.contains("status"));
}

TEST_CASE("repeated runs are byte identical") {
  auto a = fresh_dir("det_a");
  auto b = fresh_dir("det_b");
  const std::string code = R"({"multiples":[0,0,1],"periodic":true})";
  write_file(a / "code.json", code);
  write_file(b / "code.json", code);

  auto ra = run_cli("shadow --model standard --code " +
                    (a / "code.json").string() + " --lambda 25 --out " +
                    a.string());
  auto rb = run_cli("shadow --model standard --code " +
                    (b / "code.json").string() + " --lambda 25 --out " +
                    b.string());
  CHECK(ra.status == 0);
  CHECK(rb.status == 0);
  CHECK(slurp(a / "orbit.csv") == slurp(b / "orbit.csv"));
  CHECK(slurp(a / "report.json") == slurp(b / "report.json"));
}

TEST_CASE("certification failures exit with code two and a report") {
  auto dir = fresh_dir("certfail");
  write_file(dir / "code.json", R"({"multiples":[0,1],"periodic":true})");

  auto r = run_cli("shadow --model standard --code " +
                   (dir / "code.json").string() + " --lambda 2 --out " +
                   dir.string());
  CHECK(r.status == 2);
  CHECK(r.output.find("certification failure") != std::string::npos);

  const json report = ail::io::parse_json_file((dir / "report.json").string());
  CHECK(report.at("status").get<std::string>() == "certification failure");
  CHECK(report.at("error").get<std::string>() == "left arcsin domain");
}

TEST_CASE("entropy reports the certified bound") {
  auto dir = fresh_dir("entropy");
  auto r = run_cli("entropy --model standard --lambda 20 --out " +
                   dir.string());
  CHECK(r.status == 0);
  CHECK(r.output.find("\"q\": 7") != std::string::npos);
  CHECK(r.output.find("1.9459101490553132") != std::string::npos);

  const json report =
      ail::io::parse_json_file((dir / "entropy.json").string());
  CHECK(report.at("bound_nats").get<double>() ==
        doctest::Approx(std::log(7.0)).epsilon(1e-12));

  auto opt = run_cli("entropy --model standard --lambda 20 --optimize --out " +
                     dir.string());
  CHECK(opt.status == 0);
  CHECK(opt.output.find("\"q\": 9") != std::string::npos);
}

TEST_CASE("entropy accepts a model file") {
  auto dir = fresh_dir("entropy_kick");
  write_file(dir / "kick.json",
             R"({"model":"kick","eps2":0.01,"potential":"cos"})");
  auto r = run_cli("entropy --model " + (dir / "kick.json").string() +
                   " --out " + dir.string());
  CHECK(r.status == 0);
  CHECK(r.output.find("\"entropy\"") != std::string::npos);
  const json report =
      ail::io::parse_json_file((dir / "entropy.json").string());
  CHECK(report.at("spectral_radius").get<double>() > 1.0);
}

TEST_CASE("verify certifies hyperbolicity or fails loudly") {
  auto dir = fresh_dir("verify");
  write_file(dir / "code.json", R"({"multiples":[1],"periodic":true})");

  auto ok = run_cli("verify --model standard --code " +
                    (dir / "code.json").string() + " --lambda 12 --out " +
                    dir.string());
  CHECK(ok.status == 0);
  json report = ail::io::parse_json_file((dir / "report.json").string());
  CHECK(report.at("pass").get<bool>());
  CHECK(report.at("tier").get<std::string>() == "scalar-exact");
  CHECK(report.at("mu").get<double>() ==
        doctest::Approx(8.5440037453175312).epsilon(1e-12));

  auto fail = run_cli("verify --model standard --code " +
                      (dir / "code.json").string() +
                      " --lambda 12 --mu 9 --out " + dir.string());
  CHECK(fail.status == 2);
  report = ail::io::parse_json_file((dir / "report.json").string());
  CHECK(report.at("status").get<std::string>() == "certification failure");
}

TEST_CASE("sweep tabulates a coupling scan") {
  auto dir = fresh_dir("sweep");
  write_file(dir / "code.json", R"({"multiples":[0,1],"periodic":true})");
  auto r = run_cli("sweep --model standard --code " +
                   (dir / "code.json").string() + " --grid 10:30:10 --out " +
                   dir.string());
  CHECK(r.status == 0);

  const std::string csv = slurp(dir / "sweep.csv");
  std::stringstream ss(csv);
  std::string line;
  REQUIRE(std::getline(ss, line));
  CHECK(line == "param,converged,residual,rho,contraction,mu,entropy_bound");
  int rows = 0;
  bool saw20 = false;
  while (std::getline(ss, line)) {
    ++rows;
    CHECK(line.find(",true,") != std::string::npos);
    if (line.rfind("20,", 0) == 0) {
      saw20 = true;
      CHECK(line.find("1.9459101490553132") != std::string::npos);
    }
  }
  CHECK(rows == 3);
  CHECK(saw20);

  auto missing = run_cli("sweep --model standard --code " +
                         (dir / "code.json").string() + " --out " +
                         dir.string());
  CHECK(missing.status == 1);
  CHECK(missing.output.find("grid required") != std::string::npos);
}

TEST_CASE("validate lints run configurations") {
  auto dir = fresh_dir("validate");
  write_file(dir / "bad.json",
             R"({"command":"shadow","model":"standard","lambda":0.0,)"
             R"("sigma":2.0,"code":")" +
                 (dir / "missing.json").string() + R"("})");
  auto bad = run_cli("validate " + (dir / "bad.json").string());
  CHECK(bad.status == 1);
  CHECK(bad.output.find("code file not found") != std::string::npos);
  CHECK(bad.output.find("sigma outside (0, pi/2)") != std::string::npos);
  CHECK(bad.output.find("lambda must be nonzero") != std::string::npos);

  write_file(dir / "good.json",
             R"({"command":"entropy","model":"standard","lambda":20.0})");
  auto good = run_cli("validate " + (dir / "good.json").string());
  CHECK(good.status == 0);

  write_file(dir / "unknown.json", R"({"command":"frobnicate"})");
  auto unk = run_cli("validate " + (dir / "unknown.json").string());
  CHECK(unk.status == 1);
  CHECK(unk.output.find("unknown command: frobnicate") != std::string::npos);
}

TEST_CASE("malformed input is reported with its location") {
  auto dir = fresh_dir("malformed");
  write_file(dir / "code.json", "{ this is not json");
  auto r = run_cli("shadow --model standard --code " +
                   (dir / "code.json").string() + " --lambda 20 --out " +
                   dir.string());
  CHECK(r.status == 1);
  CHECK(r.output.find("line 1 column") != std::string::npos);

  auto gone = run_cli("shadow --model standard --code " +
                      (dir / "gone.json").string() + " --lambda 20 --out " +
                      dir.string());
  CHECK(gone.status == 1);
  CHECK(gone.output.find("code file not found") != std::string::npos);

  auto noargs = run_cli("");
  CHECK(noargs.status != 0);
}
