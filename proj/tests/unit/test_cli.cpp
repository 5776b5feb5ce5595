#include <doctest.h>

#include <filesystem>
#include <sstream>

#include "dualscale/cli.hpp"
#include "dualscale/io.hpp"
#include "support.hpp"

using namespace dualscale;

namespace {

struct Run {
  int code = 0;
  std::string out;
  std::string err;
};

Run run(std::vector<std::string> args) {
  std::ostringstream out, err;
  Run r;
  r.code = cli::run(args, out, err);
  r.out = out.str();
  r.err = err.str();
  return r;
}

std::vector<std::string> lines(const std::string& text) {
  std::vector<std::string> out;
  std::istringstream in(text);
  for (std::string l; std::getline(in, l);)
    if (!l.empty()) out.push_back(l);
  return out;
}

std::vector<std::string> fields(const std::string& row) {
  std::vector<std::string> out;
  std::istringstream in(row);
  for (std::string f; std::getline(in, f, ',');) out.push_back(f);
  if (!row.empty() && row.back() == ',') out.emplace_back();
  return out;
}

std::string temp_path(const char* name) { return (std::filesystem::temp_directory_path() / name).string(); }

const std::string kMm1 = testsupport::scenario_path("mm1.json");
const std::string kEdge = testsupport::scenario_path("three_ap_edge.json");

}  // namespace

TEST_SUITE("cli") {

TEST_CASE("exit codes") {
  CHECK(cli::exit_code(ErrorKind::InvalidInput) == cli::kExitUsage);
  CHECK(cli::exit_code(ErrorKind::Infeasible) == cli::kExitInfeasible);
  CHECK(cli::exit_code(ErrorKind::Unstable) == cli::kExitInfeasible);
  CHECK(cli::exit_code(ErrorKind::Numerical) == cli::kExitNumerical);

  CHECK(run({}).code == cli::kExitUsage);
  CHECK(run({"frobnicate"}).code == cli::kExitUsage);
  CHECK(run({"optimize", kMm1, "--method", "nope"}).code == cli::kExitUsage);
  CHECK(run({"optimize", "/nonexistent.json", "--method", "p1"}).code == cli::kExitUsage);
  CHECK(run({"optimize", kMm1, "--method", "p1", "--load-mult", "3"}).code == cli::kExitInfeasible);
  CHECK(run({"optimize", kMm1, "--method", "p1"}).code == cli::kExitOk);
  CHECK(run({"--help"}).code == cli::kExitOk);
}

TEST_CASE("optimize reports the M/M/1 delay") {
  const auto r = run({"optimize", kMm1, "--method", "p1"});
  REQUIRE(r.code == 0);
  // s = log2(1 + 3) = 2 packets/s at lambda 1: delay 1 s.
  CHECK(r.out.find("network delay: 1 s") != std::string::npos);
}

TEST_CASE("optimize writes an allocation that simulate reads back") {
  const auto path = temp_path("dualscale_cli_alloc.json");
  REQUIRE(run({"optimize", kEdge, "--method", "p2", "--out", path}).code == 0);
  const Scenario sc = load_scenario(kEdge);
  CHECK_NOTHROW(load_allocation(path, sc));
  const auto s = run({"simulate", kEdge, "--allocation", path, "--packets", "5000"});
  std::filesystem::remove(path);
  CHECK(s.code == 0);
  CHECK(s.out.find("simulated delays") != std::string::npos);
}

TEST_CASE("simulate with a missing allocation file fails") {
  const auto r = run({"simulate", kEdge, "--allocation", "/nonexistent/alloc.json", "--packets", "100"});
  CHECK(r.code == cli::kExitUsage);
  CHECK(r.out.find("cannot open") != std::string::npos);
}

TEST_CASE("sweep CSV shape, reproducibility and agreement with optimize") {
  const std::vector<std::string> args{"sweep", kMm1, "--method", "p1,p2,full-reuse", "--load-mult",
                                      "0.25,0.5,0.75,1,1.25,1.5,1.75", "--packets", "2000", "--seed", "5", "--jobs", "1"};
  const auto a = run(args);
  REQUIRE(a.code == 0);
  const auto rows = lines(a.out);
  REQUIRE(rows.size() == 1 + 3 * 7);
  CHECK(rows[0] == cli::kCsvHeader);
  for (std::size_t i = 1; i < rows.size(); ++i) {
    const auto f = fields(rows[i]);
    REQUIRE(f.size() == 8);
    CHECK(f[7] == "ok");
  }

  // Same seed, identical output.
  CHECK(run(args).out == a.out);

  // Every analytic value matches a standalone optimize at that multiplier.
  const auto f = fields(rows[1 + 3]);  // p1 at 1.0
  CHECK(f[0] == "p1");
  CHECK(f[1] == "1");
  const auto opt = run({"optimize", kMm1, "--method", "p1", "--load-mult", "1"});
  CHECK(opt.out.find("network delay: " + f[2] + " s") != std::string::npos);

  // A multiplier beyond capacity becomes a row status, not an abort.
  const auto over = run({"sweep", kMm1, "--method", "p1", "--load-mult", "3", "--packets", "0"});
  CHECK(over.code == 0);
  const auto orow = fields(lines(over.out).at(1));
  CHECK(orow[7] != "ok");
}

TEST_CASE("sweep writes to a file when asked") {
  const auto path = temp_path("dualscale_cli_sweep.csv");
  const auto r = run({"sweep", kMm1, "--method", "p1", "--load-mult", "0.5", "--packets", "0", "--out", path});
  REQUIRE(r.code == 0);
  const auto text = read_file(path);
  std::filesystem::remove(path);
  const auto rows = lines(text);
  REQUIRE(rows.size() == 2);
  const auto f = fields(rows[1]);
  CHECK(f[3].empty());  // no simulation requested
  CHECK(f[6] == "2");
}

}
