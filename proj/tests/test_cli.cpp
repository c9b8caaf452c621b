#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "cli.hpp"

namespace fs = std::filesystem;
using namespace fracvar::cli;

namespace {

const std::string kProblems = std::string(FRACVAR_SOURCE_DIR) + "/problems/";

struct Result {
  int code;
  std::string out, err;
};

Result invoke(std::vector<std::string> args) {
  args.insert(args.begin(), "fracvar");
  std::vector<char*> argv;
  for (auto& a : args) argv.push_back(a.data());
  std::ostringstream out, err;
  const int code = run(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

// A fresh scratch directory per call.
fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("fracvar_cli_test_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

void write_samples(const fs::path& path, const std::string& col, std::size_t n, double a, double b,
                   const std::function<double(double)>& f) {
  std::vector<double> t(n), v(n);
  for (std::size_t i = 0; i < n; ++i) {
    t[i] = a + (b - a) * static_cast<double>(i) / static_cast<double>(n - 1);
    v[i] = f(t[i]);
  }
  write_csv(path.string(), {"t", col}, {t, v});
}

double value_after(const std::string& text, const std::string& key) {
  const auto pos = text.find(key + " = ");
  REQUIRE(pos != std::string::npos);
  return std::stod(text.substr(pos + key.size() + 3));
}

}  // namespace

TEST_SUITE("cli") {
  TEST_CASE("csv round trip") {
    const auto dir = scratch("csv");
    write_csv((dir / "a.csv").string(), {"t", "x"}, {{0.0, 0.5, 1.0}, {1.0 / 3.0, -2.0, 1e-300}});
    const Table t = read_csv((dir / "a.csv").string());
    CHECK(t.header == std::vector<std::string>{"t", "x"});
    CHECK(t.rows() == 3);
    CHECK(t.columns[t.column("x")][0] == 1.0 / 3.0);
    CHECK(t.columns[1][2] == 1e-300);
    CHECK_THROWS(t.column("y"));
  }

  TEST_CASE("solve the unit-time example") {
    const auto dir = scratch("solve");
    const auto r = invoke({"solve", "--problem", kProblems + "unit_time.prob", "--out", dir.string()});
    CHECK(r.code == kOk);
    CHECK(std::fabs(value_after(r.out, "T_star") - 1.0) < 0.02);
    const Table traj = read_csv((dir / "trajectory.csv").string());
    CHECK(traj.header == std::vector<std::string>{"t", "x", "caputo_dx"});
    CHECK(traj.rows() == 101);
    std::ifstream in(dir / "report.json");
    const auto j = nlohmann::json::parse(in);
    CHECK(j["converged"] == true);
    CHECK(std::fabs(j["T_star"].get<double>() - 1.0) < 0.02);
    CHECK(j["residuals"]["case"] == "FreeBoth");
    CHECK(j["trace"].size() > 16);
  }

  TEST_CASE("malformed lagrangian is an error with an offset") {
    const auto r = invoke({"solve", "--problem", kProblems + "malformed.prob", "--out", scratch("bad").string()});
    CHECK(r.code == kError);
    CHECK(r.err.find("offset 3") != std::string::npos);
    CHECK(r.err.find("line") != std::string::npos);
  }

  TEST_CASE("non-unimodal problem exits 2 with the probe table") {
    const auto dir = scratch("wells");
    const auto r = invoke({"solve", "--problem", kProblems + "two_wells.prob", "--out", dir.string()});
    CHECK(r.code == kNotConverged);
    std::ifstream in(dir / "report.json");
    const auto j = nlohmann::json::parse(in);
    CHECK(j["converged"] == false);
    CHECK(j["trace"].size() == 16);
    CHECK_FALSE(j["notes"].empty());
  }

  TEST_CASE("check accepts the exact candidate") {
    const auto dir = scratch("check_ok");
    write_samples(dir / "cand.csv", "x", 101, 0.0, 1.0, [](double) { return 2.0; });
    const auto r = invoke({"check", "--problem", kProblems + "unit_time.prob", "--candidate",
                           (dir / "cand.csv").string(), "--out", dir.string()});
    CHECK(r.code == kOk);
    CHECK(std::fabs(value_after(r.out, "R1")) < 1e-8);
    CHECK(std::fabs(value_after(r.out, "R2")) < 1e-10);
    CHECK(fs::exists(dir / "check.json"));
  }

  TEST_CASE("check rejects the candidate ending at T = 2") {
    const auto dir = scratch("check_bad");
    write_samples(dir / "cand.csv", "x", 101, 0.0, 2.0, [](double) { return 2.0; });
    const auto r =
        invoke({"check", "--problem", kProblems + "unit_time.prob", "--candidate", (dir / "cand.csv").string()});
    CHECK(r.code == kNotConverged);
    CHECK(std::fabs(value_after(r.out, "R1") - 3.0) < 1e-6);
    CHECK(r.out.find("result = fail") != std::string::npos);
  }

  TEST_CASE("check input errors") {
    const auto dir = scratch("check_err");
    write_samples(dir / "two.csv", "x", 2, 0.0, 1.0, [](double) { return 2.0; });
    auto r = invoke({"check", "--problem", kProblems + "unit_time.prob", "--candidate", (dir / "two.csv").string()});
    CHECK(r.code == kError);
    CHECK(r.err.find("at least 5 rows") != std::string::npos);

    write_csv((dir / "uneven.csv").string(), {"t", "x"}, {{0.0, 0.1, 0.3, 0.6, 1.0}, {2, 2, 2, 2, 2}});
    r = invoke({"check", "--problem", kProblems + "unit_time.prob", "--candidate", (dir / "uneven.csv").string()});
    CHECK(r.code == kError);
    CHECK(r.err.find("not uniform") != std::string::npos);

    r = invoke({"check", "--problem", kProblems + "unit_time.prob", "--candidate", (dir / "missing.csv").string()});
    CHECK(r.code == kError);
  }

  TEST_CASE("solve output round-trips through check") {
    const auto dir = scratch("roundtrip");
    const auto s = invoke({"solve", "--problem", kProblems + "unit_time.prob", "--out", dir.string()});
    REQUIRE(s.code == kOk);
    std::ifstream in(dir / "report.json");
    const auto rep = nlohmann::json::parse(in);
    const auto c = invoke({"check", "--problem", kProblems + "unit_time.prob", "--candidate",
                           (dir / "trajectory.csv").string()});
    CHECK(c.code == kOk);
    const double floor = 1e-12;
    CHECK(std::fabs(value_after(c.out, "R1")) <= 2 * std::fabs(rep["residuals"]["R1"].get<double>()) + floor);
    CHECK(std::fabs(value_after(c.out, "R2")) <= 2 * std::fabs(rep["residuals"]["R2"].get<double>()) + floor);
    CHECK(value_after(c.out, "el_interior_sup") <= 2 * rep["el_interior_sup"].get<double>() + floor);
  }

  TEST_CASE("ops examples") {
    const auto dir = scratch("ops");
    write_samples(dir / "lin.csv", "f", 1001, 0.0, 1.0, [](double t) { return t; });
    auto r = invoke({"ops", "--candidate", (dir / "lin.csv").string(), "--operator", "left_caputo", "--alpha", "0.5",
                     "--out", dir.string()});
    REQUIRE(r.code == kOk);
    Table t = read_csv((dir / "ops.csv").string());
    CHECK(t.header == std::vector<std::string>{"t", "left_caputo"});
    CHECK(std::fabs(t.columns[1].back() - 1.12838) < 2e-3);

    write_samples(dir / "one.csv", "f", 1001, 0.0, 1.0, [](double) { return 1.0; });
    r = invoke({"ops", "--candidate", (dir / "one.csv").string(), "--operator", "left_rl_integral", "--alpha", "0.5",
                "--out", dir.string()});
    REQUIRE(r.code == kOk);
    t = read_csv((dir / "ops.csv").string());
    CHECK(std::fabs(t.columns[1].back() - 1.12838) < 2e-3);

    r = invoke({"ops", "--candidate", (dir / "one.csv").string(), "--operator", "left_caputo", "--alpha", "0.3",
                "--out", dir.string()});
    REQUIRE(r.code == kOk);
    t = read_csv((dir / "ops.csv").string());
    for (double v : t.columns[1]) CHECK(v == 0.0);
  }

  TEST_CASE("ops rejects unknown operators and bad orders") {
    const auto dir = scratch("ops_err");
    write_samples(dir / "one.csv", "f", 11, 0.0, 1.0, [](double) { return 1.0; });
    auto r = invoke({"ops", "--candidate", (dir / "one.csv").string(), "--operator", "hilbert", "--alpha", "0.5",
                     "--out", dir.string()});
    CHECK(r.code == kError);
    CHECK(r.err.find("unknown operator") != std::string::npos);
    r = invoke({"ops", "--candidate", (dir / "one.csv").string(), "--operator", "left_caputo", "--alpha", "1.5",
                "--out", dir.string()});
    CHECK(r.code == kError);
  }

  TEST_CASE("argument errors exit 1") {
    CHECK(invoke({}).code == kError);
    CHECK(invoke({"frobnicate"}).code == kError);
    CHECK(invoke({"solve", "--problem", kProblems + "unit_time.prob", "--set", "nonsense"}).code == kError);
    CHECK(invoke({"solve", "--problem", kProblems + "unit_time.prob", "--set", "n_nodes=3"}).code == kError);
    CHECK(invoke({"solve", "--problem", kProblems + "does_not_exist.prob"}).code == kError);
  }
}
