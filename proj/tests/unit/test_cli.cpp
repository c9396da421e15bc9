#include <doctest.h>

#include <cstring>
#include <fstream>
#include <json.hpp>
#include <random>
#include <set>
#include <sstream>

#include "common.hpp"
#include "mbcs/cli.hpp"
#include "mbcs/records.hpp"

using namespace mbcs;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("mbcs_unit_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Cheap two-band model in d = 1.
fs::path small_model(const fs::path& dir) {
  const fs::path p = dir / "small.toml";
  std::ofstream(p) << "dimension = 1\n"
                      "[[bands]]\nmass = 0.5\nmu = 1.0\n"
                      "[[bands]]\nmass = 0.7\nmu = 0.8\n"
                      "[[interactions]]\npair = [1, 1]\nfamily = \"gaussian\"\nstrength = -1.0\nrange = 1.0\n"
                      "[[interactions]]\npair = [2, 2]\nfamily = \"exponential\"\nstrength = -0.6\nrange = 0.8\n"
                      "[[interactions]]\npair = [1, 2]\nfamily = \"gaussian\"\nstrength = -0.3\nrange = 1.2\n";
  return p;
}

int run(std::vector<std::string> args) {
  args.insert(args.begin(), "mbcs");
  return run_cli(args);
}

std::size_t count_lines(const std::string& s) { return static_cast<std::size_t>(std::count(s.begin(), s.end(), '\n')); }

bool same_bits(double a, double b) { return std::memcmp(&a, &b, sizeof a) == 0; }

}  // namespace

TEST_CASE("emit_csv: empty list, not-found rows and round trip") {
  CHECK(emit_csv({}) == std::string(kCsvHeader) + "\n");
  SweepRecord nf;
  nf.run_id = "m-0001";
  nf.lambda = 0.3;
  nf.kappa = 0.1;
  const std::string one = emit_csv({nf});
  CHECK(one.find("m-0001,3,0,0.29999999999999999,0.10000000000000001,,false,") != std::string::npos);

  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(-3.0, 3.0);
  std::vector<SweepRecord> recs;
  for (int i = 0; i < 50; ++i) {
    SweepRecord r;
    r.run_id = "x-" + std::to_string(i);
    r.dimension = 1 + i % 3;
    r.n_bands = 1 + i % 2;
    r.lambda = std::exp(u(rng));
    r.kappa = u(rng) / 7.0;
    r.tc_found = i % 5 != 0;
    if (r.tc_found) r.tc = std::exp(10 * u(rng));
    r.min_eig_at_tc = -1.0 + 1e-10 * u(rng);
    r.channel = i % 3;
    r.grid_points = 100 + static_cast<std::size_t>(i);
    r.iterations = i;
    if (r.tc_found && i % 2) r.log_ratio = u(rng) * 1e-3;
    recs.push_back(r);
  }
  const auto back = parse_csv(emit_csv(recs));
  REQUIRE(back.size() == recs.size());
  for (std::size_t i = 0; i < recs.size(); ++i) {
    CHECK(back[i].run_id == recs[i].run_id);
    CHECK(back[i].dimension == recs[i].dimension);
    CHECK(back[i].n_bands == recs[i].n_bands);
    CHECK(same_bits(back[i].lambda, recs[i].lambda));
    CHECK(same_bits(back[i].kappa, recs[i].kappa));
    CHECK(back[i].tc_found == recs[i].tc_found);
    CHECK(same_bits(back[i].tc, recs[i].tc));
    CHECK(same_bits(back[i].min_eig_at_tc, recs[i].min_eig_at_tc));
    CHECK(back[i].log_ratio.has_value() == recs[i].log_ratio.has_value());
    if (recs[i].log_ratio) CHECK(same_bits(*back[i].log_ratio, *recs[i].log_ratio));
  }
  CHECK(emit_csv(back) == emit_csv(recs));
  CHECK_THROWS_AS(parse_csv(std::string("a,b\n")), ConfigError);
}

TEST_CASE("parse_range and parse_list") {
  const auto r = parse_range("-0.3:0.3:25");
  REQUIRE(r.size() == 25);
  CHECK(r.front() == -0.3);
  CHECK(r.back() == 0.3);
  CHECK(r[12] == 0.0);
  CHECK(parse_range("2:5:1") == std::vector<double>{2.0});
  CHECK(parse_list("0.1,0.2, 0.3") == std::vector<double>{0.1, 0.2, 0.3});
  CHECK_THROWS_AS(parse_range("0:1"), ConfigError);
  CHECK_THROWS_AS(parse_range("0:1:x"), ConfigError);
  CHECK_THROWS_AS(parse_list("0.1,abc"), ConfigError);
  const auto g = parse_range("log:1e-3:1e-1:3");
  REQUIRE(g.size() == 3);
  CHECK(g[0] == 1e-3);
  CHECK(g[1] == doctest::Approx(1e-2).epsilon(1e-14));
  CHECK(g[2] == 1e-1);
  CHECK_THROWS_AS(parse_range("log:0:1:3"), ConfigError);
  CHECK_THROWS_AS(parse_range("log:-1:1:3"), ConfigError);
}

TEST_CASE("cli: tc, summary key set and exit codes") {
  const auto dir = scratch("tc");
  const auto model = small_model(dir);
  const auto out = dir / "out";
  CHECK(run({"tc", "--model", model.string(), "--lambda", "0.3", "--kappa", "0.1", "--out", out.string()}) == kExitOk);
  const auto summary = nlohmann::json::parse(slurp(out / "summary.json"));
  std::set<std::string> keys;
  for (auto& [k, v] : summary.items()) keys.insert(k);
  CHECK(keys == std::set<std::string>{"command", "model_id", "dimension", "n_bands", "status", "failures", "results",
                                      "outputs"});
  CHECK(summary["command"] == "tc");
  CHECK(summary["status"] == "ok");
  CHECK(summary["results"]["tc_found"] == true);
  CHECK(count_lines(slurp(out / "tc.csv")) == 2);
  CHECK(fs::exists(out / "tc_trajectory.dat"));

  CHECK(run({"tc", "--model", (dir / "missing.toml").string(), "--out", out.string()}) == kExitConfig);
  CHECK(run({"sweep", "--model", model.string(), "--kappa-range", "0:1", "--out", out.string()}) == kExitConfig);
  CHECK(run({"tc", "--model", model.string(), "--lambda", "0.3,0.2", "--out", out.string()}) == kExitConfig);
  CHECK(run({"tc", "--model", model.string(), "--lambda", "-0.3", "--out", out.string()}) == kExitConfig);
  CHECK(run({"tc", "--model", model.string(), "--lambda", "0.3", "--lambda-range", "0.1:0.3:3", "--out", out.string()}) ==
        kExitConfig);
  CHECK(run({"frobnicate"}) == kExitConfig);
  std::ofstream(dir / "bad.toml") << "dimension = 5\n[[bands]]\nmass = 1\nmu = 1\n";
  CHECK(run({"tc", "--model", (dir / "bad.toml").string(), "--out", out.string()}) == kExitConfig);
}

TEST_CASE("cli: sweep row count, determinism and worker independence") {
  const auto dir = scratch("sweep");
  const auto model = small_model(dir);
  auto sweep = [&](const std::string& name, int workers) {
    const auto out = dir / name;
    REQUIRE(run({"sweep", "--model", model.string(), "--lambda", "0.2", "--kappa-range", "-0.3:0.3:25", "--workers",
                 std::to_string(workers), "--out", out.string()}) == kExitOk);
    return slurp(out / "sweep.csv");
  };
  const std::string a = sweep("w1a", 1);
  CHECK(count_lines(a) == 1 + 25 + 1);
  CHECK(a == sweep("w1b", 1));
  CHECK(a == sweep("w3", 3));
  const auto plot = slurp(dir / "w1a" / "kappa_log_ratio_0.dat");
  CHECK(count_lines(plot) == 1 + 25);
  CHECK(count_lines(slurp(dir / "w1a" / "lambda_log_tc.dat")) == 2);
}

TEST_CASE("cli: gap, constants and check") {
  const auto dir = scratch("misc");
  const auto model = small_model(dir);
  CHECK(run({"gap", "--model", model.string(), "--lambda", "0.3", "--out", (dir / "gap").string()}) == kExitOk);
  const auto g = nlohmann::json::parse(slurp(dir / "gap" / "summary.json"));
  CHECK(g["results"]["trivial"] == false);
  CHECK(g["results"]["free_energy_difference"].get<double>() < 0.0);
  CHECK(slurp(dir / "gap" / "gap.csv").find("band,p,delta,epsilon,E\n") != std::string::npos);

  CHECK(run({"constants", "--model", model.string(), "--out", (dir / "c").string()}) == kExitOk);
  const auto c = nlohmann::json::parse(slurp(dir / "c" / "constants.json"));
  CHECK(c["v"].size() == 2);
  CHECK(c.contains("perturbation"));

  CHECK(run({"check", "--out", (dir / "chk").string()}) == kExitOk);
  const auto k = nlohmann::json::parse(slurp(dir / "chk" / "summary.json"));
  CHECK(k["results"]["all_passed"] == true);
}
