// Drives the ipsim binary end to end.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <sys/wait.h>

#include "doctest.h"
#include "json.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

const fs::path kScratch = fs::path(IPSIM_TEST_SCRATCH) / "cli";

int run_cli(const std::string& args) {
  const std::string cmd = std::string(IPSIM_CLI) + " " + args + " > /dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

fs::path fresh(const std::string& name) {
  const fs::path p = kScratch / name;
  fs::remove_all(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

json manifest(const fs::path& dir) { return json::parse(slurp(dir / "manifest.json")); }

std::vector<std::int64_t> histogram(const fs::path& csv) {
  std::ifstream in(csv);
  std::string line;
  std::getline(in, line);
  std::vector<std::int64_t> counts;
  while (std::getline(in, line)) counts.push_back(std::stoll(line.substr(line.find(',') + 1)));
  return counts;
}

}  // namespace

TEST_CASE("smoke run writes a complete manifest") {
  const fs::path out = fresh("lanes");
  REQUIRE(run_cli("run --scenario crossing_lanes --seed 1 --set steps=40 --out " + out.string()) == 0);
  const json m = manifest(out);
  CHECK(m["scenario"] == "crossing_lanes");
  CHECK(m["seed"] == 1);
  CHECK(m["status"]["exit_code"] == 0);
  CHECK(m["status"]["error"].is_null());
  REQUIRE(m["frames"].size() >= 1);
  for (const auto& f : m["frames"]) {
    CHECK(fs::exists(out / f["file"].get<std::string>()));
    REQUIRE(f["mass_ledger"].size() == 2);
    for (const auto& l : f["mass_ledger"]) {
      const double interior = l["interior"], injected = l["injected"], absorbed = l["absorbed"], initial = l["initial"];
      CHECK(std::abs(initial + injected - absorbed - interior) <= 1e-10 * std::max(1.0, injected));
    }
  }
  CHECK(m["frames"].back()["step"] == 40);
  CHECK(fs::exists(out / m["metrics_file"].get<std::string>()));
  CHECK(m["parameters"]["populations"][0]["sensing"]["R_r"] == 0.1);
  const std::string first_line = slurp(out / "metrics.csv").substr(0, 23);
  CHECK(first_line == "step,metric_name,value\n");
}

TEST_CASE("overrides are resolved into the manifest") {
  const fs::path out = fresh("override");
  REQUIRE(run_cli("run --scenario line_formation --set steps=30 --set population.0.F_c=0.3 --set metrics.angle_bin=10 --out " +
                out.string()) == 0);
  const json m = manifest(out);
  CHECK(m["overrides"].size() == 3);
  CHECK(m["parameters"]["steps"] == 30);
  CHECK(m["parameters"]["populations"][0]["sensing"]["F_c"] == 0.3);
  CHECK(m["config"].get<std::string>().find("angle_bin = 10\n") != std::string::npos);
  CHECK(histogram(out / "angles.csv").size() == 36);
}

TEST_CASE("exit codes") {
  const fs::path cfl = fresh("cfl");
  CHECK(run_cli("run --scenario crossing_lanes --set dt=0.1 --out " + cfl.string()) == 3);
  const json m = manifest(cfl);
  CHECK(m["status"]["exit_code"] == 3);
  CHECK(m["status"]["error"]["kind"] == "CflViolation");

  CHECK(run_cli("run --scenario no_such_thing --out " + fresh("x").string()) == 2);
  CHECK(run_cli("run --config /nonexistent.ini --out " + fresh("x").string()) == 2);
  CHECK(run_cli("run --scenario crossing_lanes --set bogus --out " + fresh("x").string()) == 2);
  CHECK(run_cli("batch --scenario crystal_topological --seeds 3..1 --out " + fresh("empty").string()) == 2);
  CHECK(run_cli("batch --scenario crystal_topological --seeds x..1 --out " + fresh("empty").string()) == 2);
  CHECK(run_cli("run --scenario crossing_lanes --stride 0") == 2);
  CHECK(run_cli("--list-scenarios") == 0);
}

TEST_CASE("batch aggregates in seed order") {
  const fs::path out = fresh("batch");
  REQUIRE(run_cli("batch --scenario crystal_topological --seeds 1..3 --set steps=300 --out " + out.string()) == 0);
  int manifests = 0;
  for (const auto& e : fs::recursive_directory_iterator(out)) manifests += e.path().filename() == "manifest.json";
  CHECK(manifests == 3);
  CHECK(fs::exists(out / "aggregate_angles.csv"));
  CHECK(fs::exists(out / "batch_metrics.csv"));
  const json b = json::parse(slurp(out / "batch.json"));
  CHECK(b["runs"].size() == 3);

  std::vector<std::int64_t> sum;
  for (int s = 1; s <= 3; ++s) {
    const auto h = histogram(out / ("seed_" + std::to_string(s)) / "angles.csv");
    if (sum.empty()) sum.assign(h.size(), 0);
    REQUIRE(h.size() == sum.size());
    for (std::size_t k = 0; k < h.size(); ++k) sum[k] += h[k];
  }
  CHECK(histogram(out / "aggregate_angles.csv") == sum);

  const fs::path one = fresh("batch_one"), single = fresh("single");
  REQUIRE(run_cli("batch --scenario crystal_topological --seeds 1..1 --set steps=300 --out " + one.string()) == 0);
  REQUIRE(run_cli("run --scenario crystal_topological --seed 1 --set steps=300 --out " + single.string()) == 0);
  CHECK(histogram(one / "aggregate_angles.csv") == histogram(single / "angles.csv"));
}

TEST_CASE("line formation batch over 100 seeds") {
  const fs::path out = fresh("line100");
  REQUIRE(run_cli("batch --scenario line_formation --seeds 1..100 --set steps=200 --set stride=200 --out " + out.string()) == 0);
  std::vector<std::int64_t> sum;
  for (int s = 1; s <= 100; ++s) {
    const auto h = histogram(out / ("seed_" + std::to_string(s)) / "angles.csv");
    if (sum.empty()) sum.assign(h.size(), 0);
    for (std::size_t k = 0; k < h.size(); ++k) sum[k] += h[k];
  }
  const auto agg = histogram(out / "aggregate_angles.csv");
  CHECK(agg == sum);
  std::int64_t total = 0;
  for (auto c : agg) total += c;
  CHECK(total == 100 * 100 * 6);
}

TEST_CASE("repeated runs are bit-identical") {
  for (const std::string args : {"--scenario crowd_expansion --set steps=60", "--scenario crystal_topological --set steps=200"}) {
    CAPTURE(args);
    const fs::path a = fresh("rep_a"), b = fresh("rep_b");
    REQUIRE(run_cli("run " + args + " --seed 7 --stride 20 --out " + a.string()) == 0);
    REQUIRE(run_cli("run " + args + " --seed 7 --stride 20 --out " + b.string()) == 0);
    int frames = 0;
    for (const auto& e : fs::directory_iterator(a / "frames")) {
      ++frames;
      CHECK(slurp(e.path()) == slurp(b / "frames" / e.path().filename()));
    }
    CHECK(frames >= 2);
    CHECK(slurp(a / "metrics.csv") == slurp(b / "metrics.csv"));
  }
}

TEST_CASE("a dumped config reproduces the built-in run") {
  const fs::path ini = fresh("dump.ini");
  fs::create_directories(kScratch);
  REQUIRE(run_cli("dump --scenario bottleneck --seed 3 -o " + ini.string()) == 0);
  const fs::path a = fresh("from_cfg"), b = fresh("from_name");
  REQUIRE(run_cli("run --config " + ini.string() + " --set steps=30 --out " + a.string()) == 0);
  REQUIRE(run_cli("run --scenario bottleneck --seed 3 --set steps=30 --out " + b.string()) == 0);
  CHECK(slurp(a / "frames" / "frame_000030.csv") == slurp(b / "frames" / "frame_000030.csv"));
  CHECK(manifest(a)["seed"] == 3);
}
