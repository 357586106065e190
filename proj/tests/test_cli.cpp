#include <doctest.h>

#include <json.hpp>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>

#include "ensk/document.hpp"
#include "ensk/types.hpp"
#include "ensk/voting_energy.hpp"

namespace {

namespace fs = std::filesystem;

struct CliResult {
  int exit_code = -1;
  std::string out;
};

CliResult run_cli(const std::string& args) {
  const std::string cmd = std::string(ENSK_BIN_PATH) + " " + args + " 2>/dev/null";
  FILE* pipe = popen(cmd.c_str(), "r");
  REQUIRE(pipe != nullptr);
  CliResult result;
  char buffer[4096];
  while (std::size_t got = std::fread(buffer, 1, sizeof buffer, pipe)) {
    result.out.append(buffer, got);
  }
  const int status = pclose(pipe);
  result.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return result;
}

fs::path write_temp(const std::string& name, const std::string& content) {
  const fs::path path = fs::temp_directory_path() / name;
  std::ofstream out(path);
  out << content;
  return path;
}

const char* kSmallPool =
    "id,accuracy,cost\n"
    "a,0.9,2\n"
    "b,0.8,1\n"
    "c,0.75,1.5\n"
    "d,0.6,0.5\n"
    "e,0.7,1\n";

}  // namespace

TEST_CASE("solve emits a verifiable document") {
  const auto pool_path = write_temp("ensk_pool.csv", kSmallPool);
  const auto res =
      run_cli("solve --pool " + pool_path.string() + " --budget 4 --strategy sherlock --seed 5");
  REQUIRE(res.exit_code == 0);
  const auto doc = nlohmann::json::parse(res.out);
  CHECK(doc["tool"]["name"] == "ensk");
  CHECK(doc["stop_rule"]["maxstep"].get<std::uint64_t>() >= 1);

  // Recompute cost and energy from the reported indices.
  const ensk::Pool pool = ensk::validate_pool({{"a", 0.9, 2},
                                               {"b", 0.8, 1},
                                               {"c", 0.75, 1.5},
                                               {"d", 0.6, 0.5},
                                               {"e", 0.7, 1}});
  const auto indices = doc["result"]["selection"]["indices"].get<std::vector<std::size_t>>();
  const auto sel = ensk::Selection::make(pool, ensk::EnergyModel::plain_majority(), indices);
  CHECK(std::abs(sel.energy() - doc["result"]["selection"]["energy"].get<double>()) < 1e-12);
  CHECK(std::abs(sel.total_cost() - doc["result"]["selection"]["total_cost"].get<double>()) <
        1e-12);
  CHECK(sel.total_cost() <= 4.0);
}

TEST_CASE("every strategy runs through the cli") {
  const auto pool_path = write_temp("ensk_pool.csv", kSmallPool);
  for (const std::string strategy :
       {"greedy-forward", "greedy-backward", "monte-carlo", "sa", "sherlock"}) {
    const auto res = run_cli("solve --pool " + pool_path.string() + " --budget 4 --strategy " +
                             strategy + " --seed 9");
    CHECK(res.exit_code == 0);
  }
  CHECK(run_cli("solve --pool " + pool_path.string() +
                " --budget 4 --strategy greedy-backward --key usefulness")
            .exit_code == 0);
}

TEST_CASE("a single-member pool solves under every strategy") {
  const auto pool_path = write_temp("ensk_solo.csv", "id,accuracy,cost\nsolo,0.8,2\n");
  for (const std::string strategy :
       {"greedy-forward", "greedy-backward", "monte-carlo", "sa", "sherlock"}) {
    const auto res = run_cli("solve --pool " + pool_path.string() + " --budget 3 --strategy " +
                             strategy + " --seed 1");
    REQUIRE(res.exit_code == 0);
    const auto doc = nlohmann::json::parse(res.out);
    CHECK(doc["result"]["selection"]["ids"] == std::vector<std::string>{"solo"});
  }
}

TEST_CASE("stats populates the beta-branch diagnostics on a well-behaved pool") {
  std::string csv = "id,accuracy,cost\n";
  // Spread of plausible accuracies strictly inside (0,1) with mild costs.
  const double accs[] = {0.62, 0.68, 0.71, 0.74, 0.66, 0.79, 0.81, 0.7,  0.76, 0.72,
                         0.69, 0.77, 0.73, 0.65, 0.8,  0.75, 0.67, 0.78, 0.7,  0.74,
                         0.72, 0.76, 0.71, 0.69, 0.75, 0.73, 0.77, 0.68, 0.74, 0.7};
  for (int i = 0; i < 30; ++i) {
    csv += "m" + std::to_string(i) + "," + std::to_string(accs[i]) + ",2.5\n";
  }
  const auto pool_path = write_temp("ensk_beta30.csv", csv);
  const auto res = run_cli("stats --pool " + pool_path.string() + " --budget 22.5");
  REQUIRE(res.exit_code == 0);
  const auto doc = nlohmann::json::parse(res.out);
  CHECK(doc["accuracy_distribution"]["source"] == "beta-fit");
  CHECK(doc["ell_estimates"]["beta"].is_number());
  CHECK(doc["ell_estimates"]["mean_cost"] == 9);
  const auto& der = doc["stop_rule"]["derivation"];
  if (der["branch"] == "beta") {
    CHECK(der["alpha_q"].get<double>() > der["beta_q"].get<double>());
    CHECK(der["beta_q"].get<double>() > 1.0);
    CHECK(der["stop_probability"].get<double>() >= 0.6);
  }
  CHECK(doc["stop_rule"]["stop"].get<double>() <= 1.0);
}

TEST_CASE("malformed input exits 2") {
  const auto bad = write_temp("ensk_bad.csv", "id,accuracy,cost\nx,notanumber,1\n");
  CHECK(run_cli("solve --pool " + bad.string() + " --budget 4").exit_code == 2);
  const auto badhdr = write_temp("ensk_badhdr.csv", "foo,bar\n1,2\n");
  CHECK(run_cli("solve --pool " + badhdr.string() + " --budget 4").exit_code == 2);
  CHECK(run_cli("solve --pool /nonexistent.csv --budget 4").exit_code == 2);
  CHECK(run_cli("solve --pool " + badhdr.string()).exit_code == 2);  // missing flag
}

TEST_CASE("infeasible budget exits 3") {
  const auto pool_path = write_temp("ensk_pool.csv", kSmallPool);
  CHECK(run_cli("solve --pool " + pool_path.string() + " --budget 0.2").exit_code == 3);
}

TEST_CASE("oracle size guard exits 4") {
  std::string big = "id,accuracy,cost\n";
  for (int i = 0; i < 23; ++i) {
    big += "m" + std::to_string(i) + ",0.5,1\n";
  }
  const auto pool_path = write_temp("ensk_big.csv", big);
  CHECK(run_cli("oracle --pool " + pool_path.string() + " --budget 5").exit_code == 4);
}

TEST_CASE("oracle never loses to solve") {
  const auto pool_path = write_temp("ensk_pool.csv", kSmallPool);
  const auto oracle = run_cli("oracle --pool " + pool_path.string() + " --budget 4");
  REQUIRE(oracle.exit_code == 0);
  const double opt =
      nlohmann::json::parse(oracle.out)["result"]["selection"]["energy"].get<double>();
  for (std::uint64_t seed : {1, 2, 3}) {
    const auto res = run_cli("solve --pool " + pool_path.string() + " --budget 4 --seed " +
                             std::to_string(seed));
    const double got =
        nlohmann::json::parse(res.out)["result"]["selection"]["energy"].get<double>();
    CHECK(got <= opt + 1e-12);
  }
}

TEST_CASE("unknown experiment exits 2") {
  CHECK(run_cli("reproduce --experiment nope --out-dir /tmp/ensk_nope").exit_code == 2);
}

TEST_CASE("documents are byte-identical across reruns") {
  const auto pool_path = write_temp("ensk_pool.csv", kSmallPool);
  const std::string args = "solve --pool " + pool_path.string() +
                           " --budget 4 --strategy sa --seed 31 --trace";
  auto a = nlohmann::ordered_json::parse(run_cli(args).out);
  auto b = nlohmann::ordered_json::parse(run_cli(args).out);
  ensk::strip_wall_times(a);
  ensk::strip_wall_times(b);
  CHECK(a.dump() == b.dump());
}

TEST_CASE("ENSK_SEED provides the default seed") {
  const auto pool_path = write_temp("ensk_pool.csv", kSmallPool);
  const std::string base = "solve --pool " + pool_path.string() + " --budget 4 --strategy mc";
  auto explicit_run = nlohmann::ordered_json::parse(run_cli(base + " --seed 77").out);
  const std::string cmd = "ENSK_SEED=77 " + std::string(ENSK_BIN_PATH) + " " + base;
  FILE* pipe = popen((cmd + " 2>/dev/null").c_str(), "r");
  REQUIRE(pipe != nullptr);
  std::string out;
  char buffer[4096];
  while (std::size_t got = std::fread(buffer, 1, sizeof buffer, pipe)) out.append(buffer, got);
  pclose(pipe);
  auto env_run = nlohmann::ordered_json::parse(out);
  ensk::strip_wall_times(explicit_run);
  ensk::strip_wall_times(env_run);
  CHECK(explicit_run.dump() == env_run.dump());
}

TEST_CASE("stats reports the empirical path when a boundary accuracy is present") {
  const auto pool_path = write_temp("ensk_boundary.csv",
                                    "id,accuracy,cost\n"
                                    "a,1.0,1\n"
                                    "b,0.8,1\n"
                                    "c,0.7,1\n"
                                    "d,0.75,1\n"
                                    "e,0.9,1\n"
                                    "f,0.85,1\n");
  const auto res = run_cli("stats --pool " + pool_path.string() + " --budget 3");
  REQUIRE(res.exit_code == 0);
  const auto doc = nlohmann::json::parse(res.out);
  CHECK(doc["accuracy_distribution"]["source"] == "empirical");
  CHECK(doc["ell_estimates"]["beta"].is_string());  // n/a on the empirical path
}

TEST_CASE("stats without a budget uses the whole pool") {
  const auto pool_path = write_temp("ensk_nocost.csv",
                                    "id,accuracy\n"
                                    "a,0.7\nb,0.72\nc,0.8\nd,0.66\ne,0.74\nf,0.69\n");
  const auto res = run_cli("stats --pool " + pool_path.string());
  REQUIRE(res.exit_code == 0);
  const auto doc = nlohmann::json::parse(res.out);
  CHECK(doc["ell_estimates"]["full_pool"] == 6);
  CHECK(doc["stop_rule"]["derivation"]["ell_hat"] == 6);
}

TEST_CASE("constrained solve echoes the estimated size") {
  const auto pool_path = write_temp("ensk_od.csv",
                                    "id,accuracy,cost\n"
                                    "od1,0.220,31\nod2,0.304,38\nod3,0.319,34\nod4,0.643,69\n"
                                    "od5,0.754,11\nod6,0.765,7\nod7,0.958,21\nod8,0.976,90\n");
  const auto weights_path = write_temp("ensk_odw.csv", "0,0.11,0.70,0.93,0.99,1,1,1,1\n");
  const auto res = run_cli("solve --pool " + pool_path.string() +
                           " --budget 240.8 --strategy sherlock --model constrained --weights " +
                           weights_path.string() + " --seed 4");
  REQUIRE(res.exit_code == 0);
  const auto doc = nlohmann::json::parse(res.out);
  CHECK(doc["stop_rule"]["derivation"]["ell_hat"] == 7);
  CHECK(doc["stop_rule"]["derivation"]["constrained_moments"] == true);
}

TEST_CASE("literal efficiency flag is accepted") {
  const auto pool_path = write_temp("ensk_pool.csv", kSmallPool);
  const auto res = run_cli("solve --pool " + pool_path.string() +
                           " --budget 4 --strategy sherlock --seed 5 --literal-eq5");
  CHECK(res.exit_code == 0);
}

TEST_CASE("reproduce writes report and csv files") {
  const fs::path dir = fs::temp_directory_path() / "ensk_repro_test";
  fs::remove_all(dir);
  const auto res = run_cli("reproduce --experiment od --replicates 3 --seed 5 --out-dir " +
                           dir.string());
  REQUIRE(res.exit_code == 0);
  CHECK(fs::exists(dir / "report.json"));
  CHECK(fs::exists(dir / "replicates.csv"));
  CHECK(fs::exists(dir / "traces.csv"));
  std::ifstream in(dir / "report.json");
  nlohmann::json doc;
  in >> doc;
  CHECK(doc["experiment"] == "od");
  CHECK(doc["replicates"] == 3);
}
