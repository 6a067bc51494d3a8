#include <doctest.h>

#include <sys/wait.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "centrex/centrex.h"
#include "oracles.hpp"

namespace fs = std::filesystem;

namespace {

const char* kScenario = R"({"d": 20, "m": 6, "sigma": 0.5, "b": 3, "k": 3, "n": 120, "seed": 5})";

fs::path scratch() {
  const auto dir = fs::temp_directory_path() / "centrex_capi_tests";
  fs::create_directories(dir);
  return dir;
}

int cli(const std::string& args) {
  const std::string cmd = std::string(CX_CLI_PATH) + " " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

}  // namespace

TEST_CASE("generate, save, load") {
  CHECK(std::string(cx_version()) == "1.0.0");
  cx_dataset* ds = nullptr;
  REQUIRE(cx_dataset_generate(kScenario, nullptr, &ds) == CX_OK);
  CHECK(cx_dataset_m(ds) == 6);
  CHECK(cx_dataset_n(ds) == 120);
  CHECK(cx_dataset_k_true(ds) == 3);
  const auto path = (scratch() / "ds.csv").string();
  REQUIRE(cx_dataset_save(ds, path.c_str()) == CX_OK);
  cx_dataset* back = nullptr;
  REQUIRE(cx_dataset_load(path.c_str(), &back) == CX_OK);
  std::vector<double> a(6 * 120), b(6 * 120);
  REQUIRE(cx_dataset_data(ds, a.data(), a.size()) == CX_OK);
  REQUIRE(cx_dataset_data(back, b.data(), b.size()) == CX_OK);
  CHECK(a == b);
  CHECK(cx_dataset_data(ds, a.data(), 10) == CX_ERR_ARGUMENT);
  CHECK(std::string(cx_last_error()).find("too small") != std::string::npos);

  const std::uint64_t other = 6;
  cx_dataset* reseeded = nullptr;
  REQUIRE(cx_dataset_generate(kScenario, &other, &reseeded) == CX_OK);
  REQUIRE(cx_dataset_data(reseeded, b.data(), b.size()) == CX_OK);
  CHECK(a != b);
  cx_dataset_free(reseeded);
  cx_dataset_free(back);
  cx_dataset_free(ds);
}

TEST_CASE("run and read results") {
  cx_dataset* ds = nullptr;
  REQUIRE(cx_dataset_generate(kScenario, nullptr, &ds) == CX_OK);
  cx_run_options opts;
  cx_run_options_init(&opts);
  for (const char* algo : {"centrex", "decentrex", "kmeans", "kmeans-aic", "dbscan", "dkmeans"}) {
    CAPTURE(algo);
    opts.algorithm = algo;
    cx_result* res = nullptr;
    REQUIRE(cx_run(ds, &opts, &res) == CX_OK);
    CHECK(cx_result_k_found(res) >= 1);
    std::vector<int> labels(120);
    CHECK(cx_result_assignments(res, labels.data(), labels.size()) == CX_OK);
    CHECK(cx_result_runtime_seconds(res) >= 0.0);
    const bool ledger = std::string(algo) == "decentrex" || std::string(algo) == "dkmeans";
    CHECK(cx_result_has_ledger(res) == (ledger ? 1 : 0));
    CHECK((cx_result_messages(res) > 0) == ledger);
    if (std::string(algo) == "centrex") {
      CHECK(cx_result_k_found(res) == 3);
      CHECK(cx_result_correct_k(res) == 1.0);
      std::vector<double> cents(6 * 3);
      CHECK(cx_result_centroids(res, cents.data(), cents.size()) == CX_OK);
    }
    cx_result_free(res);
  }
  opts.algorithm = "nope";
  cx_result* res = nullptr;
  CHECK(cx_run(ds, &opts, &res) == CX_ERR_ARGUMENT);
  cx_dataset_free(ds);
}

TEST_CASE("status codes") {
  cx_dataset* ds = nullptr;
  CHECK(cx_dataset_generate(nullptr, nullptr, &ds) == CX_ERR_ARGUMENT);
  CHECK(std::string(cx_last_error()).find("null") != std::string::npos);
  CHECK(cx_dataset_generate("{ not json", nullptr, &ds) == CX_ERR_DATA);
  CHECK(cx_dataset_generate(R"({"m": 50, "d": 10, "sigma": 1, "n": 10, "seed": 1})", nullptr, &ds) ==
        CX_ERR_DATA);
  CHECK(cx_dataset_load("/nonexistent/x.csv", &ds) == CX_ERR_IO);
  CHECK(cx_campaign("/nonexistent/cfg.json", 1, nullptr) == CX_ERR_IO);
  double v = 0.0;
  CHECK(cx_wald_threshold(5, 2.0, &v) == CX_ERR_ARGUMENT);
  CHECK(cx_result_k_found(nullptr) == -1);
  CHECK(std::isnan(cx_marcum_q(0, 1.0)));
}

TEST_CASE("numeric entry points") {
  for (int m : {1, 4, 9}) {
    CHECK(cx_marcum_q(m, 1.7) == doctest::Approx(oracle::marcum_half_m(m, 1.7)).epsilon(1e-12));
    double t = 0.0;
    REQUIRE(cx_wald_threshold(m, 0.01, &t) == CX_OK);
    CHECK(t == doctest::Approx(oracle::threshold(m, 0.01)).epsilon(1e-9));
  }
  double r = 0.0, se = 0.0;
  REQUIRE(cx_r_squared(2, 1.0, 100000, 3, &r, &se) == CX_OK);
  CHECK(std::abs(r - 4.0 / 9.0) < 5.0 * se);
}

TEST_CASE("command line exit codes") {
  const auto dir = scratch();
  const auto scen = (dir / "scen.json").string();
  std::ofstream(scen) << kScenario;
  const auto data = (dir / "cli" / "ds.csv").string();
  const auto out = (dir / "cli" / "run").string();

  CHECK(cli("") == 2);
  CHECK(cli("gen --config " + scen) == 2);
  CHECK(cli("gen --config /nonexistent.json --out " + data) == 3);
  REQUIRE(cli("gen --config " + scen + " --out " + data) == 0);
  CHECK(cli("run " + data + " --algo centrex --out " + out) == 0);
  CHECK(fs::exists(fs::path(out) / "assignments.csv"));
  CHECK(fs::exists(fs::path(out) / "metrics.csv"));
  CHECK(cli("run " + data + " --algo decentrex --out " + out) == 0);
  CHECK(fs::exists(fs::path(out) / "ledger.csv"));
  CHECK(cli("run " + data + " --algo kmeans --out " + out) == 2);
  CHECK(cli("run " + data + " --algo bogus --out " + out) == 2);
  CHECK(cli("run /nonexistent.csv --algo centrex --out " + out) == 3);

  const auto bad = (dir / "bad.json").string();
  std::ofstream(bad) << "{\"trials\": 2,\n";
  CHECK(cli("campaign --config " + bad) == 3);

  const auto cfg = (dir / "exp.json").string();
  std::ofstream(cfg) << R"({"scenario": {"d": 20, "m": 6, "n": 80, "sigma": 1, "seed": 0, "k_max": 3},
    "trials": 2, "master_seed": 3, "algorithms": ["kmeans", "dbscan"], "output_dir": ")"
                     << (dir / "camp").string() << "\"}";
  CHECK(cli("campaign --config " + cfg + " --threads 2") == 0);
  CHECK(fs::exists(dir / "camp" / "campaign.csv"));
  CHECK(cli("rsq --m 3 --samples 1000 --out " + (dir / "rsq.csv").string()) == 0);
}
