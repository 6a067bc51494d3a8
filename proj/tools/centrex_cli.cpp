// centrex: dataset generation, single runs, campaigns and the r^2 table.
// Talks to the library only through the C interface.

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "centrex/centrex.h"

namespace {

enum Exit { kOk = 0, kFailure = 1, kUsage = 2, kData = 3, kNumeric = 4 };

int exit_code(cx_status s) {
  switch (s) {
    case CX_OK: return kOk;
    case CX_ERR_ARGUMENT: return kUsage;
    case CX_ERR_DATA:
    case CX_ERR_IO: return kData;
    case CX_ERR_NUMERIC: return kNumeric;
    default: return kFailure;
  }
}

int report(cx_status s, const char* what) {
  if (s != CX_OK) std::cerr << "centrex " << what << ": " << cx_last_error() << "\n";
  return exit_code(s);
}

std::optional<std::string> slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) return std::nullopt;
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string fmt(double x) {
  if (std::isnan(x)) return "nan";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

struct Options {
  std::string config;
  std::string out;
  std::string algo;
  std::string dataset;
  std::optional<std::uint64_t> seed;
  int k = 0;
  double eps = 0.0;
  int min_pts = 0;
  int threads = 0;
  std::vector<int> ms;
  std::vector<double> mu2s{1.0};
  std::uint64_t samples = 1000000;
};

int cmd_gen(const Options& o) {
  auto text = slurp(o.config);
  if (!text) {
    std::cerr << "centrex gen: cannot open " << o.config << "\n";
    return kData;
  }
  cx_dataset* ds = nullptr;
  const std::uint64_t seed = o.seed.value_or(0);
  if (int rc = report(cx_dataset_generate(text->c_str(), o.seed ? &seed : nullptr, &ds), "gen")) return rc;
  const std::filesystem::path out(o.out);
  if (out.has_parent_path()) std::filesystem::create_directories(out.parent_path());
  const int rc = report(cx_dataset_save(ds, o.out.c_str()), "gen");
  if (rc == kOk) {
    std::cout << "wrote " << o.out << " (" << cx_dataset_n(ds) << " x " << cx_dataset_m(ds)
              << ", K = " << cx_dataset_k_true(ds) << ")\n";
  }
  cx_dataset_free(ds);
  return rc;
}

int cmd_run(const Options& o) {
  if (o.algo == "kmeans" && o.k <= 0) {
    std::cerr << "centrex run: --algo kmeans needs --k\n";
    return kUsage;
  }
  cx_dataset* ds = nullptr;
  if (int rc = report(cx_dataset_load(o.dataset.c_str(), &ds), "run")) return rc;

  cx_run_options opts;
  cx_run_options_init(&opts);
  opts.algorithm = o.algo.c_str();
  if (o.seed) opts.seed = *o.seed;
  opts.k = o.k;
  opts.eps = o.eps;
  opts.min_pts = o.min_pts;
  opts.config_path = o.config.empty() ? nullptr : o.config.c_str();

  cx_result* res = nullptr;
  int rc = report(cx_run(ds, &opts, &res), "run");
  cx_dataset_free(ds);
  if (rc) return rc;

  const std::filesystem::path dir(o.out);
  std::filesystem::create_directories(dir);
  rc = report(cx_result_write_assignments(res, (dir / "assignments.csv").c_str()), "run");
  if (!rc) rc = report(cx_result_write_centroids(res, (dir / "centroids.csv").c_str()), "run");
  if (!rc && cx_result_has_ledger(res)) rc = report(cx_result_write_ledger(res, (dir / "ledger.csv").c_str()), "run");
  if (!rc) {
    std::ostringstream metrics;
    metrics << "metric,value\n"
            << "algorithm," << o.algo << "\n"
            << "k_found," << cx_result_k_found(res) << "\n"
            << "correct_k," << fmt(cx_result_correct_k(res)) << "\n"
            << "silhouette," << fmt(cx_result_silhouette(res)) << "\n"
            << "runtime_seconds," << fmt(cx_result_runtime_seconds(res)) << "\n"
            << "messages," << cx_result_messages(res) << "\n";
    std::ofstream(dir / "metrics.csv", std::ios::binary) << metrics.str();
    std::cout << metrics.str();
  }
  cx_result_free(res);
  return rc;
}

int cmd_campaign(const Options& o) {
  const int rc = report(cx_campaign(o.config.c_str(), o.threads, o.out.empty() ? nullptr : o.out.c_str()), "campaign");
  if (rc == kOk) std::cout << "campaign written\n";
  return rc;
}

int cmd_rsq(const Options& o) {
  const std::uint64_t seed = o.seed.value_or(0x5eed2024ULL);
  std::ostringstream table;
  table << "m,mu2,r2,std_error\n";
  for (int m : o.ms) {
    for (double mu2 : o.mu2s) {
      double value = 0.0, se = 0.0;
      if (int rc = report(cx_r_squared(m, mu2, o.samples, seed, &value, &se), "rsq")) return rc;
      table << m << "," << fmt(mu2) << "," << fmt(value) << "," << fmt(se) << "\n";
    }
  }
  if (o.out.empty()) {
    std::cout << table.str();
  } else {
    std::ofstream out(o.out, std::ios::binary);
    if (!out) {
      std::cerr << "centrex rsq: cannot write " << o.out << "\n";
      return kData;
    }
    out << table.str();
  }
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Clustering of compressed Gaussian data (centralized and decentralized)"};
  app.require_subcommand(1);
  Options o;

  auto* gen = app.add_subcommand("gen", "Generate a dataset (CSV plus .meta.json sidecar)");
  gen->add_option("--config", o.config, "Scenario or experiment config (JSON)")->required();
  gen->add_option("--out", o.out, "Dataset CSV path")->required();
  gen->add_option("--seed", o.seed, "Override the scenario seed");

  auto* run = app.add_subcommand("run", "Run one algorithm on a dataset");
  run->add_option("dataset", o.dataset, "Dataset CSV written by `gen`")->required();
  run->add_option("--algo", o.algo, "centrex | decentrex | kmeans | kmeans-aic | dbscan | dkmeans")
      ->required()
      ->check(CLI::IsMember({"centrex", "decentrex", "kmeans", "kmeans-aic", "dbscan", "dkmeans"}));
  run->add_option("--out", o.out, "Output directory")->required();
  run->add_option("--config", o.config, "Experiment config supplying algorithm parameters");
  run->add_option("--seed", o.seed, "Algorithm seed");
  run->add_option("--k", o.k, "Number of clusters (kmeans)");
  run->add_option("--eps", o.eps, "DB-SCAN radius (default: 5% pairwise-distance quantile)");
  run->add_option("--min-pts", o.min_pts, "DB-SCAN core-point threshold");

  auto* campaign = app.add_subcommand("campaign", "Monte-Carlo benchmark campaign");
  campaign->add_option("--config", o.config, "Experiment config (JSON)")->required();
  campaign->add_option("--out", o.out, "CSV path (default: <output_dir>/campaign.csv)");
  campaign->add_option("--threads", o.threads, "Worker threads (0 = all cores)");

  auto* rsq = app.add_subcommand("rsq", "Compute and cache r^2 over m and mu^2");
  rsq->add_option("--m", o.ms, "Compressed dimensions")->required();
  rsq->add_option("--mu2", o.mu2s, "mu^2 values");
  rsq->add_option("--samples", o.samples, "Monte-Carlo samples");
  rsq->add_option("--seed", o.seed, "Monte-Carlo seed");
  rsq->add_option("--out", o.out, "CSV path (default: stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kOk : kUsage;
  }

  if (*gen) return cmd_gen(o);
  if (*run) return cmd_run(o);
  if (*campaign) return cmd_campaign(o);
  return cmd_rsq(o);
}
