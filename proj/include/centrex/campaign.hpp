#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "centrex/centralized.hpp"
#include "centrex/datagen.hpp"
#include "centrex/decentralized.hpp"

namespace centrex {

struct BaselineParams {
  int replicates = 10;
  int k_max = 10;
  /// Restarts R of the decentralized K-means baseline.
  int restarts = 10;
  /// DB-SCAN eps as a quantile of the pairwise distances, unless eps > 0.
  double eps_quantile = 0.05;
  double eps = 0.0;
  int min_pts = 5;
};

/// Algorithm names accepted by run_algorithm():
/// centrex, decentrex, kmeans, kmeans-aic, dbscan, dkmeans.
bool is_known_algorithm(const std::string& name);

struct ExperimentConfig {
  ScenarioConfig scenario;
  CentrexParams centrex;
  NetworkConfig network;
  BaselineParams baselines;
  std::vector<std::string> algorithms{"centrex", "kmeans"};
  /// Noise levels to sweep; empty means {scenario.sigma}. Every level reuses
  /// the same per-trial seeds.
  std::vector<double> sigmas;
  int trials = 10;
  std::string output_dir = ".";
  std::uint64_t master_seed = 1;

  void validate() const;
};

std::string experiment_to_json_text(const ExperimentConfig& cfg);
/// Parse errors report line and column; absent required fields are named.
ExperimentConfig experiment_from_json_text(const std::string& text);
ExperimentConfig load_experiment(const std::string& path);

struct AlgorithmRun {
  int k_found = 0;
  /// 1 or 0; for decentrex the fraction of sensors that found the true K.
  double correct_k = 0.0;
  std::optional<double> silhouette;
  std::uint64_t messages = 0;
  /// Labels of the pooled data (for decentrex: the first sensor's centroids
  /// applied to the pooled data).
  std::vector<int> assignments;
  /// Compressed centroids, one per column.
  MatrixXd centroids;
  std::vector<int> sensor_k;
  std::optional<MessageLedger> ledger;
};

/// Runs one algorithm on a dataset. `r2` is used by centrex and decentrex;
/// `dist` is an optional precomputed pairwise distance matrix of ds.data.
/// For kmeans, k <= 0 means the true K.
AlgorithmRun run_algorithm(const std::string& algo, const Dataset& ds, const ExperimentConfig& cfg,
                           const RSquared& r2, std::uint64_t seed, int k = 0,
                           const MatrixXd* dist = nullptr);

struct CampaignRow {
  int sigma_index = 0;
  double sigma = 0.0;
  int trial = 0;
  std::string algorithm;
  std::uint64_t seed = 0;
  int k_true = 0;
  int k_found = 0;
  double correct_k = 0.0;
  std::optional<double> silhouette;
  std::uint64_t messages = 0;
  /// "ok" or "error: <message>".
  std::string status = "ok";
};

/// Seed of trial t: independent of sigma and algorithm.
std::uint64_t trial_seed(std::uint64_t master_seed, int trial);

/// All (sigma, trial, algorithm) rows, sorted by sigma index, trial, then
/// algorithm position in cfg.algorithms. `threads` <= 0 uses the hardware count.
std::vector<CampaignRow> run_campaign(const ExperimentConfig& cfg, int threads, const RSquared& r2);
std::vector<CampaignRow> run_campaign(const ExperimentConfig& cfg, int threads);

/// CSV with header
/// `sigma,trial,algorithm,seed,k_true,k_found,correct_k,silhouette,messages,status`
/// followed by one aggregate row per (sigma, algorithm) whose trial field is
/// `all` and whose numeric fields are means over the successful trials.
std::string campaign_csv(const std::vector<CampaignRow>& rows, const ExperimentConfig& cfg);

}  // namespace centrex
