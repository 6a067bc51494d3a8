#pragma once

#include <cstdint>
#include <vector>

#include "centrex/mathcore.hpp"

namespace centrex {

enum class CentroidModel { kSparse, kNonSparse };
enum class SensingKind { kGaussianProjection, kCoordinateSelection };
/// Entry variance of a Gaussian projection: 1/m (standard) or m*d (literal).
enum class ProjectionVariance { kStandard, kPaperLiteral };
enum class ClusterSizes { kMultinomial, kFixed };

struct ScenarioConfig {
  int d = 100;
  int m = 50;
  double sigma = 1.0;
  double b = 2.0;
  CentroidModel centroid_model = CentroidModel::kNonSparse;
  double p = 0.2;
  SensingKind sensing = SensingKind::kGaussianProjection;
  ProjectionVariance projection_variance = ProjectionVariance::kStandard;
  /// Number of clusters; 0 draws K uniformly on 1..k_max per dataset.
  int k = 0;
  int k_max = 10;
  int n = 1000;
  ClusterSizes cluster_sizes = ClusterSizes::kMultinomial;
  std::uint64_t seed = 0;

  void validate() const;
};

struct Dataset {
  ScenarioConfig config;
  /// A, m x d.
  MatrixXd sensing;
  /// Sigma, d x d.
  MatrixXd noise_cov;
  /// True centroids in the original space, one per column (d x K).
  MatrixXd centroids;
  /// Compressed measurements Z, one per column (m x N).
  MatrixXd data;
  std::vector<int> labels;

  int k_true() const { return static_cast<int>(centroids.cols()); }
  MatrixXd compressed_centroids() const { return sensing * centroids; }
  CompressionModel model() const { return CompressionModel(sensing, noise_cov); }
};

/// K for this configuration: cfg.k, or a uniform draw on 1..k_max.
int draw_cluster_count(const ScenarioConfig& cfg);

/// d x k matrix of centroids under the configured model.
MatrixXd gen_centroids(const ScenarioConfig& cfg, int k);

/// Full-rank m x d sensing matrix. Rank-deficient draws are redrawn up to
/// 10 times, then NumericError.
MatrixXd gen_sensing_matrix(const ScenarioConfig& cfg);

Dataset gen_dataset(const ScenarioConfig& cfg);

struct Shards {
  std::vector<MatrixXd> data;
  /// Column indices into the pooled data, ascending within each shard.
  std::vector<std::vector<int>> indices;
};

/// Random partition of the columns into `sensors` shards whose sizes differ
/// by at most one.
Shards shard(const MatrixXd& data, int sensors, std::uint64_t seed);

}  // namespace centrex
