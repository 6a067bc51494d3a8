#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "centrex/mathcore.hpp"
#include "centrex/types.hpp"

namespace centrex {

struct BaselineResult {
  int k_found = 0;
  /// Cluster index per datum; kUnassigned marks DB-SCAN noise.
  std::vector<int> assignments;
  /// Sum of squared Euclidean distances to the assigned centroid.
  double inertia = 0.0;
  int replicate_used = 0;
  /// Cluster centroids, one per column.
  MatrixXd centroids;
  /// Inertia after every Lloyd iteration of the winning replicate.
  std::vector<double> inertia_history;
};

/// Lloyd's algorithm with `replicates` random restarts (K distinct data
/// points as initial centroids); the lowest final inertia wins. Data are
/// columns; the metric is Euclidean in compressed space.
BaselineResult kmeans(const MatrixXd& data, int k, int replicates, std::uint64_t seed,
                      int max_iters = 300);

/// Spherical-Gaussian AIC: N m ln(inertia / (N m)) + 2 K m. Zero inertia gives -inf.
double aic_score(long n, int m, double inertia, int k);

/// K-means for every K in 1..k_max, keeping the K with smallest AIC (the
/// smallest such K on ties).
BaselineResult kmeans_aic(const MatrixXd& data, int k_max, int replicates, std::uint64_t seed);

/// Density-based clustering. Noise points are kUnassigned and not counted
/// in k_found. Clusters are numbered in order of their first core point.
BaselineResult dbscan(const MatrixXd& data, double eps, int min_pts);

/// q-quantile (nearest rank) of all pairwise Euclidean distances.
double pairwise_distance_quantile(const MatrixXd& data, double q);

/// Mean silhouette over all data. Members of singleton clusters score 0.
/// kUnassigned data are grouped together as one extra cluster. Empty when
/// fewer than two non-empty groups exist.
std::optional<double> silhouette(const MatrixXd& data, std::span<const int> assignments);

/// N x N matrix of Euclidean distances between columns.
MatrixXd pairwise_distances(const MatrixXd& data);

/// silhouette() on a precomputed distance matrix.
std::optional<double> silhouette_from_distances(const MatrixXd& dist, std::span<const int> assignments);

/// Percentage of trials whose found K equals the true K.
double correct_k_rate(std::span<const int> found, std::span<const int> truth);

}  // namespace centrex
