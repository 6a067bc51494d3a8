#pragma once

#include <vector>

#include "centrex/mathcore.hpp"

namespace centrex {

/// An estimated compressed centroid with its estimated cluster size.
struct CentroidEstimate {
  VectorXd phi_hat;
  long n_hat = 0;
  int iterations = 0;
};

/// Marker for data left out of every cluster (gated classification, DB-SCAN noise).
inline constexpr int kUnassigned = -1;

struct ClusteringResult {
  std::vector<CentroidEstimate> centroids;
  /// One entry per datum: index into `centroids` or kUnassigned.
  std::vector<int> assignments;
  /// Number of estimation passes that hit the fixed-point iteration cap.
  int capped_estimations = 0;
  /// Number of centroid estimation passes before fusion.
  int estimation_passes = 0;

  int k_found() const { return static_cast<int>(centroids.size()); }
};

}  // namespace centrex
