#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "centrex/mathcore.hpp"
#include "centrex/types.hpp"
#include "centrex/wald.hpp"

namespace centrex {

struct CentrexParams {
  /// False-alarm level of the marking and fusion tests.
  double alpha = 1e-3;
  /// Fixed-point stopping tolerance on (1/m) nu_C(phi_{l+1} - phi_l).
  double epsilon = 1e-3;
  int max_fp_iters = 100;
  /// mu^2 of the r^2 constant used by the fusion test. Estimation after the
  /// first step runs with the A Sigma A^T matrix, hence 1.
  double mu2 = 1.0;
  std::uint64_t rsq_samples = kDefaultRSquaredSamples;
  std::uint64_t rsq_seed = kDefaultRSquaredSeed;

  /// alpha in (0, 1e-2], epsilon in [1e-5, 1e-2], max_fp_iters >= 1.
  void validate() const;
};

/// Weighted mean h_C(phi) = sum_n w_C(Z_n - phi) Z_n / sum_n w_C(Z_n - phi).
/// `data` holds one measurement vector per column.
VectorXd h_map(const WaldContext& ctx, const MatrixXd& data, const VectorXd& phi);

struct EstimationPass {
  CentroidEstimate estimate;
  /// Index of the datum that seeded the iteration.
  int seed_index = -1;
  /// Data accepted by test 2 against the new centroid, plus the seed.
  std::vector<int> newly_marked;
  bool capped = false;
};

/// One centroid estimation: seed at a uniformly drawn unmarked datum, one
/// step of h with C = 2 A Sigma A^T, then steps with C = A Sigma A^T until
/// the stopping rule or max_fp_iters. Marks the seed and every datum that
/// test 2 accepts; n_hat is the size of the test-2 accepted set.
/// `marked` is updated in place.
EstimationPass estimate_one_centroid(const CompressionModel& model, const MatrixXd& data,
                                     std::vector<bool>& marked, const CentrexParams& params,
                                     std::uint64_t seed);

/// Pairwise test-4 fusion with the midpoint rule, swept until stable.
std::vector<CentroidEstimate> fuse(std::vector<CentroidEstimate> centroids,
                                   const CompressionModel& model, const RSquared& r2,
                                   double alpha);

/// Nearest centroid under nu_{A Sigma A^T}; ties go to the lowest index.
std::vector<int> classify(const CompressionModel& model, const MatrixXd& data,
                          const std::vector<CentroidEstimate>& centroids);

/// Full centralized clustering: estimation until every datum is marked,
/// fusion, classification; n_hat refreshed from the final assignments.
ClusteringResult centrex_run(const CompressionModel& model, const MatrixXd& data,
                             const CentrexParams& params, const RSquared& r2, std::uint64_t seed);

/// Same, with r^2 taken from the process-wide cache.
ClusteringResult centrex_run(const CompressionModel& model, const MatrixXd& data,
                             const CentrexParams& params, std::uint64_t seed);

}  // namespace centrex
