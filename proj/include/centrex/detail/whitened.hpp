#pragma once

// Kernels shared by the centralized and decentralized algorithms. Every
// matrix they use is a multiple of A Sigma A^T, so they operate on data
// pre-multiplied by its whitening factor, where nu_{s A Sigma A^T}(x) is
// |x| / sqrt(s).

#include <vector>

#include "centrex/centralized.hpp"
#include "centrex/random.hpp"

namespace centrex::detail {

/// Weights w(|x_n - phi|^2 / scale) for every column of `points`.
void wald_weights(const MatrixXd& points, const VectorXd& phi, double scale, VectorXd& out);

/// One step of h in whitened coordinates. Returns false (and leaves `out`
/// untouched) when every weight underflows to zero.
bool h_step(const MatrixXd& points, const VectorXd& phi, double scale, VectorXd& out);

struct WhitenedPass {
  VectorXd phi;
  int iterations = 0;
  bool capped = false;
  int seed_index = -1;
  std::vector<int> accepted;  // test-2 accepted set, ascending
};

/// Draws the seed among unmarked columns, iterates, and runs test 2 on all
/// columns. With `single_step` the iteration stops after the 2C step.
WhitenedPass estimate_pass(const MatrixXd& points, const std::vector<int>& unmarked,
                           const WaldTests& tests, const CentrexParams& params, RandomEngine& rng,
                           bool single_step);

/// Fusion sweep on estimates whose phi_hat are whitened; n_hat below 1 is
/// treated as 1 inside the test.
void fuse_whitened(std::vector<CentroidEstimate>& centroids, const WaldTests& tests,
                   const RSquared& r2);

/// Nearest-centroid labels. With `gated`, data rejected by test 2 against
/// their nearest centroid get kUnassigned.
std::vector<int> classify_whitened(const MatrixXd& points, const std::vector<VectorXd>& centroids,
                                   const WaldTests* gate);

}  // namespace centrex::detail
