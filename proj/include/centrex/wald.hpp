#pragma once

#include "centrex/mathcore.hpp"
#include "centrex/types.hpp"

namespace centrex {

enum class Hypothesis { H0, H1 };

struct TestDecision {
  Hypothesis accepted = Hypothesis::H0;
  /// Mahalanobis norm of the tested difference under the test's matrix C.
  double statistic = 0.0;
  double threshold = 0.0;
  /// Tests 1-3: Q_{m/2}(0, statistic). Test 4: 1 - Q_{m/2}(0, statistic),
  /// the probability of a statistic at most this small under the worst-case null.
  double pvalue = 1.0;
};

/// Wald decision: H1 iff statistic > threshold (equality keeps H0).
inline Hypothesis wald_rule(double statistic, double threshold) {
  return statistic > threshold ? Hypothesis::H1 : Hypothesis::H0;
}

/// Reversed-null fusion decision: H1 (same centroid) iff statistic <= threshold.
inline Hypothesis fusion_rule(double statistic, double threshold) {
  return statistic <= threshold ? Hypothesis::H1 : Hypothesis::H0;
}

/// Variance scale of the fusion test relative to A Sigma A^T:
///   C_{l,l'} = (1/n_l + 1/n_l') r^2 (1/mu2) A Sigma A^T.
double fusion_scale(long n_l, long n_lp, const RSquared& r2);

/// Variance scale of test 3 relative to A Sigma A^T: 1 + r^2 / (mu2 n).
double estimated_membership_scale(long n, const RSquared& r2);

/// The four clustering tests for one compression model at level alpha.
///
/// Every test matrix is a positive multiple of A Sigma A^T, so the whitening
/// of the model is shared and only the scalar factor changes; the thresholds
/// lambda_alpha and lambda_{1-alpha} are computed once at construction.
///
/// Test 4 treats the two estimates as independent under its null. That is a
/// modelling approximation: both estimates may share data.
class WaldTests {
 public:
  WaldTests(const CompressionModel& model, double alpha);

  int m() const { return model_->m(); }
  double alpha() const { return alpha_; }
  /// lambda_alpha, used by tests 1-3.
  double threshold() const { return threshold_; }
  /// lambda_{1-alpha}, used by test 4.
  double fusion_threshold() const { return fusion_threshold_; }
  const CompressionModel& model() const { return *model_; }

  /// Test 1: do z_i and z_j belong to the same cluster? C = 2 A Sigma A^T.
  TestDecision same_cluster(const VectorXd& z_i, const VectorXd& z_j) const;
  /// Test 2: does z belong to the cluster of known centroid phi? C = A Sigma A^T.
  TestDecision membership(const VectorXd& z, const VectorXd& phi) const;
  /// Test 3: membership against an estimated centroid,
  /// C = (1 + r^2 / (mu2 n_hat)) A Sigma A^T.
  TestDecision membership_estimated(const VectorXd& z, const CentroidEstimate& phi_hat,
                                    const RSquared& r2) const;
  /// Test 4: H0 the centroids differ, H1 they are the same (merge).
  TestDecision fusion(const CentroidEstimate& phi_l, const CentroidEstimate& phi_lp,
                      const RSquared& r2) const;

  /// Decisions on already-whitened differences (Psi (x - y)), with the test
  /// matrix equal to `scale` times A Sigma A^T.
  TestDecision wald_whitened(double whitened_norm, double scale) const;
  TestDecision fusion_whitened(double whitened_norm, double scale) const;

 private:
  double whitened_norm(const VectorXd& diff, const char* what) const;

  const CompressionModel* model_;
  double alpha_;
  double threshold_;
  double fusion_threshold_;
};

TestDecision test1_same_cluster(const CompressionModel& model, const VectorXd& z_i,
                                const VectorXd& z_j, double alpha);
TestDecision test2_membership(const CompressionModel& model, const VectorXd& z,
                              const VectorXd& phi_k, double alpha);
TestDecision test3_membership_estimated(const CompressionModel& model, const VectorXd& z,
                                        const CentroidEstimate& phi_hat, const RSquared& r2,
                                        double alpha);
TestDecision test4_fusion(const CentroidEstimate& phi_l, const CentroidEstimate& phi_lp,
                          const CompressionModel& model, const RSquared& r2, double alpha);

}  // namespace centrex
