#pragma once

#include <cstdint>

#include <Eigen/Dense>

namespace centrex {

using Eigen::MatrixXd;
using Eigen::VectorXd;

/// Whitening factor of a symmetric positive-definite matrix.
///
/// From the eigendecomposition C = R diag(l) R^T this returns
/// Psi = diag(l)^{-1/2} R^T, so that Psi C Psi^T = I and the Mahalanobis norm
/// sqrt(x^T C^{-1} x) equals the Euclidean norm of Psi x.
///
/// Throws NumericError when C is not symmetric (1e-12, relative to its
/// largest entry) or when an eigenvalue is below 1e-12 times the largest one.
/// Small eigenvalues are rejected rather than clamped.
MatrixXd whiten(const MatrixXd& c);

/// Sensing matrix A (m x d), noise covariance Sigma (d x d) and the cached
/// compressed covariance A Sigma A^T with its whitening factor.
class CompressionModel {
 public:
  CompressionModel(MatrixXd sensing, MatrixXd noise_cov);

  int d() const { return static_cast<int>(sensing_.cols()); }
  int m() const { return static_cast<int>(sensing_.rows()); }

  const MatrixXd& sensing() const { return sensing_; }
  const MatrixXd& noise_cov() const { return noise_cov_; }
  /// A Sigma A^T.
  const MatrixXd& compressed_cov() const { return compressed_cov_; }
  /// Whitening factor of A Sigma A^T.
  const MatrixXd& whitening() const { return whitening_; }
  /// Inverse of whitening(), maps whitened coordinates back.
  const MatrixXd& unwhitening() const { return unwhitening_; }

  /// Column-wise whitening of compressed vectors.
  MatrixXd whiten_points(const MatrixXd& points) const { return whitening_ * points; }
  VectorXd whiten_point(const VectorXd& x) const { return whitening_ * x; }
  VectorXd unwhiten_point(const VectorXd& x) const { return unwhitening_ * x; }

 private:
  MatrixXd sensing_;
  MatrixXd noise_cov_;
  MatrixXd compressed_cov_;
  MatrixXd whitening_;
  MatrixXd unwhitening_;
};

/// Covariance matrix C, its whitening factor, and the Wald threshold at
/// level alpha (Q_{m/2}(0, threshold) = alpha).
class WaldContext {
 public:
  WaldContext(MatrixXd c, double alpha);

  int m() const { return static_cast<int>(c_.rows()); }
  double alpha() const { return alpha_; }
  double threshold() const { return threshold_; }
  const MatrixXd& c() const { return c_; }
  const MatrixXd& psi() const { return psi_; }

  /// Context for s * C at the same level; reuses the eigendecomposition.
  WaldContext scaled(double s) const;

 private:
  WaldContext(MatrixXd c, MatrixXd psi, double alpha, double threshold);

  MatrixXd c_;
  MatrixXd psi_;
  double alpha_;
  double threshold_;
};

/// Regularized upper incomplete gamma function Gamma(a, x) / Gamma(a).
double gamma_q(double a, double x);

/// Q_{m/2}(0, b) = P(chi2_m > b^2).
double marcum_q_half_m(int m, double b);

/// The unique b >= 0 with Q_{m/2}(0, b) = alpha.
double invert_threshold(int m, double alpha);

/// w(x) = Q_{m/2}(0, sqrt(x)), the p-value of a Wald test as a function of
/// the squared Mahalanobis statistic.
double scalar_weight(int m, double x);

/// Mahalanobis norm sqrt(x^T C^{-1} x), evaluated as ||Psi x||.
double mahalanobis(const WaldContext& ctx, const VectorXd& x);

/// w_C(x) = Q_{m/2}(0, nu_C(x)).
double weight_m(const WaldContext& ctx, const VectorXd& x);

/// Variance-inflation constant of the fixed-point centroid estimator,
///   r^2 = E[w^2(|Xi|^2) Xi_1^2] / E[w(|Xi|^2)]^2,  Xi ~ N(0, mu2 I_m),
/// estimated by plain Monte Carlo.
struct RSquared {
  double value = 0.0;
  double mu2 = 1.0;
  int m = 0;
  std::uint64_t mc_samples = 0;
  std::uint64_t mc_seed = 0;
  /// Delta-method standard error of the ratio estimate.
  double std_error = 0.0;
};

inline constexpr std::uint64_t kDefaultRSquaredSamples = 1'000'000;
inline constexpr std::uint64_t kDefaultRSquaredSeed = 0x5eed'2024ULL;

/// Samples are drawn in fixed chunks, each with its own derived stream, so
/// the value is bit-identical for any `threads` count.
RSquared compute_r_squared(int m, double mu2, std::uint64_t samples = kDefaultRSquaredSamples,
                           std::uint64_t seed = kDefaultRSquaredSeed, int threads = 1);

}  // namespace centrex
