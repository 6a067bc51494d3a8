#include "centrex/wald.hpp"

#include <cmath>
#include <sstream>

#include "centrex/errors.hpp"

namespace centrex {

double fusion_scale(long n_l, long n_lp, const RSquared& r2) {
  if (n_l < 1 || n_lp < 1) throw ArgumentError("fusion test: estimated cluster sizes must be >= 1");
  return (1.0 / static_cast<double>(n_l) + 1.0 / static_cast<double>(n_lp)) * r2.value / r2.mu2;
}

double estimated_membership_scale(long n, const RSquared& r2) {
  if (n < 1) throw ArgumentError("test 3: estimated cluster size must be >= 1");
  return 1.0 + r2.value / (r2.mu2 * static_cast<double>(n));
}

WaldTests::WaldTests(const CompressionModel& model, double alpha)
    : model_(&model),
      alpha_(alpha),
      threshold_(invert_threshold(model.m(), alpha)),
      fusion_threshold_(invert_threshold(model.m(), 1.0 - alpha)) {}

double WaldTests::whitened_norm(const VectorXd& diff, const char* what) const {
  if (diff.size() != m()) {
    std::ostringstream msg;
    msg << what << ": expected vectors of length " << m() << ", got " << diff.size();
    throw ArgumentError(msg.str());
  }
  return (model_->whitening() * diff).norm();
}

TestDecision WaldTests::wald_whitened(double whitened_norm, double scale) const {
  TestDecision d;
  d.statistic = whitened_norm / std::sqrt(scale);
  d.threshold = threshold_;
  d.accepted = wald_rule(d.statistic, d.threshold);
  d.pvalue = marcum_q_half_m(m(), d.statistic);
  return d;
}

TestDecision WaldTests::fusion_whitened(double whitened_norm, double scale) const {
  TestDecision d;
  d.statistic = whitened_norm / std::sqrt(scale);
  d.threshold = fusion_threshold_;
  d.accepted = fusion_rule(d.statistic, d.threshold);
  d.pvalue = 1.0 - marcum_q_half_m(m(), d.statistic);
  return d;
}

TestDecision WaldTests::same_cluster(const VectorXd& z_i, const VectorXd& z_j) const {
  if (z_i.size() != z_j.size()) throw ArgumentError("test 1: vectors differ in length");
  return wald_whitened(whitened_norm(z_i - z_j, "test 1"), 2.0);
}

TestDecision WaldTests::membership(const VectorXd& z, const VectorXd& phi) const {
  if (z.size() != phi.size()) throw ArgumentError("test 2: vectors differ in length");
  return wald_whitened(whitened_norm(z - phi, "test 2"), 1.0);
}

TestDecision WaldTests::membership_estimated(const VectorXd& z, const CentroidEstimate& phi_hat,
                                             const RSquared& r2) const {
  if (z.size() != phi_hat.phi_hat.size()) throw ArgumentError("test 3: vectors differ in length");
  const double scale = estimated_membership_scale(phi_hat.n_hat, r2);
  return wald_whitened(whitened_norm(z - phi_hat.phi_hat, "test 3"), scale);
}

TestDecision WaldTests::fusion(const CentroidEstimate& phi_l, const CentroidEstimate& phi_lp,
                               const RSquared& r2) const {
  if (phi_l.phi_hat.size() != phi_lp.phi_hat.size()) {
    throw ArgumentError("test 4: vectors differ in length");
  }
  const double scale = fusion_scale(phi_l.n_hat, phi_lp.n_hat, r2);
  return fusion_whitened(whitened_norm(phi_l.phi_hat - phi_lp.phi_hat, "test 4"), scale);
}

TestDecision test1_same_cluster(const CompressionModel& model, const VectorXd& z_i,
                                const VectorXd& z_j, double alpha) {
  return WaldTests(model, alpha).same_cluster(z_i, z_j);
}

TestDecision test2_membership(const CompressionModel& model, const VectorXd& z,
                              const VectorXd& phi_k, double alpha) {
  return WaldTests(model, alpha).membership(z, phi_k);
}

TestDecision test3_membership_estimated(const CompressionModel& model, const VectorXd& z,
                                        const CentroidEstimate& phi_hat, const RSquared& r2,
                                        double alpha) {
  return WaldTests(model, alpha).membership_estimated(z, phi_hat, r2);
}

TestDecision test4_fusion(const CentroidEstimate& phi_l, const CentroidEstimate& phi_lp,
                          const CompressionModel& model, const RSquared& r2, double alpha) {
  return WaldTests(model, alpha).fusion(phi_l, phi_lp, r2);
}

}  // namespace centrex
