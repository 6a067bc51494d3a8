#include "centrex/centralized.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "centrex/detail/whitened.hpp"
#include "centrex/errors.hpp"
#include "centrex/rsq_cache.hpp"

namespace centrex {

void CentrexParams::validate() const {
  if (!(alpha > 0.0 && alpha <= 1e-2)) {
    throw ArgumentError("centrex: alpha must lie in (0, 1e-2]");
  }
  if (!(epsilon >= 1e-5 && epsilon <= 1e-2)) {
    throw ArgumentError("centrex: epsilon must lie in [1e-5, 1e-2]");
  }
  if (max_fp_iters < 1) throw ArgumentError("centrex: max_fp_iters must be >= 1");
  if (!(mu2 > 0.0)) throw ArgumentError("centrex: mu2 must be positive");
}

namespace detail {

void wald_weights(const MatrixXd& points, const VectorXd& phi, double scale, VectorXd& out) {
  const int m = static_cast<int>(points.rows());
  const double a = 0.5 * m;
  const double half_inv_scale = 0.5 / scale;
  out.resize(points.cols());
  for (Eigen::Index n = 0; n < points.cols(); ++n) {
    const double nu2 = (points.col(n) - phi).squaredNorm();
    out(n) = gamma_q(a, nu2 * half_inv_scale);
  }
}

bool h_step(const MatrixXd& points, const VectorXd& phi, double scale, VectorXd& out) {
  VectorXd w;
  wald_weights(points, phi, scale, w);
  const double total = w.sum();
  if (!(total > 0.0)) return false;
  out = points * w / total;
  return true;
}

WhitenedPass estimate_pass(const MatrixXd& points, const std::vector<int>& unmarked,
                           const WaldTests& tests, const CentrexParams& params, RandomEngine& rng,
                           bool single_step) {
  if (unmarked.empty()) throw ArgumentError("centroid estimation: every datum is already marked");
  const double m = static_cast<double>(points.rows());
  std::uniform_int_distribution<std::size_t> pick(0, unmarked.size() - 1);

  WhitenedPass pass;
  pass.seed_index = unmarked[pick(rng)];
  pass.phi = points.col(pass.seed_index);

  VectorXd next;
  double scale = 2.0;
  while (true) {
    if (!h_step(points, pass.phi, scale, next)) break;  // seed is a datum, so unreachable in practice
    const double step = (next - pass.phi).norm();
    pass.phi = next;
    ++pass.iterations;
    if (single_step || step / m <= params.epsilon) break;
    if (pass.iterations >= params.max_fp_iters) {
      pass.capped = true;
      break;
    }
    scale = 1.0;
  }

  const double threshold = tests.threshold();
  for (Eigen::Index n = 0; n < points.cols(); ++n) {
    if (wald_rule((points.col(n) - pass.phi).norm(), threshold) == Hypothesis::H0) {
      pass.accepted.push_back(static_cast<int>(n));
    }
  }
  return pass;
}

void fuse_whitened(std::vector<CentroidEstimate>& centroids, const WaldTests& tests,
                   const RSquared& r2) {
  bool merged = true;
  while (merged) {
    merged = false;
    for (std::size_t i = 0; i < centroids.size(); ++i) {
      for (std::size_t j = i + 1; j < centroids.size();) {
        const double scale = fusion_scale(std::max(1L, centroids[i].n_hat),
                                          std::max(1L, centroids[j].n_hat), r2);
        const double dist = (centroids[i].phi_hat - centroids[j].phi_hat).norm();
        if (tests.fusion_whitened(dist, scale).accepted == Hypothesis::H1) {
          centroids[i].phi_hat = 0.5 * (centroids[i].phi_hat + centroids[j].phi_hat);
          centroids[i].n_hat += centroids[j].n_hat;
          centroids[i].iterations = std::max(centroids[i].iterations, centroids[j].iterations);
          centroids.erase(centroids.begin() + static_cast<std::ptrdiff_t>(j));
          merged = true;
        } else {
          ++j;
        }
      }
    }
  }
}

std::vector<int> classify_whitened(const MatrixXd& points, const std::vector<VectorXd>& centroids,
                                   const WaldTests* gate) {
  if (centroids.empty()) throw ArgumentError("classify: no centroids");
  std::vector<int> labels(static_cast<std::size_t>(points.cols()), kUnassigned);
  for (Eigen::Index n = 0; n < points.cols(); ++n) {
    int best = 0;
    double best_d2 = (points.col(n) - centroids[0]).squaredNorm();
    for (std::size_t k = 1; k < centroids.size(); ++k) {
      const double d2 = (points.col(n) - centroids[k]).squaredNorm();
      if (d2 < best_d2) {
        best_d2 = d2;
        best = static_cast<int>(k);
      }
    }
    if (gate != nullptr && wald_rule(std::sqrt(best_d2), gate->threshold()) == Hypothesis::H1) {
      continue;
    }
    labels[static_cast<std::size_t>(n)] = best;
  }
  return labels;
}

}  // namespace detail

namespace {

void require_data(const CompressionModel& model, const MatrixXd& data, const char* what) {
  if (data.cols() == 0) throw ArgumentError(std::string(what) + ": empty data");
  if (data.rows() != model.m()) {
    std::ostringstream msg;
    msg << what << ": data has dimension " << data.rows() << ", model expects " << model.m();
    throw ArgumentError(msg.str());
  }
}

std::vector<int> unmarked_indices(const std::vector<bool>& marked) {
  std::vector<int> out;
  for (std::size_t i = 0; i < marked.size(); ++i) {
    if (!marked[i]) out.push_back(static_cast<int>(i));
  }
  return out;
}

}  // namespace

VectorXd h_map(const WaldContext& ctx, const MatrixXd& data, const VectorXd& phi) {
  if (data.cols() == 0) throw ArgumentError("h_map: empty data");
  if (data.rows() != ctx.m() || phi.size() != ctx.m()) {
    throw ArgumentError("h_map: dimension mismatch");
  }
  VectorXd w;
  detail::wald_weights(ctx.psi() * data, ctx.psi() * phi, 1.0, w);
  const double total = w.sum();
  if (!(total > 0.0)) throw NumericError("h_map: all weights underflowed to zero");
  return data * w / total;
}

EstimationPass estimate_one_centroid(const CompressionModel& model, const MatrixXd& data,
                                     std::vector<bool>& marked, const CentrexParams& params,
                                     std::uint64_t seed) {
  require_data(model, data, "estimate_one_centroid");
  if (marked.size() != static_cast<std::size_t>(data.cols())) {
    throw ArgumentError("estimate_one_centroid: marking vector does not match the data size");
  }
  const auto unmarked = unmarked_indices(marked);
  if (unmarked.empty()) throw ArgumentError("estimate_one_centroid: every datum is already marked");

  const WaldTests tests(model, params.alpha);
  const MatrixXd points = model.whiten_points(data);
  RandomEngine rng(seed);
  auto pass = detail::estimate_pass(points, unmarked, tests, params, rng, false);

  EstimationPass out;
  out.estimate.phi_hat = model.unwhiten_point(pass.phi);
  out.estimate.n_hat = static_cast<long>(pass.accepted.size());
  out.estimate.iterations = pass.iterations;
  out.seed_index = pass.seed_index;
  out.capped = pass.capped;
  marked[static_cast<std::size_t>(pass.seed_index)] = true;
  out.newly_marked.push_back(pass.seed_index);
  for (int n : pass.accepted) {
    if (!marked[static_cast<std::size_t>(n)]) {
      marked[static_cast<std::size_t>(n)] = true;
      out.newly_marked.push_back(n);
    }
  }
  std::sort(out.newly_marked.begin(), out.newly_marked.end());
  return out;
}

std::vector<CentroidEstimate> fuse(std::vector<CentroidEstimate> centroids,
                                   const CompressionModel& model, const RSquared& r2,
                                   double alpha) {
  if (centroids.empty()) return centroids;
  const WaldTests tests(model, alpha);
  // Same sweep as detail::fuse_whitened, but distances are whitened on the
  // fly so unmerged estimates come back bit-identical.
  bool merged = true;
  while (merged) {
    merged = false;
    for (std::size_t i = 0; i < centroids.size(); ++i) {
      for (std::size_t j = i + 1; j < centroids.size();) {
        CentroidEstimate a = centroids[i];
        CentroidEstimate b = centroids[j];
        a.n_hat = std::max(1L, a.n_hat);
        b.n_hat = std::max(1L, b.n_hat);
        if (tests.fusion(a, b, r2).accepted == Hypothesis::H1) {
          centroids[i].phi_hat = 0.5 * (centroids[i].phi_hat + centroids[j].phi_hat);
          centroids[i].n_hat += centroids[j].n_hat;
          centroids[i].iterations = std::max(centroids[i].iterations, centroids[j].iterations);
          centroids.erase(centroids.begin() + static_cast<std::ptrdiff_t>(j));
          merged = true;
        } else {
          ++j;
        }
      }
    }
  }
  return centroids;
}

std::vector<int> classify(const CompressionModel& model, const MatrixXd& data,
                          const std::vector<CentroidEstimate>& centroids) {
  require_data(model, data, "classify");
  if (centroids.empty()) throw ArgumentError("classify: no centroids");
  std::vector<VectorXd> whitened;
  whitened.reserve(centroids.size());
  for (const auto& c : centroids) {
    if (c.phi_hat.size() != model.m()) throw ArgumentError("classify: centroid dimension mismatch");
    whitened.push_back(model.whiten_point(c.phi_hat));
  }
  return detail::classify_whitened(model.whiten_points(data), whitened, nullptr);
}

ClusteringResult centrex_run(const CompressionModel& model, const MatrixXd& data,
                             const CentrexParams& params, const RSquared& r2, std::uint64_t seed) {
  require_data(model, data, "centrex_run");
  params.validate();
  const WaldTests tests(model, params.alpha);
  const MatrixXd points = model.whiten_points(data);
  RandomEngine rng(seed);

  ClusteringResult result;
  std::vector<bool> marked(static_cast<std::size_t>(data.cols()), false);
  std::vector<CentroidEstimate> estimates;
  for (auto unmarked = unmarked_indices(marked); !unmarked.empty();
       unmarked = unmarked_indices(marked)) {
    auto pass = detail::estimate_pass(points, unmarked, tests, params, rng, false);
    marked[static_cast<std::size_t>(pass.seed_index)] = true;
    for (int n : pass.accepted) marked[static_cast<std::size_t>(n)] = true;
    estimates.push_back({pass.phi, static_cast<long>(pass.accepted.size()), pass.iterations});
    result.capped_estimations += pass.capped ? 1 : 0;
  }
  result.estimation_passes = static_cast<int>(estimates.size());

  detail::fuse_whitened(estimates, tests, r2);

  std::vector<VectorXd> phis;
  phis.reserve(estimates.size());
  for (const auto& e : estimates) phis.push_back(e.phi_hat);
  result.assignments = detail::classify_whitened(points, phis, nullptr);

  for (auto& e : estimates) e.n_hat = 0;
  for (int label : result.assignments) ++estimates[static_cast<std::size_t>(label)].n_hat;
  for (auto& e : estimates) e.phi_hat = model.unwhiten_point(e.phi_hat);
  result.centroids = std::move(estimates);
  return result;
}

ClusteringResult centrex_run(const CompressionModel& model, const MatrixXd& data,
                             const CentrexParams& params, std::uint64_t seed) {
  const RSquared r2 = cached_r_squared(model.m(), params.mu2, params.rsq_samples, params.rsq_seed);
  return centrex_run(model, data, params, r2, seed);
}

}  // namespace centrex
