#include <doctest.h>

#include <cmath>
#include <map>
#include <random>
#include <set>

#include "centrex/centralized.hpp"
#include "centrex/datagen.hpp"
#include "centrex/errors.hpp"
#include "centrex/rsq_cache.hpp"
#include "oracles.hpp"

using namespace centrex;

namespace {

Dataset separated(std::uint64_t seed, int k = 3, int n = 300) {
  ScenarioConfig cfg;
  cfg.d = 20;
  cfg.m = 10;
  cfg.sigma = 0.5;
  cfg.b = 3.0;
  cfg.k = k;
  cfg.n = n;
  cfg.seed = seed;
  return gen_dataset(cfg);
}

// Fraction of data whose label agrees with the majority label of their found cluster.
double purity(const std::vector<int>& found, const std::vector<int>& truth) {
  std::map<int, std::map<int, int>> table;
  for (std::size_t i = 0; i < found.size(); ++i) ++table[found[i]][truth[i]];
  int good = 0;
  for (auto& [f, row] : table) {
    int best = 0;
    for (auto& [t, c] : row) best = std::max(best, c);
    good += best;
  }
  return double(good) / found.size();
}

}  // namespace

TEST_CASE("h_map against a direct weighted mean") {
  std::mt19937_64 rng(4);
  const MatrixXd c = oracle::random_spd(4, rng);
  const MatrixXd data = oracle::gaussian_matrix(4, 30, rng) * 2.0;
  const VectorXd phi = oracle::gaussian_matrix(4, 1, rng);
  WaldContext ctx(c, 0.01);
  VectorXd num = VectorXd::Zero(4);
  double den = 0.0;
  for (int n = 0; n < 30; ++n) {
    const double nu = oracle::mahalanobis(c, data.col(n) - phi);
    const double w = oracle::marcum_half_m(4, nu);
    num += w * data.col(n);
    den += w;
  }
  CHECK((h_map(ctx, data, phi) - num / den).norm() < 1e-10);
}

TEST_CASE("h_map trivial cases") {
  WaldContext ctx(MatrixXd::Identity(3, 3), 0.01);
  VectorXd x(3);
  x << 1.0, -2.0, 0.5;
  MatrixXd same(3, 5);
  for (int i = 0; i < 5; ++i) same.col(i) = x;
  CHECK((h_map(ctx, same, VectorXd::Zero(3)) - x).norm() < 1e-14);
  MatrixXd pair(3, 2);
  pair.col(0) = x;
  pair.col(1) = -x;
  CHECK(h_map(ctx, pair, VectorXd::Zero(3)).norm() < 1e-14);
  CHECK_THROWS_AS(h_map(ctx, MatrixXd(3, 0), x), ArgumentError);
  CHECK_THROWS_AS(h_map(ctx, same, VectorXd::Zero(2)), ArgumentError);
}

TEST_CASE("one estimation pass marks the seed and the accepted set") {
  const auto ds = separated(1);
  const auto model = ds.model();
  std::vector<bool> marked(ds.data.cols(), false);
  CentrexParams params;
  const auto pass = estimate_one_centroid(model, ds.data, marked, params, 99);
  CHECK(marked[pass.seed_index]);
  CHECK(pass.estimate.n_hat > 0);
  CHECK(std::count(marked.begin(), marked.end(), true) == static_cast<long>(pass.newly_marked.size()));
  CHECK_FALSE(pass.capped);
  // The estimate lands next to one true centroid.
  const MatrixXd truth = ds.compressed_centroids();
  double best = 1e300;
  for (int k = 0; k < truth.cols(); ++k)
    best = std::min(best, (model.whiten_point(pass.estimate.phi_hat - truth.col(k))).norm());
  CHECK(best < 1.0);

  std::vector<bool> all(ds.data.cols(), true);
  CHECK_THROWS_AS(estimate_one_centroid(model, ds.data, all, params, 1), ArgumentError);
}

TEST_CASE("fusion is idempotent and merges duplicates") {
  const auto ds = separated(2);
  const auto model = ds.model();
  const auto r2 = cached_r_squared(10, 1.0);
  const MatrixXd truth = ds.compressed_centroids();
  std::vector<CentroidEstimate> est;
  for (int k = 0; k < truth.cols(); ++k) {
    est.push_back({truth.col(k), 100, 0});
    est.push_back({truth.col(k), 100, 0});
  }
  const auto once = fuse(est, model, r2, 1e-3);
  CHECK(once.size() == static_cast<std::size_t>(truth.cols()));
  const auto twice = fuse(once, model, r2, 1e-3);
  REQUIRE(twice.size() == once.size());
  for (std::size_t i = 0; i < once.size(); ++i) {
    CHECK(twice[i].phi_hat == once[i].phi_hat);
    CHECK(twice[i].n_hat == once[i].n_hat);
  }
  CHECK(once[0].n_hat == 200);
}

TEST_CASE("classification ties go to the lowest index") {
  CompressionModel model(MatrixXd::Identity(2, 2), MatrixXd::Identity(2, 2));
  std::vector<CentroidEstimate> cents{{VectorXd::Zero(2), 1, 0}, {VectorXd::Zero(2), 1, 0}};
  cents[0].phi_hat << -1.0, 0.0;
  cents[1].phi_hat << 1.0, 0.0;
  MatrixXd data(2, 3);
  data << 0.0, -0.5, 0.7, 3.0, 0.0, 0.0;
  const auto labels = classify(model, data, cents);
  CHECK(labels == std::vector<int>{0, 0, 1});
}

TEST_CASE("centrex recovers separated clusters and is deterministic") {
  const auto ds = separated(3);
  const auto model = ds.model();
  CentrexParams params;
  const auto a = centrex_run(model, ds.data, params, 17);
  const auto b = centrex_run(model, ds.data, params, 17);
  CHECK(a.k_found() == 3);
  CHECK(a.assignments == b.assignments);
  CHECK(purity(a.assignments, ds.labels) == 1.0);
  CHECK(std::set<int>(a.assignments.begin(), a.assignments.end()).count(kUnassigned) == 0);
  long total = 0;
  for (const auto& c : a.centroids) total += c.n_hat;
  CHECK(total == ds.data.cols());
}

TEST_CASE("centrex on a single cluster") {
  const auto ds = separated(4, 1, 200);
  const auto res = centrex_run(ds.model(), ds.data, CentrexParams{}, 5);
  CHECK(res.k_found() == 1);
}

TEST_CASE("parameter validation") {
  CentrexParams p;
  p.alpha = 0.05;
  CHECK_THROWS_AS(p.validate(), ArgumentError);
  p = {};
  p.epsilon = 0.1;
  CHECK_THROWS_AS(p.validate(), ArgumentError);
  p = {};
  p.max_fp_iters = 0;
  CHECK_THROWS_AS(p.validate(), ArgumentError);
  const auto ds = separated(5, 2, 50);
  CHECK_THROWS_AS(centrex_run(ds.model(), MatrixXd(3, 10), CentrexParams{}, 1), ArgumentError);
}
