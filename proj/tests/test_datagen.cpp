#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <set>

#include "centrex/centralized.hpp"
#include "centrex/datagen.hpp"
#include "centrex/errors.hpp"
#include "centrex/rsq_cache.hpp"

using namespace centrex;

TEST_CASE("sparse centroids: active fraction is binomial") {
  ScenarioConfig cfg;
  cfg.d = 400;
  cfg.centroid_model = CentroidModel::kSparse;
  cfg.p = 0.2;
  cfg.seed = 3;
  const MatrixXd c = gen_centroids(cfg, 10);
  const double n = c.size();
  const double active = (c.array() != 0.0).count();
  CHECK(std::abs(active / n - cfg.p) < 4.0 * std::sqrt(cfg.p * (1 - cfg.p) / n));
}

TEST_CASE("non-sparse centroids: entry variance b^2") {
  ScenarioConfig cfg;
  cfg.d = 500;
  cfg.b = 2.0;
  cfg.seed = 4;
  const MatrixXd c = gen_centroids(cfg, 10);
  const double n = c.size();
  const double var = c.array().square().mean();
  // Var of the sample second moment is 2 b^4 / n.
  CHECK(std::abs(var - 4.0) < 4.0 * std::sqrt(2.0 * 16.0 / n));
}

TEST_CASE("gaussian projection entry variance") {
  ScenarioConfig cfg;
  cfg.d = 300;
  cfg.m = 40;
  cfg.seed = 5;
  const MatrixXd a = gen_sensing_matrix(cfg);
  const double n = a.size();
  const double target = 1.0 / cfg.m;
  CHECK(std::abs(a.array().square().mean() - target) < 4.0 * target * std::sqrt(2.0 / n));
  cfg.projection_variance = ProjectionVariance::kPaperLiteral;
  const MatrixXd lit = gen_sensing_matrix(cfg);
  CHECK((lit - a * std::sqrt(double(cfg.m) * cfg.d * cfg.m)).cwiseAbs().maxCoeff() < 1e-9 * lit.cwiseAbs().maxCoeff());
}

TEST_CASE("coordinate selection picks distinct coordinates") {
  ScenarioConfig cfg;
  cfg.d = 30;
  cfg.m = 12;
  cfg.sensing = SensingKind::kCoordinateSelection;
  cfg.seed = 6;
  const MatrixXd a = gen_sensing_matrix(cfg);
  CHECK((a * a.transpose() - MatrixXd::Identity(12, 12)).norm() == 0.0);
  CHECK(a.sum() == 12.0);
}

TEST_CASE("clustering is invariant to the projection scale") {
  ScenarioConfig cfg;
  cfg.d = 40;
  cfg.m = 10;
  cfg.k = 3;
  cfg.n = 300;
  cfg.sigma = 0.5;
  cfg.b = 3.0;
  cfg.seed = 8;
  const auto std_ds = gen_dataset(cfg);
  cfg.projection_variance = ProjectionVariance::kPaperLiteral;
  const auto lit_ds = gen_dataset(cfg);
  const auto r2 = cached_r_squared(10, 1.0);
  const auto a = centrex_run(std_ds.model(), std_ds.data, CentrexParams{}, r2, 1);
  const auto b = centrex_run(lit_ds.model(), lit_ds.data, CentrexParams{}, r2, 1);
  CHECK(a.k_found() == b.k_found());
  CHECK(a.assignments == b.assignments);
}

TEST_CASE("compressed noise covariance") {
  ScenarioConfig cfg;
  cfg.d = 15;
  cfg.m = 4;
  cfg.k = 1;
  cfg.n = 20000;
  cfg.sigma = 1.5;
  cfg.seed = 9;
  const auto ds = gen_dataset(cfg);
  const MatrixXd resid = ds.data.colwise() - ds.compressed_centroids().col(0);
  const MatrixXd emp = resid * resid.transpose() / cfg.n;
  const MatrixXd truth = ds.sensing * ds.noise_cov * ds.sensing.transpose();
  // Whitened empirical covariance should be close to I; entries have SE ~ 1/sqrt(n).
  const MatrixXd psi = whiten(truth);
  const MatrixXd w = psi * emp * psi.transpose();
  CHECK((w - MatrixXd::Identity(4, 4)).cwiseAbs().maxCoeff() < 5.0 * std::sqrt(2.0 / cfg.n));
}

TEST_CASE("labels and cluster sizes") {
  ScenarioConfig cfg;
  cfg.d = 10;
  cfg.m = 5;
  cfg.k = 4;
  cfg.n = 4000;
  cfg.seed = 10;
  const auto ds = gen_dataset(cfg);
  for (int k = 0; k < 4; ++k) {
    const double frac = std::count(ds.labels.begin(), ds.labels.end(), k) / double(cfg.n);
    CHECK(std::abs(frac - 0.25) < 4.0 * std::sqrt(0.25 * 0.75 / cfg.n));
  }
  cfg.cluster_sizes = ClusterSizes::kFixed;
  cfg.n = 10;
  const auto fixed = gen_dataset(cfg);
  for (int k = 0; k < 4; ++k) {
    const auto c = std::count(fixed.labels.begin(), fixed.labels.end(), k);
    CHECK((c == 2 || c == 3));
  }
  cfg.n = 3;
  CHECK_THROWS_AS(gen_dataset(cfg), ArgumentError);
}

TEST_CASE("random cluster count") {
  ScenarioConfig cfg;
  cfg.k_max = 6;
  std::set<int> seen;
  for (std::uint64_t s = 0; s < 200; ++s) {
    cfg.seed = s;
    const int k = draw_cluster_count(cfg);
    CHECK(k >= 1);
    CHECK(k <= 6);
    seen.insert(k);
  }
  CHECK(seen.size() == 6);
}

TEST_CASE("same seed, same dataset; sigma changes only the noise scale") {
  ScenarioConfig cfg;
  cfg.d = 20;
  cfg.m = 6;
  cfg.n = 50;
  cfg.seed = 12;
  const auto a = gen_dataset(cfg);
  const auto b = gen_dataset(cfg);
  CHECK(a.data == b.data);
  CHECK(a.labels == b.labels);
  cfg.sigma = 3.0;
  const auto c = gen_dataset(cfg);
  CHECK(c.labels == a.labels);
  CHECK(c.centroids == a.centroids);
  const MatrixXd noise_a = a.data - a.sensing * a.centroids(Eigen::all, a.labels);
  const MatrixXd noise_c = c.data - c.sensing * c.centroids(Eigen::all, c.labels);
  CHECK((noise_c - 3.0 * noise_a).norm() < 1e-9 * noise_c.norm());
}

TEST_CASE("sharding") {
  const MatrixXd data = MatrixXd::Random(3, 103);
  const auto s = shard(data, 10, 4);
  REQUIRE(s.data.size() == 10);
  std::set<int> all;
  for (std::size_t i = 0; i < 10; ++i) {
    CHECK((s.indices[i].size() == 10 || s.indices[i].size() == 11));
    CHECK(std::is_sorted(s.indices[i].begin(), s.indices[i].end()));
    for (std::size_t j = 0; j < s.indices[i].size(); ++j) {
      CHECK(s.data[i].col(j) == data.col(s.indices[i][j]));
      all.insert(s.indices[i][j]);
    }
  }
  CHECK(all.size() == 103);
  CHECK_THROWS_AS(shard(data, 0, 1), ArgumentError);
  CHECK_THROWS_AS(shard(MatrixXd::Zero(3, 2), 5, 1), ArgumentError);
}

TEST_CASE("scenario validation") {
  ScenarioConfig cfg;
  cfg.m = 200;
  CHECK_THROWS_AS(cfg.validate(), ArgumentError);
  cfg = {};
  cfg.sigma = 0.0;
  CHECK_THROWS_AS(cfg.validate(), ArgumentError);
  cfg = {};
  cfg.p = 1.0;
  CHECK_THROWS_AS(cfg.validate(), ArgumentError);
  cfg = {};
  cfg.n = 0;
  CHECK_THROWS_AS(cfg.validate(), ArgumentError);
}
