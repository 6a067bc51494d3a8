#include "centrex/datagen.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "centrex/errors.hpp"
#include "centrex/random.hpp"

namespace centrex {

void ScenarioConfig::validate() const {
  std::ostringstream msg;
  if (d < 1) msg << "d must be >= 1";
  else if (m < 1 || m > d) msg << "m must lie in 1..d (m = " << m << ", d = " << d << ")";
  else if (!(sigma > 0.0)) msg << "sigma must be positive";
  else if (!(b > 0.0)) msg << "b must be positive";
  else if (!(p > 0.0 && p < 1.0)) msg << "p must lie in (0, 1)";
  else if (k_max < 1) msg << "k_max must be >= 1";
  else if (k < 0) msg << "k must be >= 0 (0 draws K at random)";
  else if (n < 1) msg << "n must be >= 1";
  if (!msg.str().empty()) throw ArgumentError("scenario: " + msg.str());
}

int draw_cluster_count(const ScenarioConfig& cfg) {
  if (cfg.k > 0) return cfg.k;
  RandomEngine rng = make_engine(cfg.seed, {seed::kClusterCount});
  return std::uniform_int_distribution<int>(1, cfg.k_max)(rng);
}

MatrixXd gen_centroids(const ScenarioConfig& cfg, int k) {
  if (k < 1) throw ArgumentError("gen_centroids: k must be >= 1");
  RandomEngine rng = make_engine(cfg.seed, {seed::kCentroids});
  std::normal_distribution<double> gauss(0.0, cfg.b);
  std::bernoulli_distribution active(cfg.p);
  MatrixXd out(cfg.d, k);
  for (int j = 0; j < k; ++j) {
    for (int i = 0; i < cfg.d; ++i) {
      if (cfg.centroid_model == CentroidModel::kSparse) {
        // Draw both so the stream layout is the same for both outcomes.
        const bool on = active(rng);
        const double v = gauss(rng);
        out(i, j) = on ? v : 0.0;
      } else {
        out(i, j) = gauss(rng);
      }
    }
  }
  return out;
}

MatrixXd gen_sensing_matrix(const ScenarioConfig& cfg) {
  if (cfg.m > cfg.d) throw ArgumentError("gen_sensing_matrix: m exceeds d");
  for (std::uint64_t attempt = 0; attempt < 10; ++attempt) {
    RandomEngine rng = make_engine(cfg.seed, {seed::kSensing, attempt});
    MatrixXd a = MatrixXd::Zero(cfg.m, cfg.d);
    if (cfg.sensing == SensingKind::kCoordinateSelection) {
      std::vector<int> cols(static_cast<std::size_t>(cfg.d));
      std::iota(cols.begin(), cols.end(), 0);
      for (int i = 0; i < cfg.m; ++i) {
        std::uniform_int_distribution<int> pick(i, cfg.d - 1);
        std::swap(cols[static_cast<std::size_t>(i)], cols[static_cast<std::size_t>(pick(rng))]);
        a(i, cols[static_cast<std::size_t>(i)]) = 1.0;
      }
      return a;  // distinct unit rows, always full rank
    }
    const double var = cfg.projection_variance == ProjectionVariance::kStandard
                           ? 1.0 / cfg.m
                           : static_cast<double>(cfg.m) * cfg.d;
    std::normal_distribution<double> gauss(0.0, std::sqrt(var));
    for (int i = 0; i < cfg.m; ++i)
      for (int j = 0; j < cfg.d; ++j) a(i, j) = gauss(rng);
    Eigen::ColPivHouseholderQR<MatrixXd> qr(a.transpose());
    if (qr.rank() == cfg.m) return a;
  }
  throw NumericError("gen_sensing_matrix: no full-rank draw after 10 attempts");
}

Dataset gen_dataset(const ScenarioConfig& cfg) {
  cfg.validate();
  Dataset ds;
  ds.config = cfg;
  const int k = draw_cluster_count(cfg);
  if (cfg.cluster_sizes == ClusterSizes::kFixed && k > cfg.n) {
    throw ArgumentError("scenario: fixed cluster sizes need n >= K");
  }
  ds.centroids = gen_centroids(cfg, k);
  ds.sensing = gen_sensing_matrix(cfg);
  ds.noise_cov = MatrixXd::Identity(cfg.d, cfg.d) * (cfg.sigma * cfg.sigma);

  ds.labels.resize(static_cast<std::size_t>(cfg.n));
  RandomEngine label_rng = make_engine(cfg.seed, {seed::kLabels});
  if (cfg.cluster_sizes == ClusterSizes::kMultinomial) {
    std::uniform_int_distribution<int> pick(0, k - 1);
    for (auto& l : ds.labels) l = pick(label_rng);
  } else {
    for (int n = 0; n < cfg.n; ++n) ds.labels[static_cast<std::size_t>(n)] = n % k;
    std::shuffle(ds.labels.begin(), ds.labels.end(), label_rng);
  }

  RandomEngine noise_rng = make_engine(cfg.seed, {seed::kNoise});
  std::normal_distribution<double> gauss(0.0, 1.0);
  MatrixXd y(cfg.d, cfg.n);
  for (int n = 0; n < cfg.n; ++n) {
    for (int i = 0; i < cfg.d; ++i) y(i, n) = cfg.sigma * gauss(noise_rng);
    y.col(n) += ds.centroids.col(ds.labels[static_cast<std::size_t>(n)]);
  }
  ds.data = ds.sensing * y;
  return ds;
}

Shards shard(const MatrixXd& data, int sensors, std::uint64_t seed) {
  if (sensors < 1) throw ArgumentError("shard: need at least one sensor");
  if (data.cols() < sensors) throw ArgumentError("shard: fewer data than sensors");
  std::vector<int> order(static_cast<std::size_t>(data.cols()));
  std::iota(order.begin(), order.end(), 0);
  RandomEngine rng = make_engine(seed, {seed::kShard});
  std::shuffle(order.begin(), order.end(), rng);

  Shards out;
  out.indices.resize(static_cast<std::size_t>(sensors));
  for (std::size_t i = 0; i < order.size(); ++i) {
    out.indices[i % static_cast<std::size_t>(sensors)].push_back(order[i]);
  }
  for (auto& idx : out.indices) {
    std::sort(idx.begin(), idx.end());
    MatrixXd block(data.rows(), static_cast<Eigen::Index>(idx.size()));
    for (std::size_t j = 0; j < idx.size(); ++j) block.col(static_cast<Eigen::Index>(j)) = data.col(idx[j]);
    out.data.push_back(std::move(block));
  }
  return out;
}

}  // namespace centrex
