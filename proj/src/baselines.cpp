#include "centrex/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <map>
#include <numeric>

#include "centrex/errors.hpp"
#include "centrex/random.hpp"

namespace centrex {

namespace {

struct LloydRun {
  MatrixXd centroids;
  std::vector<int> labels;
  double inertia = 0.0;
  std::vector<double> history;
};

double assign(const MatrixXd& data, const MatrixXd& centroids, std::vector<int>& labels) {
  double total = 0.0;
  for (Eigen::Index n = 0; n < data.cols(); ++n) {
    double best = std::numeric_limits<double>::infinity();
    int arg = 0;
    for (Eigen::Index k = 0; k < centroids.cols(); ++k) {
      const double d2 = (data.col(n) - centroids.col(k)).squaredNorm();
      if (d2 < best) {
        best = d2;
        arg = static_cast<int>(k);
      }
    }
    labels[static_cast<std::size_t>(n)] = arg;
    total += best;
  }
  return total;
}

LloydRun lloyd(const MatrixXd& data, MatrixXd centroids, int max_iters) {
  LloydRun run;
  run.labels.assign(static_cast<std::size_t>(data.cols()), -1);
  std::vector<int> previous;
  run.inertia = assign(data, centroids, run.labels);
  for (int it = 0; it < max_iters; ++it) {
    MatrixXd sums = MatrixXd::Zero(centroids.rows(), centroids.cols());
    std::vector<long> counts(static_cast<std::size_t>(centroids.cols()), 0);
    for (std::size_t n = 0; n < run.labels.size(); ++n) {
      sums.col(run.labels[n]) += data.col(static_cast<Eigen::Index>(n));
      ++counts[static_cast<std::size_t>(run.labels[n])];
    }
    for (Eigen::Index k = 0; k < centroids.cols(); ++k) {
      const long c = counts[static_cast<std::size_t>(k)];
      if (c > 0) centroids.col(k) = sums.col(k) / static_cast<double>(c);
    }
    previous = run.labels;
    run.inertia = assign(data, centroids, run.labels);
    run.history.push_back(run.inertia);
    if (run.labels == previous) break;
  }
  run.centroids = std::move(centroids);
  return run;
}

}  // namespace

BaselineResult kmeans(const MatrixXd& data, int k, int replicates, std::uint64_t seed, int max_iters) {
  if (k < 1) throw ArgumentError("kmeans: K must be >= 1");
  if (k > data.cols()) throw ArgumentError("kmeans: K exceeds the number of data");
  if (replicates < 1) throw ArgumentError("kmeans: need at least one replicate");

  BaselineResult best;
  best.inertia = std::numeric_limits<double>::infinity();
  std::vector<Eigen::Index> idx(static_cast<std::size_t>(data.cols()));
  for (int r = 0; r < replicates; ++r) {
    RandomEngine rng = make_engine(seed, {seed::kBaseline, static_cast<std::uint64_t>(k),
                                          static_cast<std::uint64_t>(r)});
    std::iota(idx.begin(), idx.end(), 0);
    MatrixXd init(data.rows(), k);
    for (int j = 0; j < k; ++j) {
      std::uniform_int_distribution<std::size_t> pick(static_cast<std::size_t>(j), idx.size() - 1);
      std::swap(idx[static_cast<std::size_t>(j)], idx[pick(rng)]);
      init.col(j) = data.col(idx[static_cast<std::size_t>(j)]);
    }
    LloydRun run = lloyd(data, std::move(init), max_iters);
    if (run.inertia < best.inertia) {
      best.inertia = run.inertia;
      best.assignments = std::move(run.labels);
      best.centroids = std::move(run.centroids);
      best.inertia_history = std::move(run.history);
      best.replicate_used = r;
    }
  }
  best.k_found = k;
  return best;
}

double aic_score(long n, int m, double inertia, int k) {
  const double nm = static_cast<double>(n) * m;
  if (inertia <= 0.0) return -std::numeric_limits<double>::infinity();
  return nm * std::log(inertia / nm) + 2.0 * k * m;
}

BaselineResult kmeans_aic(const MatrixXd& data, int k_max, int replicates, std::uint64_t seed) {
  if (k_max < 1) throw ArgumentError("kmeans_aic: k_max must be >= 1");
  const int top = std::min<int>(k_max, static_cast<int>(data.cols()));
  BaselineResult chosen;
  double chosen_aic = std::numeric_limits<double>::infinity();
  for (int k = 1; k <= top; ++k) {
    BaselineResult r = kmeans(data, k, replicates, seed);
    const double aic = aic_score(data.cols(), static_cast<int>(data.rows()), r.inertia, k);
    if (k == 1 || aic < chosen_aic) {
      chosen_aic = aic;
      chosen = std::move(r);
    }
  }
  return chosen;
}

BaselineResult dbscan(const MatrixXd& data, double eps, int min_pts) {
  if (!(eps > 0.0)) throw ArgumentError("dbscan: eps must be positive");
  if (min_pts < 1) throw ArgumentError("dbscan: min_pts must be >= 1");
  const Eigen::Index n = data.cols();
  const double eps2 = eps * eps;
  auto neighbours = [&](Eigen::Index i) {
    std::vector<Eigen::Index> out;
    for (Eigen::Index j = 0; j < n; ++j) {
      if ((data.col(i) - data.col(j)).squaredNorm() <= eps2) out.push_back(j);
    }
    return out;
  };

  constexpr int kUnvisited = -2;
  std::vector<int> labels(static_cast<std::size_t>(n), kUnvisited);
  int cluster = 0;
  for (Eigen::Index i = 0; i < n; ++i) {
    if (labels[static_cast<std::size_t>(i)] != kUnvisited) continue;
    auto seeds = neighbours(i);
    if (static_cast<int>(seeds.size()) < min_pts) {
      labels[static_cast<std::size_t>(i)] = kUnassigned;
      continue;
    }
    labels[static_cast<std::size_t>(i)] = cluster;
    std::deque<Eigen::Index> queue(seeds.begin(), seeds.end());
    while (!queue.empty()) {
      const Eigen::Index j = queue.front();
      queue.pop_front();
      int& lj = labels[static_cast<std::size_t>(j)];
      if (lj == kUnassigned) lj = cluster;  // border point
      if (lj != kUnvisited) continue;
      lj = cluster;
      auto more = neighbours(j);
      if (static_cast<int>(more.size()) >= min_pts) queue.insert(queue.end(), more.begin(), more.end());
    }
    ++cluster;
  }

  BaselineResult out;
  out.k_found = cluster;
  out.assignments = std::move(labels);
  out.centroids = MatrixXd::Zero(data.rows(), cluster);
  std::vector<long> counts(static_cast<std::size_t>(cluster), 0);
  for (Eigen::Index i = 0; i < n; ++i) {
    const int l = out.assignments[static_cast<std::size_t>(i)];
    if (l >= 0) {
      out.centroids.col(l) += data.col(i);
      ++counts[static_cast<std::size_t>(l)];
    }
  }
  for (int k = 0; k < cluster; ++k) out.centroids.col(k) /= static_cast<double>(counts[static_cast<std::size_t>(k)]);
  for (Eigen::Index i = 0; i < n; ++i) {
    const int l = out.assignments[static_cast<std::size_t>(i)];
    if (l >= 0) out.inertia += (data.col(i) - out.centroids.col(l)).squaredNorm();
  }
  return out;
}

double pairwise_distance_quantile(const MatrixXd& data, double q) {
  if (data.cols() < 2) throw ArgumentError("pairwise_distance_quantile: need at least two data");
  if (!(q >= 0.0 && q <= 1.0)) throw ArgumentError("pairwise_distance_quantile: q must lie in [0, 1]");
  std::vector<double> d;
  d.reserve(static_cast<std::size_t>(data.cols() * (data.cols() - 1) / 2));
  for (Eigen::Index i = 0; i < data.cols(); ++i) {
    for (Eigen::Index j = i + 1; j < data.cols(); ++j) d.push_back((data.col(i) - data.col(j)).norm());
  }
  const auto rank = static_cast<std::size_t>(std::ceil(q * static_cast<double>(d.size())));
  const std::size_t at = rank == 0 ? 0 : rank - 1;
  std::nth_element(d.begin(), d.begin() + static_cast<std::ptrdiff_t>(at), d.end());
  return d[at];
}

namespace {

// dist(i, j) must be symmetric with dist(i, i) = 0.
template <typename Dist>
std::optional<double> silhouette_core(Eigen::Index n, std::span<const int> assignments, Dist dist) {
  if (static_cast<Eigen::Index>(assignments.size()) != n) {
    throw ArgumentError("silhouette: one assignment per datum required");
  }
  // Compact group ids; unassigned data form one extra group.
  std::map<int, int> ids;
  for (int a : assignments) ids.emplace(a, 0);
  if (ids.size() < 2) return std::nullopt;
  int next = 0;
  for (auto& [label, id] : ids) id = next++;
  const int groups = next;
  std::vector<int> g(static_cast<std::size_t>(n));
  std::vector<long> size(static_cast<std::size_t>(groups), 0);
  for (Eigen::Index i = 0; i < n; ++i) {
    g[static_cast<std::size_t>(i)] = ids[assignments[static_cast<std::size_t>(i)]];
    ++size[static_cast<std::size_t>(g[static_cast<std::size_t>(i)])];
  }

  double total = 0.0;
  std::vector<double> sums(static_cast<std::size_t>(groups));
  for (Eigen::Index i = 0; i < n; ++i) {
    const int own = g[static_cast<std::size_t>(i)];
    const long own_size = size[static_cast<std::size_t>(own)];
    if (own_size <= 1) continue;  // singleton scores 0
    std::fill(sums.begin(), sums.end(), 0.0);
    for (Eigen::Index j = 0; j < n; ++j) {
      if (j != i) sums[static_cast<std::size_t>(g[static_cast<std::size_t>(j)])] += dist(i, j);
    }
    const double a = sums[static_cast<std::size_t>(own)] / static_cast<double>(own_size - 1);
    double b = std::numeric_limits<double>::infinity();
    for (int c = 0; c < groups; ++c) {
      if (c == own) continue;
      b = std::min(b, sums[static_cast<std::size_t>(c)] / static_cast<double>(size[static_cast<std::size_t>(c)]));
    }
    const double denom = std::max(a, b);
    if (denom > 0.0) total += (b - a) / denom;
  }
  return total / static_cast<double>(n);
}

}  // namespace

MatrixXd pairwise_distances(const MatrixXd& data) {
  const Eigen::Index n = data.cols();
  const VectorXd sq = data.colwise().squaredNorm().transpose();
  MatrixXd gram = data.transpose() * data;
  MatrixXd out(n, n);
  for (Eigen::Index j = 0; j < n; ++j) {
    for (Eigen::Index i = 0; i < n; ++i) {
      out(i, j) = i == j ? 0.0 : std::sqrt(std::max(0.0, sq(i) + sq(j) - 2.0 * gram(i, j)));
    }
  }
  // Exact symmetry so that the result does not depend on the pair order.
  for (Eigen::Index j = 0; j < n; ++j)
    for (Eigen::Index i = j + 1; i < n; ++i) out(j, i) = out(i, j);
  return out;
}

std::optional<double> silhouette(const MatrixXd& data, std::span<const int> assignments) {
  return silhouette_core(data.cols(), assignments, [&](Eigen::Index i, Eigen::Index j) {
    return (data.col(i) - data.col(j)).norm();
  });
}

std::optional<double> silhouette_from_distances(const MatrixXd& dist, std::span<const int> assignments) {
  if (dist.rows() != dist.cols()) throw ArgumentError("silhouette: distance matrix must be square");
  return silhouette_core(dist.cols(), assignments,
                         [&](Eigen::Index i, Eigen::Index j) { return dist(i, j); });
}

double correct_k_rate(std::span<const int> found, std::span<const int> truth) {
  if (found.size() != truth.size()) throw ArgumentError("correct_k_rate: length mismatch");
  if (found.empty()) return 0.0;
  std::size_t hits = 0;
  for (std::size_t i = 0; i < found.size(); ++i) hits += found[i] == truth[i] ? 1 : 0;
  return 100.0 * static_cast<double>(hits) / static_cast<double>(found.size());
}

}  // namespace centrex
