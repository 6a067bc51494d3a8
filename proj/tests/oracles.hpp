#pragma once

// Reference computations used as test oracles. None of them calls into the
// library's numerics.

#include <cmath>
#include <limits>
#include <numbers>
#include <random>
#include <vector>

#include <Eigen/Dense>

namespace oracle {

using Eigen::MatrixXd;
using Eigen::VectorXd;

// P(chi2_m > x) for integer m, by the finite sums for even and odd degrees.
inline double chi2_tail(int m, double x) {
  if (x <= 0.0) return 1.0;
  const double h = 0.5 * x;
  if (m % 2 == 0) {
    double term = 1.0, sum = 1.0;
    for (int k = 1; k < m / 2; ++k) {
      term *= h / k;
      sum += term;
    }
    return std::exp(-h) * sum;
  }
  double term = std::sqrt(x), sum = 0.0;
  for (int k = 1; k <= (m - 1) / 2; ++k) {
    if (k > 1) term *= x / (2.0 * k - 1.0);
    sum += term;
  }
  return std::erfc(std::sqrt(h)) + std::sqrt(2.0 / std::numbers::pi) * std::exp(-h) * sum;
}

inline double marcum_half_m(int m, double b) { return chi2_tail(m, b * b); }

// Bisection on the closed-form tail.
inline double threshold(int m, double alpha) {
  double lo = 0.0, hi = 1.0;
  while (marcum_half_m(m, hi) > alpha) hi *= 2.0;
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    (marcum_half_m(m, mid) > alpha ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

inline MatrixXd gaussian_matrix(int rows, int cols, std::mt19937_64& rng) {
  std::normal_distribution<double> g;
  MatrixXd a(rows, cols);
  for (int j = 0; j < cols; ++j)
    for (int i = 0; i < rows; ++i) a(i, j) = g(rng);
  return a;
}

// Well-conditioned random SPD matrix.
inline MatrixXd random_spd(int n, std::mt19937_64& rng) {
  const MatrixXd g = gaussian_matrix(n, n, rng);
  return g * g.transpose() + n * MatrixXd::Identity(n, n);
}

// sqrt(x^T C^{-1} x) by a linear solve.
inline double mahalanobis(const MatrixXd& c, const VectorXd& x) {
  return std::sqrt(x.dot(c.ldlt().solve(x)));
}

// Silhouette straight from the definition. Unassigned (-1) data form one group.
inline double silhouette(const MatrixXd& data, const std::vector<int>& labels) {
  const int n = static_cast<int>(data.cols());
  auto dist = [&](int i, int j) { return (data.col(i) - data.col(j)).norm(); };
  double total = 0.0;
  for (int i = 0; i < n; ++i) {
    std::vector<double> sum;
    std::vector<int> count;
    std::vector<int> groups;
    for (int j = 0; j < n; ++j) {
      int gj = -1;
      for (std::size_t g = 0; g < groups.size(); ++g)
        if (groups[g] == labels[j]) gj = static_cast<int>(g);
      if (gj < 0) {
        groups.push_back(labels[j]);
        sum.push_back(0.0);
        count.push_back(0);
        gj = static_cast<int>(groups.size()) - 1;
      }
      if (j != i) sum[gj] += dist(i, j);
      ++count[gj];
    }
    double a = 0.0, b = std::numeric_limits<double>::infinity();
    bool singleton = false;
    for (std::size_t g = 0; g < groups.size(); ++g) {
      if (groups[g] == labels[i]) {
        if (count[g] == 1) singleton = true;
        else a = sum[g] / (count[g] - 1);
      } else {
        b = std::min(b, sum[g] / count[g]);
      }
    }
    if (!singleton) total += (b - a) / std::max(a, b);
  }
  return total / n;
}

// Minimum within-cluster sum of squares over all 2-partitions (N <= ~16).
inline double best_two_partition_inertia(const MatrixXd& data) {
  const int n = static_cast<int>(data.cols());
  double best = std::numeric_limits<double>::infinity();
  for (unsigned mask = 1; mask < (1u << (n - 1)); ++mask) {
    double inertia = 0.0;
    for (int side = 0; side < 2; ++side) {
      VectorXd mean = VectorXd::Zero(data.rows());
      int cnt = 0;
      for (int i = 0; i < n; ++i)
        if (((mask >> i) & 1u) == static_cast<unsigned>(side)) {
          mean += data.col(i);
          ++cnt;
        }
      mean /= cnt;
      for (int i = 0; i < n; ++i)
        if (((mask >> i) & 1u) == static_cast<unsigned>(side)) inertia += (data.col(i) - mean).squaredNorm();
    }
    best = std::min(best, inertia);
  }
  return best;
}

}  // namespace oracle
