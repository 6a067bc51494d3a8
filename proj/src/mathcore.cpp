#include "centrex/mathcore.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <thread>
#include <vector>

#include "centrex/errors.hpp"
#include "centrex/random.hpp"

namespace centrex {

namespace {

constexpr double kSymmetryTol = 1e-12;
constexpr double kEigenFloor = 1e-12;
constexpr double kEps = std::numeric_limits<double>::epsilon();
constexpr int kGammaMaxTerms = 100000;

// P(a, x) by its power series; valid and fast for x < a + 1.
double gamma_p_series(double a, double x) {
  double term = 1.0 / a;
  double sum = term;
  for (int n = 1; n < kGammaMaxTerms; ++n) {
    term *= x / (a + n);
    sum += term;
    if (std::abs(term) < std::abs(sum) * kEps) break;
  }
  return sum * std::exp(-x + a * std::log(x) - std::lgamma(a));
}

// Q(a, x) by the Legendre continued fraction (modified Lentz); x >= a + 1.
double gamma_q_fraction(double a, double x) {
  constexpr double tiny = 1e-300;
  double b = x + 1.0 - a;
  double c = 1.0 / tiny;
  double d = 1.0 / b;
  double h = d;
  for (int i = 1; i < kGammaMaxTerms; ++i) {
    const double an = -i * (i - a);
    b += 2.0;
    d = an * d + b;
    if (std::abs(d) < tiny) d = tiny;
    c = b + an / c;
    if (std::abs(c) < tiny) c = tiny;
    d = 1.0 / d;
    const double delta = d * c;
    h *= delta;
    if (std::abs(delta - 1.0) < kEps) break;
  }
  return std::exp(-x + a * std::log(x) - std::lgamma(a)) * h;
}

void require_dimension(int m, Eigen::Index got, const char* what) {
  if (got != m) {
    std::ostringstream msg;
    msg << what << ": expected vector of length " << m << ", got " << got;
    throw ArgumentError(msg.str());
  }
}

}  // namespace

MatrixXd whiten(const MatrixXd& c) {
  if (c.rows() != c.cols() || c.rows() == 0) {
    throw ArgumentError("whiten: matrix must be square and non-empty");
  }
  const double scale = std::max(1.0, c.cwiseAbs().maxCoeff());
  const double asym = (c - c.transpose()).cwiseAbs().maxCoeff();
  if (!(asym <= kSymmetryTol * scale)) {
    std::ostringstream msg;
    msg << "whiten: matrix is not symmetric (max |C - C^T| = " << asym << ")";
    throw NumericError(msg.str());
  }
  Eigen::SelfAdjointEigenSolver<MatrixXd> eig(c);
  if (eig.info() != Eigen::Success) throw NumericError("whiten: eigendecomposition failed");
  const VectorXd& values = eig.eigenvalues();  // ascending
  const double largest = values(values.size() - 1);
  for (Eigen::Index i = 0; i < values.size(); ++i) {
    if (!(largest > 0.0) || !(values(i) > kEigenFloor * largest)) {
      std::ostringstream msg;
      msg << "whiten: matrix is not positive definite (eigenvalue " << values(i)
          << ", largest " << largest << ")";
      throw NumericError(msg.str());
    }
  }
  return values.cwiseSqrt().cwiseInverse().asDiagonal() * eig.eigenvectors().transpose();
}

CompressionModel::CompressionModel(MatrixXd sensing, MatrixXd noise_cov)
    : sensing_(std::move(sensing)), noise_cov_(std::move(noise_cov)) {
  const auto m = sensing_.rows();
  const auto d = sensing_.cols();
  if (m == 0 || d == 0 || m > d) {
    throw ArgumentError("CompressionModel: sensing matrix must be m x d with 1 <= m <= d");
  }
  if (noise_cov_.rows() != d || noise_cov_.cols() != d) {
    throw ArgumentError("CompressionModel: noise covariance must be d x d");
  }
  Eigen::ColPivHouseholderQR<MatrixXd> qr(sensing_.transpose());
  if (qr.rank() != m) {
    std::ostringstream msg;
    msg << "CompressionModel: sensing matrix has rank " << qr.rank() << " < m = " << m;
    throw ArgumentError(msg.str());
  }
  compressed_cov_ = sensing_ * noise_cov_ * sensing_.transpose();
  compressed_cov_ = 0.5 * (compressed_cov_ + compressed_cov_.transpose());
  whitening_ = whiten(compressed_cov_);
  unwhitening_ = whitening_.inverse();
}

WaldContext::WaldContext(MatrixXd c, double alpha) : c_(std::move(c)), alpha_(alpha) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw ArgumentError("WaldContext: alpha must be in (0, 1)");
  psi_ = whiten(c_);
  threshold_ = invert_threshold(m(), alpha_);
}

WaldContext::WaldContext(MatrixXd c, MatrixXd psi, double alpha, double threshold)
    : c_(std::move(c)), psi_(std::move(psi)), alpha_(alpha), threshold_(threshold) {}

WaldContext WaldContext::scaled(double s) const {
  if (!(s > 0.0) || !std::isfinite(s)) throw ArgumentError("WaldContext::scaled: factor must be positive");
  return WaldContext(c_ * s, psi_ / std::sqrt(s), alpha_, threshold_);
}

double gamma_q(double a, double x) {
  if (!(a > 0.0)) throw ArgumentError("gamma_q: a must be positive");
  if (!(x >= 0.0)) throw ArgumentError("gamma_q: x must be nonnegative");
  if (x == 0.0) return 1.0;
  if (std::isinf(x)) return 0.0;
  if (x < a + 1.0) return std::clamp(1.0 - gamma_p_series(a, x), 0.0, 1.0);
  return std::clamp(gamma_q_fraction(a, x), 0.0, 1.0);
}

double marcum_q_half_m(int m, double b) {
  if (m < 1) throw ArgumentError("marcum_q_half_m: m must be >= 1");
  if (!(b >= 0.0)) throw ArgumentError("marcum_q_half_m: b must be >= 0");
  return gamma_q(0.5 * m, 0.5 * b * b);
}

double invert_threshold(int m, double alpha) {
  if (m < 1) throw ArgumentError("invert_threshold: m must be >= 1");
  if (!(alpha > 0.0 && alpha < 1.0)) throw ArgumentError("invert_threshold: alpha must be in (0, 1)");
  double lo = 0.0;
  double hi = 1.0;
  int doublings = 0;
  while (marcum_q_half_m(m, hi) >= alpha) {
    lo = hi;
    hi *= 2.0;
    if (++doublings > 64) throw NumericError("invert_threshold: failed to bracket the threshold");
  }
  // Bisection on b down to 1e-12 (relative once b exceeds 1).
  constexpr int kMaxIter = 400;
  for (int it = 0; it < kMaxIter; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (hi - lo <= 1e-12 * std::max(1.0, mid) || mid == lo || mid == hi) {
      return mid;
    }
    if (marcum_q_half_m(m, mid) >= alpha) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  const double b = 0.5 * (lo + hi);
  std::ostringstream msg;
  msg << "invert_threshold: no convergence for m=" << m << ", alpha=" << alpha
      << " (residual " << marcum_q_half_m(m, b) - alpha << ")";
  throw NumericError(msg.str());
}

double scalar_weight(int m, double x) {
  if (m < 1) throw ArgumentError("scalar_weight: m must be >= 1");
  if (!(x >= 0.0)) throw ArgumentError("scalar_weight: x must be >= 0");
  return gamma_q(0.5 * m, 0.5 * x);
}

double mahalanobis(const WaldContext& ctx, const VectorXd& x) {
  require_dimension(ctx.m(), x.size(), "mahalanobis");
  return (ctx.psi() * x).norm();
}

double weight_m(const WaldContext& ctx, const VectorXd& x) {
  require_dimension(ctx.m(), x.size(), "weight_m");
  return scalar_weight(ctx.m(), (ctx.psi() * x).squaredNorm());
}

namespace {

struct RsqSums {
  double a = 0, b = 0, aa = 0, bb = 0, ab = 0;
};

constexpr std::uint64_t kRsqChunk = 1 << 15;

RsqSums rsq_chunk(int m, double mu, std::uint64_t seed, std::uint64_t chunk, std::uint64_t count) {
  RandomEngine rng = make_engine(seed, {seed::kMonteCarlo, chunk});
  std::normal_distribution<double> normal(0.0, mu);
  RsqSums s;
  for (std::uint64_t i = 0; i < count; ++i) {
    double norm2 = 0.0;
    for (int j = 0; j < m; ++j) {
      const double xi = normal(rng);
      norm2 += xi * xi;
    }
    const double w = scalar_weight(m, norm2);
    // By exchangeability E[w^2 Xi_1^2] = E[w^2 |Xi|^2] / m; averaging over the
    // coordinates lowers the variance without changing the target.
    const double a = w * w * norm2 / m;
    s.a += a;
    s.b += w;
    s.aa += a * a;
    s.bb += w * w;
    s.ab += a * w;
  }
  return s;
}

}  // namespace

RSquared compute_r_squared(int m, double mu2, std::uint64_t samples, std::uint64_t seed, int threads) {
  if (m < 1) throw ArgumentError("compute_r_squared: m must be >= 1");
  if (!(mu2 > 0.0)) throw ArgumentError("compute_r_squared: mu2 must be positive");
  if (samples < 2) throw ArgumentError("compute_r_squared: need at least 2 samples");
  const double mu = std::sqrt(mu2);
  const std::uint64_t chunks = (samples + kRsqChunk - 1) / kRsqChunk;
  std::vector<RsqSums> parts(chunks);
  auto work = [&](std::uint64_t first, std::uint64_t stride) {
    for (std::uint64_t c = first; c < chunks; c += stride) {
      const std::uint64_t count = std::min(kRsqChunk, samples - c * kRsqChunk);
      parts[c] = rsq_chunk(m, mu, seed, c, count);
    }
  };
  threads = std::max(1, std::min<int>(threads, static_cast<int>(chunks)));
  if (threads == 1) {
    work(0, 1);
  } else {
    std::vector<std::thread> pool;
    for (int t = 0; t < threads; ++t) pool.emplace_back(work, t, threads);
    for (auto& th : pool) th.join();
  }
  RsqSums total;
  for (const auto& p : parts) {
    total.a += p.a;
    total.b += p.b;
    total.aa += p.aa;
    total.bb += p.bb;
    total.ab += p.ab;
  }
  const double n = static_cast<double>(samples);
  const double ma = total.a / n;
  const double mb = total.b / n;
  if (!(mb > 0.0)) throw NumericError("compute_r_squared: weight expectation underflowed to 0");
  const double va = total.aa / n - ma * ma;
  const double vb = total.bb / n - mb * mb;
  const double cab = total.ab / n - ma * mb;
  // Gradient of f(a, b) = a / b^2 is (1/b^2, -2a/b^3).
  const double ga = 1.0 / (mb * mb);
  const double gb = -2.0 * ma / (mb * mb * mb);
  const double var = (ga * ga * va + gb * gb * vb + 2.0 * ga * gb * cab) / n;

  RSquared r;
  r.value = ma / (mb * mb);
  r.mu2 = mu2;
  r.m = m;
  r.mc_samples = samples;
  r.mc_seed = seed;
  r.std_error = std::sqrt(std::max(0.0, var));
  return r;
}

}  // namespace centrex
