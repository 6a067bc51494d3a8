#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <numbers>
#include <random>

#include "centrex/errors.hpp"
#include "centrex/mathcore.hpp"
#include "centrex/rsq_cache.hpp"
#include "oracles.hpp"

using namespace centrex;

TEST_CASE("marcum q matches the closed-form chi-square tail") {
  double worst = 0.0;
  for (int m = 1; m <= 60; ++m) {
    for (int i = 0; i <= 80; ++i) {
      const double b = 0.15 * i;
      worst = std::max(worst, std::abs(marcum_q_half_m(m, b) - oracle::marcum_half_m(m, b)));
    }
  }
  CHECK(worst < 1e-12);
}

TEST_CASE("marcum q low-degree identities") {
  for (double b : {0.0, 0.1, 0.5, 1.0, 2.0, 3.5, 6.0}) {
    CHECK(marcum_q_half_m(1, b) == doctest::Approx(std::erfc(b / std::sqrt(2.0))).epsilon(1e-13));
    CHECK(marcum_q_half_m(2, b) == doctest::Approx(std::exp(-b * b / 2.0)).epsilon(1e-13));
  }
  CHECK(marcum_q_half_m(7, 0.0) == 1.0);
}

TEST_CASE("gamma_q at half-integers and edge arguments") {
  CHECK(gamma_q(0.5, 2.0) == doctest::Approx(std::erfc(std::sqrt(2.0))).epsilon(1e-13));
  CHECK(gamma_q(3.0, 0.0) == 1.0);
  CHECK(gamma_q(1.0, 4.0) == doctest::Approx(std::exp(-4.0)).epsilon(1e-13));
  CHECK(gamma_q(2.0, 1e4) == 0.0);
}

TEST_CASE("threshold inversion round trip") {
  for (int m : {1, 2, 5, 10, 50, 60}) {
    for (double alpha : {1e-6, 1e-3, 1e-2, 0.5, 0.999}) {
      const double t = invert_threshold(m, alpha);
      CHECK(marcum_q_half_m(m, t) == doctest::Approx(alpha).epsilon(1e-9));
      CHECK(t == doctest::Approx(oracle::threshold(m, alpha)).epsilon(1e-9));
    }
  }
  CHECK_THROWS_AS(invert_threshold(0, 0.1), ArgumentError);
  CHECK_THROWS_AS(invert_threshold(3, 0.0), ArgumentError);
  CHECK_THROWS_AS(invert_threshold(3, 1.0), ArgumentError);
}

TEST_CASE("whitening of random SPD matrices") {
  std::mt19937_64 rng(7);
  for (int rep = 0; rep < 200; ++rep) {
    const int n = 1 + rep % 12;
    const MatrixXd c = oracle::random_spd(n, rng);
    const MatrixXd psi = whiten(c);
    const MatrixXd should_be_i = psi * c * psi.transpose();
    CHECK((should_be_i - MatrixXd::Identity(n, n)).cwiseAbs().maxCoeff() < 1e-10);
    const VectorXd x = oracle::gaussian_matrix(n, 1, rng);
    WaldContext ctx(c, 0.01);
    CHECK(mahalanobis(ctx, x) == doctest::Approx(oracle::mahalanobis(c, x)).epsilon(1e-10));
  }
}

TEST_CASE("whitening rejects bad matrices") {
  MatrixXd asym(2, 2);
  asym << 1.0, 0.5, 0.0, 1.0;
  CHECK_THROWS_AS(whiten(asym), NumericError);
  MatrixXd singular(2, 2);
  singular << 1.0, 1.0, 1.0, 1.0;
  CHECK_THROWS_AS(whiten(singular), NumericError);
}

TEST_CASE("compression model caches the compressed covariance") {
  std::mt19937_64 rng(3);
  const MatrixXd a = oracle::gaussian_matrix(4, 9, rng);
  const MatrixXd sigma = oracle::random_spd(9, rng);
  CompressionModel model(a, sigma);
  CHECK((model.compressed_cov() - a * sigma * a.transpose()).norm() < 1e-9);
  CHECK((model.unwhitening() * model.whitening() - MatrixXd::Identity(4, 4)).norm() < 1e-10);
}

TEST_CASE("scaled wald context") {
  std::mt19937_64 rng(5);
  const MatrixXd c = oracle::random_spd(6, rng);
  WaldContext base(c, 0.01);
  const WaldContext twice = base.scaled(2.0);
  const VectorXd x = oracle::gaussian_matrix(6, 1, rng);
  CHECK(mahalanobis(twice, x) == doctest::Approx(mahalanobis(base, x) / std::sqrt(2.0)).epsilon(1e-12));
  CHECK(twice.threshold() == base.threshold());
  CHECK(weight_m(base, VectorXd::Zero(6)) == 1.0);
}

TEST_CASE("weight vanishes fast enough") {
  for (int m : {1, 3, 10, 50}) {
    double prev = 1.0;
    for (double x = 0.0; x < 2000.0; x += 7.0) {
      const double w = scalar_weight(m, x);
      CHECK(w <= prev);
      prev = w;
    }
    CHECK(scalar_weight(m, 4000.0) * 4000.0 < 1e-300);
  }
}

TEST_CASE("r squared, m = 2 closed form") {
  // w(x) = exp(-x/2); Gaussian integrals give mu2 (1 + mu2)^2 / (1 + 2 mu2)^2.
  for (double mu2 : {0.5, 1.0, 2.0}) {
    const auto r = compute_r_squared(2, mu2, 400000, 11);
    const double exact = mu2 * (1 + mu2) * (1 + mu2) / ((1 + 2 * mu2) * (1 + 2 * mu2));
    CHECK(std::abs(r.value - exact) < 4.0 * r.std_error);
    CHECK(r.std_error > 0.0);
  }
}

TEST_CASE("r squared, m = 1 by quadrature") {
  const double mu2 = 1.0;
  // E over xi ~ N(0, mu2) of w(xi^2) and w(xi^2)^2 xi^2, with w = erfc(|xi| / sqrt 2).
  double ew = 0.0, ew2x2 = 0.0;
  const double h = 1e-4, s = std::sqrt(mu2);
  for (double u = -12.0; u <= 12.0; u += h) {
    const double xi = s * u;
    const double pdf = std::exp(-0.5 * u * u) / std::sqrt(2.0 * std::numbers::pi);
    const double w = std::erfc(std::abs(xi) / std::sqrt(2.0));
    ew += w * pdf * h;
    ew2x2 += w * w * xi * xi * pdf * h;
  }
  const double exact = ew2x2 / (ew * ew);
  const auto r = compute_r_squared(1, mu2, 400000, 12);
  CHECK(std::abs(r.value - exact) < 4.0 * r.std_error);
}

TEST_CASE("r squared does not depend on the thread count") {
  const auto one = compute_r_squared(5, 1.0, 100000, 3, 1);
  const auto four = compute_r_squared(5, 1.0, 100000, 3, 4);
  CHECK(one.value == four.value);
  CHECK(one.std_error == four.std_error);
}

TEST_CASE("r squared disk cache round trip") {
  const auto dir = std::filesystem::temp_directory_path() / "centrex_test_rsq";
  std::filesystem::remove_all(dir);
  const auto r = compute_r_squared(3, 1.5, 20000, 9);
  store_r_squared(dir, r);
  const auto back = load_r_squared(dir, 3, 1.5, 20000, 9);
  REQUIRE(back.has_value());
  CHECK(back->value == r.value);
  CHECK(back->std_error == r.std_error);
  CHECK_FALSE(load_r_squared(dir, 3, 1.5, 20000, 10).has_value());
  std::filesystem::remove_all(dir);
}

TEST_CASE("average weight vanishes for far-away means") {
  std::mt19937_64 rng(17);
  for (int m : {2, 5, 12}) {
    const MatrixXd c = oracle::random_spd(m, rng);
    WaldContext ctx(c, 0.01);
    const double lmax = Eigen::SelfAdjointEigenSolver<MatrixXd>(c).eigenvalues().maxCoeff();
    const MatrixXd l = Eigen::LLT<MatrixXd>(c).matrixL();
    VectorXd dir = oracle::gaussian_matrix(m, 1, rng);
    dir.normalize();
    double prev = 1.0;
    for (double factor : {2.0, 5.0, 10.0, 12.0}) {
      const VectorXd xi = factor * std::sqrt(lmax * m) * dir;
      double avg = 0.0;
      for (int i = 0; i < 2000; ++i) avg += weight_m(ctx, xi + l * VectorXd(oracle::gaussian_matrix(m, 1, rng)));
      avg /= 2000;
      CHECK(avg <= prev);
      prev = avg;
      if (factor >= 10.0) CHECK(avg < 1e-6);
    }
  }
}
