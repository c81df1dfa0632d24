#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstring>

#include "hisnot/gaussian.hpp"

using namespace hisnot;

namespace {
const BasisSpec kBasis{BasisKind::Fourier, 16};
}

TEST_CASE("CovarianceSpec validation and derived fields") {
  CovarianceSpec cov = cov_inv_k2(kBasis);
  CHECK(cov.trace() == doctest::Approx(1.5843471).epsilon(1e-6));
  CHECK(cov.kernel().empty());

  CovarianceSpec holey = cov_kernel_at(kBasis, {1, 3});
  CHECK(holey.kernel() == std::vector<int>{1, 3});

  CovarianceSpec bad = cov;
  bad.eigenvalues[2] = -1e-12;
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
  CHECK_THROWS_AS(cov_kernel_at(kBasis, {16}), std::invalid_argument);
}

TEST_CASE("sample_noise: zero operator gives zero sample") {
  CovarianceSpec cov{Vec::Zero(16), kBasis};
  Rng rng = Rng::stream(1, "noise");
  const FunctionSample s = sample_noise(cov, rng);
  CHECK(s.coeffs.cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("sample_noise: per-coordinate statistics at N=1e5") {
  const CovarianceSpec cov = cov_inv_k2(kBasis);
  Rng rng = Rng::stream(12345, "noise-stats");
  const int n = 100000;
  Vec sum = Vec::Zero(16), sumsq = Vec::Zero(16);
  double norm_acc = 0.0;
  Mat cross = Mat::Zero(16, 16);
  for (int i = 0; i < n; ++i) {
    const FunctionSample s = sample_noise(cov, rng);
    sum += s.coeffs;
    sumsq += s.coeffs.cwiseProduct(s.coeffs);
    norm_acc += s.coeffs.squaredNorm();
    cross += s.coeffs * s.coeffs.transpose();
  }
  const Vec mean = sum / n;
  const Vec var = sumsq / n - mean.cwiseProduct(mean);
  for (int k = 0; k < 16; ++k) {
    const double lambda = cov.eigenvalues[k];
    CHECK(std::abs(var[k] - lambda) < 0.05 * lambda);
    CHECK(std::abs(mean[k]) < 3.0 * std::sqrt(lambda) / std::sqrt(double(n)));
  }
  // trace identity: E||sample||^2 = sum of eigenvalues, within 2%
  CHECK(std::abs(norm_acc / n - cov.trace()) < 0.02 * cov.trace());
  // independence: off-diagonal empirical covariance < 0.01
  const Mat cov_emp = cross / n - mean * mean.transpose();
  for (int i = 0; i < 16; ++i)
    for (int j = 0; j < 16; ++j)
      if (i != j) CHECK(std::abs(cov_emp(i, j)) < 0.01);
}

TEST_CASE("sample_noise: kernel directions are exactly zero") {
  const CovarianceSpec cov = cov_kernel_at(kBasis, {0, 5, 15});
  Rng rng = Rng::stream(9, "kernel-zero");
  for (int i = 0; i < 1000; ++i) {
    const FunctionSample s = sample_noise(cov, rng);
    CHECK(s.coeffs[0] == 0.0);
    CHECK(s.coeffs[5] == 0.0);
    CHECK(s.coeffs[15] == 0.0);
  }
}

TEST_CASE("smooth_sample: eps=0 returns x bit-for-bit") {
  const CovarianceSpec cov = cov_inv_k2(kBasis);
  Rng rng = Rng::stream(3, "smooth");
  FunctionSample x{Vec::Zero(16), kBasis};
  x.coeffs[0] = -0.0;  // sign bit must survive
  x.coeffs[1] = 0.3;
  const FunctionSample y = smooth_sample(x, cov, 0.0, rng);
  CHECK(std::memcmp(x.coeffs.data(), y.coeffs.data(), 16 * sizeof(double)) == 0);
  CHECK_THROWS_AS(smooth_sample(x, cov, -0.1, rng), std::invalid_argument);

  FunctionSample other{Vec::Zero(8), BasisSpec{BasisKind::Fourier, 8}};
  CHECK_THROWS_AS(smooth_sample(other, cov, 0.5, rng), std::invalid_argument);
}

TEST_CASE("smooth_sample: kernel-only spectrum puts noise in one slot") {
  Vec lam = Vec::Zero(16);
  lam[0] = 1.0;
  const CovarianceSpec cov{lam, kBasis};
  Rng rng = Rng::stream(77, "one-slot");
  const int n = 100000;
  double sum0 = 0.0, sumsq0 = 0.0;
  for (int i = 0; i < n; ++i) {
    FunctionSample x{Vec::Zero(16), kBasis};
    const FunctionSample y = smooth_sample(x, cov, 1.0, rng);
    for (int k = 1; k < 16; ++k) CHECK(y.coeffs[k] == 0.0);
    sum0 += y.coeffs[0];
    sumsq0 += y.coeffs[0] * y.coeffs[0];
  }
  const double mean = sum0 / n;
  CHECK(std::abs(mean) < 3.0 / std::sqrt(double(n)));
  CHECK(std::abs(sumsq0 / n - mean * mean - 1.0) < 0.05);
}

TEST_CASE("smooth_sample: unbiasedness E[c_hat] = c") {
  const CovarianceSpec cov = cov_inv_k2(kBasis);
  Rng rng = Rng::stream(21, "unbiased");
  FunctionSample x{Vec::Zero(16), kBasis};
  for (int k = 0; k < 16; ++k) x.coeffs[k] = 0.1 * k - 0.7;
  const int n = 100000;
  Vec sum = Vec::Zero(16);
  for (int i = 0; i < n; ++i) sum += smooth_sample(x, cov, 0.5, rng).coeffs;
  const Vec mean = sum / n;
  for (int k = 0; k < 16; ++k) {
    const double se = 0.5 * std::sqrt(cov.eigenvalues[k]) / std::sqrt(double(n));
    CHECK(std::abs(mean[k] - x.coeffs[k]) < 4.0 * se);
  }
}

TEST_CASE("sigma_at: pinned values and clamping") {
  NoiseSchedule s{0.5, 0.06, 1000, 0.8};
  CHECK(sigma_at(s, 0) == doctest::Approx(0.5));
  CHECK(sigma_at(s, 400) == doctest::Approx(0.28));   // t_e = 0.5
  CHECK(sigma_at(s, 800) == doctest::Approx(0.06));   // t_e = 1
  CHECK(sigma_at(s, 900) == doctest::Approx(0.06));
  CHECK(sigma_at(s, 1000) == doctest::Approx(0.06));
  CHECK_THROWS_AS(sigma_at(s, -1), std::out_of_range);
  CHECK_THROWS_AS(sigma_at(s, 1001), std::out_of_range);

  // non-increasing everywhere, constant after active_fraction * E
  double prev = sigma_at(s, 0);
  for (int e = 1; e <= 1000; ++e) {
    const double cur = sigma_at(s, e);
    CHECK(cur <= prev);
    if (e >= 800) CHECK(cur == doctest::Approx(0.06));
    prev = cur;
  }

  NoiseSchedule zero{0.0, 0.0, 100, 0.8};
  CHECK(sigma_at(zero, 50) == 0.0);

  NoiseSchedule bad{0.05, 0.06, 100, 0.8};
  CHECK_THROWS_AS(sigma_at(bad, 0), std::invalid_argument);
}

TEST_CASE("kernel_projection: selection and Pythagoras") {
  Vec lam = Vec::Zero(16);
  for (int k = 1; k < 16; ++k) lam[k] = 1.0;  // kernel = {0}
  const CovarianceSpec cov{lam, kBasis};
  FunctionSample x{Vec::Zero(16), kBasis};
  x.coeffs[0] = 3.0;
  x.coeffs[1] = 5.0;
  x.coeffs[2] = 7.0;
  const FunctionSample px = kernel_projection(x, cov);
  CHECK(px.coeffs[0] == 3.0);
  CHECK(px.coeffs[1] == 0.0);
  CHECK(px.coeffs[2] == 0.0);

  // empty kernel: projection is zero
  const CovarianceSpec full = cov_inv_k2(kBasis);
  CHECK(kernel_projection(x, full).coeffs.cwiseAbs().maxCoeff() == 0.0);

  // ||x||^2 = ||pi_K x||^2 + ||x - pi_K x||^2 to 1e-12
  Rng rng = Rng::stream(5, "pythagoras");
  const CovarianceSpec holey = cov_kernel_at(kBasis, {2, 9});
  for (int rep = 0; rep < 20; ++rep) {
    FunctionSample y{Vec::Zero(16), kBasis};
    for (int k = 0; k < 16; ++k) y.coeffs[k] = rng.uniform_pm1();
    const FunctionSample py = kernel_projection(y, holey);
    FunctionSample rest = y;
    rest.coeffs -= py.coeffs;
    CHECK(std::abs(norm2(y) - norm2(py) - norm2(rest)) < 1e-12);
  }
}

TEST_CASE("covers_singular_directions") {
  // singular everywhere except slot 1
  std::vector<int> singular;
  for (int k = 0; k < 16; ++k)
    if (k != 1) singular.push_back(k);

  const CovarianceSpec good = cov_kernel_at(kBasis, {1});
  CHECK(covers_singular_directions(good, singular));

  const CovarianceSpec bad = cov_kernel_at(kBasis, {3});
  CHECK_FALSE(covers_singular_directions(bad, singular));

  CHECK(covers_singular_directions(bad, {}));
}
