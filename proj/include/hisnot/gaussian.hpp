#pragma once

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "hisnot/basis.hpp"
#include "hisnot/rng.hpp"
#include "hisnot/types.hpp"

namespace hisnot {

// Diagonal trace-class covariance operator in the declared basis.
struct CovarianceSpec {
  Vec eigenvalues;  // lambda_k >= 0, length K
  BasisSpec basis;

  void validate() const {
    basis.validate();
    if (eigenvalues.size() != basis.num_modes)
      throw std::invalid_argument("CovarianceSpec: eigenvalues length != num_modes");
    if (!eigenvalues.allFinite())
      throw std::invalid_argument("CovarianceSpec: non-finite eigenvalue");
    for (Index k = 0; k < eigenvalues.size(); ++k)
      if (eigenvalues[k] < 0.0)
        throw std::invalid_argument("CovarianceSpec: negative eigenvalue");
  }

  double trace() const { return eigenvalues.sum(); }

  // Directions with exactly zero variance.
  std::vector<int> kernel() const {
    std::vector<int> ker;
    for (Index k = 0; k < eigenvalues.size(); ++k)
      if (eigenvalues[k] == 0.0) ker.push_back(static_cast<int>(k));
    return ker;
  }
};

// lambda_k = 1/k^2 (1-based) over all K directions; empty kernel.
inline CovarianceSpec cov_inv_k2(const BasisSpec& basis) {
  CovarianceSpec cov;
  cov.basis = basis;
  cov.eigenvalues = Vec(basis.num_modes);
  for (int k = 0; k < basis.num_modes; ++k)
    cov.eigenvalues[k] = 1.0 / ((k + 1.0) * (k + 1.0));
  return cov;
}

// inv_k2 spectrum with the listed directions zeroed (the kernel).
inline CovarianceSpec cov_kernel_at(const BasisSpec& basis, const std::vector<int>& kernel) {
  CovarianceSpec cov = cov_inv_k2(basis);
  for (int k : kernel) {
    if (k < 0 || k >= basis.num_modes)
      throw std::invalid_argument("cov_kernel_at: kernel index out of range");
    cov.eigenvalues[k] = 0.0;
  }
  return cov;
}

// Draw sum_k sqrt(lambda_k) xi_k e_k in coefficient space; kernel directions
// receive exactly 0.0. One normal draw per coordinate regardless of lambda.
inline FunctionSample sample_noise(const CovarianceSpec& cov, Rng& rng) {
  cov.validate();
  FunctionSample out;
  out.basis = cov.basis;
  out.coeffs = Vec(cov.basis.num_modes);
  for (Index k = 0; k < out.coeffs.size(); ++k) {
    const double xi = rng.normal();
    out.coeffs[k] = cov.eigenvalues[k] == 0.0 ? 0.0 : std::sqrt(cov.eigenvalues[k]) * xi;
  }
  return out;
}

// c_k + eps * sqrt(lambda_k) * zeta_k. eps == 0 returns x bit-for-bit and
// consumes no draws.
inline FunctionSample smooth_sample(const FunctionSample& x, const CovarianceSpec& cov,
                                    double epsilon, Rng& rng) {
  x.validate();
  cov.validate();
  if (!(x.basis == cov.basis)) throw std::invalid_argument("smooth_sample: basis mismatch");
  if (epsilon < 0.0) throw std::invalid_argument("smooth_sample: negative epsilon");
  if (epsilon == 0.0) return x;
  FunctionSample out = x;
  for (Index k = 0; k < out.coeffs.size(); ++k) {
    const double zeta = rng.normal();
    if (cov.eigenvalues[k] != 0.0)
      out.coeffs[k] += epsilon * std::sqrt(cov.eigenvalues[k]) * zeta;
  }
  return out;
}

// Row-wise smoothing of an n x K batch; rows processed in order, coordinates
// ascending, so the draw sequence is reproducible.
inline Mat smooth_batch(const Mat& batch, const CovarianceSpec& cov, double epsilon, Rng& rng) {
  cov.validate();
  if (batch.cols() != cov.basis.num_modes)
    throw std::invalid_argument("smooth_batch: width != num_modes");
  if (epsilon < 0.0) throw std::invalid_argument("smooth_batch: negative epsilon");
  if (epsilon == 0.0) return batch;
  Mat out = batch;
  for (Index i = 0; i < out.rows(); ++i)
    for (Index k = 0; k < out.cols(); ++k) {
      const double zeta = rng.normal();
      if (cov.eigenvalues[k] != 0.0)
        out(i, k) += epsilon * std::sqrt(cov.eigenvalues[k]) * zeta;
    }
  return out;
}

// Linear decay from sigma_max to sigma_min over the first active_fraction of
// epochs, held at sigma_min afterwards.
struct NoiseSchedule {
  double sigma_max = 0.5;
  double sigma_min = 0.06;
  int total_epochs = 5000;
  double active_fraction = 0.8;

  void validate() const {
    if (!(sigma_max >= 0.0) || !(sigma_min >= 0.0))
      throw std::invalid_argument("NoiseSchedule: sigmas must be >= 0");
    if (sigma_min > sigma_max)
      throw std::invalid_argument("NoiseSchedule: sigma_min > sigma_max");
    if (total_epochs < 1) throw std::invalid_argument("NoiseSchedule: total_epochs must be >= 1");
    if (!(active_fraction > 0.0 && active_fraction <= 1.0))
      throw std::invalid_argument("NoiseSchedule: active_fraction must be in (0,1]");
  }
};

inline double sigma_at(const NoiseSchedule& s, int epoch) {
  s.validate();
  if (epoch < 0 || epoch > s.total_epochs)
    throw std::out_of_range("sigma_at: epoch out of [0, total_epochs]");
  const double te = static_cast<double>(epoch) / (s.active_fraction * s.total_epochs);
  return std::max(s.sigma_min, (1.0 - te) * s.sigma_max + te * s.sigma_min);
}

// Orthogonal projection onto Ker(Q): keep coefficients where lambda_k == 0.
inline FunctionSample kernel_projection(const FunctionSample& x, const CovarianceSpec& cov) {
  x.validate();
  cov.validate();
  if (!(x.basis == cov.basis)) throw std::invalid_argument("kernel_projection: basis mismatch");
  FunctionSample out = x;
  for (Index k = 0; k < out.coeffs.size(); ++k)
    if (cov.eigenvalues[k] != 0.0) out.coeffs[k] = 0.0;
  return out;
}

// True iff every singular direction of the data receives positive noise
// variance, i.e. Ker(Q) and the singular set are disjoint.
inline bool covers_singular_directions(const CovarianceSpec& cov,
                                       const std::vector<int>& singular_dirs) {
  cov.validate();
  for (int k : singular_dirs)
    if (k >= 0 && k < cov.eigenvalues.size() && cov.eigenvalues[k] == 0.0) return false;
  return true;
}

}  // namespace hisnot
