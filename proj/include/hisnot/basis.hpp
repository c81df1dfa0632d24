#pragma once

#include <cmath>
#include <cstdio>
#include <numbers>
#include <ostream>
#include <stdexcept>
#include <string>

#include "hisnot/types.hpp"

namespace hisnot {

enum class BasisKind { Fourier, Legendre, Haar };

inline const char* to_string(BasisKind k) {
  switch (k) {
    case BasisKind::Fourier: return "fourier";
    case BasisKind::Legendre: return "legendre";
    case BasisKind::Haar: return "haar";
  }
  return "?";
}

// Truncated orthonormal basis of L^2((-1,1)); K = num_modes coefficients.
struct BasisSpec {
  BasisKind kind = BasisKind::Fourier;
  int num_modes = 16;

  void validate() const {
    if (num_modes < 1) throw std::invalid_argument("BasisSpec: num_modes must be >= 1");
  }
  friend bool operator==(const BasisSpec& a, const BasisSpec& b) {
    return a.kind == b.kind && a.num_modes == b.num_modes;
  }
};

// Function represented by grid samples, for I/O and quadrature.
struct GridFunction {
  Vec grid;    // strictly increasing, inside [-1, 1]
  Vec values;  // same length

  void validate() const {
    if (grid.size() != values.size())
      throw std::invalid_argument("GridFunction: grid/values length mismatch");
    if (!grid.allFinite() || !values.allFinite())
      throw std::invalid_argument("GridFunction: non-finite entries");
    for (Index i = 0; i + 1 < grid.size(); ++i)
      if (!(grid[i] < grid[i + 1]))
        throw std::invalid_argument("GridFunction: grid must be strictly increasing");
  }
};

// Function represented by K spectral coefficients w.r.t. a declared basis.
struct FunctionSample {
  Vec coeffs;
  BasisSpec basis;

  void validate() const {
    basis.validate();
    if (coeffs.size() != basis.num_modes)
      throw std::invalid_argument("FunctionSample: coeffs length != num_modes");
    if (!coeffs.allFinite()) throw std::invalid_argument("FunctionSample: non-finite coeffs");
  }
};

namespace detail {

inline double legendre_poly(int n, double t) {
  // (n+1) P_{n+1} = (2n+1) t P_n - n P_{n-1}, P_0 = 1, P_1 = t
  if (n == 0) return 1.0;
  if (n == 1) return t;
  double pm1 = 1.0, p = t;
  for (int m = 1; m < n; ++m) {
    const double pn = ((2.0 * m + 1.0) * t * p - m * pm1) / (m + 1.0);
    pm1 = p;
    p = pn;
  }
  return p;
}

}  // namespace detail

// e_k(t) for the declared basis. Fourier convention: e_0 = 1/sqrt(2),
// e_{2m} = cos(m pi t), e_{2m-1} = sin(m pi t). Legendre: sqrt((2k+1)/2) P_k.
// Haar: h_0 = 1/sqrt(2) on [-1,1]; index k>=1 maps to (j, pos) with
// j = floor(log2 k), pos = k - 2^j; jump points take the right-limit value.
inline double basis_eval(const BasisSpec& spec, int k, double t) {
  spec.validate();
  if (k < 0 || k >= spec.num_modes) throw std::out_of_range("basis_eval: index out of range");
  if (!(t >= -1.0 && t <= 1.0)) throw std::invalid_argument("basis_eval: t outside [-1,1]");
  constexpr double inv_sqrt2 = std::numbers::sqrt2 / 2.0;
  switch (spec.kind) {
    case BasisKind::Fourier: {
      if (k == 0) return inv_sqrt2;
      const int m = (k + 1) / 2;
      const double a = m * std::numbers::pi * t;
      return (k % 2 == 1) ? std::sin(a) : std::cos(a);
    }
    case BasisKind::Legendre:
      return std::sqrt((2.0 * k + 1.0) / 2.0) * detail::legendre_poly(k, t);
    case BasisKind::Haar: {
      if (k == 0) return inv_sqrt2;
      int j = 0;
      while ((2 << j) <= k) ++j;  // j = floor(log2 k)
      const int pos = k - (1 << j);
      const double width = 2.0 / static_cast<double>(1 << j);
      const double lo = -1.0 + pos * width;
      const double mid = lo + 0.5 * width;
      const double hi = lo + width;
      const double amp = std::sqrt(static_cast<double>(1 << j)) * inv_sqrt2;
      if (t >= lo && t < mid) return amp;
      if (t >= mid && t < hi) return -amp;
      return 0.0;
    }
  }
  return 0.0;
}

// M uniformly spaced points covering [-1, 1] including both endpoints.
inline Vec uniform_grid(int m) {
  if (m < 2) throw std::invalid_argument("uniform_grid: need at least 2 points");
  Vec g(m);
  for (int i = 0; i < m; ++i) g[i] = -1.0 + 2.0 * static_cast<double>(i) / (m - 1);
  return g;
}

// Composite-trapezoid weights for an arbitrary strictly increasing grid.
inline Vec trapezoid_weights(const Vec& grid) {
  const Index m = grid.size();
  if (m < 2) throw std::invalid_argument("trapezoid_weights: need at least 2 points");
  Vec w = Vec::Zero(m);
  for (Index i = 0; i + 1 < m; ++i) {
    const double h = grid[i + 1] - grid[i];
    w[i] += 0.5 * h;
    w[i + 1] += 0.5 * h;
  }
  return w;
}

// M x K matrix of basis values on a grid.
inline Mat basis_matrix(const BasisSpec& spec, const Vec& grid) {
  Mat b(grid.size(), spec.num_modes);
  for (Index i = 0; i < grid.size(); ++i)
    for (int k = 0; k < spec.num_modes; ++k) b(i, k) = basis_eval(spec, k, grid[i]);
  return b;
}

// c_k = <f, e_k> by composite trapezoid quadrature on the caller's grid.
inline FunctionSample project(const GridFunction& f, const BasisSpec& spec) {
  f.validate();
  spec.validate();
  if (f.grid.size() < 2) throw std::invalid_argument("project: grid needs at least 2 points");
  const Vec w = trapezoid_weights(f.grid);
  const Mat b = basis_matrix(spec, f.grid);
  FunctionSample out;
  out.basis = spec;
  out.coeffs = b.transpose() * (w.cwiseProduct(f.values));
  return out;
}

// values(t) = sum_k coeffs_k e_k(t) on the given grid.
inline GridFunction reconstruct(const FunctionSample& x, const Vec& grid) {
  x.validate();
  for (Index i = 0; i < grid.size(); ++i)
    if (!(grid[i] >= -1.0 && grid[i] <= 1.0))
      throw std::invalid_argument("reconstruct: grid point outside [-1,1]");
  GridFunction g;
  g.grid = grid;
  g.values = basis_matrix(x.basis, grid) * x.coeffs;
  return g;
}

inline void require_same_basis(const FunctionSample& x, const FunctionSample& y) {
  if (!(x.basis == y.basis)) throw std::invalid_argument("basis mismatch");
}

// Parseval: <x,y>_H on the truncated span is the coefficient dot product.
inline double inner(const FunctionSample& x, const FunctionSample& y) {
  require_same_basis(x, y);
  return x.coeffs.dot(y.coeffs);
}

inline double norm2(const FunctionSample& x) { return x.coeffs.squaredNorm(); }

// Two-column CSV (t, value).
inline void write_grid_function_csv(std::ostream& os, const GridFunction& f) {
  f.validate();
  char buf[32];
  os << "t,value\n";
  for (Index i = 0; i < f.grid.size(); ++i) {
    std::snprintf(buf, sizeof(buf), "%.17g", f.grid[i]);
    os << buf << ",";
    std::snprintf(buf, sizeof(buf), "%.17g", f.values[i]);
    os << buf << "\n";
  }
}

// K x K Gram matrix by trapezoid quadrature on a uniform grid of m points.
// Haar needs (m-1) divisible by 2^(j_max+1) so jumps land on nodes; with the
// right-limit convention each entry's error is then bounded by 2h.
inline Mat gram_matrix(const BasisSpec& spec, int m) {
  const Vec grid = uniform_grid(m);
  const Mat b = basis_matrix(spec, grid);
  const Vec w = trapezoid_weights(grid);
  return b.transpose() * w.asDiagonal() * b;
}

}  // namespace hisnot
