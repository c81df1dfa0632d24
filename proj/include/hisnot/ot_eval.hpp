#pragma once

#include <algorithm>
#include <cstdint>
#include <cstdio>
#include <functional>
#include <limits>
#include <numeric>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

#include "hisnot/datasets.hpp"
#include "hisnot/types.hpp"

namespace hisnot {

// C[i][j] = ||a_i - b_j||^2 in coefficient space. Computed pairwise so zeros
// are exact when rows coincide.
inline Mat cost_matrix(const Mat& a, const Mat& b) {
  if (a.cols() != b.cols()) throw std::invalid_argument("cost_matrix: width mismatch");
  Mat c(a.rows(), b.rows());
  for (Index i = 0; i < a.rows(); ++i)
    c.row(i) = (b.rowwise() - a.row(i)).rowwise().squaredNorm().transpose();
  return c;
}

struct Assignment {
  std::vector<int> col_of_row;  // permutation sigma
  double total_cost = 0.0;
};

// Exact minimum-cost perfect matching via shortest augmenting paths with dual
// potentials (O(n^3)). Ties break toward the lowest column index: columns are
// scanned in ascending order and only strict improvements switch the choice.
inline Assignment solve_assignment(const Mat& c) {
  const int n = static_cast<int>(c.rows());
  if (c.rows() != c.cols()) throw std::invalid_argument("solve_assignment: matrix not square");
  if (!c.allFinite()) throw std::invalid_argument("solve_assignment: non-finite cost");
  if (c.minCoeff() < 0.0) throw std::invalid_argument("solve_assignment: negative cost");
  constexpr double inf = std::numeric_limits<double>::infinity();

  std::vector<double> u(n, 0.0), v(n + 1, 0.0);
  std::vector<int> row_of_col(n + 1, -1);  // col n is the virtual start
  for (int i = 0; i < n; ++i) {
    row_of_col[n] = i;
    int j0 = n;
    std::vector<double> minv(n + 1, inf);
    std::vector<int> prev(n + 1, n);
    std::vector<char> used(n + 1, 0);
    do {
      used[j0] = 1;
      const int i0 = row_of_col[j0];
      double delta = inf;
      int j1 = -1;
      for (int j = 0; j < n; ++j) {
        if (used[j]) continue;
        const double cur = c(i0, j) - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          prev[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (int j = 0; j <= n; ++j) {
        if (used[j]) {
          if (row_of_col[j] >= 0) u[row_of_col[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (row_of_col[j0] != -1);
    while (j0 != n) {
      const int j1 = prev[j0];
      row_of_col[j0] = row_of_col[j1];
      j0 = j1;
    }
  }

  Assignment out;
  out.col_of_row.assign(n, -1);
  for (int j = 0; j < n; ++j) out.col_of_row[row_of_col[j]] = j;
  for (int i = 0; i < n; ++i) out.total_cost += c(i, out.col_of_row[i]);
  return out;
}

// Exhaustive minimum over all permutations; test oracle for n <= 8.
inline double brute_force_w2sq(const Mat& a, const Mat& b) {
  if (a.rows() != b.rows()) throw std::invalid_argument("brute_force_w2sq: size mismatch");
  const int n = static_cast<int>(a.rows());
  if (n > 8) throw std::invalid_argument("brute_force_w2sq: n must be <= 8");
  const Mat c = cost_matrix(a, b);
  std::vector<int> perm(n);
  std::iota(perm.begin(), perm.end(), 0);
  double best = std::numeric_limits<double>::infinity();
  do {
    double cost = 0.0;
    for (int i = 0; i < n; ++i) cost += c(i, perm[i]);
    if (cost < best) best = cost;
  } while (std::next_permutation(perm.begin(), perm.end()));
  return best / n;
}

// Minimum-assignment average squared distance between equal-size samples:
// the discrete estimator of squared Wasserstein-2 (unhalved convention).
inline double empirical_w2sq(const Mat& a, const Mat& b) {
  if (a.rows() != b.rows()) throw std::invalid_argument("empirical_w2sq: size mismatch");
  return solve_assignment(cost_matrix(a, b)).total_cost / static_cast<double>(a.rows());
}

inline double empirical_w2sq(const SampleBatch& a, const SampleBatch& b) {
  if (!(a.basis == b.basis)) throw std::invalid_argument("empirical_w2sq: basis mismatch");
  return empirical_w2sq(a.rows, b.rows);
}

using TransportFn = std::function<Mat(const Mat&)>;

inline double mean_transport_cost(const TransportFn& t, const Mat& source) {
  const Mat moved = t(source);
  if (moved.rows() != source.rows() || moved.cols() != source.cols())
    throw std::invalid_argument("mean_transport_cost: map changed the batch shape");
  return (moved - source).rowwise().squaredNorm().mean();
}

// | W2^2(source, target) - mean_i ||T(x_i) - x_i||^2 |
inline double d_cost(const TransportFn& t, const Mat& source, const Mat& target) {
  if (source.rows() != target.rows()) throw std::invalid_argument("d_cost: size mismatch");
  return std::abs(empirical_w2sq(source, target) - mean_transport_cost(t, source));
}

// W2^2(T # source, target)
inline double d_target(const TransportFn& t, const Mat& source, const Mat& target) {
  if (source.rows() != target.rows()) throw std::invalid_argument("d_target: size mismatch");
  return empirical_w2sq(t(source), target);
}

struct EvalSeeds {
  std::uint64_t data = 0, noise = 0, init = 0, eval = 0;
};

// d_cost here is |w2sq_mu_nu - mean_transport_cost| by construction.
struct MetricsReport {
  double d_cost = 0.0;
  double d_target = 0.0;
  double w2sq_mu_nu = 0.0;
  double mean_transport_cost = 0.0;
  int n = 0;
  EvalSeeds seeds;
  double eval_sigma = 0.0;

  void validate() const {
    if (std::abs(d_cost - std::abs(w2sq_mu_nu - mean_transport_cost)) > 1e-12)
      throw std::logic_error("MetricsReport: d_cost inconsistent");
  }
};

namespace detail {
inline std::string fmt17(double x) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return buf;
}
}  // namespace detail

inline void write_metrics_csv(std::ostream& os, const MetricsReport& m) {
  os << "d_cost,d_target,w2sq_mu_nu,mean_transport_cost,n,seed_data,seed_noise,seed_init,"
        "seed_eval,eval_sigma\n";
  os << detail::fmt17(m.d_cost) << "," << detail::fmt17(m.d_target) << ","
     << detail::fmt17(m.w2sq_mu_nu) << "," << detail::fmt17(m.mean_transport_cost) << "," << m.n
     << "," << m.seeds.data << "," << m.seeds.noise << "," << m.seeds.init << "," << m.seeds.eval
     << "," << detail::fmt17(m.eval_sigma) << "\n";
}

// Single-line JSON record for machine consumption.
inline void write_metrics_json(std::ostream& os, const MetricsReport& m) {
  os << "{\"d_cost\":" << detail::fmt17(m.d_cost) << ",\"d_target\":" << detail::fmt17(m.d_target)
     << ",\"w2sq_mu_nu\":" << detail::fmt17(m.w2sq_mu_nu)
     << ",\"mean_transport_cost\":" << detail::fmt17(m.mean_transport_cost) << ",\"n\":" << m.n
     << ",\"seeds\":{\"data\":" << m.seeds.data << ",\"noise\":" << m.seeds.noise
     << ",\"init\":" << m.seeds.init << ",\"eval\":" << m.seeds.eval
     << "},\"eval_sigma\":" << detail::fmt17(m.eval_sigma) << "}\n";
}

}  // namespace hisnot
