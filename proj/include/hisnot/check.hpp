#pragma once

#include <cmath>
#include <functional>
#include <ostream>
#include <string>
#include <vector>

#include "hisnot/basis.hpp"
#include "hisnot/datasets.hpp"
#include "hisnot/gaussian.hpp"
#include "hisnot/models.hpp"
#include "hisnot/ot_eval.hpp"
#include "hisnot/trainer.hpp"

namespace hisnot {

struct CheckResult {
  std::string name;
  bool pass = false;
  double value = 0.0;      // measured quantity
  double tolerance = 0.0;  // bound it was held to
  std::string detail;
};

// Invariant suite: orthonormality, Parseval, sampler statistics, schedule,
// gradient checks, assignment oracle, analytic transport costs. `quick`
// reduces Monte Carlo sizes 10x and widens statistical tolerances by
// sqrt(10). Seeds are pinned so results are deterministic.
class CheckSuite {
 public:
  explicit CheckSuite(bool quick = false) : quick_(quick) {}

  std::vector<CheckResult> run() {
    results_.clear();
    basis_checks();
    sampler_checks();
    schedule_checks();
    gradient_checks();
    assignment_checks();
    oracle_cost_checks();
    return results_;
  }

  static bool all_pass(const std::vector<CheckResult>& rs) {
    for (const auto& r : rs)
      if (!r.pass) return false;
    return true;
  }

  // One JSON line per check plus a trailing summary line.
  static void write_report(std::ostream& os, const std::vector<CheckResult>& rs) {
    int failed = 0;
    for (const auto& r : rs) {
      if (!r.pass) ++failed;
      os << "{\"check\":\"" << r.name << "\",\"pass\":" << (r.pass ? "true" : "false")
         << ",\"value\":" << detail::fmt17(r.value) << ",\"tol\":" << detail::fmt17(r.tolerance);
      if (!r.detail.empty()) os << ",\"detail\":\"" << r.detail << "\"";
      os << "}\n";
    }
    os << "{\"summary\":{\"total\":" << rs.size() << ",\"failed\":" << failed
       << ",\"pass\":" << (failed == 0 ? "true" : "false") << "}}\n";
  }

 private:
  bool quick_;
  std::vector<CheckResult> results_;

  void record(const std::string& name, double value, double tol, bool pass,
              const std::string& detail = "") {
    results_.push_back({name, pass, value, tol, detail});
  }
  void record_le(const std::string& name, double value, double tol,
                 const std::string& detail = "") {
    record(name, value, tol, value <= tol, detail);
  }

  double stat_tol(double t) const { return quick_ ? t * std::sqrt(10.0) : t; }
  int stat_n(int n) const { return quick_ ? n / 10 : n; }

  void basis_checks() {
    // Haar needs dyadic-aligned nodes; 4097 = 4096 + 1 keeps (m-1) % 16 == 0.
    for (auto [kind, m] : {std::pair{BasisKind::Fourier, 4096},
                           std::pair{BasisKind::Legendre, 4096},
                           std::pair{BasisKind::Haar, 4097}}) {
      BasisSpec spec{kind, 16};
      const Mat g = gram_matrix(spec, m);
      const double err = (g - Mat::Identity(16, 16)).cwiseAbs().maxCoeff();
      record_le(std::string("basis.gram.") + to_string(kind), err, 1e-3);
    }

    BasisSpec fourier{BasisKind::Fourier, 16};
    const Vec grid = uniform_grid(1024);
    Rng rng = Rng::stream(1001, "check-roundtrip");
    double worst = 0.0;
    for (int rep = 0; rep < 3; ++rep) {
      FunctionSample x{Vec::Zero(16), fourier};
      for (int k = 0; k < 16; ++k) x.coeffs[k] = rng.uniform_pm1();
      worst = std::max(
          worst, (project(reconstruct(x, grid), fourier).coeffs - x.coeffs).cwiseAbs().maxCoeff());
    }
    record_le("basis.roundtrip.fourier", worst, 1e-6);

    // Legendre round trip is quadrature-limited with trapezoid weights.
    BasisSpec legendre{BasisKind::Legendre, 16};
    worst = 0.0;
    for (int rep = 0; rep < 3; ++rep) {
      FunctionSample x{Vec::Zero(16), legendre};
      for (int k = 0; k < 16; ++k) x.coeffs[k] = rng.uniform_pm1();
      worst = std::max(
          worst,
          (project(reconstruct(x, grid), legendre).coeffs - x.coeffs).cwiseAbs().maxCoeff());
    }
    record_le("basis.roundtrip.legendre", worst, 5e-3);

    const Vec pgrid = uniform_grid(2048);
    const Vec w = trapezoid_weights(pgrid);
    double perr = 0.0;
    for (int rep = 0; rep < 3; ++rep) {
      FunctionSample x{Vec::Zero(16), fourier};
      for (int k = 0; k < 16; ++k) x.coeffs[k] = rng.uniform_pm1();
      const GridFunction g = reconstruct(x, pgrid);
      perr = std::max(perr,
                      std::abs((w.cwiseProduct(g.values.cwiseProduct(g.values))).sum() - norm2(x)));
    }
    record_le("basis.parseval.fourier", perr, 1e-4);
  }

  void sampler_checks() {
    const BasisSpec basis{BasisKind::Fourier, 16};
    const CovarianceSpec cov = cov_inv_k2(basis);
    const int n = stat_n(100000);
    Rng rng = Rng::stream(1002, "check-sampler");
    Vec sum = Vec::Zero(16), sumsq = Vec::Zero(16);
    Mat cross = Mat::Zero(16, 16);
    double norm_acc = 0.0;
    for (int i = 0; i < n; ++i) {
      const FunctionSample s = sample_noise(cov, rng);
      sum += s.coeffs;
      sumsq += s.coeffs.cwiseProduct(s.coeffs);
      cross += s.coeffs * s.coeffs.transpose();
      norm_acc += s.coeffs.squaredNorm();
    }
    const Vec mean = sum / n;
    const Vec var = sumsq / n - mean.cwiseProduct(mean);

    const double trace_rel = std::abs(norm_acc / n - cov.trace()) / cov.trace();
    record_le("gaussian.trace_identity", trace_rel, stat_tol(0.02));

    double worst_var = 0.0, worst_mean = 0.0;
    for (int k = 0; k < 16; ++k) {
      worst_var = std::max(worst_var,
                           std::abs(var[k] - cov.eigenvalues[k]) / cov.eigenvalues[k]);
      worst_mean = std::max(worst_mean, std::abs(mean[k]) / (std::sqrt(cov.eigenvalues[k]) /
                                                             std::sqrt(double(n))));
    }
    record_le("gaussian.coordinate_variance", worst_var, stat_tol(0.05));
    record_le("gaussian.coordinate_mean_3sigma", worst_mean, 3.0);

    const Mat cov_emp = cross / n - mean * mean.transpose();
    double worst_cross = 0.0;
    for (int i = 0; i < 16; ++i)
      for (int j = 0; j < 16; ++j)
        if (i != j) worst_cross = std::max(worst_cross, std::abs(cov_emp(i, j)));
    record_le("gaussian.cross_covariance", worst_cross, stat_tol(0.01));

    const CovarianceSpec holey = cov_kernel_at(basis, {1});
    Rng rng2 = Rng::stream(1003, "check-kernel");
    double kernel_abs = 0.0;
    for (int i = 0; i < 1000; ++i)
      kernel_abs = std::max(kernel_abs, std::abs(sample_noise(holey, rng2).coeffs[1]));
    record("gaussian.kernel_exact_zero", kernel_abs, 0.0, kernel_abs == 0.0);
  }

  void schedule_checks() {
    const NoiseSchedule s{0.5, 0.06, 5000, 0.8};
    bool monotone = true;
    bool clamped = true;
    double prev = sigma_at(s, 0);
    for (int e = 1; e <= 5000; ++e) {
      const double cur = sigma_at(s, e);
      if (cur > prev) monotone = false;
      if (e >= 4000 && cur != 0.06) clamped = false;
      prev = cur;
    }
    record("gaussian.schedule_monotone", monotone ? 1.0 : 0.0, 1.0, monotone);
    record("gaussian.schedule_terminal_clamp", clamped ? 1.0 : 0.0, 1.0, clamped);
    record("gaussian.schedule_start", sigma_at(s, 0), 0.5, sigma_at(s, 0) == 0.5);
    const double mid = sigma_at(s, 2000);
    record("gaussian.schedule_midpoint", mid, 0.28, std::abs(mid - 0.28) < 1e-12);
  }

  void gradient_checks() {
    // central differences over every parameter of both full losses
    Rng rng_t = Rng::stream(1004, "check-grad-T");
    Rng rng_v = Rng::stream(1004, "check-grad-V");
    TransportNet t = make_transport(4, {8}, rng_t);
    PotentialNet v = make_potential(4, {8}, rng_v);
    Rng rng = Rng::stream(1005, "check-grad-batch");
    Mat x(6, 4), y(6, 4);
    for (Index i = 0; i < 6; ++i)
      for (Index j = 0; j < 4; ++j) {
        x(i, j) = rng.uniform_pm1();
        y(i, j) = rng.uniform_pm1();
      }
    const double h = 1e-4;
    auto rel = [](double a, double b) {
      return std::abs(a - b) / std::max({std::abs(a), std::abs(b), 1e-6});
    };

    double worst = 0.0;
    {
      auto g = detail_train::build_potential_loss(v, t, x, y);
      g.tape.backward(g.loss);
      for (std::size_t p = 0; p < v.params.params.size(); ++p) {
        const Mat& analytic = g.tape.grad(g.v_ids[p]);
        for (Index i = 0; i < analytic.size(); ++i) {
          PotentialNet vp = v;
          vp.params.params[p].value(i) += h;
          const double fp = loss_potential_value(vp, t, x, y);
          vp.params.params[p].value(i) -= 2 * h;
          const double fm = loss_potential_value(vp, t, x, y);
          worst = std::max(worst, rel(analytic(i), (fp - fm) / (2 * h)));
        }
      }
    }
    record_le("autodiff.loss_potential_fd", worst, 1e-5);

    worst = 0.0;
    {
      auto g = detail_train::build_transport_loss(v, t, x, 1.0);
      g.tape.backward(g.loss);
      for (std::size_t p = 0; p < t.params.params.size(); ++p) {
        const Mat& analytic = g.tape.grad(g.t_ids[p]);
        for (Index i = 0; i < analytic.size(); ++i) {
          TransportNet tp = t;
          tp.params.params[p].value(i) += h;
          const double fp = loss_transport_value(v, tp, x, 1.0);
          tp.params.params[p].value(i) -= 2 * h;
          const double fm = loss_transport_value(v, tp, x, 1.0);
          worst = std::max(worst, rel(analytic(i), (fp - fm) / (2 * h)));
        }
      }
    }
    record_le("autodiff.loss_transport_fd", worst, 1e-5);
  }

  void assignment_checks() {
    Rng rng = Rng::stream(1006, "check-assignment");
    bool all_equal = true;
    int count = 0;
    for (int rep = 0; rep < 120; ++rep) {
      const int n = 2 + static_cast<int>(rng.uniform01() * 7.0);
      Mat a(n, 3), b(n, 3);
      for (Index i = 0; i < n; ++i)
        for (Index j = 0; j < 3; ++j) {
          a(i, j) = rng.uniform_pm1();
          b(i, j) = rng.uniform_pm1();
        }
      if (empirical_w2sq(a, b) != brute_force_w2sq(a, b)) all_equal = false;
      ++count;
    }
    record("ot_eval.assignment_vs_bruteforce", all_equal ? 1.0 : 0.0, 1.0, all_equal,
           std::to_string(count) + " instances, n in [2,8]");

    Mat tie = Mat::Constant(3, 3, 1.0);
    const Assignment at = solve_assignment(tie);
    const bool lex = at.col_of_row == std::vector<int>{0, 1, 2};
    record("ot_eval.tie_break_lexicographic", lex ? 1.0 : 0.0, 1.0, lex);
  }

  void oracle_cost_checks() {
    const BasisSpec basis{BasisKind::Fourier, 16};
    const int n = quick_ ? 500 : 2000;

    DatasetSpec perp{DatasetKind::Perpendicular, n, 2001, basis};
    auto [ps, pt] = generate(perp);
    const double w_perp = empirical_w2sq(ps.rows, pt.rows);
    record_le("datasets.oracle.perpendicular", std::abs(w_perp - 2.0 / 3.0) / (2.0 / 3.0),
              stat_tol(0.05), "w2sq=" + std::to_string(w_perp));

    DatasetSpec par{DatasetKind::Parallel, n, 2002, basis};
    auto [rs, rt] = generate(par);
    const double w_par = empirical_w2sq(rs.rows, rt.rows);
    record_le("datasets.oracle.parallel", std::abs(w_par - 0.25) / 0.25, stat_tol(0.05),
              "w2sq=" + std::to_string(w_par));

    DatasetSpec otm{DatasetKind::OneToMany, n, 2003, basis};
    auto [os_, ot] = generate(otm);
    const double w_otm = empirical_w2sq(os_.rows, ot.rows);
    record_le("datasets.oracle.one_to_many_half", std::abs(w_otm - 0.25) / 0.25, stat_tol(0.08),
              "w2sq=" + std::to_string(w_otm));

    DatasetSpec otm1{DatasetKind::OneToMany, n, 2004, basis, 1.0};
    auto [os1, ot1] = generate(otm1);
    const double w_otm1 = empirical_w2sq(os1.rows, ot1.rows);
    record_le("datasets.oracle.one_to_many_unit", std::abs(w_otm1 - 1.0), stat_tol(0.08),
              "w2sq=" + std::to_string(w_otm1));
  }
};

}  // namespace hisnot
