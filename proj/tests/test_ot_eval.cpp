#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "hisnot/ot_eval.hpp"
#include "hisnot/rng.hpp"

using namespace hisnot;

namespace {
const BasisSpec kBasis{BasisKind::Fourier, 16};

Mat random_mat(Index r, Index c, Rng& rng) {
  Mat m(r, c);
  for (Index i = 0; i < r; ++i)
    for (Index j = 0; j < c; ++j) m(i, j) = rng.uniform_pm1();
  return m;
}
}  // namespace

TEST_CASE("cost_matrix basics") {
  Mat a(2, 2), b(2, 2);
  a << 0, 0, 1, 0;
  b << 0, 0, 0, 2;
  const Mat c = cost_matrix(a, b);
  CHECK(c(0, 0) == 0.0);  // identical rows give exact zero
  CHECK(c(0, 1) == 4.0);
  CHECK(c(1, 0) == 1.0);
  CHECK(c(1, 1) == 5.0);
  CHECK(c.minCoeff() >= 0.0);
}

TEST_CASE("solve_assignment: diagonal optimum and input validation") {
  Mat c = Mat::Constant(4, 4, 3.0);
  c.diagonal().setZero();
  const Assignment a = solve_assignment(c);
  CHECK(a.total_cost == 0.0);
  for (int i = 0; i < 4; ++i) CHECK(a.col_of_row[i] == i);

  CHECK_THROWS_AS(solve_assignment(Mat::Zero(2, 3)), std::invalid_argument);
  Mat neg = Mat::Zero(2, 2);
  neg(0, 0) = -1.0;
  CHECK_THROWS_AS(solve_assignment(neg), std::invalid_argument);
  Mat inf = Mat::Zero(2, 2);
  inf(0, 1) = std::numeric_limits<double>::infinity();
  CHECK_THROWS_AS(solve_assignment(inf), std::invalid_argument);
}

TEST_CASE("solve_assignment matches exhaustive search on 100+ random instances") {
  Rng rng = Rng::stream(31, "assignment-oracle");
  for (int rep = 0; rep < 120; ++rep) {
    const int n = 2 + static_cast<int>(rng.uniform01() * 7.0);  // 2..8
    const Mat a = random_mat(n, 3, rng);
    const Mat b = random_mat(n, 3, rng);
    const double jv = empirical_w2sq(a, b);
    const double brute = brute_force_w2sq(a, b);
    INFO("rep=", rep, " n=", n);
    CHECK(jv == brute);  // same sum order over the same entries: exact match
  }
}

TEST_CASE("deterministic tie-break picks the lexicographically smallest permutation") {
  // two symmetric optima: sigma=(0,1) and sigma=(1,0) both cost 2
  Mat tie = Mat::Constant(2, 2, 1.0);
  const Assignment a = solve_assignment(tie);
  CHECK(a.col_of_row == std::vector<int>{0, 1});

  // 3x3 all-equal block keeps identity
  Mat tie3 = Mat::Constant(3, 3, 0.5);
  const Assignment a3 = solve_assignment(tie3);
  CHECK(a3.col_of_row == std::vector<int>{0, 1, 2});

  // a structured tie: rows 0/1 both prefer columns 0/1 at equal cost
  Mat m(3, 3);
  m << 1, 1, 9,
       1, 1, 9,
       9, 9, 0;
  const Assignment am = solve_assignment(m);
  CHECK(am.col_of_row == std::vector<int>{0, 1, 2});
}

TEST_CASE("empirical_w2sq trivial cases and metric axioms") {
  Rng rng = Rng::stream(32, "axioms");
  const Mat a = random_mat(24, 5, rng);
  CHECK(empirical_w2sq(a, a) == 0.0);

  Mat x(1, 3), y(1, 3);
  x << 1, 2, 3;
  y << 2, 2, 1;
  CHECK(empirical_w2sq(x, y) == doctest::Approx(5.0));

  const Mat b = random_mat(24, 5, rng);
  CHECK(empirical_w2sq(a, b) == doctest::Approx(empirical_w2sq(b, a)).epsilon(1e-12));

  // translation: cost of the identity permutation equals ||v||^2 and bounds
  // the optimal matching from above
  Vec v(5);
  v << 0.3, -0.2, 0.1, 0.0, 0.4;
  Mat shifted = a;
  shifted.rowwise() += v.transpose();
  const double w = empirical_w2sq(a, shifted);
  CHECK(w <= v.squaredNorm() + 1e-12);
  double identity_cost = 0.0;
  for (Index i = 0; i < a.rows(); ++i) identity_cost += (shifted.row(i) - a.row(i)).squaredNorm();
  CHECK(identity_cost / a.rows() == doctest::Approx(v.squaredNorm()).epsilon(1e-12));

  CHECK_THROWS_AS(empirical_w2sq(a, random_mat(23, 5, rng)), std::invalid_argument);
}

TEST_CASE("Perpendicular batches: estimator close to the 2/3 oracle at n=2000") {
  DatasetSpec spec{DatasetKind::Perpendicular, 2000, 501, kBasis};
  auto [src, tgt] = generate(spec);
  const double w = empirical_w2sq(src.rows, tgt.rows);
  CHECK(std::abs(w - 2.0 / 3.0) < 0.05 * (2.0 / 3.0));
}

TEST_CASE("estimator consistency: error shrinks with n (3 seeds, within noise)") {
  // average |estimate - 2/3| over 3 seeds at n = 100, 500, 2000
  double err[3] = {0, 0, 0};
  const int sizes[3] = {100, 500, 2000};
  for (int s = 0; s < 3; ++s) {
    for (std::uint64_t seed = 900; seed < 903; ++seed) {
      DatasetSpec spec{DatasetKind::Perpendicular, sizes[s], seed, kBasis};
      auto [src, tgt] = generate(spec);
      err[s] += std::abs(empirical_w2sq(src.rows, tgt.rows) - 2.0 / 3.0) / 3.0;
    }
  }
  // monotone within run-to-run noise: allow a small slack band
  CHECK(err[1] <= err[0] + 0.01);
  CHECK(err[2] <= err[1] + 0.01);
}

TEST_CASE("d_cost / d_target pinned cases") {
  const TransportFn identity = [](const Mat& m) { return m; };

  Rng rng = Rng::stream(33, "dcost");
  const Mat a = random_mat(32, 6, rng);
  CHECK(d_cost(identity, a, a) == 0.0);
  CHECK(d_target(identity, a, a) == 0.0);

  // Parallel with the analytic shift map: d_cost -> 0 as n grows
  DatasetSpec spec{DatasetKind::Parallel, 2000, 777, kBasis};
  auto [src, tgt] = generate(spec);
  const TransportFn shift = [](const Mat& m) {
    Mat out = m;
    out.col(slot_c2()).array() += 0.5;
    return out;
  };
  CHECK(d_cost(shift, src.rows, tgt.rows) <= 0.02);
  CHECK(d_target(shift, src.rows, tgt.rows) <= 0.02);

  // untrained identity on Perpendicular: pushforward stays at the source
  DatasetSpec perp{DatasetKind::Perpendicular, 2000, 778, kBasis};
  auto [psrc, ptgt] = generate(perp);
  const double dt = d_target(identity, psrc.rows, ptgt.rows);
  CHECK(std::abs(dt - 2.0 / 3.0) < 0.05 * (2.0 / 3.0));

  CHECK_THROWS_AS(d_cost(identity, a, random_mat(31, 6, rng)), std::invalid_argument);
}

TEST_CASE("brute_force_w2sq pinned cases") {
  Mat x(1, 2), y(1, 2);
  x << 0, 0;
  y << 3, 4;
  CHECK(brute_force_w2sq(x, y) == doctest::Approx(25.0));
  Rng rng = Rng::stream(34, "brute");
  const Mat a = random_mat(5, 4, rng);
  CHECK(brute_force_w2sq(a, a) == 0.0);
  CHECK_THROWS_AS(brute_force_w2sq(random_mat(9, 2, rng), random_mat(9, 2, rng)),
                  std::invalid_argument);
}

TEST_CASE("metrics report serialization") {
  MetricsReport m;
  m.w2sq_mu_nu = 0.66;
  m.mean_transport_cost = 0.70;
  m.d_cost = std::abs(m.w2sq_mu_nu - m.mean_transport_cost);
  m.d_target = 0.01;
  m.n = 2000;
  m.seeds = {1, 2, 3, 4};
  m.eval_sigma = 0.06;
  m.validate();

  std::ostringstream csv;
  write_metrics_csv(csv, m);
  CHECK(csv.str().find("d_cost,d_target,") == 0);
  CHECK(csv.str().find(",2000,1,2,3,4,") != std::string::npos);

  std::ostringstream js;
  write_metrics_json(js, m);
  CHECK(js.str().find("\"d_target\":0.01") != std::string::npos);
  CHECK(js.str().back() == '\n');

  m.d_cost = 0.5;  // breaks the defining identity
  CHECK_THROWS_AS(m.validate(), std::logic_error);
}
