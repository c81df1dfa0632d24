#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "hisnot/basis.hpp"
#include "hisnot/rng.hpp"
#include "hisnot/types.hpp"

namespace hisnot {

// "Parallel" is also known as "Horizontal"; "Grid" as "Multi-Perpendicular".
enum class DatasetKind { Perpendicular, Parallel, OneToMany, Grid };

inline const char* to_string(DatasetKind k) {
  switch (k) {
    case DatasetKind::Perpendicular: return "perpendicular";
    case DatasetKind::Parallel: return "parallel";
    case DatasetKind::OneToMany: return "one-to-many";
    case DatasetKind::Grid: return "grid";
  }
  return "?";
}

// Coefficient slots for the two generating directions. In the Fourier
// enumeration e_{2m-1} = sin(m pi t), so sin(pi t) sits at index 1 and
// sin(2 pi t) at index 3. All slot logic must go through these two functions.
inline constexpr int slot_c1() { return 1; }
inline constexpr int slot_c2() { return 3; }

struct DatasetSpec {
  DatasetKind kind = DatasetKind::Perpendicular;
  int n = 256;
  std::uint64_t seed = 0;
  BasisSpec basis{BasisKind::Fourier, 16};
  double one_to_many_offset = 0.5;  // branch positions +-offset on the c2 slot

  void validate() const {
    basis.validate();
    if (n < 1) throw std::invalid_argument("DatasetSpec: n must be >= 1");
    if (basis.num_modes <= slot_c2())
      throw std::invalid_argument("DatasetSpec: basis needs num_modes > 3 to hold the c2 slot");
    if (!(one_to_many_offset > 0.0))
      throw std::invalid_argument("DatasetSpec: one_to_many_offset must be > 0");
  }
};

// n samples sharing one basis, one row per sample.
struct SampleBatch {
  Mat rows;  // n x K
  BasisSpec basis;

  void validate() const {
    basis.validate();
    if (rows.cols() != basis.num_modes)
      throw std::invalid_argument("SampleBatch: width != num_modes");
    if (!rows.allFinite()) throw std::invalid_argument("SampleBatch: non-finite entries");
  }
};

namespace detail {

inline double categorical4(Rng& rng, const double (&atoms)[4]) {
  const double u = rng.uniform01();
  const int idx = std::min(3, static_cast<int>(u * 4.0));
  return atoms[idx];
}

}  // namespace detail

// Source rows in coefficient space; one row per sample, draws in row order.
inline Mat sample_source(DatasetKind kind, const BasisSpec& basis, int n, Rng& rng) {
  Mat out = Mat::Zero(n, basis.num_modes);
  static constexpr double grid_atoms[4] = {-0.75, -0.25, 0.25, 0.75};
  for (int i = 0; i < n; ++i) {
    out(i, slot_c1()) = rng.uniform_pm1();
    if (kind == DatasetKind::Grid) out(i, slot_c2()) = detail::categorical4(rng, grid_atoms);
  }
  return out;
}

inline Mat sample_target(DatasetKind kind, const BasisSpec& basis, int n, Rng& rng,
                         double one_to_many_offset = 0.5) {
  Mat out = Mat::Zero(n, basis.num_modes);
  static constexpr double grid_atoms[4] = {-0.75, -0.25, 0.25, 0.75};
  for (int i = 0; i < n; ++i) {
    switch (kind) {
      case DatasetKind::Perpendicular:
        out(i, slot_c2()) = rng.uniform_pm1();
        break;
      case DatasetKind::Parallel:
        out(i, slot_c1()) = rng.uniform_pm1();
        out(i, slot_c2()) = 0.5;
        break;
      case DatasetKind::OneToMany:
        out(i, slot_c1()) = rng.uniform_pm1();
        out(i, slot_c2()) = rng.uniform01() < 0.5 ? -one_to_many_offset : one_to_many_offset;
        break;
      case DatasetKind::Grid:
        out(i, slot_c1()) = detail::categorical4(rng, grid_atoms);
        out(i, slot_c2()) = rng.uniform_pm1();
        break;
    }
  }
  return out;
}

// Deterministic given spec.seed: source from stream "dataset-source", target
// from "dataset-target".
inline std::pair<SampleBatch, SampleBatch> generate(const DatasetSpec& spec) {
  spec.validate();
  Rng src_rng = Rng::stream(spec.seed, "dataset-source");
  Rng tgt_rng = Rng::stream(spec.seed, "dataset-target");
  SampleBatch source{sample_source(spec.kind, spec.basis, spec.n, src_rng), spec.basis};
  SampleBatch target{
      sample_target(spec.kind, spec.basis, spec.n, tgt_rng, spec.one_to_many_offset), spec.basis};
  return {std::move(source), std::move(target)};
}

enum class MongeExistence { Yes, No, NonUnique };

inline const char* to_string(MongeExistence m) {
  switch (m) {
    case MongeExistence::Yes: return "yes";
    case MongeExistence::No: return "no";
    case MongeExistence::NonUnique: return "non_unique";
  }
  return "?";
}

// Analytic transport cost between source and target laws, when known.
// w2sq is the unhalved squared Wasserstein-2; half_cost = w2sq / 2.
struct OracleInfo {
  std::optional<double> w2sq;
  std::optional<double> half_cost;
  MongeExistence monge_exists = MongeExistence::NonUnique;
  std::string notes;
};

// One-to-Many with branches at +-offset: the optimal plan splits each source
// point vertically, so w2sq = offset^2 (1.0 for the +-1 variant, 0.25 for the
// +-0.5 dataset). No Monge map exists.
inline OracleInfo oracle_one_to_many(double offset) {
  OracleInfo info;
  info.w2sq = offset * offset;
  info.half_cost = 0.5 * offset * offset;
  info.monge_exists = MongeExistence::No;
  info.notes = "mass splits equally between the two branches";
  return info;
}

inline OracleInfo oracle(DatasetKind kind) {
  OracleInfo info;
  switch (kind) {
    case DatasetKind::Perpendicular:
      // orthogonal supports: every coupling costs E||X||^2 + E||Y||^2 = 2/3
      info.w2sq = 2.0 / 3.0;
      info.half_cost = 1.0 / 3.0;
      info.monge_exists = MongeExistence::NonUnique;
      info.notes = "constant cost; every coupling is optimal";
      break;
    case DatasetKind::Parallel:
      // identity in c1 plus a vertical shift of 0.5
      info.w2sq = 0.25;
      info.half_cost = 0.125;
      info.monge_exists = MongeExistence::Yes;
      info.notes = "pure translation by 0.5 on the c2 slot";
      break;
    case DatasetKind::OneToMany:
      info = oracle_one_to_many(0.5);
      break;
    case DatasetKind::Grid:
      info.monge_exists = MongeExistence::NonUnique;
      info.notes = "no analytic value; plan non-unique";
      break;
  }
  return info;
}

// Directions along which the source measure has zero variance (or a discrete
// marginal, which is just as singular). For every kind the only direction
// carrying a continuous source marginal is the c1 slot.
inline std::vector<int> singular_directions(DatasetKind kind, int num_modes) {
  (void)kind;  // Grid's c2 marginal is discrete, hence singular too
  std::vector<int> dirs;
  for (int k = 0; k < num_modes; ++k)
    if (k != slot_c1()) dirs.push_back(k);
  return dirs;
}

}  // namespace hisnot
