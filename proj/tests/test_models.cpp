#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstring>
#include <sstream>

#include "hisnot/models.hpp"

using namespace hisnot;

namespace {
Mat random_batch(Index n, Index k, Rng& rng) {
  Mat m(n, k);
  for (Index i = 0; i < n; ++i)
    for (Index j = 0; j < k; ++j) m(i, j) = rng.uniform_pm1();
  return m;
}
}  // namespace

TEST_CASE("residual transport with zero parameters is the identity") {
  Rng rng = Rng::stream(1, "zero-init");
  TransportNet net = make_transport(8, {16, 16}, rng, /*init_scale=*/0.0);
  Rng rng2 = Rng::stream(2, "batch");
  const Mat x = random_batch(5, 8, rng2);
  const Mat y = t_apply(net, x);
  CHECK(std::memcmp(x.data(), y.data(), sizeof(double) * x.size()) == 0);
}

TEST_CASE("fresh residual net stays near the identity on unit inputs") {
  Rng rng = Rng::stream(3, "near-id");
  TransportNet net = make_transport(16, {128, 128}, rng);
  Rng rng2 = Rng::stream(4, "near-id-batch");
  Mat x = random_batch(64, 16, rng2);
  for (Index i = 0; i < x.rows(); ++i) x.row(i) /= x.row(i).norm();  // unit inputs
  const Mat y = t_apply(net, x);
  const double worst = (y - x).rowwise().norm().maxCoeff();
  CHECK(worst < 0.1);
}

TEST_CASE("shape contracts and determinism") {
  Rng rngT = Rng::stream(5, "shape-T");
  Rng rngV = Rng::stream(5, "shape-V");
  TransportNet t = make_transport(6, {32}, rngT);
  PotentialNet v = make_potential(6, {32}, rngV);
  Rng rngB = Rng::stream(6, "shape-batch");
  for (int n : {1, 3, 17}) {
    const Mat x = random_batch(n, 6, rngB);
    CHECK(t_apply(t, x).rows() == n);
    CHECK(t_apply(t, x).cols() == 6);
    const Vec vx = v_apply(v, x);
    CHECK(vx.size() == n);
    // deterministic: same params, same batch, same output
    CHECK(t_apply(t, x) == t_apply(t, x));
  }
  const Mat wrong = random_batch(2, 5, rngB);
  CHECK_THROWS_AS(t_apply(t, wrong), std::invalid_argument);
  CHECK_THROWS_AS(v_apply(v, wrong), std::invalid_argument);
}

TEST_CASE("zero-parameter potential is identically zero") {
  Rng rng = Rng::stream(7, "zero-V");
  PotentialNet v = make_potential(4, {8}, rng, 0.0);
  Rng rngB = Rng::stream(8, "zero-V-batch");
  const Mat x = random_batch(9, 4, rngB);
  CHECK(v_apply(v, x).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("init: seeds give distinct parameters, same seed twice identical") {
  auto weights = [](std::uint64_t seed) {
    Rng rng = Rng::stream(seed, "seed-test");
    return make_transport(4, {8}, rng).params.params[0].value;
  };
  CHECK(weights(1) == weights(1));
  CHECK(weights(1) != weights(2));
  CHECK(weights(2) != weights(3));
}

TEST_CASE("tape forward equals plain forward bit-for-bit") {
  Rng rngT = Rng::stream(9, "fwd-T");
  Rng rngV = Rng::stream(9, "fwd-V");
  TransportNet t = make_transport(6, {16, 16}, rngT);
  PotentialNet v = make_potential(6, {16, 16}, rngV);
  Rng rngB = Rng::stream(10, "fwd-batch");
  const Mat x = random_batch(12, 6, rngB);

  ad::Tape tape;
  const int xid = tape.leaf(x, false);
  const Mat tx_tape = tape.value(t_forward(tape, t, t.params.attach(tape, false), xid));
  const Mat tx_plain = t_apply(t, x);
  CHECK(std::memcmp(tx_tape.data(), tx_plain.data(), sizeof(double) * tx_tape.size()) == 0);

  const Mat vx_tape = tape.value(v_forward(tape, v, v.params.attach(tape, false), xid));
  const Vec vx_plain = v_apply(v, x);
  CHECK(std::memcmp(vx_tape.data(), vx_plain.data(), sizeof(double) * vx_tape.size()) == 0);
}

TEST_CASE("checkpoint round trip is exact") {
  Rng rngT = Rng::stream(11, "ckpt-T");
  Rng rngV = Rng::stream(11, "ckpt-V");
  TransportNet t = make_transport(5, {8}, rngT);
  PotentialNet v = make_potential(5, {8}, rngV);

  std::stringstream ss;
  save_params(ss, t.params);
  const ParamStore back = load_params(ss);
  REQUIRE(back.params.size() == t.params.params.size());
  for (std::size_t i = 0; i < back.params.size(); ++i) {
    CHECK(back.params[i].name == t.params.params[i].name);
    CHECK(std::memcmp(back.params[i].value.data(), t.params.params[i].value.data(),
                      sizeof(double) * back.params[i].value.size()) == 0);
  }

  const std::string path = "test_models_ckpt.tmp";
  save_checkpoint(path, t, v);
  auto [t2, v2] = load_checkpoint(path);
  CHECK(t2.width == 5);
  CHECK(t2.residual);
  Rng rngB = Rng::stream(12, "ckpt-batch");
  const Mat x = random_batch(4, 5, rngB);
  CHECK(t_apply(t2, x) == t_apply(t, x));
  CHECK(v_apply(v2, x) == v_apply(v, x));
  std::remove(path.c_str());
}
