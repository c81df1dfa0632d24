#pragma once

#include <cmath>
#include <functional>
#include <numbers>
#include <optional>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

#include "hisnot/autodiff.hpp"
#include "hisnot/datasets.hpp"
#include "hisnot/gaussian.hpp"
#include "hisnot/models.hpp"
#include "hisnot/ot_eval.hpp"
#include "hisnot/rng.hpp"

namespace hisnot {

struct Seeds {
  std::uint64_t data = 1, noise = 2, init = 3, eval = 4;
};

struct TrainConfig {
  int batch_size = 256;
  int epochs = 5000;
  int inner_steps = 5;  // transport updates per potential update
  double lr_transport = 2e-4;
  double lr_potential = 2e-4;
  double adam_beta1 = 0.5;    // max-min loops want low first-moment memory
  double lr_decay_floor = 0.1;  // cosine decay to this fraction; 1 = constant
  double cost_scale = 1.0;      // tau, multiplies the quadratic cost
  NoiseSchedule schedule;
  CovarianceSpec cov;
  Seeds seeds;
  std::vector<int> hidden{128, 128};
  int probe_every = 250;  // 0 disables probes
  int probe_n = 1024;
  int checkpoint_every = 0;  // handled by the CLI; 0 = final only
  double regularization = 0.0;  // accepted for config compatibility; unused

  void validate() const {
    if (batch_size < 2) throw std::invalid_argument("TrainConfig: batch_size must be >= 2");
    if (epochs < 0) throw std::invalid_argument("TrainConfig: epochs must be >= 0");
    if (inner_steps < 1) throw std::invalid_argument("TrainConfig: inner_steps must be >= 1");
    if (!(lr_transport > 0.0) || !(lr_potential > 0.0))
      throw std::invalid_argument("TrainConfig: learning rates must be > 0");
    if (!(adam_beta1 >= 0.0 && adam_beta1 < 1.0))
      throw std::invalid_argument("TrainConfig: adam_beta1 must be in [0,1)");
    if (!(lr_decay_floor > 0.0 && lr_decay_floor <= 1.0))
      throw std::invalid_argument("TrainConfig: lr_decay_floor must be in (0,1]");
    if (!(cost_scale > 0.0)) throw std::invalid_argument("TrainConfig: cost_scale must be > 0");
    cov.validate();
    if (probe_every < 0 || probe_n < 2) throw std::invalid_argument("TrainConfig: bad probe settings");
  }
};

struct TrainRecord {
  int epoch = 0;
  double sigma = 0.0;
  double loss_phi = 0.0;
  double loss_theta = 0.0;
  bool probed = false;
  double d_cost = 0.0;
  double d_target = 0.0;
};

struct TrainLog {
  std::vector<TrainRecord> records;
};

inline void write_trainlog_csv(std::ostream& os, const TrainLog& log) {
  os << "epoch,sigma,loss_phi,loss_theta,d_cost,d_target\n";
  for (const TrainRecord& r : log.records) {
    os << r.epoch << "," << detail::fmt17(r.sigma) << "," << detail::fmt17(r.loss_phi) << ","
       << detail::fmt17(r.loss_theta) << ",";
    if (r.probed) os << detail::fmt17(r.d_cost) << "," << detail::fmt17(r.d_target);
    else os << ",";
    os << "\n";
  }
}

struct TrainResult {
  TransportNet transport;
  PotentialNet potential;
  TrainLog log;
};

// (1/n) sum_i [ -V(T(x~_i)) + V(y_i) ]; ascent target for phi.
inline double loss_potential_value(const PotentialNet& v, const TransportNet& t,
                                   const Mat& x_smoothed, const Mat& y) {
  if (x_smoothed.rows() != y.rows())
    throw std::invalid_argument("loss_potential: batch size mismatch");
  const Vec v_tx = v_apply(v, t_apply(t, x_smoothed));
  const Vec v_y = v_apply(v, y);
  return (v_y - v_tx).mean();
}

// (1/n) sum_i [ tau * 1/2 ||x~_i - T(x~_i)||^2 - V(T(x~_i)) ], Hilbert norm
// evaluated in coefficient space. Generic in the potential so analytic
// potentials can be plugged in.
inline double loss_transport_eval(const Mat& x_smoothed, const Mat& t_of_x,
                                  const std::function<Vec(const Mat&)>& potential, double tau) {
  if (x_smoothed.rows() == 0) throw std::invalid_argument("loss_transport: empty batch");
  const Vec cost = 0.5 * tau * (x_smoothed - t_of_x).rowwise().squaredNorm();
  const Vec v = potential(t_of_x);
  return (cost - v).mean();
}

inline double loss_transport_value(const PotentialNet& v, const TransportNet& t,
                                   const Mat& x_smoothed, double tau) {
  return loss_transport_eval(x_smoothed, t_apply(t, x_smoothed),
                             [&](const Mat& y) { return v_apply(v, y); }, tau);
}

namespace detail_train {

struct LossGraph {
  ad::Tape tape;
  int loss = -1;
  std::vector<int> t_ids, v_ids;
};

// Tape version of loss_potential; theta frozen, phi differentiable.
inline LossGraph build_potential_loss(const PotentialNet& v, const TransportNet& t,
                                      const Mat& x_smoothed, const Mat& y) {
  LossGraph g;
  g.t_ids = t.params.attach(g.tape, false);
  g.v_ids = v.params.attach(g.tape, true);
  const int x = g.tape.leaf(x_smoothed, false);
  const int yid = g.tape.leaf(y, false);
  const int tx = t_forward(g.tape, t, g.t_ids, x);
  const int v_tx = v_forward(g.tape, v, g.v_ids, tx);
  const int v_y = v_forward(g.tape, v, g.v_ids, yid);
  g.loss = g.tape.mean(g.tape.sub(v_y, v_tx));
  return g;
}

// Tape version of loss_transport; phi frozen, theta differentiable.
inline LossGraph build_transport_loss(const PotentialNet& v, const TransportNet& t,
                                      const Mat& x_smoothed, double tau) {
  LossGraph g;
  g.t_ids = t.params.attach(g.tape, true);
  g.v_ids = v.params.attach(g.tape, false);
  const int x = g.tape.leaf(x_smoothed, false);
  const int tx = t_forward(g.tape, t, g.t_ids, x);
  const int cost = g.tape.scale(g.tape.rowwise_sqnorm(g.tape.sub(x, tx)), 0.5 * tau);
  const int v_tx = v_forward(g.tape, v, g.v_ids, tx);
  g.loss = g.tape.mean(g.tape.sub(cost, v_tx));
  return g;
}

}  // namespace detail_train

// Metrics of the learned plan. Sources are smoothed at sigma_eval before the
// map is applied (the plan view; 0 for unsmoothed runs), while the W2^2
// reference uses the clean batches.
struct EvalBatches {
  Mat source;    // clean
  Mat smoothed;  // source + sigma_eval-noise
  Mat target;
  Mat transported;  // T(smoothed)
};

inline EvalBatches make_eval_batches(const TransportNet& t, DatasetKind kind,
                                     const BasisSpec& basis, const CovarianceSpec& cov,
                                     double sigma_eval, int n, Rng& src_rng, Rng& tgt_rng,
                                     Rng& noise_rng, double one_to_many_offset = 0.5) {
  EvalBatches b;
  b.source = sample_source(kind, basis, n, src_rng);
  b.target = sample_target(kind, basis, n, tgt_rng, one_to_many_offset);
  b.smoothed = smooth_batch(b.source, cov, sigma_eval, noise_rng);
  b.transported = t_apply(t, b.smoothed);
  return b;
}

inline MetricsReport metrics_from(const EvalBatches& b, const Seeds& seeds, double sigma_eval) {
  MetricsReport m;
  m.n = static_cast<int>(b.source.rows());
  m.w2sq_mu_nu = empirical_w2sq(b.source, b.target);
  m.mean_transport_cost = (b.transported - b.smoothed).rowwise().squaredNorm().mean();
  m.d_cost = std::abs(m.w2sq_mu_nu - m.mean_transport_cost);
  m.d_target = empirical_w2sq(b.transported, b.target);
  m.seeds = {seeds.data, seeds.noise, seeds.init, seeds.eval};
  m.eval_sigma = sigma_eval;
  return m;
}

// Fresh eval-stream batches at n samples; sigma_eval defaults to the
// schedule's terminal noise.
inline MetricsReport evaluate_model(const TransportNet& t, DatasetKind kind,
                                    const BasisSpec& basis, const CovarianceSpec& cov,
                                    const Seeds& seeds, int n, double sigma_eval,
                                    double one_to_many_offset = 0.5) {
  Rng src = Rng::stream(seeds.eval, "eval-source");
  Rng tgt = Rng::stream(seeds.eval, "eval-target");
  Rng noise = Rng::stream(seeds.eval, "eval-noise");
  const EvalBatches b = make_eval_batches(t, kind, basis, cov, sigma_eval, n, src, tgt, noise,
                                          one_to_many_offset);
  return metrics_from(b, seeds, sigma_eval);
}

using CheckpointHook = std::function<void(int epoch, const TransportNet&, const PotentialNet&)>;

// Max-min training with annealed Gaussian smoothing. Per epoch: one ascent
// step on phi, then inner_steps descent steps on theta, each with a fresh
// source batch and fresh noise at the epoch's sigma. The hook fires every
// checkpoint_every epochs when set.
inline TrainResult train(const TrainConfig& cfg, const DatasetSpec& data,
                         const CheckpointHook& checkpoint_hook = {}) {
  cfg.validate();
  data.validate();
  if (!(data.basis == cfg.cov.basis))
    throw std::invalid_argument("train: dataset basis != covariance basis");
  const int k = data.basis.num_modes;

  Rng init_t = Rng::stream(cfg.seeds.init, "init-transport");
  Rng init_v = Rng::stream(cfg.seeds.init, "init-potential");
  TrainResult result;
  result.transport = make_transport(k, cfg.hidden, init_t);
  result.potential = make_potential(k, cfg.hidden, init_v);
  if (cfg.epochs == 0) return result;

  NoiseSchedule schedule = cfg.schedule;
  schedule.total_epochs = cfg.epochs;
  schedule.validate();

  Rng src_rng = Rng::stream(cfg.seeds.data, "train-source");
  Rng tgt_rng = Rng::stream(cfg.seeds.data, "train-target");
  Rng noise_rng = Rng::stream(cfg.seeds.noise, "train-noise");
  Rng probe_src = Rng::stream(cfg.seeds.eval, "probe-source");
  Rng probe_tgt = Rng::stream(cfg.seeds.eval, "probe-target");
  Rng probe_noise = Rng::stream(cfg.seeds.eval, "probe-noise");

  ad::AdamState adam_t, adam_v;
  adam_t.lr = cfg.lr_transport;
  adam_v.lr = cfg.lr_potential;
  adam_t.beta1 = cfg.adam_beta1;
  adam_v.beta1 = cfg.adam_beta1;

  result.log.records.reserve(cfg.epochs);
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    try {
      const double sigma = sigma_at(schedule, epoch);
      // cosine step-size decay damps the saddle orbit in the terminal phase
      const double lr_mult =
          cfg.lr_decay_floor + (1.0 - cfg.lr_decay_floor) * 0.5 *
                                   (1.0 + std::cos(std::numbers::pi * epoch / cfg.epochs));
      adam_t.lr = cfg.lr_transport * lr_mult;
      adam_v.lr = cfg.lr_potential * lr_mult;
      TrainRecord rec;
      rec.epoch = epoch;
      rec.sigma = sigma;

      // potential ascent (descent on the negated loss)
      {
        const Mat x = sample_source(data.kind, data.basis, cfg.batch_size, src_rng);
        const Mat y =
            sample_target(data.kind, data.basis, cfg.batch_size, tgt_rng, data.one_to_many_offset);
        const Mat xs = smooth_batch(x, cfg.cov, sigma, noise_rng);
        auto g = detail_train::build_potential_loss(result.potential, result.transport, xs, y);
        rec.loss_phi = g.tape.scalar_value(g.loss);
        g.tape.backward(g.tape.scale(g.loss, -1.0));
        auto grads = result.potential.params.grads_from(g.tape, g.v_ids);
        auto values = result.potential.params.values();
        ad::adam_step(values, grads, adam_v);
        result.potential.params.set_values(values);
      }

      // transport descent, fresh batch and fresh noise every inner step
      for (int j = 0; j < cfg.inner_steps; ++j) {
        const Mat x = sample_source(data.kind, data.basis, cfg.batch_size, src_rng);
        const Mat xs = smooth_batch(x, cfg.cov, sigma, noise_rng);
        auto g = detail_train::build_transport_loss(result.potential, result.transport, xs,
                                                    cfg.cost_scale);
        rec.loss_theta = g.tape.scalar_value(g.loss);
        g.tape.backward(g.loss);
        auto grads = result.transport.params.grads_from(g.tape, g.t_ids);
        auto values = result.transport.params.values();
        ad::adam_step(values, grads, adam_t);
        result.transport.params.set_values(values);
      }

      const bool probe_due =
          cfg.probe_every > 0 &&
          ((epoch + 1) % cfg.probe_every == 0 || epoch + 1 == cfg.epochs);
      if (probe_due) {
        const EvalBatches b =
            make_eval_batches(result.transport, data.kind, data.basis, cfg.cov, sigma,
                              cfg.probe_n, probe_src, probe_tgt, probe_noise,
                              data.one_to_many_offset);
        const MetricsReport m = metrics_from(b, cfg.seeds, sigma);
        rec.probed = true;
        rec.d_cost = m.d_cost;
        rec.d_target = m.d_target;
      }
      result.log.records.push_back(rec);
      if (checkpoint_hook && cfg.checkpoint_every > 0 && (epoch + 1) % cfg.checkpoint_every == 0)
        checkpoint_hook(epoch, result.transport, result.potential);
    } catch (const ad::NonFiniteError& e) {
      throw std::runtime_error(std::string(e.what()) + " at epoch " + std::to_string(epoch));
    }
  }
  return result;
}

// mean_x [ min_y (tau/2 ||x-y||^2 - V(y)) - (tau/2 ||x-T(x)||^2 - V(T(x))) ]
// over a candidate set; near 0 from below for a converged pair.
inline double c_transform_residual(const TransportNet& t, const PotentialNet& v, const Mat& x,
                                   const Mat& candidates, double tau) {
  if (candidates.rows() == 0) throw std::invalid_argument("c_transform_residual: empty candidates");
  const Mat tx = t_apply(t, x);
  const Vec v_cand = v_apply(v, candidates);
  const Vec v_tx = v_apply(v, tx);
  double acc = 0.0;
  for (Index i = 0; i < x.rows(); ++i) {
    const Vec dist = (candidates.rowwise() - x.row(i)).rowwise().squaredNorm();
    const double best = (0.5 * tau * dist - v_cand).minCoeff();
    const double at_t = 0.5 * tau * (x.row(i) - tx.row(i)).squaredNorm() - v_tx[i];
    acc += best - at_t;
  }
  return acc / static_cast<double>(x.rows());
}

}  // namespace hisnot
