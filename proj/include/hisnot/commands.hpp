#pragma once

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

#include "hisnot/check.hpp"
#include "hisnot/config.hpp"
#include "hisnot/plot.hpp"
#include "hisnot/trainer.hpp"

namespace hisnot {

// Exit codes shared by every subcommand.
enum ExitCode : int { kOk = 0, kUsage = 1, kRuntime = 2, kCheckFailed = 3 };

namespace detail_cmd {

inline void write_batch_csv(const std::string& path, const Mat& rows) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot write " + path);
  for (Index k = 0; k < rows.cols(); ++k) os << "c" << k << (k + 1 < rows.cols() ? "," : "\n");
  for (Index i = 0; i < rows.rows(); ++i)
    for (Index k = 0; k < rows.cols(); ++k)
      os << detail::fmt17(rows(i, k)) << (k + 1 < rows.cols() ? "," : "\n");
}

inline void write_text(const std::string& path, const std::string& text) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot write " + path);
  os << text;
}

// Threads for sweep fan-out; capped by the HISNOT_THREADS env var (default 1).
inline int max_threads() {
  if (const char* env = std::getenv("HISNOT_THREADS")) {
    const int v = std::atoi(env);
    if (v >= 1) return v;
  }
  return 1;
}

}  // namespace detail_cmd

// Write source.csv / target.csv for inspection.
inline int cmd_gen_data(const ExperimentConfig& cfg, int n, bool quiet) {
  namespace fs = std::filesystem;
  if (n == 0) throw std::invalid_argument("gen-data: n must be >= 1");
  const DatasetSpec spec = cfg.dataset_spec(n > 0 ? n : cfg.eval_n, cfg.trainer.seeds.data);
  auto [source, target] = generate(spec);
  fs::create_directories(cfg.output_dir);
  detail_cmd::write_batch_csv(cfg.output_dir + "/source.csv", source.rows);
  detail_cmd::write_batch_csv(cfg.output_dir + "/target.csv", target.rows);
  save_config(cfg.output_dir + "/resolved-config.json", cfg);
  if (!quiet)
    std::cout << "wrote " << spec.n << " " << to_string(cfg.dataset) << " samples to "
              << cfg.output_dir << "\n";
  return kOk;
}

// Full training run: resolved config, train log, checkpoints, final metrics.
inline int cmd_train(const ExperimentConfig& cfg, bool quiet) {
  namespace fs = std::filesystem;
  fs::create_directories(cfg.output_dir);
  save_config(cfg.output_dir + "/resolved-config.json", cfg);
  if (cfg.trainer.regularization != 0.0 && !quiet)
    std::cerr << "warning: trainer.regularization is accepted but has no effect\n";

  const TrainConfig tc = cfg.resolved_trainer();
  const DatasetSpec data = cfg.dataset_spec(tc.batch_size, tc.seeds.data);

  const CheckpointHook hook = [&](int epoch, const TransportNet& t, const PotentialNet& v) {
    save_checkpoint(cfg.output_dir + "/checkpoint_epoch_" + std::to_string(epoch + 1) + ".txt", t,
                    v);
  };
  const auto t0 = std::chrono::steady_clock::now();
  const TrainResult result = train(tc, data, hook);
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

  {
    std::ofstream os(cfg.output_dir + "/trainlog.csv");
    write_trainlog_csv(os, result.log);
  }
  save_checkpoint(cfg.output_dir + "/checkpoint_final.txt", result.transport, result.potential);

  const double sigma_eval = cfg.schedule.sigma_min;
  const MetricsReport m = evaluate_model(result.transport, cfg.dataset, cfg.basis, tc.cov,
                                         tc.seeds, cfg.eval_n, sigma_eval,
                                         cfg.one_to_many_offset);
  {
    std::ofstream os(cfg.output_dir + "/metrics.csv");
    write_metrics_csv(os, m);
  }
  {
    std::ofstream os(cfg.output_dir + "/metrics.json");
    write_metrics_json(os, m);
  }
  {
    Rng src = Rng::stream(tc.seeds.eval, "eval-source");
    Rng tgt = Rng::stream(tc.seeds.eval, "eval-target");
    Rng noise = Rng::stream(tc.seeds.eval, "eval-noise");
    const EvalBatches b =
        make_eval_batches(result.transport, cfg.dataset, cfg.basis, tc.cov, sigma_eval,
                          std::min(cfg.eval_n, 512), src, tgt, noise, cfg.one_to_many_offset);
    fs::create_directories(cfg.output_dir + "/plots");
    const std::string title =
        std::string(to_string(cfg.dataset)) + " (sigma_eval=" + svg::num(sigma_eval) + ")";
    detail_cmd::write_text(cfg.output_dir + "/plots/coefficient_plane.svg",
                           plot_coefficient_plane(b, tc.seeds, title));
    detail_cmd::write_text(cfg.output_dir + "/plots/function_strip.svg",
                           plot_function_strip(b, cfg.basis, title));
  }
  if (!quiet)
    std::cout << "trained " << tc.epochs << " epochs in " << static_cast<int>(secs)
              << " s; d_cost=" << m.d_cost << " d_target=" << m.d_target << " -> "
              << cfg.output_dir << "\n";
  return kOk;
}

// Evaluate a checkpoint on fresh eval batches.
inline int cmd_eval(const ExperimentConfig& cfg, const std::string& checkpoint_path,
                    double eval_sigma_override, bool quiet) {
  auto [transport, potential] = load_checkpoint(checkpoint_path);
  if (transport.width != cfg.basis.num_modes)
    throw std::runtime_error("checkpoint width " + std::to_string(transport.width) +
                             " does not match basis num_modes " +
                             std::to_string(cfg.basis.num_modes));
  const double sigma_eval =
      eval_sigma_override >= 0.0 ? eval_sigma_override : cfg.schedule.sigma_min;
  const MetricsReport m =
      evaluate_model(transport, cfg.dataset, cfg.basis, cfg.covariance_spec(), cfg.trainer.seeds,
                     cfg.eval_n, sigma_eval, cfg.one_to_many_offset);
  namespace fs = std::filesystem;
  fs::create_directories(cfg.output_dir);
  {
    std::ofstream os(cfg.output_dir + "/metrics.csv");
    write_metrics_csv(os, m);
  }
  {
    std::ofstream os(cfg.output_dir + "/metrics.json");
    write_metrics_json(os, m);
  }
  write_metrics_json(std::cout, m);
  (void)quiet;
  return kOk;
}

// Coefficient-plane scatter plus a reconstructed-function strip, regenerated
// deterministically from the run's resolved config and checkpoint.
inline int cmd_plot(const std::string& run_dir, bool quiet) {
  const ExperimentConfig cfg = load_config(run_dir + "/resolved-config.json");
  auto [transport, potential] = load_checkpoint(run_dir + "/checkpoint_final.txt");
  const CovarianceSpec cov = cfg.covariance_spec();
  const double sigma_eval = cfg.schedule.sigma_min;

  Rng src = Rng::stream(cfg.trainer.seeds.eval, "eval-source");
  Rng tgt = Rng::stream(cfg.trainer.seeds.eval, "eval-target");
  Rng noise = Rng::stream(cfg.trainer.seeds.eval, "eval-noise");
  const EvalBatches b =
      make_eval_batches(transport, cfg.dataset, cfg.basis, cov, sigma_eval,
                        std::min(cfg.eval_n, 512), src, tgt, noise, cfg.one_to_many_offset);

  namespace fs = std::filesystem;
  fs::create_directories(run_dir + "/plots");
  const std::string title = std::string(to_string(cfg.dataset)) + " (sigma_eval=" +
                            svg::num(sigma_eval) + ")";
  detail_cmd::write_text(run_dir + "/plots/coefficient_plane.svg",
                         plot_coefficient_plane(b, cfg.trainer.seeds, title));
  detail_cmd::write_text(run_dir + "/plots/function_strip.svg",
                         plot_function_strip(b, cfg.basis, title));
  if (!quiet) std::cout << "wrote plots to " << run_dir << "/plots\n";
  return kOk;
}

inline int cmd_check(bool quick, bool quiet) {
  CheckSuite suite(quick);
  const std::vector<CheckResult> results = suite.run();
  CheckSuite::write_report(std::cout, results);
  (void)quiet;
  return CheckSuite::all_pass(results) ? kOk : kCheckFailed;
}

struct SweepRow {
  double sigma = 0.0;
  std::uint64_t seed = 0;
  double mean_transport_cost = 0.0;
  double abs_err_vs_oracle = 0.0;
  double d_cost = 0.0;
  double d_target = 0.0;
};

// Constant-sigma training runs over a sigma list (sigma = 0 reproduces the
// unsmoothed ablation); records the learned plan's mean transport cost
// against the analytic oracle. Fans out across threads up to HISNOT_THREADS.
inline std::vector<SweepRow> run_sigma_sweep(const ExperimentConfig& base,
                                             const std::vector<double>& sigmas, int n_seeds) {
  if (sigmas.empty()) throw std::invalid_argument("sweep-sigma: empty sigma list");
  const OracleInfo info = oracle(base.dataset);
  if (!info.w2sq) throw std::invalid_argument("sweep-sigma: dataset has no analytic oracle");
  const double oracle_w2 = *info.w2sq;

  std::vector<SweepRow> rows(sigmas.size() * n_seeds);
  std::vector<std::pair<int, int>> jobs;  // (sigma index, seed index)
  for (std::size_t s = 0; s < sigmas.size(); ++s)
    for (int r = 0; r < n_seeds; ++r) jobs.emplace_back(static_cast<int>(s), r);

  const auto run_job = [&](int job_idx) {
    const auto [si, ri] = jobs[job_idx];
    ExperimentConfig cfg = base;
    cfg.schedule.sigma_max = sigmas[si];
    cfg.schedule.sigma_min = sigmas[si];
    // derived, disjoint seed block per (sigma, seed index)
    const std::uint64_t bump = 1000003ull * (ri + 1);
    cfg.trainer.seeds.data = base.trainer.seeds.data + bump;
    cfg.trainer.seeds.noise = base.trainer.seeds.noise + bump;
    cfg.trainer.seeds.init = base.trainer.seeds.init + bump;
    cfg.trainer.seeds.eval = base.trainer.seeds.eval + bump;

    const TrainConfig tc = cfg.resolved_trainer();
    const DatasetSpec data = cfg.dataset_spec(tc.batch_size, tc.seeds.data);
    const TrainResult result = train(tc, data);
    const MetricsReport m = evaluate_model(result.transport, cfg.dataset, cfg.basis, tc.cov,
                                           tc.seeds, cfg.eval_n, sigmas[si],
                                           cfg.one_to_many_offset);
    SweepRow row;
    row.sigma = sigmas[si];
    row.seed = tc.seeds.data;
    row.mean_transport_cost = m.mean_transport_cost;
    row.abs_err_vs_oracle = std::abs(m.mean_transport_cost - oracle_w2);
    row.d_cost = m.d_cost;
    row.d_target = m.d_target;
    rows[job_idx] = row;
  };

  const int threads = std::min<int>(detail_cmd::max_threads(), static_cast<int>(jobs.size()));
  if (threads <= 1) {
    for (std::size_t i = 0; i < jobs.size(); ++i) run_job(static_cast<int>(i));
  } else {
    std::vector<std::thread> pool;
    std::size_t next = 0;
    std::mutex mu;
    for (int t = 0; t < threads; ++t)
      pool.emplace_back([&] {
        for (;;) {
          std::size_t mine;
          {
            std::lock_guard<std::mutex> lock(mu);
            if (next >= jobs.size()) return;
            mine = next++;
          }
          run_job(static_cast<int>(mine));
        }
      });
    for (auto& t : pool) t.join();
  }
  return rows;
}

inline int cmd_sweep_sigma(const ExperimentConfig& cfg, const std::vector<double>& sigmas,
                           int n_seeds, bool quiet) {
  const std::vector<SweepRow> rows = run_sigma_sweep(cfg, sigmas, n_seeds);
  namespace fs = std::filesystem;
  fs::create_directories(cfg.output_dir);
  std::ofstream os(cfg.output_dir + "/sweep.csv");
  os << "sigma,seed,mean_transport_cost,abs_err_vs_oracle,d_cost,d_target\n";
  for (const SweepRow& r : rows)
    os << detail::fmt17(r.sigma) << "," << r.seed << "," << detail::fmt17(r.mean_transport_cost)
       << "," << detail::fmt17(r.abs_err_vs_oracle) << "," << detail::fmt17(r.d_cost) << ","
       << detail::fmt17(r.d_target) << "\n";
  if (!quiet) {
    for (const SweepRow& r : rows)
      std::cout << "sigma=" << r.sigma << " cost=" << r.mean_transport_cost
                << " |cost-oracle|=" << r.abs_err_vs_oracle << "\n";
    std::cout << "wrote " << cfg.output_dir << "/sweep.csv\n";
  }
  return kOk;
}

}  // namespace hisnot
