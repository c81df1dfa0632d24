// Experiment runner: dataset generation, training, evaluation, invariant
// checks, plots, and the sigma convergence sweep.

#include <CLI11.hpp>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "hisnot/commands.hpp"

namespace {

hisnot::ExperimentConfig load_with_overrides(const std::string& config_path,
                                             const std::string& out_dir,
                                             long long seed_override) {
  hisnot::ExperimentConfig cfg = hisnot::load_config(config_path);
  if (!out_dir.empty()) cfg.output_dir = out_dir;
  if (seed_override >= 0) {
    const auto s = static_cast<std::uint64_t>(seed_override);
    cfg.trainer.seeds = {s, s + 1, s + 2, s + 3};
  }
  return cfg;
}

std::vector<double> parse_sigma_list(const std::string& csv) {
  std::vector<double> out;
  std::stringstream ss(csv);
  std::string tok;
  while (std::getline(ss, tok, ','))
    if (!tok.empty()) out.push_back(std::stod(tok));
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"hisnot: semi-dual neural optimal transport on spectral coefficients"};
  app.require_subcommand(1);

  std::string config_path, out_dir, checkpoint, run_dir, sigma_csv = "0.3,0.15,0.06";
  long long seed_override = -1;
  bool quiet = false, quick = false;
  int gen_n = -1, sweep_seeds = 3;
  double eval_sigma = -1.0;

  app.add_flag("--quiet", quiet, "suppress progress output");

  auto* gen = app.add_subcommand("gen-data", "write source.csv/target.csv for inspection");
  gen->add_option("--config", config_path, "experiment config (JSON)")->required();
  gen->add_option("--out", out_dir, "output directory override");
  gen->add_option("--seed-override", seed_override, "replace all seeds with N..N+3");
  gen->add_option("--n", gen_n, "sample count (default: eval.n)");

  auto* tr = app.add_subcommand("train", "run the annealed max-min training loop");
  tr->add_option("--config", config_path, "experiment config (JSON)")->required();
  tr->add_option("--out", out_dir, "output directory override");
  tr->add_option("--seed-override", seed_override, "replace all seeds with N..N+3");

  auto* ev = app.add_subcommand("eval", "evaluate a checkpoint on fresh batches");
  ev->add_option("--config", config_path, "experiment config (JSON)")->required();
  ev->add_option("--checkpoint", checkpoint, "checkpoint file")->required();
  ev->add_option("--out", out_dir, "output directory override");
  ev->add_option("--seed-override", seed_override, "replace all seeds with N..N+3");
  ev->add_option("--eval-sigma", eval_sigma,
                 "smoothing amplitude applied to eval sources (default: schedule sigma_min)");

  auto* pl = app.add_subcommand("plot", "emit SVG figures for a finished run");
  pl->add_option("run_dir", run_dir, "run directory with resolved-config.json + checkpoint")
      ->required();

  auto* ck = app.add_subcommand("check", "run the invariant suite");
  ck->add_flag("--quick", quick, "reduced-N statistical mode (tolerances widened by sqrt(10))");

  auto* sw = app.add_subcommand("sweep-sigma", "constant-sigma convergence sweep");
  sw->add_option("--config", config_path, "experiment config (JSON)")->required();
  sw->add_option("--out", out_dir, "output directory override");
  sw->add_option("--sigmas", sigma_csv, "comma-separated sigma list");
  sw->add_option("--seeds", sweep_seeds, "seeds per sigma");

  CLI11_PARSE(app, argc, argv);

  try {
    if (gen->parsed()) {
      return hisnot::cmd_gen_data(load_with_overrides(config_path, out_dir, seed_override), gen_n,
                                  quiet);
    }
    if (tr->parsed()) {
      return hisnot::cmd_train(load_with_overrides(config_path, out_dir, seed_override), quiet);
    }
    if (ev->parsed()) {
      return hisnot::cmd_eval(load_with_overrides(config_path, out_dir, seed_override), checkpoint,
                              eval_sigma, quiet);
    }
    if (pl->parsed()) {
      return hisnot::cmd_plot(run_dir, quiet);
    }
    if (ck->parsed()) {
      return hisnot::cmd_check(quick, quiet);
    }
    if (sw->parsed()) {
      const std::vector<double> sigmas = parse_sigma_list(sigma_csv);
      return hisnot::cmd_sweep_sigma(load_with_overrides(config_path, out_dir, seed_override),
                                     sigmas, sweep_seeds, quiet);
    }
  } catch (const hisnot::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return hisnot::kUsage;
  } catch (const std::invalid_argument& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return hisnot::kUsage;
  } catch (const std::exception& e) {
    std::cerr << "runtime failure: " << e.what() << "\n";
    return hisnot::kRuntime;
  }
  return hisnot::kUsage;
}
