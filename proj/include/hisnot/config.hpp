#pragma once

#include <fstream>
#include <json.hpp>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "hisnot/datasets.hpp"
#include "hisnot/gaussian.hpp"
#include "hisnot/trainer.hpp"

namespace hisnot {

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Full experiment description; parses from a single strict JSON document
// (unknown keys rejected) and serializes back with every default resolved.
struct ExperimentConfig {
  DatasetKind dataset = DatasetKind::Perpendicular;
  double one_to_many_offset = 0.5;
  BasisSpec basis{BasisKind::Fourier, 16};
  std::string covariance = "inv_k2";  // "inv_k2" | "kernel_at:<i,j,...>"
  std::vector<double> covariance_values;  // used when covariance == "explicit"
  NoiseSchedule schedule{0.5, 0.06, 5000, 0.8};
  TrainConfig trainer;
  int eval_n = 2000;
  std::string output_dir = "runs/out";

  CovarianceSpec covariance_spec() const {
    if (covariance == "inv_k2") return cov_inv_k2(basis);
    if (covariance.rfind("kernel_at:", 0) == 0) {
      std::vector<int> kernel;
      std::stringstream ss(covariance.substr(10));
      std::string tok;
      while (std::getline(ss, tok, ','))
        if (!tok.empty()) kernel.push_back(std::stoi(tok));
      return cov_kernel_at(basis, kernel);
    }
    if (covariance == "explicit") {
      if (static_cast<int>(covariance_values.size()) != basis.num_modes)
        throw ConfigError("covariance: explicit eigenvalue list must have num_modes entries");
      CovarianceSpec cov;
      cov.basis = basis;
      cov.eigenvalues = Eigen::Map<const Vec>(covariance_values.data(),
                                              static_cast<Index>(covariance_values.size()));
      cov.validate();
      return cov;
    }
    throw ConfigError("covariance: unknown preset '" + covariance + "'");
  }

  // Trainer config with the schedule/covariance materialized.
  TrainConfig resolved_trainer() const {
    TrainConfig cfg = trainer;
    cfg.schedule = schedule;
    cfg.schedule.total_epochs = std::max(1, trainer.epochs);
    cfg.cov = covariance_spec();
    return cfg;
  }

  DatasetSpec dataset_spec(int n, std::uint64_t seed) const {
    return DatasetSpec{dataset, n, seed, basis, one_to_many_offset};
  }

  void validate() const {
    basis.validate();
    schedule.validate();
    resolved_trainer().validate();
    if (eval_n < 2) throw ConfigError("eval.n must be >= 2");
    if (output_dir.empty()) throw ConfigError("output_dir must not be empty");
  }
};

namespace detail_config {

using nlohmann::json;

inline void reject_unknown(const json& j, const std::vector<std::string>& allowed,
                           const std::string& where) {
  for (auto it = j.begin(); it != j.end(); ++it) {
    bool ok = false;
    for (const auto& a : allowed)
      if (it.key() == a) ok = true;
    if (!ok) throw ConfigError("unknown key '" + it.key() + "' in " + where);
  }
}

inline DatasetKind parse_dataset(const std::string& s) {
  if (s == "perpendicular") return DatasetKind::Perpendicular;
  if (s == "parallel" || s == "horizontal") return DatasetKind::Parallel;
  if (s == "one-to-many" || s == "one_to_many") return DatasetKind::OneToMany;
  if (s == "grid" || s == "multi-perpendicular") return DatasetKind::Grid;
  throw ConfigError("dataset: unknown kind '" + s + "'");
}

inline BasisKind parse_basis_kind(const std::string& s) {
  if (s == "fourier") return BasisKind::Fourier;
  if (s == "legendre") return BasisKind::Legendre;
  if (s == "haar") return BasisKind::Haar;
  throw ConfigError("basis.kind: unknown '" + s + "'");
}

}  // namespace detail_config

inline ExperimentConfig config_from_json(const nlohmann::json& j) {
  using detail_config::reject_unknown;
  ExperimentConfig c;
  reject_unknown(j, {"dataset", "one_to_many_offset", "basis", "covariance", "schedule",
                     "trainer", "seeds", "eval", "output_dir"},
                 "top level");

  if (!j.contains("dataset")) throw ConfigError("missing required key 'dataset'");
  c.dataset = detail_config::parse_dataset(j.at("dataset").get<std::string>());
  if (j.contains("one_to_many_offset")) c.one_to_many_offset = j.at("one_to_many_offset");

  if (j.contains("basis")) {
    const auto& b = j.at("basis");
    reject_unknown(b, {"kind", "num_modes"}, "basis");
    if (b.contains("kind")) c.basis.kind = detail_config::parse_basis_kind(b.at("kind"));
    if (b.contains("num_modes")) c.basis.num_modes = b.at("num_modes");
  }

  if (j.contains("covariance")) {
    const auto& cv = j.at("covariance");
    if (cv.is_string()) {
      c.covariance = cv.get<std::string>();
    } else if (cv.is_array()) {
      c.covariance = "explicit";
      c.covariance_values = cv.get<std::vector<double>>();
    } else {
      throw ConfigError("covariance: expected preset string or eigenvalue array");
    }
  }

  if (j.contains("schedule")) {
    const auto& s = j.at("schedule");
    reject_unknown(s, {"sigma_max", "sigma_min", "active_fraction"}, "schedule");
    if (s.contains("sigma_max")) c.schedule.sigma_max = s.at("sigma_max");
    if (s.contains("sigma_min")) c.schedule.sigma_min = s.at("sigma_min");
    if (s.contains("active_fraction")) c.schedule.active_fraction = s.at("active_fraction");
  }

  if (j.contains("trainer")) {
    const auto& t = j.at("trainer");
    reject_unknown(t,
                   {"batch_size", "epochs", "inner_steps", "lr_transport", "lr_potential",
                    "adam_beta1", "lr_decay_floor", "cost_scale", "probe_every", "probe_n",
                    "checkpoint_every", "regularization", "hidden"},
                   "trainer");
    if (t.contains("batch_size")) c.trainer.batch_size = t.at("batch_size");
    if (t.contains("epochs")) c.trainer.epochs = t.at("epochs");
    if (t.contains("inner_steps")) c.trainer.inner_steps = t.at("inner_steps");
    if (t.contains("lr_transport")) c.trainer.lr_transport = t.at("lr_transport");
    if (t.contains("lr_potential")) c.trainer.lr_potential = t.at("lr_potential");
    if (t.contains("adam_beta1")) c.trainer.adam_beta1 = t.at("adam_beta1");
    if (t.contains("lr_decay_floor")) c.trainer.lr_decay_floor = t.at("lr_decay_floor");
    if (t.contains("cost_scale")) c.trainer.cost_scale = t.at("cost_scale");
    if (t.contains("probe_every")) c.trainer.probe_every = t.at("probe_every");
    if (t.contains("probe_n")) c.trainer.probe_n = t.at("probe_n");
    if (t.contains("checkpoint_every")) c.trainer.checkpoint_every = t.at("checkpoint_every");
    if (t.contains("regularization")) c.trainer.regularization = t.at("regularization");
    if (t.contains("hidden")) c.trainer.hidden = t.at("hidden").get<std::vector<int>>();
  }

  if (j.contains("seeds")) {
    const auto& s = j.at("seeds");
    reject_unknown(s, {"data", "noise", "init", "eval"}, "seeds");
    if (s.contains("data")) c.trainer.seeds.data = s.at("data");
    if (s.contains("noise")) c.trainer.seeds.noise = s.at("noise");
    if (s.contains("init")) c.trainer.seeds.init = s.at("init");
    if (s.contains("eval")) c.trainer.seeds.eval = s.at("eval");
  }

  if (j.contains("eval")) {
    const auto& e = j.at("eval");
    reject_unknown(e, {"n"}, "eval");
    if (e.contains("n")) c.eval_n = e.at("n");
  }

  if (j.contains("output_dir")) c.output_dir = j.at("output_dir").get<std::string>();

  c.validate();
  return c;
}

// Fully resolved document: every field explicit, keys alphabetical, so equal
// configs serialize to identical bytes.
inline nlohmann::json config_to_json(const ExperimentConfig& c) {
  nlohmann::json j;
  j["dataset"] = to_string(c.dataset);
  j["one_to_many_offset"] = c.one_to_many_offset;
  j["basis"] = {{"kind", to_string(c.basis.kind)}, {"num_modes", c.basis.num_modes}};
  if (c.covariance == "explicit")
    j["covariance"] = c.covariance_values;
  else
    j["covariance"] = c.covariance;
  j["schedule"] = {{"sigma_max", c.schedule.sigma_max},
                   {"sigma_min", c.schedule.sigma_min},
                   {"active_fraction", c.schedule.active_fraction}};
  j["trainer"] = {{"batch_size", c.trainer.batch_size},
                  {"epochs", c.trainer.epochs},
                  {"inner_steps", c.trainer.inner_steps},
                  {"lr_transport", c.trainer.lr_transport},
                  {"lr_potential", c.trainer.lr_potential},
                  {"adam_beta1", c.trainer.adam_beta1},
                  {"lr_decay_floor", c.trainer.lr_decay_floor},
                  {"cost_scale", c.trainer.cost_scale},
                  {"probe_every", c.trainer.probe_every},
                  {"probe_n", c.trainer.probe_n},
                  {"checkpoint_every", c.trainer.checkpoint_every},
                  {"regularization", c.trainer.regularization},
                  {"hidden", c.trainer.hidden}};
  j["seeds"] = {{"data", c.trainer.seeds.data},
                {"noise", c.trainer.seeds.noise},
                {"init", c.trainer.seeds.init},
                {"eval", c.trainer.seeds.eval}};
  j["eval"] = {{"n", c.eval_n}};
  j["output_dir"] = c.output_dir;
  return j;
}

// Parse with line-level diagnostics on malformed JSON.
inline ExperimentConfig load_config(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw ConfigError("cannot open config file: " + path);
  std::string text((std::istreambuf_iterator<char>(is)), std::istreambuf_iterator<char>());
  try {
    return config_from_json(nlohmann::json::parse(text));
  } catch (const nlohmann::json::parse_error& e) {
    std::size_t line = 1;
    for (std::size_t i = 0; i < e.byte && i < text.size(); ++i)
      if (text[i] == '\n') ++line;
    throw ConfigError(path + ":" + std::to_string(line) + ": " + e.what());
  }
}

inline void save_config(const std::string& path, const ExperimentConfig& c) {
  std::ofstream os(path);
  if (!os) throw ConfigError("cannot write config file: " + path);
  os << config_to_json(c).dump(2) << "\n";
}

}  // namespace hisnot
