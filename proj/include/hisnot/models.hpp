#pragma once

#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "hisnot/autodiff.hpp"
#include "hisnot/rng.hpp"
#include "hisnot/types.hpp"

namespace hisnot {

struct Param {
  std::string name;
  Mat value;
};

// Ordered, named parameter set. Attach order defines the deterministic
// gradient-accumulation and optimizer order.
struct ParamStore {
  std::vector<Param> params;

  std::vector<int> attach(ad::Tape& tape, bool requires_grad) const {
    std::vector<int> ids;
    ids.reserve(params.size());
    for (const Param& p : params) ids.push_back(tape.leaf(p.value, requires_grad));
    return ids;
  }

  std::vector<Mat> grads_from(const ad::Tape& tape, const std::vector<int>& ids) const {
    std::vector<Mat> out;
    out.reserve(ids.size());
    for (std::size_t i = 0; i < ids.size(); ++i) {
      const Mat& g = tape.grad(ids[i]);
      out.push_back(g.size() == 0
                        ? Mat::Zero(params[i].value.rows(), params[i].value.cols())
                        : g);
    }
    return out;
  }

  std::vector<Mat> values() const {
    std::vector<Mat> out;
    for (const Param& p : params) out.push_back(p.value);
    return out;
  }

  void set_values(const std::vector<Mat>& vals) {
    if (vals.size() != params.size()) throw std::invalid_argument("set_values: count mismatch");
    for (std::size_t i = 0; i < vals.size(); ++i) params[i].value = vals[i];
  }
};

namespace detail {

// Kaiming-style init: W ~ N(0, 2/fan_in) * scale, biases zero.
inline ParamStore init_mlp(const std::vector<int>& widths, Rng& rng, double scale,
                           double final_layer_scale, const std::string& prefix) {
  if (widths.size() < 2) throw std::invalid_argument("init_mlp: need at least two widths");
  ParamStore store;
  for (std::size_t l = 0; l + 1 < widths.size(); ++l) {
    const int fan_in = widths[l];
    const int fan_out = widths[l + 1];
    const bool last = (l + 2 == widths.size());
    const double std_dev = std::sqrt(2.0 / fan_in) * scale * (last ? final_layer_scale : 1.0);
    Mat w(fan_in, fan_out);
    for (Index r = 0; r < w.rows(); ++r)
      for (Index c = 0; c < w.cols(); ++c) w(r, c) = std_dev * rng.normal();
    store.params.push_back({prefix + ".w" + std::to_string(l), std::move(w)});
    store.params.push_back({prefix + ".b" + std::to_string(l), Mat::Zero(1, fan_out)});
  }
  return store;
}

// tanh MLP forward on the tape; params laid out as alternating (W, b).
inline int mlp_forward(ad::Tape& tape, const std::vector<int>& param_ids, int x) {
  if (param_ids.size() < 2 || param_ids.size() % 2 != 0)
    throw std::invalid_argument("mlp_forward: malformed parameter list");
  int h = x;
  const std::size_t layers = param_ids.size() / 2;
  for (std::size_t l = 0; l < layers; ++l) {
    h = tape.add_bias(tape.matmul(h, param_ids[2 * l]), param_ids[2 * l + 1]);
    if (l + 1 < layers) h = tape.tanh(h);
  }
  return h;
}

// Plain (no-tape) forward; mirrors mlp_forward op for op so values match
// the tape bit-for-bit.
inline Mat mlp_apply(const ParamStore& store, const Mat& x) {
  if (store.params.size() < 2 || store.params.size() % 2 != 0)
    throw std::invalid_argument("mlp_apply: malformed parameter list");
  Mat h = x;
  const std::size_t layers = store.params.size() / 2;
  for (std::size_t l = 0; l < layers; ++l) {
    Mat z = h * store.params[2 * l].value;
    z.rowwise() += store.params[2 * l + 1].value.row(0);
    h = (l + 1 < layers) ? ad::tanh_mat(z) : z;
  }
  return h;
}

}  // namespace detail

// Transport network T: R^K -> R^K; residual form T(x) = x + f(x) by default,
// with the residual branch's final layer scaled by 0.01 so T starts near the
// identity.
struct TransportNet {
  int width = 0;  // K
  bool residual = true;
  ParamStore params;
};

inline TransportNet make_transport(int k, const std::vector<int>& hidden, Rng& rng,
                                   double init_scale = 1.0, bool residual = true) {
  std::vector<int> widths{k};
  widths.insert(widths.end(), hidden.begin(), hidden.end());
  widths.push_back(k);
  TransportNet net;
  net.width = k;
  net.residual = residual;
  net.params = detail::init_mlp(widths, rng, init_scale, residual ? 0.01 : 1.0, "t");
  return net;
}

// Potential network V: R^K -> R.
struct PotentialNet {
  int width = 0;
  ParamStore params;
};

inline PotentialNet make_potential(int k, const std::vector<int>& hidden, Rng& rng,
                                   double init_scale = 1.0) {
  std::vector<int> widths{k};
  widths.insert(widths.end(), hidden.begin(), hidden.end());
  widths.push_back(1);
  PotentialNet net;
  net.width = k;
  net.params = detail::init_mlp(widths, rng, init_scale, 1.0, "v");
  return net;
}

inline int t_forward(ad::Tape& tape, const TransportNet& net, const std::vector<int>& param_ids,
                     int x) {
  if (tape.value(x).cols() != net.width) throw std::invalid_argument("t_forward: width mismatch");
  const int f = detail::mlp_forward(tape, param_ids, x);
  return net.residual ? tape.add(x, f) : f;
}

inline int v_forward(ad::Tape& tape, const PotentialNet& net, const std::vector<int>& param_ids,
                     int x) {
  if (tape.value(x).cols() != net.width) throw std::invalid_argument("v_forward: width mismatch");
  return detail::mlp_forward(tape, param_ids, x);
}

inline Mat t_apply(const TransportNet& net, const Mat& batch) {
  if (batch.cols() != net.width) throw std::invalid_argument("t_apply: width mismatch");
  const Mat f = detail::mlp_apply(net.params, batch);
  return net.residual ? Mat(batch + f) : f;
}

inline Vec v_apply(const PotentialNet& net, const Mat& batch) {
  if (batch.cols() != net.width) throw std::invalid_argument("v_apply: width mismatch");
  return detail::mlp_apply(net.params, batch).col(0);
}

// --- checkpoint format -----------------------------------------------------
// Text with a shape manifest; %.17g round-trips doubles exactly.
//   hisnot-params v1
//   count <N>
//   param <name> <rows> <cols>
//   <rows lines of cols doubles>

inline void save_params(std::ostream& os, const ParamStore& store) {
  os << "hisnot-params v1\n";
  os << "count " << store.params.size() << "\n";
  char buf[32];
  for (const Param& p : store.params) {
    os << "param " << p.name << " " << p.value.rows() << " " << p.value.cols() << "\n";
    for (Index r = 0; r < p.value.rows(); ++r) {
      for (Index c = 0; c < p.value.cols(); ++c) {
        std::snprintf(buf, sizeof(buf), "%.17g", p.value(r, c));
        os << buf << (c + 1 < p.value.cols() ? " " : "");
      }
      os << "\n";
    }
  }
}

inline ParamStore load_params(std::istream& is) {
  std::string line;
  if (!std::getline(is, line) || line != "hisnot-params v1")
    throw std::runtime_error("load_params: bad header");
  std::size_t count = 0;
  {
    std::getline(is, line);
    std::istringstream ss(line);
    std::string tag;
    if (!(ss >> tag >> count) || tag != "count")
      throw std::runtime_error("load_params: bad count line");
  }
  ParamStore store;
  for (std::size_t i = 0; i < count; ++i) {
    std::getline(is, line);
    std::istringstream ss(line);
    std::string tag, name;
    Index rows = 0, cols = 0;
    if (!(ss >> tag >> name >> rows >> cols) || tag != "param")
      throw std::runtime_error("load_params: bad manifest line");
    Mat m(rows, cols);
    for (Index r = 0; r < rows; ++r) {
      std::getline(is, line);
      std::istringstream row(line);
      for (Index c = 0; c < cols; ++c)
        if (!(row >> m(r, c))) throw std::runtime_error("load_params: short data row");
    }
    store.params.push_back({name, std::move(m)});
  }
  return store;
}

inline void save_checkpoint(const std::string& path, const TransportNet& t,
                            const PotentialNet& v) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("save_checkpoint: cannot open " + path);
  os << "transport width " << t.width << " residual " << (t.residual ? 1 : 0) << "\n";
  save_params(os, t.params);
  os << "potential width " << v.width << "\n";
  save_params(os, v.params);
}

inline std::pair<TransportNet, PotentialNet> load_checkpoint(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("load_checkpoint: cannot open " + path);
  std::string line;
  TransportNet t;
  PotentialNet v;
  {
    std::getline(is, line);
    std::istringstream ss(line);
    std::string tag, wtag, rtag;
    int residual = 1;
    if (!(ss >> tag >> wtag >> t.width >> rtag >> residual) || tag != "transport")
      throw std::runtime_error("load_checkpoint: bad transport header");
    t.residual = residual != 0;
  }
  t.params = load_params(is);
  {
    std::getline(is, line);
    std::istringstream ss(line);
    std::string tag, wtag;
    if (!(ss >> tag >> wtag >> v.width) || tag != "potential")
      throw std::runtime_error("load_checkpoint: bad potential header");
  }
  v.params = load_params(is);
  return {std::move(t), std::move(v)};
}

}  // namespace hisnot
