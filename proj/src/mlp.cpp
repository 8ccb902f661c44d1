#include "specga/mlp.hpp"

#include <cmath>
#include <fstream>
#include <stdexcept>

#include "json.hpp"
#include "specga/errors.hpp"
#include "specga/kernels.hpp"
#include "specga/rng.hpp"

namespace specga {

namespace {

constexpr double kBeta1 = 0.9;
constexpr double kBeta2 = 0.999;
constexpr double kEps = 1e-8;

bool all_finite(const Matrix& m) {
  for (double x : m.data)
    if (!std::isfinite(x)) return false;
  return true;
}

bool all_finite(const std::vector<double>& v) {
  for (double x : v)
    if (!std::isfinite(x)) return false;
  return true;
}

void apply_hidden_activation(Matrix& z, Activation act) {
  if (act == Activation::Relu) {
    for (double& x : z.data) x = x > 0.0 ? x : 0.0;
  } else {
    for (double& x : z.data) x = std::tanh(x);
  }
}

// Derivative expressed through the activation value itself.
inline double activation_deriv(double a, Activation act) {
  return act == Activation::Relu ? (a > 0.0 ? 1.0 : 0.0) : 1.0 - a * a;
}

}  // namespace

std::string activation_to_string(Activation a) {
  return a == Activation::Relu ? "relu" : "tanh";
}

Activation activation_from_string(const std::string& s) {
  if (s == "relu") return Activation::Relu;
  if (s == "tanh") return Activation::Tanh;
  throw ModelError("unknown activation: " + s);
}

std::string optimizer_to_string(OptimizerKind k) {
  return k == OptimizerKind::PlainSgd ? "plain-sgd" : "adaptive-moments";
}

OptimizerKind optimizer_from_string(const std::string& s) {
  if (s == "plain-sgd") return OptimizerKind::PlainSgd;
  if (s == "adaptive-moments") return OptimizerKind::AdaptiveMoments;
  throw ConfigError("unknown optimizer: " + s);
}

Mlp::Mlp(int input_dim, int hidden_depth, int output_dim, Activation act, std::uint64_t seed) {
  if (input_dim < 1 || hidden_depth < 1 || output_dim < 1)
    throw std::invalid_argument("Mlp: dimensions must be >= 1");
  act_ = act;
  layer_dims_.reserve(hidden_depth + 2);
  layer_dims_.push_back(input_dim);
  for (int h = hidden_depth; h >= 1; --h) layer_dims_.push_back(100 * h);
  layer_dims_.push_back(output_dim);

  Rng rng(seed);
  layers_.reserve(layer_dims_.size() - 1);
  for (std::size_t k = 0; k + 1 < layer_dims_.size(); ++k) {
    const int fan_in = layer_dims_[k];
    const int fan_out = layer_dims_[k + 1];
    Layer layer{Matrix(fan_out, fan_in), std::vector<double>(fan_out, 0.0)};
    const double s = std::sqrt(6.0 / (fan_in + fan_out));
    for (double& w : layer.w.data) w = rng.uniform(-s, s);
    layers_.push_back(std::move(layer));
  }
}

Mlp Mlp::from_parts(std::vector<int> layer_dims, Activation act, std::vector<Layer> layers) {
  if (layer_dims.size() < 2) throw std::invalid_argument("from_parts: need at least 2 dims");
  if (layers.size() != layer_dims.size() - 1)
    throw std::invalid_argument("from_parts: layer count mismatch");
  for (int d : layer_dims)
    if (d < 1) throw std::invalid_argument("from_parts: dimensions must be >= 1");
  for (std::size_t k = 0; k < layers.size(); ++k) {
    const Layer& l = layers[k];
    if (l.w.rows != layer_dims[k + 1] || l.w.cols != layer_dims[k] ||
        static_cast<int>(l.b.size()) != layer_dims[k + 1])
      throw std::invalid_argument("from_parts: layer shape mismatch");
    if (!all_finite(l.w) || !all_finite(l.b))
      throw std::invalid_argument("from_parts: non-finite parameter");
  }
  Mlp net;
  net.layer_dims_ = std::move(layer_dims);
  net.act_ = act;
  net.layers_ = std::move(layers);
  return net;
}

std::size_t Mlp::parameter_count() const {
  std::size_t n = 0;
  for (const Layer& l : layers_) n += l.w.data.size() + l.b.size();
  return n;
}

Matrix Mlp::forward_batch(const Matrix& inputs) const {
  if (inputs.cols != input_dim()) throw std::invalid_argument("forward: input dim mismatch");
  Matrix a = inputs;
  for (std::size_t k = 0; k < layers_.size(); ++k) {
    const Layer& l = layers_[k];
    Matrix z(a.rows, l.w.rows);
    kernels::matmul_nt(a, l.w, z);
    for (int i = 0; i < z.rows; ++i) {
      double* zr = z.row(i);
      for (int j = 0; j < z.cols; ++j) zr[j] += l.b[j];
    }
    if (k + 1 < layers_.size()) apply_hidden_activation(z, act_);
    a = std::move(z);
  }
  return a;
}

std::vector<double> Mlp::forward(std::span<const double> input) const {
  if (static_cast<int>(input.size()) != input_dim())
    throw std::invalid_argument("forward: input dim mismatch");
  Matrix x(1, input_dim());
  std::copy(input.begin(), input.end(), x.data.begin());
  Matrix y = forward_batch(x);
  return y.data;
}

double Mlp::loss_grad(const Matrix& inputs, const Matrix& targets,
                      std::vector<Layer>& grads) const {
  if (inputs.rows == 0) throw std::invalid_argument("loss_grad: empty batch");
  if (inputs.cols != input_dim() || targets.cols != output_dim() || targets.rows != inputs.rows)
    throw std::invalid_argument("loss_grad: dim mismatch");

  const int batch = inputs.rows;
  const std::size_t n_layers = layers_.size();

  // Forward pass, keeping every activation.
  std::vector<Matrix> acts(n_layers + 1);
  acts[0] = inputs;
  for (std::size_t k = 0; k < n_layers; ++k) {
    const Layer& l = layers_[k];
    Matrix z(batch, l.w.rows);
    kernels::matmul_nt(acts[k], l.w, z);
    for (int i = 0; i < z.rows; ++i) {
      double* zr = z.row(i);
      for (int j = 0; j < z.cols; ++j) zr[j] += l.b[j];
    }
    if (k + 1 < n_layers) apply_hidden_activation(z, act_);
    acts[k + 1] = std::move(z);
  }

  // Loss and output delta.
  const Matrix& y = acts[n_layers];
  Matrix delta(batch, output_dim());
  double loss = 0.0;
  const double inv_batch = 1.0 / batch;
  for (std::size_t i = 0; i < y.data.size(); ++i) {
    const double e = y.data[i] - targets.data[i];
    loss += e * e;
    delta.data[i] = 2.0 * inv_batch * e;
  }
  loss *= inv_batch;

  grads.resize(n_layers);
  for (std::size_t kk = n_layers; kk-- > 0;) {
    const Layer& l = layers_[kk];
    Layer& g = grads[kk];
    if (!g.w.same_shape(l.w)) g.w = Matrix(l.w.rows, l.w.cols);
    g.b.assign(l.b.size(), 0.0);
    kernels::matmul_tn(delta, acts[kk], g.w);
    kernels::col_sums(delta, g.b);
    if (kk > 0) {
      Matrix prev(batch, l.w.cols);
      kernels::matmul_nn(delta, l.w, prev);
      const Matrix& a = acts[kk];
      for (std::size_t i = 0; i < prev.data.size(); ++i)
        prev.data[i] *= activation_deriv(a.data[i], act_);
      delta = std::move(prev);
    }
  }
  return loss;
}

double Mlp::loss_grad(
    std::span<const std::pair<std::vector<double>, std::vector<double>>> batch,
    std::vector<Layer>& grads) const {
  if (batch.empty()) throw std::invalid_argument("loss_grad: empty batch");
  Matrix x(static_cast<int>(batch.size()), input_dim());
  Matrix t(static_cast<int>(batch.size()), output_dim());
  for (std::size_t i = 0; i < batch.size(); ++i) {
    const auto& [in, target] = batch[i];
    if (static_cast<int>(in.size()) != input_dim() ||
        static_cast<int>(target.size()) != output_dim())
      throw std::invalid_argument("loss_grad: dim mismatch");
    std::copy(in.begin(), in.end(), x.row(static_cast<int>(i)));
    std::copy(target.begin(), target.end(), t.row(static_cast<int>(i)));
  }
  return loss_grad(x, t, grads);
}

void Mlp::save(const std::string& path) const {
  nlohmann::json j;
  j["format_version"] = 1;
  j["activation"] = activation_to_string(act_);
  j["input_dim"] = input_dim();
  j["hidden_depth"] = hidden_depth();
  j["output_dim"] = output_dim();
  nlohmann::json layers = nlohmann::json::array();
  for (const Layer& l : layers_) {
    if (!all_finite(l.w) || !all_finite(l.b))
      throw ModelError("save: non-finite parameter in " + path);
    nlohmann::json jl;
    nlohmann::json rows = nlohmann::json::array();
    for (int i = 0; i < l.w.rows; ++i)
      rows.push_back(std::vector<double>(l.w.row(i), l.w.row(i) + l.w.cols));
    jl["weights"] = std::move(rows);
    jl["bias"] = l.b;
    layers.push_back(std::move(jl));
  }
  j["layers"] = std::move(layers);

  std::ofstream out(path);
  if (!out) throw ModelError("save: cannot write " + path);
  out << j.dump();
  out << '\n';
  if (!out) throw ModelError("save: write failed for " + path);
}

Mlp Mlp::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ModelError("load: cannot open " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ModelError("load: malformed JSON in " + path + ": " + e.what());
  }
  try {
    if (!j.contains("format_version") || !j["format_version"].is_number_integer() ||
        j["format_version"].get<int>() != 1)
      throw ModelError("load: unsupported format_version in " + path);
    const int input_dim = j.at("input_dim").get<int>();
    const int hidden_depth = j.at("hidden_depth").get<int>();
    const int output_dim = j.at("output_dim").get<int>();
    if (input_dim < 1 || hidden_depth < 1 || output_dim < 1)
      throw ModelError("load: invalid dims in " + path);
    const Activation act = activation_from_string(j.at("activation").get<std::string>());

    std::vector<int> dims;
    dims.push_back(input_dim);
    for (int h = hidden_depth; h >= 1; --h) dims.push_back(100 * h);
    dims.push_back(output_dim);

    const auto& jl = j.at("layers");
    if (!jl.is_array() || jl.size() != dims.size() - 1)
      throw ModelError("load: wrong layer count in " + path);
    std::vector<Layer> layers;
    layers.reserve(jl.size());
    for (std::size_t k = 0; k < jl.size(); ++k) {
      const auto& rows = jl[k].at("weights");
      const int out_dim = dims[k + 1];
      const int in_dim = dims[k];
      if (!rows.is_array() || static_cast<int>(rows.size()) != out_dim)
        throw ModelError("load: weight row count mismatch in " + path);
      Layer l{Matrix(out_dim, in_dim), jl[k].at("bias").get<std::vector<double>>()};
      if (static_cast<int>(l.b.size()) != out_dim)
        throw ModelError("load: bias length mismatch in " + path);
      for (int i = 0; i < out_dim; ++i) {
        const auto row = rows[i].get<std::vector<double>>();
        if (static_cast<int>(row.size()) != in_dim)
          throw ModelError("load: weight column count mismatch in " + path);
        std::copy(row.begin(), row.end(), l.w.row(i));
      }
      if (!all_finite(l.w) || !all_finite(l.b))
        throw ModelError("load: non-finite parameter in " + path);
      layers.push_back(std::move(l));
    }
    return from_parts(std::move(dims), act, std::move(layers));
  } catch (const ModelError&) {
    throw;
  } catch (const std::exception& e) {
    throw ModelError("load: invalid model file " + path + ": " + e.what());
  }
}

void optimizer_step(Mlp& net, const Grads& grads, OptimizerState& state, const TrainConfig& cfg) {
  auto& layers = net.mutable_layers();
  if (grads.size() != layers.size()) throw std::invalid_argument("optimizer_step: shape mismatch");
  for (std::size_t k = 0; k < layers.size(); ++k) {
    if (!grads[k].w.same_shape(layers[k].w) || grads[k].b.size() != layers[k].b.size())
      throw std::invalid_argument("optimizer_step: shape mismatch");
  }

  if (cfg.optimizer == OptimizerKind::PlainSgd) {
    ++state.step;
    for (std::size_t k = 0; k < layers.size(); ++k) {
      Mlp::Layer& l = layers[k];
      const Mlp::Layer& g = grads[k];
      for (std::size_t i = 0; i < l.w.data.size(); ++i)
        l.w.data[i] -= cfg.learning_rate * g.w.data[i];
      for (std::size_t i = 0; i < l.b.size(); ++i) l.b[i] -= cfg.learning_rate * g.b[i];
    }
    return;
  }

  if (state.m.empty()) {
    state.m.reserve(layers.size());
    state.v.reserve(layers.size());
    for (const Mlp::Layer& l : layers) {
      state.m.push_back({Matrix(l.w.rows, l.w.cols), std::vector<double>(l.b.size(), 0.0)});
      state.v.push_back({Matrix(l.w.rows, l.w.cols), std::vector<double>(l.b.size(), 0.0)});
    }
  }
  for (std::size_t k = 0; k < layers.size(); ++k) {
    if (!state.m[k].w.same_shape(layers[k].w) || state.m[k].b.size() != layers[k].b.size())
      throw std::invalid_argument("optimizer_step: state shape mismatch");
  }

  ++state.step;
  const double bc1 = 1.0 - std::pow(kBeta1, static_cast<double>(state.step));
  const double bc2 = 1.0 - std::pow(kBeta2, static_cast<double>(state.step));
  const double lr = cfg.learning_rate;
  auto update = [&](double& p, double g, double& m, double& v) {
    m = kBeta1 * m + (1.0 - kBeta1) * g;
    v = kBeta2 * v + (1.0 - kBeta2) * g * g;
    p -= lr * (m / bc1) / (std::sqrt(v / bc2) + kEps);
  };
  for (std::size_t k = 0; k < layers.size(); ++k) {
    Mlp::Layer& l = layers[k];
    const Mlp::Layer& g = grads[k];
    Mlp::Layer& m = state.m[k];
    Mlp::Layer& v = state.v[k];
    for (std::size_t i = 0; i < l.w.data.size(); ++i)
      update(l.w.data[i], g.w.data[i], m.w.data[i], v.w.data[i]);
    for (std::size_t i = 0; i < l.b.size(); ++i) update(l.b[i], g.b[i], m.b[i], v.b[i]);
  }
}

}  // namespace specga
