#include "graphprobe/mlp.hpp"

#include <cmath>
#include <stdexcept>

#include "graphprobe/error.hpp"

namespace gp {

std::string to_string(Activation a) {
  switch (a) {
    case Activation::Relu:
      return "relu";
  }
  return "relu";
}

Activation activation_from_string(const std::string& s) {
  if (s == "relu") return Activation::Relu;
  throw UsageError("unknown activation '" + s + "'");
}

void MlpSpec::validate() const {
  if (input_dim == 0 || output_dim == 0) throw UsageError("MLP dims must be positive");
  for (auto h : hidden_dims) {
    if (h == 0) throw UsageError("MLP hidden dims must be positive");
  }
}

namespace {

std::vector<std::size_t> layer_dims(const MlpSpec& spec) {
  std::vector<std::size_t> dims;
  dims.push_back(spec.input_dim);
  dims.insert(dims.end(), spec.hidden_dims.begin(), spec.hidden_dims.end());
  dims.push_back(spec.output_dim);
  return dims;
}

void add_bias(Matrix& m, const std::vector<float>& bias) {
  for (std::size_t r = 0; r < m.rows(); ++r) {
    auto row = m.row(r);
    for (std::size_t c = 0; c < row.size(); ++c) row[c] += bias[c];
  }
}

}  // namespace

MlpParams MlpParams::zeros(const MlpSpec& spec) {
  spec.validate();
  MlpParams p;
  p.spec = spec;
  auto dims = layer_dims(spec);
  for (std::size_t l = 0; l + 1 < dims.size(); ++l) {
    p.layers.push_back({Matrix(dims[l], dims[l + 1]), std::vector<float>(dims[l + 1], 0.0f)});
  }
  return p;
}

MlpParams MlpParams::init(const MlpSpec& spec, Rng& rng) {
  MlpParams p = zeros(spec);
  for (auto& layer : p.layers) {
    const double fan = static_cast<double>(layer.weight.rows() + layer.weight.cols());
    const double limit = std::sqrt(6.0 / fan);
    for (float& w : layer.weight.values()) {
      w = static_cast<float>((2.0 * rng.uniform() - 1.0) * limit);
    }
  }
  return p;
}

std::vector<std::span<float>> MlpParams::tensors() {
  std::vector<std::span<float>> out;
  for (auto& l : layers) {
    out.push_back(l.weight.values());
    out.push_back(l.bias);
  }
  return out;
}

std::size_t MlpParams::parameter_count() const {
  std::size_t n = 0;
  for (const auto& l : layers) n += l.weight.size() + l.bias.size();
  return n;
}

bool MlpParams::all_finite() const {
  for (const auto& l : layers) {
    if (!l.weight.all_finite()) return false;
    for (float b : l.bias) {
      if (!std::isfinite(b)) return false;
    }
  }
  return true;
}

std::vector<std::span<float>> MlpGradients::tensors() {
  std::vector<std::span<float>> out;
  for (auto& l : layers) {
    out.push_back(l.weight.values());
    out.push_back(l.bias);
  }
  return out;
}

Matrix forward(const MlpParams& params, const Matrix& input, MlpCache* cache) {
  if (input.cols() != params.spec.input_dim) {
    throw std::invalid_argument("MLP forward: input has " + std::to_string(input.cols()) +
                                " columns, expected " + std::to_string(params.spec.input_dim));
  }
  if (cache) {
    cache->owner = &params;
    cache->version = params.version;
    cache->inputs.clear();
    cache->pre.clear();
  }
  Matrix current = input;
  const std::size_t n_layers = params.layers.size();
  for (std::size_t l = 0; l < n_layers; ++l) {
    const auto& layer = params.layers[l];
    Matrix out;
    matmul(current, layer.weight, out);
    add_bias(out, layer.bias);
    if (cache) cache->inputs.push_back(std::move(current));
    if (l + 1 < n_layers) {
      if (cache) cache->pre.push_back(out);
      for (float& v : out.values()) v = v > 0.0f ? v : 0.0f;
    }
    current = std::move(out);
  }
  current.require_finite("MLP forward output");
  return current;
}

MlpGradients backward(const MlpParams& params, const MlpCache& cache, const Matrix& output_grad) {
  if (cache.owner != &params || cache.version != params.version ||
      cache.inputs.size() != params.layers.size()) {
    throw std::logic_error("MLP backward: stale or mismatched forward cache");
  }
  const std::size_t n_layers = params.layers.size();
  if (output_grad.cols() != params.spec.output_dim || output_grad.rows() != cache.inputs[0].rows()) {
    throw std::invalid_argument("MLP backward: output gradient shape mismatch");
  }
  MlpGradients grads;
  grads.layers.resize(n_layers);
  Matrix delta = output_grad;
  for (std::size_t li = n_layers; li-- > 0;) {
    const auto& layer = params.layers[li];
    auto& g = grads.layers[li];
    matmul_tn(cache.inputs[li], delta, g.weight);
    g.bias.assign(layer.bias.size(), 0.0f);
    for (std::size_t r = 0; r < delta.rows(); ++r) {
      auto row = delta.row(r);
      for (std::size_t c = 0; c < row.size(); ++c) g.bias[c] += row[c];
    }
    Matrix prev;
    matmul_nt(delta, layer.weight, prev);
    if (li > 0) {
      const Matrix& pre = cache.pre[li - 1];
      auto pv = prev.values();
      auto zv = pre.values();
      for (std::size_t i = 0; i < pv.size(); ++i) {
        if (zv[i] <= 0.0f) pv[i] = 0.0f;
      }
    }
    delta = std::move(prev);
  }
  grads.input = std::move(delta);
  return grads;
}

}  // namespace gp
