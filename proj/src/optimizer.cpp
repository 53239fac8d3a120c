#include "graphprobe/optimizer.hpp"

#include <cmath>
#include <stdexcept>

#include "graphprobe/error.hpp"

namespace gp {

std::string to_string(OptimizerKind k) { return k == OptimizerKind::Sgd ? "sgd" : "adam"; }

OptimizerKind optimizer_from_string(const std::string& s) {
  if (s == "sgd") return OptimizerKind::Sgd;
  if (s == "adam") return OptimizerKind::Adam;
  throw UsageError("unknown optimizer '" + s + "' (expected sgd or adam)");
}

bool Optimizer::step(std::span<const std::span<float>> params,
                     std::span<const std::span<float>> grads, double learning_rate) {
  if (params.size() != grads.size()) throw std::invalid_argument("optimizer: tensor count mismatch");
  for (std::size_t t = 0; t < params.size(); ++t) {
    if (params[t].size() != grads[t].size()) {
      throw std::invalid_argument("optimizer: tensor shape mismatch");
    }
    for (float g : grads[t]) {
      if (!std::isfinite(g)) {
        ++rejected_;
        return false;
      }
    }
  }

  ++steps_;
  if (config_.kind == OptimizerKind::Sgd) {
    for (std::size_t t = 0; t < params.size(); ++t) {
      auto p = params[t];
      auto g = grads[t];
      for (std::size_t i = 0; i < p.size(); ++i) {
        p[i] = static_cast<float>(p[i] - learning_rate * g[i]);
      }
    }
    return true;
  }

  if (m_.empty()) {
    m_.resize(params.size());
    v_.resize(params.size());
    for (std::size_t t = 0; t < params.size(); ++t) {
      m_[t].assign(params[t].size(), 0.0);
      v_[t].assign(params[t].size(), 0.0);
    }
  } else if (m_.size() != params.size()) {
    throw std::invalid_argument("optimizer: tensor list changed between steps");
  }
  const double b1 = config_.beta1;
  const double b2 = config_.beta2;
  const double c1 = 1.0 - std::pow(b1, static_cast<double>(steps_));
  const double c2 = 1.0 - std::pow(b2, static_cast<double>(steps_));
  for (std::size_t t = 0; t < params.size(); ++t) {
    auto p = params[t];
    auto g = grads[t];
    auto& m = m_[t];
    auto& v = v_[t];
    for (std::size_t i = 0; i < p.size(); ++i) {
      const double gi = g[i];
      m[i] = b1 * m[i] + (1.0 - b1) * gi;
      v[i] = b2 * v[i] + (1.0 - b2) * gi * gi;
      const double mhat = m[i] / c1;
      const double vhat = v[i] / c2;
      p[i] = static_cast<float>(p[i] - learning_rate * mhat / (std::sqrt(vhat) + config_.epsilon));
    }
  }
  return true;
}

}  // namespace gp
