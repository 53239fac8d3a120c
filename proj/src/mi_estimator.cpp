#include "graphprobe/mi_estimator.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "graphprobe/error.hpp"

namespace gp {

void CriticConfig::validate() const {
  if (projection_dim < 1) throw UsageError("critic projection_dim must be at least 1");
  for (auto h : head_hidden_dims) {
    if (h < 1) throw UsageError("critic head_hidden_dims entries must be positive");
  }
  if (epochs < 1) throw UsageError("critic epochs must be at least 1");
  if (smoothing_window < 1 || smoothing_window > epochs) {
    throw UsageError("critic smoothing_window must lie in [1, epochs]");
  }
  if (!(learning_rate > 0.0)) throw UsageError("critic learning_rate must be positive");
  if (holdout < 0.0 || holdout >= 1.0) throw UsageError("critic holdout must lie in [0, 1)");
}

std::string CriticConfig::hash() const {
  std::ostringstream s;
  s.precision(17);
  s << "x_dim=" << x_dim << ";z_dim=" << z_dim << ";projection_dim=" << projection_dim << ";head=";
  for (auto h : head_hidden_dims) s << h << ',';
  s << ";epochs=" << epochs << ";lr=" << learning_rate << ";smoothing=" << smoothing_window
    << ";tol=" << early_stop_tolerance << ";patience=" << early_stop_patience
    << ";optimizer=" << to_string(optimizer) << ";holdout=" << holdout;
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(hash_bytes(s.str())));
  return buf;
}

Critic::Critic(std::size_t x_dim, std::size_t z_dim, const CriticConfig& cfg, Rng& rng) {
  proj_x_ = MlpParams::init({x_dim, {}, cfg.projection_dim}, rng);
  proj_z_ = MlpParams::init({z_dim, {}, cfg.projection_dim}, rng);
  head_ = MlpParams::init({2 * cfg.projection_dim, cfg.head_hidden_dims, 1}, rng);
  // T starts identically zero, so the bound starts at exactly 0.
  head_.layers.back().weight.fill(0.0f);
}

std::vector<std::span<float>> Critic::tensors() {
  auto out = proj_x_.tensors();
  for (auto t : proj_z_.tensors()) out.push_back(t);
  for (auto t : head_.tensors()) out.push_back(t);
  return out;
}

void Critic::bump_version() {
  ++proj_x_.version;
  ++proj_z_.version;
  ++head_.version;
}

std::vector<std::span<float>> CriticGradients::tensors() {
  auto out = proj_x.tensors();
  for (auto t : proj_z.tensors()) out.push_back(t);
  for (auto t : head.tensors()) out.push_back(t);
  return out;
}

std::vector<double> Critic::scores(const Matrix& x, const Matrix& z) const {
  if (x.rows() != z.rows()) throw std::invalid_argument("critic: x and z row counts differ");
  Matrix px = forward(proj_x_, x);
  Matrix pz = forward(proj_z_, z);
  Matrix t = forward(head_, Matrix::hconcat(px, pz));
  std::vector<double> out(t.rows());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = t(i, 0);
  return out;
}

double dv_bound_from_scores(std::span<const double> joint, std::span<const double> marginal) {
  if (joint.empty() || marginal.empty()) throw std::invalid_argument("DV bound on an empty batch");
  double joint_mean = 0.0;
  for (double t : joint) joint_mean += t;
  joint_mean /= static_cast<double>(joint.size());
  const double mx = *std::max_element(marginal.begin(), marginal.end());
  double s = 0.0;
  for (double t : marginal) s += std::exp(t - mx);
  const double log_mean_exp = mx + std::log(s) - std::log(static_cast<double>(marginal.size()));
  return joint_mean - log_mean_exp;
}

namespace {

void check_derangement(std::span<const std::size_t> perm, std::size_t rows) {
  if (rows < 2) throw std::invalid_argument("DV bound needs at least 2 rows");
  if (perm.size() != rows) throw std::invalid_argument("permutation length differs from row count");
  std::vector<bool> hit(rows, false);
  for (std::size_t i = 0; i < rows; ++i) {
    if (perm[i] >= rows || hit[perm[i]]) throw std::invalid_argument("not a permutation");
    if (perm[i] == i) throw std::invalid_argument("permutation has a fixed point");
    hit[perm[i]] = true;
  }
}

// Head input: rows [0, B) are (px_i, pz_i); rows [B, 2B) are (px_perm[i], pz_i).
Matrix paired_head_input(const Matrix& px, const Matrix& pz, std::span<const std::size_t> perm) {
  const std::size_t b = px.rows();
  const std::size_t p = px.cols();
  Matrix in(2 * b, 2 * p);
  for (std::size_t i = 0; i < b; ++i) {
    auto joint = in.row(i);
    auto marg = in.row(b + i);
    std::copy(px.row(i).begin(), px.row(i).end(), joint.begin());
    std::copy(pz.row(i).begin(), pz.row(i).end(), joint.begin() + p);
    std::copy(px.row(perm[i]).begin(), px.row(perm[i]).end(), marg.begin());
    std::copy(pz.row(i).begin(), pz.row(i).end(), marg.begin() + p);
  }
  return in;
}

}  // namespace

double dv_bound(const Critic& critic, const Matrix& x, const Matrix& z, std::span<const std::size_t> perm) {
  if (x.rows() != z.rows()) throw std::invalid_argument("DV bound: x and z row counts differ");
  check_derangement(perm, x.rows());
  Matrix px = forward(critic.proj_x(), x);
  Matrix pz = forward(critic.proj_z(), z);
  Matrix t = forward(critic.head(), paired_head_input(px, pz, perm));
  const std::size_t b = x.rows();
  std::vector<double> joint(b), marg(b);
  for (std::size_t i = 0; i < b; ++i) {
    joint[i] = t(i, 0);
    marg[i] = t(b + i, 0);
  }
  return dv_bound_from_scores(joint, marg);
}

double dv_bound_with_gradient(const Critic& critic, const Matrix& x, const Matrix& z,
                              std::span<const std::size_t> perm, CriticGradients& grads) {
  if (x.rows() != z.rows()) throw std::invalid_argument("DV bound: x and z row counts differ");
  check_derangement(perm, x.rows());
  const std::size_t b = x.rows();
  MlpCache cx, cz, ch;
  Matrix px = forward(critic.proj_x(), x, &cx);
  Matrix pz = forward(critic.proj_z(), z, &cz);
  Matrix t = forward(critic.head(), paired_head_input(px, pz, perm), &ch);

  std::vector<double> joint(b), marg(b);
  for (std::size_t i = 0; i < b; ++i) {
    joint[i] = t(i, 0);
    marg[i] = t(b + i, 0);
  }
  const double bound = dv_bound_from_scores(joint, marg);

  // d(-bound)/dT: -1/B on joint rows, +softmax(marginal) on marginal rows.
  const double mx = *std::max_element(marg.begin(), marg.end());
  double s = 0.0;
  for (double m : marg) s += std::exp(m - mx);
  Matrix dt(2 * b, 1);
  for (std::size_t i = 0; i < b; ++i) {
    dt(i, 0) = static_cast<float>(-1.0 / static_cast<double>(b));
    dt(b + i, 0) = static_cast<float>(std::exp(marg[i] - mx) / s);
  }
  grads.head = backward(critic.head(), ch, dt);

  const std::size_t p = px.cols();
  const Matrix& din = grads.head.input;
  Matrix dpx(b, p), dpz(b, p);
  for (std::size_t i = 0; i < b; ++i) {
    auto j = din.row(i);
    auto m = din.row(b + i);
    auto gx_i = dpx.row(i);
    auto gx_perm = dpx.row(perm[i]);
    auto gz_i = dpz.row(i);
    for (std::size_t c = 0; c < p; ++c) {
      gx_i[c] += j[c];
      gx_perm[c] += m[c];
      gz_i[c] += j[p + c] + m[p + c];
    }
  }
  grads.proj_x = backward(critic.proj_x(), cx, dpx);
  grads.proj_z = backward(critic.proj_z(), cz, dpz);
  return bound;
}

void mix_with_noise(std::span<float> row, double ratio, Rng& rng) {
  const double sd = stddev_of(row);
  for (float& v : row) {
    const double noise = rng.normal() * sd;
    v = static_cast<float>((1.0 - ratio) * v + ratio * noise);
  }
}

namespace {

void apply_noise(Matrix& m, const ResampledNoise& noise, std::size_t sentence, Rng& rng) {
  auto corrupt = [&](std::size_t r) {
    auto row = m.row(r);
    switch (noise.kind) {
      case ResampledNoise::Kind::Additive:
        for (float& v : row) v = static_cast<float>(v + noise.amount * rng.normal());
        break;
      case ResampledNoise::Kind::Mixing:
        mix_with_noise(row, noise.amount, rng);
        break;
      case ResampledNoise::Kind::Replace:
        for (float& v : row) v = static_cast<float>(rng.normal());
        break;
    }
  };
  if (noise.all_rows) {
    for (std::size_t r = 0; r < m.rows(); ++r) corrupt(r);
    return;
  }
  if (sentence >= noise.rows.size()) return;
  for (std::size_t r : noise.rows[sentence]) {
    if (r >= m.rows()) throw DataError("noise target row " + std::to_string(r) + " out of range");
    corrupt(r);
  }
}

bool touches(const std::optional<ResampledNoise>& noise, std::size_t sentence) {
  if (!noise) return false;
  if (noise->all_rows) return true;
  return sentence < noise->rows.size() && !noise->rows[sentence].empty();
}

std::string format_trace(const std::vector<double>& trace) {
  std::ostringstream s;
  s.precision(6);
  s << "[";
  for (std::size_t i = 0; i < trace.size(); ++i) s << (i ? ", " : "") << trace[i];
  s << "]";
  return s.str();
}

}  // namespace

MiEstimate estimate_mi(std::span<const SentencePair> pairs, const CriticConfig& cfg, const NoisePlan& noise) {
  cfg.validate();
  std::size_t x_dim = cfg.x_dim, z_dim = cfg.z_dim;
  std::vector<std::size_t> usable;
  std::size_t skipped = 0;
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    const auto& p = pairs[i];
    if (p.x.rows() != p.z.rows()) {
      throw DataError("MI estimation: sentence " + std::to_string(i) + " has " + std::to_string(p.x.rows()) +
                      " X rows but " + std::to_string(p.z.rows()) + " Z rows");
    }
    if (p.x.rows() < 2) {
      ++skipped;
      continue;
    }
    if (x_dim == 0) x_dim = p.x.cols();
    if (z_dim == 0) z_dim = p.z.cols();
    if (p.x.cols() != x_dim || p.z.cols() != z_dim) {
      throw DataError("MI estimation: sentence " + std::to_string(i) + " has inconsistent widths");
    }
    usable.push_back(i);
  }
  if (usable.empty()) throw DataError("MI estimation: no sentence with at least 2 rows");

  std::vector<std::size_t> train = usable;
  std::vector<std::size_t> test;
  if (cfg.holdout > 0.0) {
    if (usable.size() < 2) throw DataError("MI estimation: holdout needs at least 2 usable sentences");
    Rng split_rng(derive_seed(cfg.seed, std::string_view("holdout")));
    split_rng.shuffle(std::span<std::size_t>(train));
    std::size_t n_test = static_cast<std::size_t>(std::llround(cfg.holdout * static_cast<double>(usable.size())));
    n_test = std::clamp<std::size_t>(n_test, 1, usable.size() - 1);
    test.assign(train.begin(), train.begin() + static_cast<std::ptrdiff_t>(n_test));
    train.erase(train.begin(), train.begin() + static_cast<std::ptrdiff_t>(n_test));
    std::sort(train.begin(), train.end());
    std::sort(test.begin(), test.end());
  }

  Rng init_rng(derive_seed(cfg.seed, std::string_view("init")));
  Rng order_rng(derive_seed(cfg.seed, std::string_view("order")));
  Rng perm_rng(derive_seed(cfg.seed, std::string_view("derangement")));
  Rng noise_rng(derive_seed(cfg.seed, std::string_view("noise")));

  Critic critic(x_dim, z_dim, cfg, init_rng);
  Optimizer opt({cfg.optimizer});
  auto params = critic.tensors();

  MiEstimate est;
  est.config_hash = cfg.hash();
  est.seed = cfg.seed;
  est.skipped_sentences = skipped;

  Matrix noisy_x, noisy_z;
  auto batch = [&](std::size_t i) -> std::pair<const Matrix*, const Matrix*> {
    const Matrix* x = &pairs[i].x;
    const Matrix* z = &pairs[i].z;
    if (touches(noise.x, i)) {
      noisy_x = pairs[i].x;
      apply_noise(noisy_x, *noise.x, i, noise_rng);
      x = &noisy_x;
    }
    if (touches(noise.z, i)) {
      noisy_z = pairs[i].z;
      apply_noise(noisy_z, *noise.z, i, noise_rng);
      z = &noisy_z;
    }
    return {x, z};
  };

  std::size_t stable = 0;
  for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    order_rng.shuffle(std::span<std::size_t>(train));
    double sum = 0.0;
    for (std::size_t i : train) {
      auto [x, z] = batch(i);
      auto perm = perm_rng.derangement(x->rows());
      CriticGradients grads;
      const double bound = dv_bound_with_gradient(critic, *x, *z, perm, grads);
      if (!std::isfinite(bound)) {
        est.trace.push_back(sum);
        throw NumericalError("MI estimation diverged at epoch " + std::to_string(epoch) +
                             "; trace " + format_trace(est.trace));
      }
      if (opt.step(params, grads.tensors(), cfg.learning_rate)) {
        critic.bump_version();
      } else {
        ++est.rejected_steps;
      }
      sum += bound;
    }
    double epoch_value = sum / static_cast<double>(train.size());
    if (!test.empty()) {
      double tsum = 0.0;
      for (std::size_t i : test) {
        auto [x, z] = batch(i);
        auto perm = perm_rng.derangement(x->rows());
        tsum += dv_bound(critic, *x, *z, perm);
      }
      epoch_value = tsum / static_cast<double>(test.size());
    }
    if (!std::isfinite(epoch_value)) {
      throw NumericalError("MI estimation: non-finite epoch bound; trace " + format_trace(est.trace));
    }
    est.trace.push_back(epoch_value);
    est.epochs_run = epoch + 1;
    if (cfg.early_stop_tolerance > 0.0 && est.trace.size() >= 2) {
      const double delta = std::abs(est.trace.back() - est.trace[est.trace.size() - 2]);
      stable = delta < cfg.early_stop_tolerance ? stable + 1 : 0;
      if (stable >= cfg.early_stop_patience && est.trace.size() >= cfg.smoothing_window) {
        est.early_stopped = true;
        break;
      }
    }
  }

  const std::size_t w = std::min(cfg.smoothing_window, est.trace.size());
  est.value = std::accumulate(est.trace.end() - static_cast<std::ptrdiff_t>(w), est.trace.end(), 0.0) /
              static_cast<double>(w);
  return est;
}

MiEstimate estimate_self_mi(std::span<const Matrix> z, double epsilon_scale, const CriticConfig& cfg) {
  if (!(epsilon_scale > 0.0)) throw UsageError("epsilon_scale must be positive");
  std::vector<SentencePair> pairs;
  pairs.reserve(z.size());
  for (const auto& m : z) pairs.push_back({m, m});
  NoisePlan plan;
  plan.x = ResampledNoise{ResampledNoise::Kind::Additive, epsilon_scale * global_stddev(z), {}, true};
  CriticConfig c = cfg;
  c.x_dim = 0;
  return estimate_mi(pairs, c, plan);
}

MiEstimate estimate_null_mi(std::span<const Matrix> z, std::size_t r_dim, const CriticConfig& cfg) {
  if (r_dim == 0) throw UsageError("null-bound width must be positive");
  std::vector<SentencePair> pairs;
  pairs.reserve(z.size());
  for (const auto& m : z) pairs.push_back({Matrix(m.rows(), r_dim), m});
  NoisePlan plan;
  plan.x = ResampledNoise{ResampledNoise::Kind::Replace, 0.0, {}, true};
  CriticConfig c = cfg;
  c.x_dim = 0;
  return estimate_mi(pairs, c, plan);
}

}  // namespace gp
