#include "avlab/mlp.hpp"

#include <cmath>
#include <stdexcept>

#include "avlab/errors.hpp"

namespace avlab {

namespace {

/// Orthogonalize the rows of an out x in Gaussian matrix with modified
/// Gram-Schmidt, then scale by `gain`. When out > in only the first `in`
/// rows can be mutually orthogonal; remaining rows are normalized draws.
void orthogonal_init(std::vector<double>& w, int out, int in, double gain, Rng& rng) {
  for (auto& x : w) x = rng.normal();
  for (int r = 0; r < out; ++r) {
    double* row = &w[static_cast<std::size_t>(r) * in];
    for (int q = 0; q < std::min(r, in); ++q) {
      const double* prev = &w[static_cast<std::size_t>(q) * in];
      double dot = 0.0;
      for (int c = 0; c < in; ++c) dot += row[c] * prev[c];
      for (int c = 0; c < in; ++c) row[c] -= dot * prev[c];
    }
    double norm = 0.0;
    for (int c = 0; c < in; ++c) norm += row[c] * row[c];
    norm = std::sqrt(norm);
    if (norm < 1e-12) {  // degenerate draw; fall back to a fresh unit row
      for (int c = 0; c < in; ++c) row[c] = rng.normal();
      norm = 0.0;
      for (int c = 0; c < in; ++c) norm += row[c] * row[c];
      norm = std::sqrt(norm);
    }
    for (int c = 0; c < in; ++c) row[c] /= norm;
  }
  for (auto& x : w) x *= gain;
}

}  // namespace

Mlp::Mlp(const std::vector<int>& sizes, Rng& rng, double output_gain)
    : sizes_(sizes) {
  if (sizes_.size() < 2)
    throw std::invalid_argument("Mlp needs at least input and output sizes");
  std::size_t total = 0;
  for (std::size_t l = 0; l + 1 < sizes_.size(); ++l) {
    w_offset_.push_back(total);
    total += static_cast<std::size_t>(sizes_[l + 1]) * sizes_[l];
    b_offset_.push_back(total);
    total += sizes_[l + 1];
  }
  params_.assign(total, 0.0);
  for (std::size_t l = 0; l + 1 < sizes_.size(); ++l) {
    const int in = sizes_[l], out = sizes_[l + 1];
    const bool last = (l + 2 == sizes_.size());
    std::vector<double> w(static_cast<std::size_t>(out) * in);
    orthogonal_init(w, out, in, last ? output_gain : std::sqrt(2.0), rng);
    std::copy(w.begin(), w.end(), params_.begin() + w_offset_[l]);
  }
}

Mlp::Workspace Mlp::make_workspace() const {
  Workspace ws;
  ws.activations.resize(sizes_.size());
  ws.delta.resize(sizes_.size());
  for (std::size_t l = 0; l < sizes_.size(); ++l) {
    ws.activations[l].resize(sizes_[l]);
    ws.delta[l].resize(sizes_[l]);
  }
  return ws;
}

double Mlp::forward(const std::vector<double>& input, Workspace& ws) const {
  if (static_cast<int>(input.size()) != sizes_.front())
    throw std::invalid_argument("Mlp::forward: input dimension mismatch");
  ws.activations[0] = input;
  const std::size_t n_layers = sizes_.size() - 1;
  for (std::size_t l = 0; l < n_layers; ++l) {
    const int in = sizes_[l], out = sizes_[l + 1];
    const double* w = &params_[w_offset_[l]];
    const double* b = &params_[b_offset_[l]];
    const double* x = ws.activations[l].data();
    double* z = ws.activations[l + 1].data();
    const bool last = (l + 1 == n_layers);
    for (int r = 0; r < out; ++r) {
      double acc = b[r];
      const double* row = w + static_cast<std::size_t>(r) * in;
      for (int c = 0; c < in; ++c) acc += row[c] * x[c];
      z[r] = last ? acc : std::tanh(acc);
    }
  }
  return ws.activations.back()[0];
}

void Mlp::backward(double output_grad, Workspace& ws, std::vector<double>& grad) const {
  const std::size_t n_layers = sizes_.size() - 1;
  ws.delta.back()[0] = output_grad;  // linear output layer
  for (std::size_t l = n_layers; l-- > 0;) {
    const int in = sizes_[l], out = sizes_[l + 1];
    const double* w = &params_[w_offset_[l]];
    const double* x = ws.activations[l].data();
    const double* d = ws.delta[l + 1].data();
    double* gw = &grad[w_offset_[l]];
    double* gb = &grad[b_offset_[l]];
    for (int r = 0; r < out; ++r) {
      const double dr = d[r];
      gb[r] += dr;
      double* grow = gw + static_cast<std::size_t>(r) * in;
      for (int c = 0; c < in; ++c) grow[c] += dr * x[c];
    }
    if (l > 0) {
      double* dprev = ws.delta[l].data();
      for (int c = 0; c < in; ++c) {
        double acc = 0.0;
        for (int r = 0; r < out; ++r)
          acc += w[static_cast<std::size_t>(r) * in + c] * d[r];
        dprev[c] = acc * (1.0 - x[c] * x[c]);  // tanh'
      }
    }
  }
}

Adam::Adam(std::size_t n, double lr, double beta1, double beta2, double eps)
    : lr_(lr), beta1_(beta1), beta2_(beta2), eps_(eps), m_(n, 0.0), v_(n, 0.0) {}

void Adam::step(std::vector<double>& params, const std::vector<double>& grad) {
  if (params.size() != m_.size() || grad.size() != m_.size())
    throw std::invalid_argument("Adam::step: size mismatch");
  ++t_;
  const double bc1 = 1.0 - std::pow(beta1_, t_);
  const double bc2 = 1.0 - std::pow(beta2_, t_);
  for (std::size_t i = 0; i < params.size(); ++i) {
    const double g = grad[i];
    if (!std::isfinite(g))
      throw IntegrityError("Adam::step: non-finite gradient component");
    m_[i] = beta1_ * m_[i] + (1.0 - beta1_) * g;
    v_[i] = beta2_ * v_[i] + (1.0 - beta2_) * g * g;
    params[i] -= lr_ * (m_[i] / bc1) / (std::sqrt(v_[i] / bc2) + eps_);
  }
}

void Adam::restore(const std::vector<double>& m, const std::vector<double>& v, long t) {
  if (m.size() != m_.size() || v.size() != v_.size())
    throw std::invalid_argument("Adam::restore: size mismatch");
  m_ = m;
  v_ = v;
  t_ = t;
}

}  // namespace avlab
