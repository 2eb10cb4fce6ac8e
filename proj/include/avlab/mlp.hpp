#ifndef AVLAB_MLP_HPP
#define AVLAB_MLP_HPP

#include <cstddef>
#include <vector>

#include "avlab/rng.hpp"

namespace avlab {

/// Fully connected network with tanh hidden activations and a linear scalar
/// output. Forward/backward passes are hand-written; a Workspace instance
/// carries the activations so gradients can be accumulated sample by sample.
class Mlp {
 public:
  /// sizes = {input, hidden..., output}. Hidden layers use an
  /// orthogonalized random init with gain sqrt(2), the output layer gain
  /// `output_gain`, biases zero.
  Mlp(const std::vector<int>& sizes, Rng& rng, double output_gain = 0.01);

  struct Workspace {
    std::vector<std::vector<double>> activations;  // per layer, post-activation
    std::vector<std::vector<double>> delta;        // backprop scratch
  };

  double forward(const std::vector<double>& input, Workspace& ws) const;

  /// Accumulate d(loss)/d(params) into `grad` given d(loss)/d(output);
  /// forward() must have been called on the same workspace first.
  void backward(double output_grad, Workspace& ws, std::vector<double>& grad) const;

  std::size_t n_params() const { return params_.size(); }
  const std::vector<double>& params() const { return params_; }
  std::vector<double>& params() { return params_; }
  const std::vector<int>& sizes() const { return sizes_; }

  Workspace make_workspace() const;

 private:
  std::vector<int> sizes_;
  std::vector<double> params_;        // layer-major: weights row-major, then biases
  std::vector<std::size_t> w_offset_; // per layer
  std::vector<std::size_t> b_offset_;
};

/// Adam optimizer over a flat parameter vector.
class Adam {
 public:
  explicit Adam(std::size_t n, double lr, double beta1 = 0.9,
                double beta2 = 0.999, double eps = 1e-8);

  /// Apply one descent step along `grad`. Throws IntegrityError on
  /// non-finite gradients.
  void step(std::vector<double>& params, const std::vector<double>& grad);

  double lr() const { return lr_; }
  long t() const { return t_; }

  // Serialization hooks for checkpointing.
  const std::vector<double>& m() const { return m_; }
  const std::vector<double>& v() const { return v_; }
  void restore(const std::vector<double>& m, const std::vector<double>& v, long t);

 private:
  double lr_, beta1_, beta2_, eps_;
  long t_ = 0;
  std::vector<double> m_, v_;
};

}  // namespace avlab

#endif
