#pragma once

#include <string>
#include <vector>

#include "rmarl/nn/param_set.hpp"
#include "rmarl/nn/tape.hpp"

namespace rmarl::nn {

/// Affine layers with tanh between them; the last layer is affine only.
class Mlp {
 public:
  Mlp() = default;
  /// Registers `<prefix>.W<i>` / `<prefix>.b<i>` tensors in `ps`.
  Mlp(ParamSet& ps, const std::string& prefix, std::vector<int> sizes);

  Var forward(Tape& tape, Var x) const;
  /// Plain evaluation without recording.
  std::vector<double> eval(const std::vector<double>& x) const;

  int in_size() const { return sizes_.front(); }
  int out_size() const { return sizes_.back(); }
  const std::vector<int>& sizes() const { return sizes_; }
  /// Zeroes this module's parameters.
  void zero() const;

 private:
  ParamSet* ps_ = nullptr;
  std::vector<int> sizes_;
  std::vector<std::pair<int, int>> layers_;  // (W, b) tensor indices
};

/// Standard GRU cell:
///   z = sigmoid(W_z x + U_z h + b_z), r = sigmoid(W_r x + U_r h + b_r)
///   c = tanh(W_h x + U_h (r * h) + b_h), h' = (1 - z) * h + z * c
class GruCell {
 public:
  GruCell() = default;
  GruCell(ParamSet& ps, const std::string& prefix, int input, int hidden);

  Var forward(Tape& tape, Var x, Var h) const;
  int input_size() const { return input_; }
  int hidden_size() const { return hidden_; }

  struct Ids {
    int wz, uz, bz, wr, ur, br, wh, uh, bh;
  };
  const Ids& ids() const { return ids_; }

 private:
  ParamSet* ps_ = nullptr;
  int input_ = 0;
  int hidden_ = 0;
  Ids ids_{};
};

/// Adam with bias correction; gradients are zeroed after each step.
class Adam {
 public:
  explicit Adam(double lr, double beta1 = 0.9, double beta2 = 0.999, double eps = 1e-8)
      : lr_(lr), beta1_(beta1), beta2_(beta2), eps_(eps) {}

  void step(ParamSet& ps);
  double lr() const { return lr_; }
  void set_lr(double lr) { lr_ = lr; }
  long steps() const { return t_; }

 private:
  double lr_;
  double beta1_;
  double beta2_;
  double eps_;
  long t_ = 0;
  std::vector<double> m_;
  std::vector<double> v_;
};

}  // namespace rmarl::nn
