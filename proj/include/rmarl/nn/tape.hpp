#pragma once

#include <span>
#include <vector>

#include "rmarl/nn/param_set.hpp"

namespace rmarl::nn {

/// Handle to a vector value recorded on a Tape.
struct Var {
  int id = -1;
};

/// Records one forward pass over a fixed op set and runs exact reverse-mode
/// accumulation once. Parameter gradients are added into the ParamSets the
/// ops read from; those sets must not change between forward and backward.
class Tape {
 public:
  Var input(std::vector<double> x);
  /// W x + b, W: tensor `w` (rows x cols); `b` may be -1 for no bias.
  Var linear(ParamSet& ps, int w, int b, Var x);
  Var tanh(Var x);
  Var sigmoid(Var x);
  Var add(Var a, Var b);
  Var sub(Var a, Var b);
  Var mul(Var a, Var b);
  Var one_minus(Var x);
  Var concat(std::span<const Var> parts);
  /// log softmax over entries with mask[i] true; masked entries read -1e30
  /// and receive no gradient. At least one entry must be unmasked.
  Var masked_log_softmax(Var scores, const std::vector<bool>& mask);
  /// Single element as a length-1 vector.
  Var pick(Var x, int index);

  const std::vector<double>& value(Var v) const { return nodes_.at(static_cast<std::size_t>(v.id)).value; }
  /// Gradient of the last backward pass with respect to `v` (inputs included).
  const std::vector<double>& grad(Var v) const { return nodes_.at(static_cast<std::size_t>(v.id)).grad; }
  std::size_t size() const { return nodes_.size(); }

  /// Accumulates gradients of <upstream, value(out)>. Allowed once per tape.
  void backward(Var out, const std::vector<double>& upstream);

  static constexpr double kMaskedLogit = -1e30;

 private:
  enum class Op { kInput, kLinear, kTanh, kSigmoid, kAdd, kSub, kMul, kOneMinus, kConcat, kMaskedLogSoftmax, kPick };

  struct Node {
    Op op = Op::kInput;
    std::vector<double> value;
    std::vector<double> grad;
    int a = -1;
    int b = -1;
    std::vector<int> parts;
    ParamSet* ps = nullptr;
    int w = -1;
    int bias = -1;
    std::vector<bool> mask;
    int index = -1;
  };

  Var push(Node n);
  const Node& node(Var v) const;

  std::vector<Node> nodes_;
  bool backward_done_ = false;
};

/// Probabilities from masked scores: exact zeros on masked entries, max
/// subtraction for stability. Throws if every entry is masked.
std::vector<double> masked_softmax(const std::vector<double>& scores, const std::vector<bool>& mask);

}  // namespace rmarl::nn
