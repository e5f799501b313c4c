#include "rmarl/nn/tape.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace rmarl::nn {

Var Tape::push(Node n) {
  if (backward_done_) throw std::logic_error("tape already consumed by backward");
  nodes_.push_back(std::move(n));
  return Var{static_cast<int>(nodes_.size()) - 1};
}

const Tape::Node& Tape::node(Var v) const {
  if (v.id < 0 || static_cast<std::size_t>(v.id) >= nodes_.size()) throw std::out_of_range("invalid tape variable");
  return nodes_[static_cast<std::size_t>(v.id)];
}

Var Tape::input(std::vector<double> x) {
  Node n;
  n.op = Op::kInput;
  n.value = std::move(x);
  return push(std::move(n));
}

Var Tape::linear(ParamSet& ps, int w, int b, Var x) {
  const auto& t = ps.tensor(w);
  const auto& xv = node(x).value;
  if (static_cast<int>(xv.size()) != t.cols) {
    throw std::invalid_argument("linear " + t.name + ": input size " + std::to_string(xv.size()) + ", expected " +
                                std::to_string(t.cols));
  }
  if (b >= 0 && (ps.tensor(b).size() != static_cast<std::size_t>(t.rows))) {
    throw std::invalid_argument("linear " + t.name + ": bias size mismatch");
  }
  Node n;
  n.op = Op::kLinear;
  n.a = x.id;
  n.ps = &ps;
  n.w = w;
  n.bias = b;
  n.value.assign(static_cast<std::size_t>(t.rows), 0.0);
  const double* W = ps.data(w);
  for (int r = 0; r < t.rows; ++r) {
    double s = b >= 0 ? ps.data(b)[r] : 0.0;
    const double* row = W + static_cast<std::size_t>(r) * static_cast<std::size_t>(t.cols);
    for (int c = 0; c < t.cols; ++c) s += row[c] * xv[static_cast<std::size_t>(c)];
    n.value[static_cast<std::size_t>(r)] = s;
  }
  return push(std::move(n));
}

Var Tape::tanh(Var x) {
  Node n;
  n.op = Op::kTanh;
  n.a = x.id;
  n.value = node(x).value;
  for (double& v : n.value) v = std::tanh(v);
  return push(std::move(n));
}

Var Tape::sigmoid(Var x) {
  Node n;
  n.op = Op::kSigmoid;
  n.a = x.id;
  n.value = node(x).value;
  for (double& v : n.value) v = v >= 0 ? 1.0 / (1.0 + std::exp(-v)) : std::exp(v) / (1.0 + std::exp(v));
  return push(std::move(n));
}

namespace {

void check_same(const std::vector<double>& a, const std::vector<double>& b, const char* op) {
  if (a.size() != b.size()) {
    throw std::invalid_argument(std::string(op) + ": size " + std::to_string(a.size()) + " vs " + std::to_string(b.size()));
  }
}

}  // namespace

Var Tape::add(Var a, Var b) {
  check_same(node(a).value, node(b).value, "add");
  Node n;
  n.op = Op::kAdd;
  n.a = a.id;
  n.b = b.id;
  n.value = node(a).value;
  const auto& bv = node(b).value;
  for (std::size_t i = 0; i < n.value.size(); ++i) n.value[i] += bv[i];
  return push(std::move(n));
}

Var Tape::sub(Var a, Var b) {
  check_same(node(a).value, node(b).value, "sub");
  Node n;
  n.op = Op::kSub;
  n.a = a.id;
  n.b = b.id;
  n.value = node(a).value;
  const auto& bv = node(b).value;
  for (std::size_t i = 0; i < n.value.size(); ++i) n.value[i] -= bv[i];
  return push(std::move(n));
}

Var Tape::mul(Var a, Var b) {
  check_same(node(a).value, node(b).value, "mul");
  Node n;
  n.op = Op::kMul;
  n.a = a.id;
  n.b = b.id;
  n.value = node(a).value;
  const auto& bv = node(b).value;
  for (std::size_t i = 0; i < n.value.size(); ++i) n.value[i] *= bv[i];
  return push(std::move(n));
}

Var Tape::one_minus(Var x) {
  Node n;
  n.op = Op::kOneMinus;
  n.a = x.id;
  n.value = node(x).value;
  for (double& v : n.value) v = 1.0 - v;
  return push(std::move(n));
}

Var Tape::concat(std::span<const Var> parts) {
  Node n;
  n.op = Op::kConcat;
  for (Var p : parts) {
    const auto& v = node(p).value;
    n.value.insert(n.value.end(), v.begin(), v.end());
    n.parts.push_back(p.id);
  }
  return push(std::move(n));
}

Var Tape::masked_log_softmax(Var scores, const std::vector<bool>& mask) {
  const auto& s = node(scores).value;
  if (mask.size() != s.size()) throw std::invalid_argument("mask size does not match scores");
  double mx = -INFINITY;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (mask[i]) mx = std::max(mx, s[i]);
  }
  if (!std::isfinite(mx)) throw std::invalid_argument("masked_log_softmax: every action is masked");
  double z = 0.0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (mask[i]) z += std::exp(s[i] - mx);
  }
  const double lse = mx + std::log(z);
  Node n;
  n.op = Op::kMaskedLogSoftmax;
  n.a = scores.id;
  n.mask = mask;
  n.value.resize(s.size());
  for (std::size_t i = 0; i < s.size(); ++i) n.value[i] = mask[i] ? s[i] - lse : kMaskedLogit;
  return push(std::move(n));
}

Var Tape::pick(Var x, int index) {
  const auto& v = node(x).value;
  if (index < 0 || static_cast<std::size_t>(index) >= v.size()) throw std::out_of_range("pick index out of range");
  Node n;
  n.op = Op::kPick;
  n.a = x.id;
  n.index = index;
  n.value = {v[static_cast<std::size_t>(index)]};
  return push(std::move(n));
}

void Tape::backward(Var out, const std::vector<double>& upstream) {
  if (backward_done_) throw std::logic_error("backward called twice on one tape");
  const Node& o = node(out);
  if (upstream.size() != o.value.size()) throw std::invalid_argument("upstream size does not match output");
  backward_done_ = true;
  for (Node& n : nodes_) n.grad.assign(n.value.size(), 0.0);
  nodes_[static_cast<std::size_t>(out.id)].grad = upstream;

  for (int id = out.id; id >= 0; --id) {
    Node& n = nodes_[static_cast<std::size_t>(id)];
    const auto& g = n.grad;
    if (std::all_of(g.begin(), g.end(), [](double v) { return v == 0.0; })) continue;
    switch (n.op) {
      case Op::kInput:
        break;
      case Op::kLinear: {
        const auto& t = n.ps->tensor(n.w);
        Node& x = nodes_[static_cast<std::size_t>(n.a)];
        const double* W = n.ps->data(n.w);
        double* dW = n.ps->grad(n.w);
        for (int r = 0; r < t.rows; ++r) {
          const double gr = g[static_cast<std::size_t>(r)];
          if (gr == 0.0) continue;
          const std::size_t base = static_cast<std::size_t>(r) * static_cast<std::size_t>(t.cols);
          for (int c = 0; c < t.cols; ++c) {
            dW[base + static_cast<std::size_t>(c)] += gr * x.value[static_cast<std::size_t>(c)];
            x.grad[static_cast<std::size_t>(c)] += gr * W[base + static_cast<std::size_t>(c)];
          }
        }
        if (n.bias >= 0) {
          double* db = n.ps->grad(n.bias);
          for (int r = 0; r < t.rows; ++r) db[r] += g[static_cast<std::size_t>(r)];
        }
        break;
      }
      case Op::kTanh: {
        Node& x = nodes_[static_cast<std::size_t>(n.a)];
        for (std::size_t i = 0; i < g.size(); ++i) x.grad[i] += g[i] * (1.0 - n.value[i] * n.value[i]);
        break;
      }
      case Op::kSigmoid: {
        Node& x = nodes_[static_cast<std::size_t>(n.a)];
        for (std::size_t i = 0; i < g.size(); ++i) x.grad[i] += g[i] * n.value[i] * (1.0 - n.value[i]);
        break;
      }
      case Op::kAdd:
      case Op::kSub: {
        const double sign = n.op == Op::kAdd ? 1.0 : -1.0;
        Node& a = nodes_[static_cast<std::size_t>(n.a)];
        Node& b = nodes_[static_cast<std::size_t>(n.b)];
        for (std::size_t i = 0; i < g.size(); ++i) {
          a.grad[i] += g[i];
          b.grad[i] += sign * g[i];
        }
        break;
      }
      case Op::kMul: {
        Node& a = nodes_[static_cast<std::size_t>(n.a)];
        Node& b = nodes_[static_cast<std::size_t>(n.b)];
        for (std::size_t i = 0; i < g.size(); ++i) {
          const double av = a.value[i];
          const double bv = b.value[i];
          a.grad[i] += g[i] * bv;
          b.grad[i] += g[i] * av;
        }
        break;
      }
      case Op::kOneMinus: {
        Node& x = nodes_[static_cast<std::size_t>(n.a)];
        for (std::size_t i = 0; i < g.size(); ++i) x.grad[i] -= g[i];
        break;
      }
      case Op::kConcat: {
        std::size_t off = 0;
        for (int p : n.parts) {
          Node& x = nodes_[static_cast<std::size_t>(p)];
          for (std::size_t i = 0; i < x.value.size(); ++i) x.grad[i] += g[off + i];
          off += x.value.size();
        }
        break;
      }
      case Op::kMaskedLogSoftmax: {
        Node& x = nodes_[static_cast<std::size_t>(n.a)];
        double gsum = 0.0;
        for (std::size_t i = 0; i < g.size(); ++i) {
          if (n.mask[i]) gsum += g[i];
        }
        for (std::size_t i = 0; i < g.size(); ++i) {
          if (n.mask[i]) x.grad[i] += g[i] - std::exp(n.value[i]) * gsum;
        }
        break;
      }
      case Op::kPick: {
        nodes_[static_cast<std::size_t>(n.a)].grad[static_cast<std::size_t>(n.index)] += g[0];
        break;
      }
    }
  }
}

std::vector<double> masked_softmax(const std::vector<double>& scores, const std::vector<bool>& mask) {
  if (mask.size() != scores.size()) throw std::invalid_argument("mask size does not match scores");
  double mx = -INFINITY;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    if (mask[i]) mx = std::max(mx, scores[i]);
  }
  if (!std::isfinite(mx)) throw std::invalid_argument("masked_softmax: every action is masked");
  std::vector<double> p(scores.size(), 0.0);
  double z = 0.0;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    // Additive -1e30 on masked slots, then exact zeros.
    const double s = mask[i] ? scores[i] : scores[i] + Tape::kMaskedLogit;
    p[i] = std::exp(s - mx);
    z += p[i];
  }
  for (std::size_t i = 0; i < p.size(); ++i) p[i] = mask[i] ? p[i] / z : 0.0;
  return p;
}

}  // namespace rmarl::nn
