#include "rmarl/nn/modules.hpp"

#include <cmath>
#include <stdexcept>

namespace rmarl::nn {

Mlp::Mlp(ParamSet& ps, const std::string& prefix, std::vector<int> sizes) : ps_(&ps), sizes_(std::move(sizes)) {
  if (sizes_.size() < 2) throw std::invalid_argument("MLP needs at least input and output sizes");
  for (std::size_t i = 0; i + 1 < sizes_.size(); ++i) {
    const int w = ps.add(prefix + ".W" + std::to_string(i), sizes_[i + 1], sizes_[i]);
    const int b = ps.add(prefix + ".b" + std::to_string(i), sizes_[i + 1], 1);
    layers_.emplace_back(w, b);
  }
}

Var Mlp::forward(Tape& tape, Var x) const {
  for (std::size_t i = 0; i < layers_.size(); ++i) {
    x = tape.linear(*ps_, layers_[i].first, layers_[i].second, x);
    if (i + 1 < layers_.size()) x = tape.tanh(x);
  }
  return x;
}

std::vector<double> Mlp::eval(const std::vector<double>& x) const {
  if (static_cast<int>(x.size()) != in_size()) throw std::invalid_argument("MLP input size mismatch");
  std::vector<double> cur = x;
  for (std::size_t i = 0; i < layers_.size(); ++i) {
    const auto& t = ps_->tensor(layers_[i].first);
    const double* W = ps_->data(layers_[i].first);
    const double* b = ps_->data(layers_[i].second);
    std::vector<double> next(static_cast<std::size_t>(t.rows));
    for (int r = 0; r < t.rows; ++r) {
      double s = b[r];
      const double* row = W + static_cast<std::size_t>(r) * static_cast<std::size_t>(t.cols);
      for (int c = 0; c < t.cols; ++c) s += row[c] * cur[static_cast<std::size_t>(c)];
      next[static_cast<std::size_t>(r)] = (i + 1 < layers_.size()) ? std::tanh(s) : s;
    }
    cur = std::move(next);
  }
  return cur;
}

void Mlp::zero() const {
  for (const auto& [w, b] : layers_) {
    std::fill(ps_->data(w), ps_->data(w) + ps_->tensor(w).size(), 0.0);
    std::fill(ps_->data(b), ps_->data(b) + ps_->tensor(b).size(), 0.0);
  }
}

GruCell::GruCell(ParamSet& ps, const std::string& prefix, int input, int hidden)
    : ps_(&ps), input_(input), hidden_(hidden) {
  ids_.wz = ps.add(prefix + ".W_z", hidden, input);
  ids_.uz = ps.add(prefix + ".U_z", hidden, hidden);
  ids_.bz = ps.add(prefix + ".b_z", hidden, 1);
  ids_.wr = ps.add(prefix + ".W_r", hidden, input);
  ids_.ur = ps.add(prefix + ".U_r", hidden, hidden);
  ids_.br = ps.add(prefix + ".b_r", hidden, 1);
  ids_.wh = ps.add(prefix + ".W_h", hidden, input);
  ids_.uh = ps.add(prefix + ".U_h", hidden, hidden);
  ids_.bh = ps.add(prefix + ".b_h", hidden, 1);
}

Var GruCell::forward(Tape& tape, Var x, Var h) const {
  ParamSet& ps = *ps_;
  const Var z = tape.sigmoid(tape.add(tape.linear(ps, ids_.wz, ids_.bz, x), tape.linear(ps, ids_.uz, -1, h)));
  const Var r = tape.sigmoid(tape.add(tape.linear(ps, ids_.wr, ids_.br, x), tape.linear(ps, ids_.ur, -1, h)));
  const Var c = tape.tanh(tape.add(tape.linear(ps, ids_.wh, ids_.bh, x), tape.linear(ps, ids_.uh, -1, tape.mul(r, h))));
  return tape.add(tape.mul(tape.one_minus(z), h), tape.mul(z, c));
}

void Adam::step(ParamSet& ps) {
  const std::size_t n = ps.size();
  if (m_.size() != n) {
    m_.assign(n, 0.0);
    v_.assign(n, 0.0);
    t_ = 0;
  }
  ++t_;
  const double c1 = 1.0 - std::pow(beta1_, static_cast<double>(t_));
  const double c2 = 1.0 - std::pow(beta2_, static_cast<double>(t_));
  auto& w = ps.values();
  auto& g = ps.grads();
  for (std::size_t i = 0; i < n; ++i) {
    m_[i] = beta1_ * m_[i] + (1.0 - beta1_) * g[i];
    v_[i] = beta2_ * v_[i] + (1.0 - beta2_) * g[i] * g[i];
    const double mhat = m_[i] / c1;
    const double vhat = v_[i] / c2;
    w[i] -= lr_ * mhat / (std::sqrt(vhat) + eps_);
  }
  ps.zero_grad();
}

}  // namespace rmarl::nn
