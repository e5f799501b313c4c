#include "rmarl/nn/param_set.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <random>
#include <sstream>
#include <stdexcept>

namespace rmarl::nn {

int ParamSet::add(const std::string& name, int rows, int cols) {
  if (rows < 1 || cols < 1) throw std::invalid_argument("tensor " + name + " needs positive shape");
  if (find(name) >= 0) throw std::invalid_argument("duplicate tensor name " + name);
  Tensor t{name, rows, cols, values_.size()};
  values_.resize(values_.size() + t.size(), 0.0);
  grads_.resize(values_.size(), 0.0);
  tensors_.push_back(t);
  return static_cast<int>(tensors_.size()) - 1;
}

int ParamSet::find(const std::string& name) const {
  for (std::size_t i = 0; i < tensors_.size(); ++i) {
    if (tensors_[i].name == name) return static_cast<int>(i);
  }
  return -1;
}

void ParamSet::init_uniform(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  for (const Tensor& t : tensors_) {
    const double bound = 1.0 / std::sqrt(static_cast<double>(t.cols));
    std::uniform_real_distribution<double> u(-bound, bound);
    for (std::size_t i = 0; i < t.size(); ++i) values_[t.offset + i] = u(rng);
  }
  zero_grad();
}

void ParamSet::zero_grad() { std::fill(grads_.begin(), grads_.end(), 0.0); }

void ParamSet::fill(double v) { std::fill(values_.begin(), values_.end(), v); }

std::string ParamSet::layout_text() const {
  std::string out;
  for (const Tensor& t : tensors_) out += t.name + " " + std::to_string(t.rows) + " " + std::to_string(t.cols) + "\n";
  return out;
}

std::string ParamSet::serialize() const {
  static_assert(std::endian::native == std::endian::little, "checkpoint format assumes a little-endian host");
  std::string out = layout_text() + "---\n";
  const std::size_t header = out.size();
  out.resize(header + values_.size() * sizeof(double));
  std::memcpy(out.data() + header, values_.data(), values_.size() * sizeof(double));
  return out;
}

void ParamSet::deserialize(const std::string& bytes) {
  const std::size_t sep = bytes.find("---\n");
  if (sep == std::string::npos) throw std::runtime_error("checkpoint has no layout header");
  const std::string layout = bytes.substr(0, sep);
  if (layout != layout_text()) throw std::runtime_error("checkpoint layout does not match the network");
  const std::size_t body = sep + 4;
  if (bytes.size() - body != values_.size() * sizeof(double)) throw std::runtime_error("checkpoint size mismatch");
  std::memcpy(values_.data(), bytes.data() + body, values_.size() * sizeof(double));
  zero_grad();
}

void ParamSet::save(const std::string& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  const std::string s = serialize();
  out.write(s.data(), static_cast<std::streamsize>(s.size()));
}

void ParamSet::load(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  deserialize(ss.str());
}

}  // namespace rmarl::nn
