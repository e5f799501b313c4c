#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace rmarl::nn {

/// Flat parameter vector with a named-tensor layout and a paired gradient buffer.
class ParamSet {
 public:
  struct Tensor {
    std::string name;
    int rows = 0;
    int cols = 0;
    std::size_t offset = 0;
    std::size_t size() const { return static_cast<std::size_t>(rows) * static_cast<std::size_t>(cols); }
  };

  /// Appends a rows x cols tensor (zero-filled); returns its index.
  int add(const std::string& name, int rows, int cols);

  /// Uniform(-1/sqrt(fan_in), 1/sqrt(fan_in)) with fan_in = cols, seeded.
  void init_uniform(std::uint64_t seed);
  void zero_grad();
  void fill(double v);

  std::size_t size() const { return values_.size(); }
  const std::vector<Tensor>& tensors() const { return tensors_; }
  const Tensor& tensor(int i) const { return tensors_.at(static_cast<std::size_t>(i)); }
  int find(const std::string& name) const;

  double* data(int i) { return values_.data() + tensor(i).offset; }
  const double* data(int i) const { return values_.data() + tensor(i).offset; }
  double* grad(int i) { return grads_.data() + tensor(i).offset; }

  std::vector<double>& values() { return values_; }
  const std::vector<double>& values() const { return values_; }
  std::vector<double>& grads() { return grads_; }
  const std::vector<double>& grads() const { return grads_; }

  /// One line per tensor: `<name> <rows> <cols>`.
  std::string layout_text() const;

  /// Plain-text layout header, a `---` line, then little-endian float64 values.
  std::string serialize() const;
  /// Loads values; the layout in `bytes` must match this set's layout.
  void deserialize(const std::string& bytes);
  void save(const std::string& path) const;
  void load(const std::string& path);

 private:
  std::vector<Tensor> tensors_;
  std::vector<double> values_;
  std::vector<double> grads_;
};

}  // namespace rmarl::nn
