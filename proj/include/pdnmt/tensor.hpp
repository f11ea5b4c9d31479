// Dense row-major tensor of 64-bit floats. Rank 0 (empty shape) is a scalar.
// `node` is a handle into the graph that produced the tensor; -1 marks a
// plain constant that is not part of any recorded computation.
#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace pdnmt {

struct Tensor {
  std::vector<int> shape;
  std::vector<double> values;
  int node = -1;

  Tensor() = default;
  Tensor(std::vector<int> s, std::vector<double> v) : shape(std::move(s)), values(std::move(v)) {}

  static int64_t shape_numel(const std::vector<int>& shape);

  static Tensor zeros(std::vector<int> shape);
  static Tensor full(std::vector<int> shape, double value);
  static Tensor scalar(double value) { return Tensor({}, {value}); }
  static Tensor vector(std::vector<double> v);
  static Tensor matrix(int rows, int cols, std::vector<double> v);

  int64_t numel() const { return static_cast<int64_t>(values.size()); }
  int rank() const { return static_cast<int>(shape.size()); }
  bool is_scalar() const { return shape.empty(); }
  int rows() const { return shape.at(0); }
  int cols() const { return shape.at(1); }

  double item() const;
  double& at(int i) { return values[static_cast<size_t>(i)]; }
  double at(int i) const { return values[static_cast<size_t>(i)]; }
  double& at(int r, int c) { return values[static_cast<size_t>(r) * cols() + c]; }
  double at(int r, int c) const { return values[static_cast<size_t>(r) * cols() + c]; }

  bool same_shape(const Tensor& o) const { return shape == o.shape; }
  bool all_finite() const;

  std::string shape_str() const;
};

bool shapes_equal(const std::vector<int>& a, const std::vector<int>& b);
std::string shape_to_string(const std::vector<int>& shape);

}  // namespace pdnmt
