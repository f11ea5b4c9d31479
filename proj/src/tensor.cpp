#include "pdnmt/tensor.hpp"

#include <cmath>

#include "pdnmt/error.hpp"

namespace pdnmt {

int64_t Tensor::shape_numel(const std::vector<int>& shape) {
  int64_t n = 1;
  for (int d : shape) {
    if (d < 0) throw RuntimeError(strfmt("negative dimension in shape %s", shape_to_string(shape).c_str()));
    n *= d;
  }
  return n;
}

Tensor Tensor::zeros(std::vector<int> shape) {
  const int64_t n = shape_numel(shape);
  return Tensor(std::move(shape), std::vector<double>(static_cast<size_t>(n), 0.0));
}

Tensor Tensor::full(std::vector<int> shape, double value) {
  const int64_t n = shape_numel(shape);
  return Tensor(std::move(shape), std::vector<double>(static_cast<size_t>(n), value));
}

Tensor Tensor::vector(std::vector<double> v) {
  const int n = static_cast<int>(v.size());
  return Tensor({n}, std::move(v));
}

Tensor Tensor::matrix(int rows, int cols, std::vector<double> v) {
  if (static_cast<int64_t>(v.size()) != static_cast<int64_t>(rows) * cols)
    throw RuntimeError(strfmt("matrix init: %d x %d needs %d values, got %zu", rows, cols, rows * cols, v.size()));
  return Tensor({rows, cols}, std::move(v));
}

double Tensor::item() const {
  if (numel() != 1) throw RuntimeError(strfmt("item() on non-scalar tensor %s", shape_str().c_str()));
  return values[0];
}

bool Tensor::all_finite() const {
  for (double v : values)
    if (!std::isfinite(v)) return false;
  return true;
}

std::string Tensor::shape_str() const { return shape_to_string(shape); }

bool shapes_equal(const std::vector<int>& a, const std::vector<int>& b) { return a == b; }

std::string shape_to_string(const std::vector<int>& shape) {
  std::string s = "[";
  for (size_t i = 0; i < shape.size(); ++i) {
    if (i) s += "x";
    s += std::to_string(shape[i]);
  }
  s += "]";
  return s;
}

}  // namespace pdnmt
