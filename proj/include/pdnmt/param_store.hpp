// Named model parameters. Every entry carries a partition label so the
// optimizer and the gradient tests can split the model into its encoder -
// decoder, reconstructor and pronoun-predictor parts.
#pragma once

#include <map>
#include <string>
#include <unordered_map>
#include <vector>

#include "pdnmt/tensor.hpp"

namespace pdnmt {

enum class Partition { Theta, Gamma, Psi };

const char* partition_name(Partition p);
Partition partition_from_name(const std::string& s);

class ParameterStore {
 public:
  // Uniform init in [-kInitRange, kInitRange]; the stream is keyed by the
  // parameter name, so values do not depend on creation order.
  static constexpr double kInitRange = 0.08;

  Tensor& create_uniform(const std::string& name, std::vector<int> shape, Partition p, uint64_t seed);
  Tensor& create_zeros(const std::string& name, std::vector<int> shape, Partition p);
  Tensor& put(const std::string& name, Tensor t, Partition p);

  bool has(const std::string& name) const { return index_.count(name) > 0; }
  Tensor& at(const std::string& name);
  const Tensor& at(const std::string& name) const;
  Partition partition_of(const std::string& name) const;

  const std::vector<std::string>& names() const { return order_; }
  std::vector<std::string> names_in(Partition p) const;
  size_t size() const { return order_.size(); }

  int64_t total_values() const;

 private:
  struct Entry {
    Tensor tensor;
    Partition partition;
  };

  std::vector<std::string> order_;
  std::unordered_map<std::string, Entry> index_;
};

using GradientMap = std::map<std::string, Tensor>;

}  // namespace pdnmt
