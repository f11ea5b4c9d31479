#include "pdnmt/param_store.hpp"

#include "pdnmt/error.hpp"
#include "pdnmt/rng.hpp"

namespace pdnmt {

const char* partition_name(Partition p) {
  switch (p) {
    case Partition::Theta: return "theta";
    case Partition::Gamma: return "gamma";
    case Partition::Psi: return "psi";
  }
  return "?";
}

Partition partition_from_name(const std::string& s) {
  if (s == "theta") return Partition::Theta;
  if (s == "gamma") return Partition::Gamma;
  if (s == "psi") return Partition::Psi;
  throw RuntimeError("unknown partition label: " + s);
}

Tensor& ParameterStore::create_uniform(const std::string& name, std::vector<int> shape, Partition p,
                                       uint64_t seed) {
  Tensor t = Tensor::zeros(std::move(shape));
  Rng rng(seed, fnv1a(name));
  for (double& v : t.values) v = rng.uniform(-kInitRange, kInitRange);
  return put(name, std::move(t), p);
}

Tensor& ParameterStore::create_zeros(const std::string& name, std::vector<int> shape, Partition p) {
  return put(name, Tensor::zeros(std::move(shape)), p);
}

Tensor& ParameterStore::put(const std::string& name, Tensor t, Partition p) {
  if (index_.count(name)) throw RuntimeError("duplicate parameter name: " + name);
  order_.push_back(name);
  auto [it, ok] = index_.emplace(name, Entry{std::move(t), p});
  (void)ok;
  return it->second.tensor;
}

Tensor& ParameterStore::at(const std::string& name) {
  auto it = index_.find(name);
  if (it == index_.end()) throw RuntimeError("unknown parameter: " + name);
  return it->second.tensor;
}

const Tensor& ParameterStore::at(const std::string& name) const {
  auto it = index_.find(name);
  if (it == index_.end()) throw RuntimeError("unknown parameter: " + name);
  return it->second.tensor;
}

Partition ParameterStore::partition_of(const std::string& name) const {
  auto it = index_.find(name);
  if (it == index_.end()) throw RuntimeError("unknown parameter: " + name);
  return it->second.partition;
}

std::vector<std::string> ParameterStore::names_in(Partition p) const {
  std::vector<std::string> out;
  for (const auto& n : order_)
    if (index_.at(n).partition == p) out.push_back(n);
  return out;
}

int64_t ParameterStore::total_values() const {
  int64_t n = 0;
  for (const auto& name : order_) n += index_.at(name).tensor.numel();
  return n;
}

}  // namespace pdnmt
