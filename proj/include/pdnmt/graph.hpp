// Define-by-run computation graph with reverse-mode differentiation. A graph
// is rebuilt for every batch; nodes are appended in execution order, so the
// recording is topologically sorted by construction and backward() walks it
// exactly once in reverse.
//
// A graph and its tensors belong to one worker at a time. Distinct graphs can
// run on distinct workers; ParameterStore reads are shared, writes need
// exclusive access.
#pragma once

#include <span>
#include <string>
#include <vector>

#include "pdnmt/param_store.hpp"
#include "pdnmt/tensor.hpp"

namespace pdnmt {

enum class OpKind {
  Input,
  Param,
  Add,       // same shape, or [m x n] + [n] row broadcast
  Mul,       // elementwise, same shape
  MatMul,    // (m x k)(k x n), (m x k)(k), (k)(k x n)
  Concat,    // rank-1 parts -> one vector
  Stack,     // n rank-1 vectors of width d -> [n x d]
  Slice,     // range along axis 0
  Tanh,
  Sigmoid,
  Softmax,   // last axis, max-subtracted
  Embed,     // row gather from a [V x d] table
  Sum,       // all elements -> scalar
  Scale,     // alpha * x + beta, elementwise
  NllOneHot, // -log softmax(logits)[target], fused backward
};

const char* op_name(OpKind k);

class Graph {
 public:
  Graph() { nodes_.reserve(1024); }

  int num_nodes() const { return static_cast<int>(nodes_.size()); }

  // Leaves.
  Tensor input(Tensor t);
  Tensor param(const ParameterStore& store, const std::string& name);

  // Ops. Each returns the result tensor registered in this graph.
  Tensor add(const Tensor& a, const Tensor& b);
  Tensor mul(const Tensor& a, const Tensor& b);
  Tensor matmul(const Tensor& a, const Tensor& b);
  Tensor concat(std::span<const Tensor> parts);
  Tensor stack(std::span<const Tensor> rows);
  Tensor slice(const Tensor& t, int begin, int len);
  Tensor tanh(const Tensor& t);
  Tensor sigmoid(const Tensor& t);
  Tensor softmax(const Tensor& t);
  Tensor embed(const Tensor& table, std::span<const int> ids);
  Tensor embed(const Tensor& table, int id);
  Tensor sum(const Tensor& t);
  Tensor scale(const Tensor& t, double alpha) { return affine(t, alpha, 0.0); }
  Tensor affine(const Tensor& t, double alpha, double beta);
  Tensor nll_onehot(const Tensor& logits, int target);

  // Gradients of a scalar loss for every parameter in the store. Parameters
  // not reachable from the loss map to zero tensors of their own shape.
  GradientMap backward(const Tensor& loss, const ParameterStore& store) const;

  const Tensor& value_of(int node) const { return nodes_.at(static_cast<size_t>(node)).value; }

 private:
  struct Node {
    OpKind op;
    std::vector<int> inputs;
    Tensor value;
    std::vector<int> aux;         // embed ids, slice [begin, len], nll target
    double alpha = 1.0;
    double beta = 0.0;
    std::vector<double> saved;    // softmax probabilities for NllOneHot
    std::string param_name;
  };

  int push(Node n);
  const Tensor& in_value(const Node& n, size_t i) const;
  static void check_finite(const Tensor& t, OpKind op);

  std::vector<Node> nodes_;
  std::unordered_map<std::string, int> param_nodes_;
};

}  // namespace pdnmt
