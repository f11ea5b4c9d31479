#include "pdnmt/graph.hpp"

#include <cmath>

#include "pdnmt/error.hpp"
#include "pdnmt/kernels.hpp"

namespace pdnmt {

const char* op_name(OpKind k) {
  switch (k) {
    case OpKind::Input: return "input";
    case OpKind::Param: return "param";
    case OpKind::Add: return "add";
    case OpKind::Mul: return "multiply";
    case OpKind::MatMul: return "matmul";
    case OpKind::Concat: return "concat";
    case OpKind::Stack: return "stack";
    case OpKind::Slice: return "slice";
    case OpKind::Tanh: return "tanh";
    case OpKind::Sigmoid: return "sigmoid";
    case OpKind::Softmax: return "softmax";
    case OpKind::Embed: return "embedding-lookup";
    case OpKind::Sum: return "sum";
    case OpKind::Scale: return "scalar-scale";
    case OpKind::NllOneHot: return "nll-onehot";
  }
  return "?";
}

namespace {
[[noreturn]] void shape_error(OpKind op, const std::string& detail) {
  throw RuntimeError(strfmt("%s: %s", op_name(op), detail.c_str()));
}

void require(bool ok, OpKind op, const std::string& detail) {
  if (!ok) shape_error(op, detail);
}
}  // namespace

int Graph::push(Node n) {
  const int id = static_cast<int>(nodes_.size());
  n.value.node = id;
  nodes_.push_back(std::move(n));
  return id;
}

const Tensor& Graph::in_value(const Node& n, size_t i) const {
  return nodes_[static_cast<size_t>(n.inputs[i])].value;
}

void Graph::check_finite(const Tensor& t, OpKind op) {
  if (!t.all_finite()) shape_error(op, "non-finite result");
}

Tensor Graph::input(Tensor t) {
  Node n;
  n.op = OpKind::Input;
  n.value = std::move(t);
  push(std::move(n));
  return nodes_.back().value;
}

Tensor Graph::param(const ParameterStore& store, const std::string& name) {
  auto it = param_nodes_.find(name);
  if (it != param_nodes_.end()) return nodes_[static_cast<size_t>(it->second)].value;
  Node n;
  n.op = OpKind::Param;
  n.value = store.at(name);
  n.param_name = name;
  const int id = push(std::move(n));
  param_nodes_.emplace(name, id);
  return nodes_.back().value;
}

Tensor Graph::add(const Tensor& a, const Tensor& b) {
  require(a.node >= 0 && b.node >= 0, OpKind::Add, "inputs must be registered in the graph");
  // Normalize the broadcast form so the matrix comes first.
  if (a.rank() == 1 && b.rank() == 2) return add(b, a);
  Node n;
  n.op = OpKind::Add;
  n.inputs = {a.node, b.node};
  if (a.same_shape(b)) {
    Tensor out = Tensor::zeros(a.shape);
    kernels::add(a.values.data(), b.values.data(), out.values.data(), a.numel());
    n.value = std::move(out);
  } else if (a.rank() == 2 && b.rank() == 1 && a.cols() == b.shape[0]) {
    Tensor out = Tensor::zeros(a.shape);
    kernels::add_rowvec(a.values.data(), b.values.data(), out.values.data(), a.rows(), a.cols());
    n.value = std::move(out);
  } else {
    shape_error(OpKind::Add, "incompatible shapes " + a.shape_str() + " and " + b.shape_str());
  }
  push(std::move(n));
  return nodes_.back().value;
}

Tensor Graph::mul(const Tensor& a, const Tensor& b) {
  require(a.node >= 0 && b.node >= 0, OpKind::Mul, "inputs must be registered in the graph");
  require(a.same_shape(b), OpKind::Mul,
          "incompatible shapes " + a.shape_str() + " and " + b.shape_str());
  Node n;
  n.op = OpKind::Mul;
  n.inputs = {a.node, b.node};
  Tensor out = Tensor::zeros(a.shape);
  kernels::mul(a.values.data(), b.values.data(), out.values.data(), a.numel());
  n.value = std::move(out);
  push(std::move(n));
  return nodes_.back().value;
}

Tensor Graph::matmul(const Tensor& a, const Tensor& b) {
  require(a.node >= 0 && b.node >= 0, OpKind::MatMul, "inputs must be registered in the graph");
  Node n;
  n.op = OpKind::MatMul;
  n.inputs = {a.node, b.node};
  if (a.rank() == 2 && b.rank() == 2) {
    require(a.cols() == b.rows(), OpKind::MatMul,
            "incompatible shapes " + a.shape_str() + " and " + b.shape_str());
    Tensor out = Tensor::zeros({a.rows(), b.cols()});
    kernels::gemm_nn(a.values.data(), b.values.data(), out.values.data(), a.rows(), a.cols(), b.cols());
    n.value = std::move(out);
  } else if (a.rank() == 2 && b.rank() == 1) {
    require(a.cols() == b.shape[0], OpKind::MatMul,
            "incompatible shapes " + a.shape_str() + " and " + b.shape_str());
    Tensor out = Tensor::zeros({a.rows()});
    kernels::gemv(a.values.data(), b.values.data(), out.values.data(), a.rows(), a.cols());
    n.value = std::move(out);
  } else if (a.rank() == 1 && b.rank() == 2) {
    require(a.shape[0] == b.rows(), OpKind::MatMul,
            "incompatible shapes " + a.shape_str() + " and " + b.shape_str());
    Tensor out = Tensor::zeros({b.cols()});
    kernels::gemv_t(b.values.data(), a.values.data(), out.values.data(), b.rows(), b.cols());
    n.value = std::move(out);
  } else {
    shape_error(OpKind::MatMul, "unsupported ranks " + a.shape_str() + " and " + b.shape_str());
  }
  push(std::move(n));
  return nodes_.back().value;
}

Tensor Graph::concat(std::span<const Tensor> parts) {
  require(!parts.empty(), OpKind::Concat, "no inputs");
  Node n;
  n.op = OpKind::Concat;
  int total = 0;
  for (const Tensor& p : parts) {
    require(p.node >= 0, OpKind::Concat, "inputs must be registered in the graph");
    require(p.rank() == 1, OpKind::Concat, "expects vectors, got " + p.shape_str());
    n.inputs.push_back(p.node);
    total += p.shape[0];
  }
  Tensor out = Tensor::zeros({total});
  int off = 0;
  for (const Tensor& p : parts) {
    std::copy(p.values.begin(), p.values.end(), out.values.begin() + off);
    off += p.shape[0];
  }
  n.value = std::move(out);
  push(std::move(n));
  return nodes_.back().value;
}

Tensor Graph::stack(std::span<const Tensor> rows) {
  require(!rows.empty(), OpKind::Stack, "no inputs");
  const int d = rows.front().rank() == 1 ? rows.front().shape[0] : -1;
  require(d > 0, OpKind::Stack, "expects vectors, got " + rows.front().shape_str());
  Node n;
  n.op = OpKind::Stack;
  Tensor out = Tensor::zeros({static_cast<int>(rows.size()), d});
  for (size_t r = 0; r < rows.size(); ++r) {
    require(rows[r].node >= 0, OpKind::Stack, "inputs must be registered in the graph");
    require(rows[r].rank() == 1 && rows[r].shape[0] == d, OpKind::Stack,
            "row " + std::to_string(r) + " has shape " + rows[r].shape_str());
    n.inputs.push_back(rows[r].node);
    std::copy(rows[r].values.begin(), rows[r].values.end(), out.values.begin() + static_cast<int64_t>(r) * d);
  }
  n.value = std::move(out);
  push(std::move(n));
  return nodes_.back().value;
}

Tensor Graph::slice(const Tensor& t, int begin, int len) {
  require(t.node >= 0, OpKind::Slice, "input must be registered in the graph");
  require(t.rank() == 1 || t.rank() == 2, OpKind::Slice, "expects rank 1 or 2, got " + t.shape_str());
  const int extent = t.shape[0];
  require(begin >= 0 && len >= 1 && begin + len <= extent, OpKind::Slice,
          strfmt("range [%d, %d) out of bounds for %s", begin, begin + len, t.shape_str().c_str()));
  Node n;
  n.op = OpKind::Slice;
  n.inputs = {t.node};
  n.aux = {begin, len};
  const int stride = t.rank() == 2 ? t.cols() : 1;
  Tensor out = t.rank() == 2 ? Tensor::zeros({len, t.cols()}) : Tensor::zeros({len});
  std::copy(t.values.begin() + static_cast<int64_t>(begin) * stride,
            t.values.begin() + static_cast<int64_t>(begin + len) * stride, out.values.begin());
  n.value = std::move(out);
  push(std::move(n));
  return nodes_.back().value;
}

Tensor Graph::tanh(const Tensor& t) {
  require(t.node >= 0, OpKind::Tanh, "input must be registered in the graph");
  Node n;
  n.op = OpKind::Tanh;
  n.inputs = {t.node};
  Tensor out = Tensor::zeros(t.shape);
  kernels::vtanh(t.values.data(), out.values.data(), t.numel());
  n.value = std::move(out);
  push(std::move(n));
  return nodes_.back().value;
}

Tensor Graph::sigmoid(const Tensor& t) {
  require(t.node >= 0, OpKind::Sigmoid, "input must be registered in the graph");
  Node n;
  n.op = OpKind::Sigmoid;
  n.inputs = {t.node};
  Tensor out = Tensor::zeros(t.shape);
  kernels::vsigmoid(t.values.data(), out.values.data(), t.numel());
  n.value = std::move(out);
  push(std::move(n));
  return nodes_.back().value;
}

Tensor Graph::softmax(const Tensor& t) {
  require(t.node >= 0, OpKind::Softmax, "input must be registered in the graph");
  require(t.numel() > 0, OpKind::Softmax, "empty input");
  require(t.rank() == 1 || t.rank() == 2, OpKind::Softmax, "expects rank 1 or 2, got " + t.shape_str());
  Node n;
  n.op = OpKind::Softmax;
  n.inputs = {t.node};
  Tensor out = Tensor::zeros(t.shape);
  const int rows = t.rank() == 2 ? t.rows() : 1;
  const int cols = t.rank() == 2 ? t.cols() : t.shape[0];
  kernels::softmax_rows(t.values.data(), out.values.data(), rows, cols);
  n.value = std::move(out);
  push(std::move(n));
  return nodes_.back().value;
}

Tensor Graph::embed(const Tensor& table, std::span<const int> ids) {
  require(table.node >= 0, OpKind::Embed, "table must be registered in the graph");
  require(table.rank() == 2, OpKind::Embed, "table must be a matrix, got " + table.shape_str());
  Node n;
  n.op = OpKind::Embed;
  n.inputs = {table.node};
  for (int id : ids) {
    require(id >= 0 && id < table.rows(), OpKind::Embed,
            strfmt("token id %d out of range [0, %d)", id, table.rows()));
    n.aux.push_back(id);
  }
  Tensor out = Tensor::zeros({static_cast<int>(ids.size()), table.cols()});
  kernels::gather_rows(table.values.data(), n.aux.data(), out.values.data(),
                       static_cast<int>(ids.size()), table.cols());
  n.value = std::move(out);
  push(std::move(n));
  return nodes_.back().value;
}

Tensor Graph::embed(const Tensor& table, int id) {
  require(table.node >= 0, OpKind::Embed, "table must be registered in the graph");
  require(table.rank() == 2, OpKind::Embed, "table must be a matrix, got " + table.shape_str());
  require(id >= 0 && id < table.rows(), OpKind::Embed,
          strfmt("token id %d out of range [0, %d)", id, table.rows()));
  Node n;
  n.op = OpKind::Embed;
  n.inputs = {table.node};
  n.aux = {id};
  Tensor out = Tensor::zeros({table.cols()});
  kernels::gather_rows(table.values.data(), n.aux.data(), out.values.data(), 1, table.cols());
  n.value = std::move(out);
  push(std::move(n));
  return nodes_.back().value;
}

Tensor Graph::sum(const Tensor& t) {
  require(t.node >= 0, OpKind::Sum, "input must be registered in the graph");
  Node n;
  n.op = OpKind::Sum;
  n.inputs = {t.node};
  n.value = Tensor::scalar(kernels::sum(t.values.data(), t.numel()));
  push(std::move(n));
  return nodes_.back().value;
}

Tensor Graph::affine(const Tensor& t, double alpha, double beta) {
  require(t.node >= 0, OpKind::Scale, "input must be registered in the graph");
  Node n;
  n.op = OpKind::Scale;
  n.inputs = {t.node};
  n.alpha = alpha;
  n.beta = beta;
  Tensor out = Tensor::zeros(t.shape);
  kernels::affine(t.values.data(), out.values.data(), alpha, beta, t.numel());
  n.value = std::move(out);
  push(std::move(n));
  return nodes_.back().value;
}

Tensor Graph::nll_onehot(const Tensor& logits, int target) {
  require(logits.node >= 0, OpKind::NllOneHot, "input must be registered in the graph");
  require(logits.rank() == 1, OpKind::NllOneHot, "expects a logits vector, got " + logits.shape_str());
  const int v = logits.shape[0];
  require(target >= 0 && target < v, OpKind::NllOneHot,
          strfmt("target %d out of range [0, %d)", target, v));
  Node n;
  n.op = OpKind::NllOneHot;
  n.inputs = {logits.node};
  n.aux = {target};
  std::vector<double> logp(static_cast<size_t>(v));
  kernels::log_softmax_row(logits.values.data(), logp.data(), v);
  n.saved.resize(static_cast<size_t>(v));
  for (int c = 0; c < v; ++c) n.saved[static_cast<size_t>(c)] = std::exp(logp[static_cast<size_t>(c)]);
  n.value = Tensor::scalar(-logp[static_cast<size_t>(target)]);
  check_finite(n.value, OpKind::NllOneHot);
  push(std::move(n));
  return nodes_.back().value;
}

GradientMap Graph::backward(const Tensor& loss, const ParameterStore& store) const {
  if (!loss.is_scalar())
    throw RuntimeError("backward: loss must be a scalar, got shape " + loss.shape_str());
  if (loss.node < 0 || loss.node >= num_nodes())
    throw RuntimeError("backward: loss tensor is not registered in this graph");

  std::vector<std::vector<double>> grads(nodes_.size());
  auto ensure = [&](int id) -> std::vector<double>& {
    auto& g = grads[static_cast<size_t>(id)];
    if (g.empty()) g.assign(nodes_[static_cast<size_t>(id)].value.values.size(), 0.0);
    return g;
  };
  ensure(loss.node)[0] = 1.0;

  std::vector<double> tmp;
  for (int i = loss.node; i >= 0; --i) {
    const auto& g = grads[static_cast<size_t>(i)];
    if (g.empty()) continue;
    const Node& n = nodes_[static_cast<size_t>(i)];
    switch (n.op) {
      case OpKind::Input:
      case OpKind::Param:
        break;
      case OpKind::Add: {
        const Tensor& a = in_value(n, 0);
        const Tensor& b = in_value(n, 1);
        kernels::acc(g.data(), ensure(n.inputs[0]).data(), a.numel());
        if (b.numel() == n.value.numel()) {
          kernels::acc(g.data(), ensure(n.inputs[1]).data(), b.numel());
        } else {
          tmp.assign(b.values.size(), 0.0);
          kernels::colsum(g.data(), tmp.data(), n.value.rows(), n.value.cols());
          kernels::acc(tmp.data(), ensure(n.inputs[1]).data(), b.numel());
        }
        break;
      }
      case OpKind::Mul: {
        const Tensor& a = in_value(n, 0);
        const Tensor& b = in_value(n, 1);
        tmp.assign(g.size(), 0.0);
        kernels::mul(g.data(), b.values.data(), tmp.data(), a.numel());
        kernels::acc(tmp.data(), ensure(n.inputs[0]).data(), a.numel());
        kernels::mul(g.data(), a.values.data(), tmp.data(), a.numel());
        kernels::acc(tmp.data(), ensure(n.inputs[1]).data(), b.numel());
        break;
      }
      case OpKind::MatMul: {
        const Tensor& a = in_value(n, 0);
        const Tensor& b = in_value(n, 1);
        if (a.rank() == 2 && b.rank() == 2) {
          const int m = a.rows(), k = a.cols(), c = b.cols();
          tmp.assign(a.values.size(), 0.0);
          kernels::gemm_nt(g.data(), b.values.data(), tmp.data(), m, c, k);
          kernels::acc(tmp.data(), ensure(n.inputs[0]).data(), a.numel());
          tmp.assign(b.values.size(), 0.0);
          kernels::gemm_tn(a.values.data(), g.data(), tmp.data(), k, m, c);
          kernels::acc(tmp.data(), ensure(n.inputs[1]).data(), b.numel());
        } else if (a.rank() == 2 && b.rank() == 1) {
          const int m = a.rows(), k = a.cols();
          tmp.assign(a.values.size(), 0.0);
          kernels::outer(g.data(), b.values.data(), tmp.data(), m, k);
          kernels::acc(tmp.data(), ensure(n.inputs[0]).data(), a.numel());
          tmp.assign(b.values.size(), 0.0);
          kernels::gemv_t(a.values.data(), g.data(), tmp.data(), m, k);
          kernels::acc(tmp.data(), ensure(n.inputs[1]).data(), b.numel());
        } else {
          const int k = b.rows(), c = b.cols();
          tmp.assign(a.values.size(), 0.0);
          kernels::gemv(b.values.data(), g.data(), tmp.data(), k, c);
          kernels::acc(tmp.data(), ensure(n.inputs[0]).data(), a.numel());
          tmp.assign(b.values.size(), 0.0);
          kernels::outer(a.values.data(), g.data(), tmp.data(), k, c);
          kernels::acc(tmp.data(), ensure(n.inputs[1]).data(), b.numel());
        }
        break;
      }
      case OpKind::Concat: {
        int off = 0;
        for (size_t p = 0; p < n.inputs.size(); ++p) {
          const int len = in_value(n, p).shape[0];
          kernels::acc(g.data() + off, ensure(n.inputs[p]).data(), len);
          off += len;
        }
        break;
      }
      case OpKind::Stack: {
        const int d = n.value.cols();
        for (size_t r = 0; r < n.inputs.size(); ++r)
          kernels::acc(g.data() + static_cast<int64_t>(r) * d, ensure(n.inputs[r]).data(), d);
        break;
      }
      case OpKind::Slice: {
        const Tensor& in = in_value(n, 0);
        const int stride = in.rank() == 2 ? in.cols() : 1;
        const int begin = n.aux[0];
        kernels::acc(g.data(), ensure(n.inputs[0]).data() + static_cast<int64_t>(begin) * stride,
                     static_cast<int64_t>(n.aux[1]) * stride);
        break;
      }
      case OpKind::Tanh: {
        tmp.assign(g.size(), 0.0);
        const auto& y = n.value.values;
        for (size_t j = 0; j < y.size(); ++j) tmp[j] = g[j] * (1.0 - y[j] * y[j]);
        kernels::acc(tmp.data(), ensure(n.inputs[0]).data(), n.value.numel());
        break;
      }
      case OpKind::Sigmoid: {
        tmp.assign(g.size(), 0.0);
        const auto& y = n.value.values;
        for (size_t j = 0; j < y.size(); ++j) tmp[j] = g[j] * y[j] * (1.0 - y[j]);
        kernels::acc(tmp.data(), ensure(n.inputs[0]).data(), n.value.numel());
        break;
      }
      case OpKind::Softmax: {
        const int rows = n.value.rank() == 2 ? n.value.rows() : 1;
        const int cols = n.value.rank() == 2 ? n.value.cols() : n.value.shape[0];
        tmp.assign(g.size(), 0.0);
        const auto& y = n.value.values;
        for (int r = 0; r < rows; ++r) {
          const int64_t base = static_cast<int64_t>(r) * cols;
          double dot = 0.0;
          for (int c = 0; c < cols; ++c) dot += g[static_cast<size_t>(base + c)] * y[static_cast<size_t>(base + c)];
          for (int c = 0; c < cols; ++c)
            tmp[static_cast<size_t>(base + c)] =
                y[static_cast<size_t>(base + c)] * (g[static_cast<size_t>(base + c)] - dot);
        }
        kernels::acc(tmp.data(), ensure(n.inputs[0]).data(), n.value.numel());
        break;
      }
      case OpKind::Embed: {
        const Tensor& table = in_value(n, 0);
        kernels::scatter_add_rows(ensure(n.inputs[0]).data(), n.aux.data(), g.data(),
                                  static_cast<int>(n.aux.size()), table.cols());
        break;
      }
      case OpKind::Sum: {
        auto& gin = ensure(n.inputs[0]);
        const double gs = g[0];
        for (double& v : gin) v += gs;
        break;
      }
      case OpKind::Scale: {
        kernels::acc_scaled(g.data(), ensure(n.inputs[0]).data(), n.alpha, n.value.numel());
        break;
      }
      case OpKind::NllOneHot: {
        auto& gin = ensure(n.inputs[0]);
        const double gs = g[0];
        const int target = n.aux[0];
        for (size_t c = 0; c < n.saved.size(); ++c)
          gin[c] += gs * (n.saved[c] - (static_cast<int>(c) == target ? 1.0 : 0.0));
        break;
      }
    }
  }

  GradientMap out;
  for (const auto& name : store.names()) {
    auto it = param_nodes_.find(name);
    if (it != param_nodes_.end() && !grads[static_cast<size_t>(it->second)].empty()) {
      Tensor t(store.at(name).shape, std::move(grads[static_cast<size_t>(it->second)]));
      out.emplace(name, std::move(t));
    } else {
      out.emplace(name, Tensor::zeros(store.at(name).shape));
    }
  }
  return out;
}

}  // namespace pdnmt
