#include "njode/tape.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>

#include "njode/errors.hpp"
#include "njode/kernels.hpp"

namespace njode::ad {

int ParamStore::add_matrix(const std::string& name, int rows, int cols) {
  if (rows <= 0 || cols <= 0) throw UsageError("param matrix dims must be positive: " + name);
  ParamSeg seg{name, theta.size(), rows, cols};
  theta.resize(theta.size() + seg.size(), 0.0);
  grad.resize(theta.size(), 0.0);
  segs.push_back(seg);
  return static_cast<int>(segs.size()) - 1;
}

int ParamStore::add_vector(const std::string& name, int n) {
  if (n <= 0) throw UsageError("param vector length must be positive: " + name);
  ParamSeg seg{name, theta.size(), n, 0};
  theta.resize(theta.size() + seg.size(), 0.0);
  grad.resize(theta.size(), 0.0);
  segs.push_back(seg);
  return static_cast<int>(segs.size()) - 1;
}

void ParamStore::zero_grad() { std::fill(grad.begin(), grad.end(), 0.0); }

void Tape::reset() {
  nodes_.clear();
  arena_.clear();
  concat_inputs_.clear();
}

int Tape::alloc(Op op, int len) {
  if (len <= 0) throw UsageError("tape value length must be positive");
  Node n;
  n.op = op;
  n.len = len;
  n.data_off = arena_.size();
  n.grad_off = arena_.size() + static_cast<std::size_t>(len);
  arena_.resize(arena_.size() + 2 * static_cast<std::size_t>(len), 0.0);
  nodes_.push_back(n);
  return static_cast<int>(nodes_.size()) - 1;
}

void Tape::check(Value v) const {
  if (v.id < 0 || v.id >= static_cast<int>(nodes_.size()))
    throw UsageError("tape value handle out of range");
  if (v.len != nodes_[v.id].len) throw UsageError("tape value handle length mismatch");
}

Value Tape::constant(std::span<const double> x) {
  int id = alloc(Op::kConstant, static_cast<int>(x.size()));
  std::memcpy(node_data(id), x.data(), x.size() * sizeof(double));
  return {id, static_cast<int>(x.size())};
}

Value Tape::constant1(double x) { return constant(std::span<const double>(&x, 1)); }

Value Tape::leaf(std::span<const double> x) {
  int id = alloc(Op::kLeaf, static_cast<int>(x.size()));
  std::memcpy(node_data(id), x.data(), x.size() * sizeof(double));
  return {id, static_cast<int>(x.size())};
}

Value Tape::leaf1(double x) { return leaf(std::span<const double>(&x, 1)); }

Value Tape::affine(int seg_w, int seg_b, Value x) {
  check(x);
  if (params_ == nullptr) throw UsageError("affine requires a ParamStore");
  const ParamSeg& w = params_->segs.at(static_cast<std::size_t>(seg_w));
  const ParamSeg& b = params_->segs.at(static_cast<std::size_t>(seg_b));
  if (w.cols != x.len) throw UsageError("affine: W cols != x len for " + w.name);
  if (b.rows != w.rows || b.cols != 0) throw UsageError("affine: bias shape mismatch for " + b.name);
  int id = alloc(Op::kAffine, w.rows);
  Node& n = nodes_[id];
  n.a = x.id;
  n.seg_w = seg_w;
  n.seg_b = seg_b;
  kernels::affine(params_->seg_data(seg_w), params_->seg_data(seg_b),
                  node_data(x.id), node_data(id), w.rows, w.cols);
  return {id, w.rows};
}

Value Tape::tanh(Value x) {
  check(x);
  int id = alloc(Op::kTanh, x.len);
  nodes_[id].a = x.id;
  kernels::tanh_forward(node_data(x.id), node_data(id), x.len);
  return {id, x.len};
}

Value Tape::concat(std::span<const Value> xs) {
  if (xs.empty()) throw UsageError("concat needs at least one input");
  int total = 0;
  for (const Value& v : xs) {
    check(v);
    total += v.len;
  }
  int id = alloc(Op::kConcat, total);
  Node& n = nodes_[id];
  n.in_begin = static_cast<int>(concat_inputs_.size());
  n.in_count = static_cast<int>(xs.size());
  for (const Value& v : xs) concat_inputs_.push_back(v.id);
  double* out = node_data(id);
  for (const Value& v : xs) {
    std::memcpy(out, node_data(v.id), static_cast<std::size_t>(v.len) * sizeof(double));
    out += v.len;
  }
  return {id, total};
}

Value Tape::axpy(Value x, double c, Value z) {
  check(x);
  check(z);
  if (x.len != z.len) throw UsageError("axpy: length mismatch");
  int id = alloc(Op::kAxpy, x.len);
  Node& n = nodes_[id];
  n.a = x.id;
  n.b = z.id;
  n.c = c;
  kernels::axpy(node_data(x.id), c, node_data(z.id), node_data(id), x.len);
  return {id, x.len};
}

Value Tape::add(Value a, Value b) {
  check(a);
  check(b);
  if (a.len != b.len) throw UsageError("add: length mismatch");
  int id = alloc(Op::kAdd, a.len);
  nodes_[id].a = a.id;
  nodes_[id].b = b.id;
  kernels::add(node_data(a.id), node_data(b.id), node_data(id), a.len);
  return {id, a.len};
}

Value Tape::sub(Value a, Value b) {
  check(a);
  check(b);
  if (a.len != b.len) throw UsageError("sub: length mismatch");
  int id = alloc(Op::kSub, a.len);
  nodes_[id].a = a.id;
  nodes_[id].b = b.id;
  kernels::sub(node_data(a.id), node_data(b.id), node_data(id), a.len);
  return {id, a.len};
}

Value Tape::mul(Value a, Value b) {
  check(a);
  check(b);
  if (a.len != b.len) throw UsageError("mul: length mismatch");
  int id = alloc(Op::kMul, a.len);
  nodes_[id].a = a.id;
  nodes_[id].b = b.id;
  kernels::hadamard(node_data(a.id), node_data(b.id), node_data(id), a.len);
  return {id, a.len};
}

Value Tape::scale(Value x, double c) {
  check(x);
  int id = alloc(Op::kScale, x.len);
  nodes_[id].a = x.id;
  nodes_[id].c = c;
  kernels::scale(node_data(x.id), c, node_data(id), x.len);
  return {id, x.len};
}

Value Tape::norm2(Value x) {
  check(x);
  int id = alloc(Op::kNorm2, 1);
  nodes_[id].a = x.id;
  node_data(id)[0] = kernels::l2_norm(node_data(x.id), x.len);
  return {id, 1};
}

Value Tape::sum(Value x) {
  check(x);
  int id = alloc(Op::kSum, 1);
  nodes_[id].a = x.id;
  node_data(id)[0] = kernels::sum(node_data(x.id), x.len);
  return {id, 1};
}

void Tape::backward(Value out, double seed) {
  check(out);
  if (out.len != 1) throw UsageError("backward requires a scalar output");
  // Zero only the node grads; ParamStore.grad accumulates across calls.
  for (const Node& n : nodes_)
    std::fill(arena_.begin() + static_cast<std::ptrdiff_t>(n.grad_off),
              arena_.begin() + static_cast<std::ptrdiff_t>(n.grad_off) + n.len, 0.0);
  node_grad(out.id)[0] = seed;

  for (int id = out.id; id >= 0; --id) {
    const Node& n = nodes_[static_cast<std::size_t>(id)];
    const double* g = node_grad(id);
    switch (n.op) {
      case Op::kConstant:
      case Op::kLeaf:
        break;
      case Op::kAffine: {
        const ParamSeg& w = params_->segs[static_cast<std::size_t>(n.seg_w)];
        kernels::affine_backward(params_->seg_data(n.seg_w), node_data(n.a), g,
                                 nodes_[n.a].op == Op::kConstant ? nullptr : node_grad(n.a),
                                 params_->seg_grad(n.seg_w), params_->seg_grad(n.seg_b),
                                 w.rows, w.cols);
        break;
      }
      case Op::kTanh: {
        if (nodes_[n.a].op == Op::kConstant) break;
        const double* y = node_data(id);
        double* gx = node_grad(n.a);
        for (int i = 0; i < n.len; ++i) gx[i] += g[i] * (1.0 - y[i] * y[i]);
        break;
      }
      case Op::kConcat: {
        const double* gp = g;
        for (int k = 0; k < n.in_count; ++k) {
          int src = concat_inputs_[static_cast<std::size_t>(n.in_begin + k)];
          int len = nodes_[src].len;
          if (nodes_[src].op != Op::kConstant) {
            double* gx = node_grad(src);
            for (int i = 0; i < len; ++i) gx[i] += gp[i];
          }
          gp += len;
        }
        break;
      }
      case Op::kAxpy: {
        if (nodes_[n.a].op != Op::kConstant) {
          double* gx = node_grad(n.a);
          for (int i = 0; i < n.len; ++i) gx[i] += g[i];
        }
        if (nodes_[n.b].op != Op::kConstant) {
          double* gz = node_grad(n.b);
          for (int i = 0; i < n.len; ++i) gz[i] += n.c * g[i];
        }
        break;
      }
      case Op::kAdd: {
        if (nodes_[n.a].op != Op::kConstant) {
          double* ga = node_grad(n.a);
          for (int i = 0; i < n.len; ++i) ga[i] += g[i];
        }
        if (nodes_[n.b].op != Op::kConstant) {
          double* gb = node_grad(n.b);
          for (int i = 0; i < n.len; ++i) gb[i] += g[i];
        }
        break;
      }
      case Op::kSub: {
        if (nodes_[n.a].op != Op::kConstant) {
          double* ga = node_grad(n.a);
          for (int i = 0; i < n.len; ++i) ga[i] += g[i];
        }
        if (nodes_[n.b].op != Op::kConstant) {
          double* gb = node_grad(n.b);
          for (int i = 0; i < n.len; ++i) gb[i] -= g[i];
        }
        break;
      }
      case Op::kMul: {
        const double* xa = node_data(n.a);
        const double* xb = node_data(n.b);
        if (nodes_[n.a].op != Op::kConstant) {
          double* ga = node_grad(n.a);
          for (int i = 0; i < n.len; ++i) ga[i] += g[i] * xb[i];
        }
        if (nodes_[n.b].op != Op::kConstant) {
          double* gb = node_grad(n.b);
          for (int i = 0; i < n.len; ++i) gb[i] += g[i] * xa[i];
        }
        break;
      }
      case Op::kScale: {
        if (nodes_[n.a].op == Op::kConstant) break;
        double* gx = node_grad(n.a);
        for (int i = 0; i < n.len; ++i) gx[i] += n.c * g[i];
        break;
      }
      case Op::kNorm2: {
        if (nodes_[n.a].op == Op::kConstant) break;
        const double r = node_data(id)[0];
        // Subgradient 0 at the origin keeps the sweep finite.
        if (r == 0.0) break;
        const double s = g[0] / r;
        const double* x = node_data(n.a);
        double* gx = node_grad(n.a);
        int len = nodes_[n.a].len;
        for (int i = 0; i < len; ++i) gx[i] += s * x[i];
        break;
      }
      case Op::kSum: {
        if (nodes_[n.a].op == Op::kConstant) break;
        double* gx = node_grad(n.a);
        int len = nodes_[n.a].len;
        for (int i = 0; i < len; ++i) gx[i] += g[0];
        break;
      }
    }
  }
}

std::span<const double> Tape::data(Value v) const {
  check(v);
  return {node_data(v.id), static_cast<std::size_t>(v.len)};
}

std::span<const double> Tape::grad_of(Value v) const {
  check(v);
  return {node_grad(v.id), static_cast<std::size_t>(v.len)};
}

}  // namespace njode::ad
