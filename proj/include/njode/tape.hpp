#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace njode::ad {

// Flat storage for all trainable parameters plus their gradient buffer.
// Segments are registered once, in a fixed order, so initialization and
// optimizer sweeps are deterministic.
struct ParamSeg {
  std::string name;
  std::size_t offset = 0;
  int rows = 0;
  int cols = 0;  // 0 for plain vectors (biases)
  std::size_t size() const {
    return static_cast<std::size_t>(rows) * (cols > 0 ? cols : 1);
  }
};

class ParamStore {
 public:
  int add_matrix(const std::string& name, int rows, int cols);
  int add_vector(const std::string& name, int n);

  double* seg_data(int seg) { return theta.data() + segs[seg].offset; }
  const double* seg_data(int seg) const { return theta.data() + segs[seg].offset; }
  double* seg_grad(int seg) { return grad.data() + segs[seg].offset; }

  std::size_t size() const { return theta.size(); }
  void zero_grad();

  std::vector<double> theta;
  std::vector<double> grad;
  std::vector<ParamSeg> segs;
};

// Handle into a Tape's computation record. data/grad live in the tape arena.
struct Value {
  int id = -1;
  int len = 0;
};

enum class Op : std::uint8_t {
  kConstant,  // grad pinned to zero
  kLeaf,      // differentiable input
  kAffine,
  kTanh,
  kConcat,
  kAxpy,
  kAdd,
  kSub,
  kMul,
  kScale,
  kNorm2,
  kSum,
};

// Reverse-mode tape over dense real arrays. Records vector-valued ops in
// topological order; backward() runs one reverse sweep, accumulating into
// the arena grads of every reachable node and, through affine nodes, into
// the owning ParamStore's gradient buffer. Node storage is arena-backed and
// reused across reset() calls, so a steady-state training loop does not
// allocate.
class Tape {
 public:
  explicit Tape(ParamStore* params = nullptr) : params_(params) {}

  void reset();

  Value constant(std::span<const double> x);
  Value constant1(double x);
  Value leaf(std::span<const double> x);
  Value leaf1(double x);

  // y = W x + b with W, b taken from the ParamStore segments.
  Value affine(int seg_w, int seg_b, Value x);
  Value tanh(Value x);
  Value concat(std::span<const Value> xs);
  Value axpy(Value x, double c, Value z);  // x + c*z
  Value add(Value a, Value b);
  Value sub(Value a, Value b);
  Value mul(Value a, Value b);             // elementwise
  Value scale(Value x, double c);
  Value norm2(Value x);                    // -> scalar
  Value sum(Value x);                      // -> scalar

  // Reverse sweep from a scalar output. Node gradients are zeroed first, so
  // repeated backward passes over the same record are reproducible; the
  // ParamStore gradient buffer is accumulated into (callers zero it).
  void backward(Value out, double seed = 1.0);

  std::span<const double> data(Value v) const;
  std::span<const double> grad_of(Value v) const;
  double scalar_data(Value v) const { return data(v)[0]; }

  std::size_t node_count() const { return nodes_.size(); }
  ParamStore* params() const { return params_; }

 private:
  struct Node {
    Op op;
    int len;
    std::size_t data_off;
    std::size_t grad_off;
    int a = -1;
    int b = -1;
    int seg_w = -1;
    int seg_b = -1;
    double c = 0.0;
    int in_begin = 0;
    int in_count = 0;
  };

  int alloc(Op op, int len);
  double* node_data(int id) { return arena_.data() + nodes_[id].data_off; }
  const double* node_data(int id) const { return arena_.data() + nodes_[id].data_off; }
  double* node_grad(int id) { return arena_.data() + nodes_[id].grad_off; }
  const double* node_grad(int id) const { return arena_.data() + nodes_[id].grad_off; }
  void check(Value v) const;

  ParamStore* params_;
  std::vector<Node> nodes_;
  std::vector<double> arena_;
  std::vector<int> concat_inputs_;
};

}  // namespace njode::ad
