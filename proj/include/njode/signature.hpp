#pragma once

#include <vector>

namespace njode {

// Dimension of the truncated signature (levels 1..level) of a d-dimensional
// path: sum of d^k.
int signature_dim(int d, int level);

// Signature blocks of one linear segment with increment v:
// v, v⊗v/2, v⊗v⊗v/6, ... flattened level by level.
std::vector<double> segment_signature(const std::vector<double>& v, int level);

// Chen concatenation product of two flattened signatures over the same
// alphabet: R_m = A_m + sum_j A_j ⊗ B_{m-j} + B_m.
std::vector<double> chen_product(const std::vector<double>& a, const std::vector<double>& b,
                                 int d, int level);

// Signature of the piecewise-linear interpolation of a point sequence,
// built incrementally. A single point is the empty path: zero signature.
class SignatureAccumulator {
 public:
  SignatureAccumulator(int d, int level);

  void append(const std::vector<double>& point);
  const std::vector<double>& features() const { return sig_; }
  bool started() const { return started_; }
  int dim() const { return static_cast<int>(sig_.size()); }
  void reset();

 private:
  int d_;
  int level_;
  bool started_ = false;
  std::vector<double> last_;
  std::vector<double> sig_;
};

// One-shot convenience over a full point sequence.
std::vector<double> truncated_signature(const std::vector<std::vector<double>>& points,
                                        int level);

}  // namespace njode
