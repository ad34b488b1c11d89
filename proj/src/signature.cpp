#include "njode/signature.hpp"

#include <string>

#include "njode/errors.hpp"

namespace njode {

namespace {

// Entry count of level block k (1-based) for alphabet size d.
std::size_t block_size(int d, int k) {
  std::size_t s = 1;
  for (int i = 0; i < k; ++i) s *= static_cast<std::size_t>(d);
  return s;
}

std::size_t block_offset(int d, int k) {
  std::size_t off = 0;
  for (int i = 1; i < k; ++i) off += block_size(d, i);
  return off;
}

void check_args(int d, int level) {
  if (d < 1) throw UsageError("signature: alphabet size must be >= 1");
  if (level < 1 || level > 3)
    throw UsageError("signature: level must be in {1,2,3}, got " + std::to_string(level));
}

}  // namespace

int signature_dim(int d, int level) {
  check_args(d, level);
  std::size_t total = 0;
  for (int k = 1; k <= level; ++k) total += block_size(d, k);
  return static_cast<int>(total);
}

std::vector<double> segment_signature(const std::vector<double>& v, int level) {
  const int d = static_cast<int>(v.size());
  check_args(d, level);
  std::vector<double> sig(static_cast<std::size_t>(signature_dim(d, level)), 0.0);
  // 1/k! factors of the exponential of a one-letter word.
  double* b1 = sig.data();
  for (int i = 0; i < d; ++i) b1[i] = v[static_cast<std::size_t>(i)];
  if (level >= 2) {
    double* b2 = sig.data() + block_offset(d, 2);
    for (int i = 0; i < d; ++i)
      for (int j = 0; j < d; ++j)
        b2[i * d + j] = v[static_cast<std::size_t>(i)] * v[static_cast<std::size_t>(j)] / 2.0;
  }
  if (level >= 3) {
    double* b3 = sig.data() + block_offset(d, 3);
    for (int i = 0; i < d; ++i)
      for (int j = 0; j < d; ++j)
        for (int k = 0; k < d; ++k)
          b3[(i * d + j) * d + k] = v[static_cast<std::size_t>(i)] *
                                    v[static_cast<std::size_t>(j)] *
                                    v[static_cast<std::size_t>(k)] / 6.0;
  }
  return sig;
}

std::vector<double> chen_product(const std::vector<double>& a, const std::vector<double>& b,
                                 int d, int level) {
  check_args(d, level);
  const std::size_t dim = static_cast<std::size_t>(signature_dim(d, level));
  if (a.size() != dim || b.size() != dim)
    throw UsageError("chen_product: signature length mismatch");

  std::vector<double> out(dim, 0.0);
  for (int m = 1; m <= level; ++m) {
    double* r = out.data() + block_offset(d, m);
    const std::size_t nm = block_size(d, m);
    const double* am = a.data() + block_offset(d, m);
    const double* bm = b.data() + block_offset(d, m);
    for (std::size_t i = 0; i < nm; ++i) r[i] = am[i] + bm[i];
    for (int j = 1; j < m; ++j) {
      const double* aj = a.data() + block_offset(d, j);
      const double* bk = b.data() + block_offset(d, m - j);
      const std::size_t nj = block_size(d, j);
      const std::size_t nk = block_size(d, m - j);
      for (std::size_t x = 0; x < nj; ++x)
        for (std::size_t y = 0; y < nk; ++y) r[x * nk + y] += aj[x] * bk[y];
    }
  }
  return out;
}

SignatureAccumulator::SignatureAccumulator(int d, int level) : d_(d), level_(level) {
  check_args(d, level);
  sig_.assign(static_cast<std::size_t>(signature_dim(d, level)), 0.0);
}

void SignatureAccumulator::append(const std::vector<double>& point) {
  if (static_cast<int>(point.size()) != d_)
    throw UsageError("signature append: point dimension mismatch");
  if (!started_) {
    last_ = point;
    started_ = true;
    return;
  }
  std::vector<double> delta(static_cast<std::size_t>(d_));
  for (int i = 0; i < d_; ++i)
    delta[static_cast<std::size_t>(i)] = point[static_cast<std::size_t>(i)] -
                                         last_[static_cast<std::size_t>(i)];
  sig_ = chen_product(sig_, segment_signature(delta, level_), d_, level_);
  last_ = point;
}

void SignatureAccumulator::reset() {
  started_ = false;
  last_.clear();
  std::fill(sig_.begin(), sig_.end(), 0.0);
}

std::vector<double> truncated_signature(const std::vector<std::vector<double>>& points,
                                        int level) {
  if (points.empty()) throw UsageError("truncated_signature: empty point sequence");
  SignatureAccumulator acc(static_cast<int>(points.front().size()), level);
  for (const auto& p : points) acc.append(p);
  return acc.features();
}

}  // namespace njode
