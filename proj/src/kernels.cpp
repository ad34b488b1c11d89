#include "njode/kernels.hpp"

#include <cmath>

namespace njode::kernels {

void affine(const double* w, const double* b, const double* x, double* y,
            int rows, int cols) {
  for (int i = 0; i < rows; ++i) {
    const double* wr = w + static_cast<std::size_t>(i) * cols;
    double acc = b[i];
    for (int j = 0; j < cols; ++j) acc += wr[j] * x[j];
    y[i] = acc;
  }
}

void affine_backward(const double* w, const double* x, const double* gy,
                     double* gx, double* gw, double* gb, int rows, int cols) {
  for (int i = 0; i < rows; ++i) {
    const double g = gy[i];
    const double* wr = w + static_cast<std::size_t>(i) * cols;
    double* gwr = gw + static_cast<std::size_t>(i) * cols;
    if (gx != nullptr) {
      for (int j = 0; j < cols; ++j) gx[j] += wr[j] * g;
    }
    for (int j = 0; j < cols; ++j) gwr[j] += g * x[j];
    gb[i] += g;
  }
}

void tanh_forward(const double* x, double* y, int n) {
  for (int i = 0; i < n; ++i) y[i] = std::tanh(x[i]);
}

void axpy(const double* x, double c, const double* z, double* y, int n) {
  for (int i = 0; i < n; ++i) y[i] = x[i] + c * z[i];
}

void sub(const double* a, const double* b, double* y, int n) {
  for (int i = 0; i < n; ++i) y[i] = a[i] - b[i];
}

void add(const double* a, const double* b, double* y, int n) {
  for (int i = 0; i < n; ++i) y[i] = a[i] + b[i];
}

void hadamard(const double* a, const double* b, double* y, int n) {
  for (int i = 0; i < n; ++i) y[i] = a[i] * b[i];
}

void scale(const double* x, double c, double* y, int n) {
  for (int i = 0; i < n; ++i) y[i] = x[i] * c;
}

double l2_norm(const double* x, int n) {
  double acc = 0.0;
  for (int i = 0; i < n; ++i) acc += x[i] * x[i];
  return std::sqrt(acc);
}

double sum(const double* x, int n) {
  double acc = 0.0;
  for (int i = 0; i < n; ++i) acc += x[i];
  return acc;
}

}  // namespace njode::kernels
