#pragma once

#include <cstddef>

namespace njode::kernels {

// Shared numeric kernels. The recording tape and the plain evaluator both
// call these exact functions, so a gradient-tracked forward pass and an
// inference-only forward pass produce bit-identical numbers.

// y = W x + b, W is rows x cols (row-major).
void affine(const double* w, const double* b, const double* x, double* y,
            int rows, int cols);

// gx += W^T gy; gw += gy x^T; gb += gy.
void affine_backward(const double* w, const double* x, const double* gy,
                     double* gx, double* gw, double* gb, int rows, int cols);

void tanh_forward(const double* x, double* y, int n);

// y = x + c * z
void axpy(const double* x, double c, const double* z, double* y, int n);

void sub(const double* a, const double* b, double* y, int n);
void add(const double* a, const double* b, double* y, int n);
void hadamard(const double* a, const double* b, double* y, int n);
void scale(const double* x, double c, double* y, int n);

// Euclidean norm, fixed left-to-right summation order.
double l2_norm(const double* x, int n);

double sum(const double* x, int n);

}  // namespace njode::kernels
