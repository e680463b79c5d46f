#pragma once

#include <vector>

#include "dssn/tensor.hpp"

namespace dssn::kernels {

// One axis of a half-pixel bilinear resample: output index i reads input
// rows lo[i] and hi[i] with weight frac[i] on hi.
struct LinearTaps {
    std::vector<int> lo;
    std::vector<int> hi;
    std::vector<double> frac;
};

LinearTaps linear_taps(int in, int out);

template <typename T>
Tensor<T> bilinear_resize(const Tensor<T>& x, int out_h, int out_w);

// Adjoint of bilinear_resize: scatters `grad_out` back to an input of extent
// (in_h, in_w).
template <typename T>
Tensor<T> bilinear_resize_adjoint(const Tensor<T>& grad_out, int in_h, int in_w);

template <typename T>
Tensor<T> conv2d_forward(const Tensor<T>& x, const Tensor<T>& w, const Tensor<T>* bias, int stride);

// Returns dx; accumulates into dw and db (db may be null).
template <typename T>
Tensor<T> conv2d_backward(const Tensor<T>& x, const Tensor<T>& w, const Tensor<T>& grad_out, int stride,
                          Tensor<T>& dw, Tensor<T>* db, bool need_dx);

int conv_out_extent(int in, int kernel, int stride);

}  // namespace dssn::kernels
