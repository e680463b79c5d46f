#pragma once

#include <span>
#include <vector>

#include "dssn/autograd.hpp"

namespace dssn {

// Differentiable ops over NHWC tensors. Every op validates shapes and throws
// ShapeError naming the mismatched axis.

// Cross-correlation. `weights` is (k, k, in_c, out_c) with k in {1, 3};
// stride in {1, 2}. 3x3 kernels use zero "same" padding, so the output
// extent is ceil(in / stride). `bias` may be undefined (no bias) or 1x1x1xout_c.
template <typename T>
Var<T> conv2d(const Var<T>& x, const Var<T>& weights, const Var<T>& bias, int stride = 1);

// Half-pixel-center bilinear interpolation (no corner alignment).
template <typename T>
Var<T> bilinear_resize(const Var<T>& x, int out_h, int out_w);

// N x H x W x C -> N x 1 x 1 x C.
template <typename T>
Var<T> global_avg_pool(const Var<T>& x);

// Softmax across the channel axis at every (n, y, x).
template <typename T>
Var<T> softmax_channels(const Var<T>& x);

// Per-pixel Euclidean norm of (a - b) across channels -> N x H x W x 1.
template <typename T>
Var<T> channel_distance(const Var<T>& a, const Var<T>& b);

// Per-pixel dot product across channels -> N x H x W x 1.
template <typename T>
Var<T> pixel_dot(const Var<T>& a, const Var<T>& b);

// Elementwise product. Either operand may be an N x 1 x 1 x C channel vector
// broadcast over every pixel of the other.
template <typename T>
Var<T> mul(const Var<T>& a, const Var<T>& b);

// Elementwise sum, same broadcasting cases as mul.
template <typename T>
Var<T> add(const Var<T>& a, const Var<T>& b);

template <typename T>
Var<T> add_n(const std::vector<Var<T>>& xs);

template <typename T>
Var<T> concat_channels(const std::vector<Var<T>>& xs);

// Sum across channels -> N x H x W x 1.
template <typename T>
Var<T> sum_channels(const Var<T>& x);

template <typename T>
Var<T> relu(const Var<T>& x);

template <typename T>
Var<T> sigmoid(const Var<T>& x);

template <typename T>
Var<T> scale(const Var<T>& x, T factor);

// Sum / mean of every element -> scalar.
template <typename T>
Var<T> sum(const Var<T>& x);

template <typename T>
Var<T> mean(const Var<T>& x);

// Plain scalar helpers shared by ops and baselines.
double pairwise_euclidean(std::span<const double> a, std::span<const double> b);
void softmax_inplace(std::span<double> logits);

}  // namespace dssn
