#pragma once

#include <cstdint>
#include <vector>

#include "dssn/tensor.hpp"

namespace dssn {

struct NadamConfig {
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
};

template <typename T>
struct NadamState {
    std::vector<Tensor<T>> m;
    std::vector<Tensor<T>> v;
    std::int64_t step = 0;
};

// One Nesterov-accelerated Adam update (fixed beta1, Dozat's form):
//   m <- b1 m + (1-b1) g,  v <- b2 v + (1-b2) g^2
//   p <- p - lr (b1 m/(1-b1^t) + (1-b1) g/(1-b1^t)) / (sqrt(v/(1-b2^t)) + eps)
// `params[i]` and `grads[i]` must share a shape. State is sized on first use.
template <typename T>
void nadam_step(const std::vector<Tensor<T>*>& params, const std::vector<const Tensor<T>*>& grads,
                NadamState<T>& state, double lr, const NadamConfig& cfg = {});

// lr0 (1 + cos(pi step / total)) / 2 for 0 <= step <= total.
double cosine_lr(std::int64_t step, std::int64_t total, double lr0);

}  // namespace dssn
