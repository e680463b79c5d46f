#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "dssn/ops.hpp"

namespace dssn {

// Named, ordered collection of trainable leaves. The order of creation is
// the serialization order.
template <typename T>
class ParamStore {
public:
    explicit ParamStore(std::uint64_t seed = 7) : rng_(seed) {}

    // Kaiming-uniform (ReLU gain) for weights with the given fan-in.
    Var<T> kaiming(const std::string& name, Shape shape, int fan_in);
    Var<T> zeros(const std::string& name, Shape shape);
    Var<T> add(const std::string& name, Tensor<T> value);

    const std::vector<std::string>& names() const { return names_; }
    const std::vector<Var<T>>& vars() const { return vars_; }
    std::vector<Var<T>>& vars() { return vars_; }
    std::size_t scalar_count() const;

    // Resets every gradient slot to zeros of the parameter's shape.
    void zero_grad();

private:
    std::mt19937_64 rng_;
    std::vector<std::string> names_;
    std::vector<Var<T>> vars_;
};

// k x k convolution with optional bias. Kernel 1 or 3, stride 1 or 2.
template <typename T>
class Conv {
public:
    Conv() = default;
    Conv(ParamStore<T>& store, const std::string& name, int in_c, int out_c, int kernel, int stride = 1,
         bool bias = true);

    Var<T> operator()(const Var<T>& x) const { return conv2d(x, weight, bias, stride); }

    // Multiply-accumulates x2 for an input of the given extent.
    double flops(int in_h, int in_w) const;
    int out_extent(int in) const;

    Var<T> weight;
    Var<T> bias;
    int in_channels = 0;
    int out_channels = 0;
    int kernel = 1;
    int stride = 1;
};

}  // namespace dssn
