#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace dssn {

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Incompatible extents; the message names the offending axis.
class ShapeError : public Error {
public:
    using Error::Error;
};

// NaN/Inf produced by an op, or an operation whose value is undefined.
class NumericError : public Error {
public:
    using Error::Error;
};

// Four-axis extent in (batch, height, width, channel) order. Vectors are
// 1x1x1xC, scalars 1x1x1x1. Weight tensors reuse the same four slots as
// (kernel_h, kernel_w, in_channels, out_channels).
struct Shape {
    std::array<int, 4> dims{1, 1, 1, 1};

    constexpr Shape() = default;
    constexpr Shape(int n, int h, int w, int c) : dims{n, h, w, c} {}

    constexpr int n() const { return dims[0]; }
    constexpr int h() const { return dims[1]; }
    constexpr int w() const { return dims[2]; }
    constexpr int c() const { return dims[3]; }
    constexpr int operator[](std::size_t i) const { return dims[i]; }

    constexpr std::size_t numel() const
    {
        return static_cast<std::size_t>(dims[0]) * dims[1] * dims[2] * dims[3];
    }
    constexpr std::size_t pixels() const { return static_cast<std::size_t>(dims[1]) * dims[2]; }

    friend constexpr bool operator==(const Shape&, const Shape&) = default;

    std::string str() const;
};

Shape scalar_shape();
Shape vector_shape(int c);

// Dense NHWC tensor with value semantics.
template <typename T>
class Tensor {
public:
    using value_type = T;

    Tensor() : shape_(0, 0, 0, 0) {}
    explicit Tensor(Shape shape, T fill = T(0));
    Tensor(Shape shape, std::vector<T> data);

    static Tensor scalar(T v) { return Tensor(scalar_shape(), v); }

    const Shape& shape() const { return shape_; }
    std::size_t size() const { return data_.size(); }
    bool empty() const { return data_.empty(); }

    T* data() { return data_.data(); }
    const T* data() const { return data_.data(); }
    std::span<T> values() { return data_; }
    std::span<const T> values() const { return data_; }
    std::vector<T>& storage() { return data_; }
    const std::vector<T>& storage() const { return data_; }

    T& operator[](std::size_t i) { return data_[i]; }
    const T& operator[](std::size_t i) const { return data_[i]; }

    std::size_t index(int n, int y, int x, int c) const
    {
        return ((static_cast<std::size_t>(n) * shape_.h() + y) * shape_.w() + x) * shape_.c() + c;
    }
    T& at(int n, int y, int x, int c) { return data_[index(n, y, x, c)]; }
    const T& at(int n, int y, int x, int c) const { return data_[index(n, y, x, c)]; }

    T item() const;
    bool all_finite() const;
    void fill(T v);

    template <typename U>
    Tensor<U> cast() const
    {
        std::vector<U> out(data_.begin(), data_.end());
        return Tensor<U>(shape_, std::move(out));
    }

private:
    Shape shape_;
    std::vector<T> data_;
};

void require_shape(bool ok, const std::string& what);

}  // namespace dssn
