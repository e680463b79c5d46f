#include "dssn/tensor.hpp"

#include <cmath>
#include <sstream>

namespace dssn {

std::string Shape::str() const
{
    std::ostringstream os;
    os << "(" << dims[0] << "," << dims[1] << "," << dims[2] << "," << dims[3] << ")";
    return os.str();
}

Shape scalar_shape() { return Shape(1, 1, 1, 1); }
Shape vector_shape(int c) { return Shape(1, 1, 1, c); }

void require_shape(bool ok, const std::string& what)
{
    if (!ok) throw ShapeError(what);
}

template <typename T>
Tensor<T>::Tensor(Shape shape, T fill) : shape_(shape)
{
    for (int d : shape.dims) require_shape(d >= 0, "negative extent in " + shape.str());
    data_.assign(shape.numel(), fill);
}

template <typename T>
Tensor<T>::Tensor(Shape shape, std::vector<T> data) : shape_(shape), data_(std::move(data))
{
    require_shape(data_.size() == shape.numel(),
                  "tensor data length " + std::to_string(data_.size()) + " != numel of " + shape.str());
}

template <typename T>
T Tensor<T>::item() const
{
    require_shape(data_.size() == 1, "item() on non-scalar " + shape_.str());
    return data_[0];
}

template <typename T>
bool Tensor<T>::all_finite() const
{
    for (T v : data_)
        if (!std::isfinite(v)) return false;
    return true;
}

template <typename T>
void Tensor<T>::fill(T v)
{
    std::fill(data_.begin(), data_.end(), v);
}

template class Tensor<float>;
template class Tensor<double>;

}  // namespace dssn
