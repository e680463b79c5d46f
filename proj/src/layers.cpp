#include "dssn/layers.hpp"

#include <cmath>

#include "dssn/kernels.hpp"
#include "dssn/random.hpp"

namespace dssn {

template <typename T>
Var<T> ParamStore<T>::add(const std::string& name, Tensor<T> value)
{
    for (const auto& n : names_)
        if (n == name) throw Error("ParamStore: duplicate parameter name " + name);
    names_.push_back(name);
    vars_.push_back(leaf(std::move(value), true));
    return vars_.back();
}

template <typename T>
Var<T> ParamStore<T>::kaiming(const std::string& name, Shape shape, int fan_in)
{
    const double bound = std::sqrt(6.0 / fan_in);
    Tensor<T> w(shape);
    for (auto& v : w.values()) v = static_cast<T>(uniform(rng_, -bound, bound));
    return add(name, std::move(w));
}

template <typename T>
Var<T> ParamStore<T>::zeros(const std::string& name, Shape shape)
{
    return add(name, Tensor<T>(shape));
}

template <typename T>
std::size_t ParamStore<T>::scalar_count() const
{
    std::size_t n = 0;
    for (const auto& v : vars_) n += v.value().size();
    return n;
}

template <typename T>
void ParamStore<T>::zero_grad()
{
    for (auto& v : vars_) {
        auto& g = v.mutable_grad();
        if (g.shape() == v.shape())
            g.fill(T(0));
        else
            g = Tensor<T>(v.shape());
    }
}

template <typename T>
Conv<T>::Conv(ParamStore<T>& store, const std::string& name, int in_c, int out_c, int k, int s, bool with_bias)
    : in_channels(in_c), out_channels(out_c), kernel(k), stride(s)
{
    if (!(k == 1 || k == 3)) throw ShapeError("Conv " + name + ": kernel must be 1 or 3");
    if (!(s == 1 || s == 2)) throw ShapeError("Conv " + name + ": stride must be 1 or 2");
    weight = store.kaiming(name + ".weight", Shape(k, k, in_c, out_c), k * k * in_c);
    if (with_bias) bias = store.zeros(name + ".bias", vector_shape(out_c));
}

template <typename T>
int Conv<T>::out_extent(int in) const
{
    return kernels::conv_out_extent(in, kernel, stride);
}

template <typename T>
double Conv<T>::flops(int in_h, int in_w) const
{
    return 2.0 * out_extent(in_h) * out_extent(in_w) * out_channels * in_channels * kernel * kernel;
}

template class ParamStore<float>;
template class ParamStore<double>;
template class Conv<float>;
template class Conv<double>;

}  // namespace dssn
