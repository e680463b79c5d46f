#include "dssn/model.hpp"

namespace dssn {

namespace {
constexpr int kCanonicalSide = 256;
}

template <typename T>
DssnModel<T>::DssnModel(const ModelConfig& cfg) : cfg_(cfg), store_(cfg.seed)
{
    cfg_.validate();
    sjfe_ = std::make_unique<Sjfe<T>>(store_, "sjfe", cfg_);
    for (int q = 1; q <= 3; ++q) csab_.emplace_back(store_, "csab" + std::to_string(q), cfg_, q);
    if (cfg_.hrfm) {
        hrfm_ = std::make_unique<Hrfm<T>>(store_, "hrfm", cfg_.hrfm_widths);
        hrfm_->check_extents(kCanonicalSide, kCanonicalSide);
    } else {
        stacked_ = std::make_unique<StackedFusion<T>>(store_, "stacked", cfg_.hrfm_widths);
    }
    deep_head_ = Conv<T>(store_, "deep_head", cfg_.channels[4], 1, 1);
}

template <typename T>
ModelOutput<T> DssnModel<T>::forward(const Var<T>& cube) const
{
    const int h = cube.shape().h(), w = cube.shape().w();
    ModelOutput<T> out;
    out.pyramid = (*sjfe_)(cube).joint;
    std::vector<Var<T>> maps;
    for (int q = 1; q <= 3; ++q) {
        CsabOutput<T> c = csab_[q - 1](out.pyramid);
        out.intermediate[q - 1] = c.saliency;
        out.attention[q - 1] = c.attention;
        maps.push_back(c.saliency);
    }
    out.saliency = hrfm_ ? (*hrfm_)(maps, h, w) : (*stacked_)(maps, h, w);
    out.deep = bilinear_resize(sigmoid(deep_head_(out.pyramid.level(5))), h, w);
    return out;
}

template <typename T>
Tensor<T> DssnModel<T>::predict(const Tensor<T>& cube) const
{
    return forward(constant(cube)).saliency.value();
}

template <typename T>
double DssnModel<T>::flops(int h, int w) const
{
    double total = sjfe_->flops(h, w);
    for (const auto& c : csab_) total += c.flops(h, w);
    total += hrfm_ ? hrfm_->flops(h, w) : stacked_->flops(h, w);
    total += deep_head_.flops(level_extent(h, 5), level_extent(w, 5));
    return total;
}

template class DssnModel<float>;
template class DssnModel<double>;

}  // namespace dssn
