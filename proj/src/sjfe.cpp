#include "dssn/sjfe.hpp"

namespace dssn {

int level_extent(int in, int level)
{
    for (int i = 0; i < level; ++i) in = (in + 1) / 2;
    return in;
}

template <typename T>
void FeaturePyramid<T>::validate(int in_h, int in_w, const std::array<int, 5>& channels) const
{
    for (int i = 1; i <= kPyramidLevels; ++i) {
        const Shape s = level(i).shape();
        const Shape want(s.n(), level_extent(in_h, i), level_extent(in_w, i), channels[i - 1]);
        require_shape(s == want, "pyramid level " + std::to_string(i) + " has shape " + s.str() + ", expected " +
                                     want.str());
    }
}

namespace {

void require_min_side(const Shape& s)
{
    if (s.h() < 32 || s.w() < 32)
        throw ShapeError("SJFE: input side must be >= 32, got " + std::to_string(s.h()) + "x" +
                         std::to_string(s.w()));
}

}  // namespace

template <typename T>
SpatialBackbone<T>::SpatialBackbone(ParamStore<T>& store, const std::string& name, const ModelConfig& cfg)
{
    int in_c = cfg.in_bands;
    for (int i = 0; i < kPyramidLevels; ++i) {
        const int out_c = cfg.channels[i];
        const std::string stage = name + ".stage" + std::to_string(i + 1);
        stages_[i].emplace_back(store, stage + ".down", in_c, out_c, 3, 2);
        for (int d = 1; d < cfg.backbone_depth; ++d)
            stages_[i].emplace_back(store, stage + ".conv" + std::to_string(d), out_c, out_c, 3, 1);
        in_c = out_c;
    }
}

template <typename T>
FeaturePyramid<T> SpatialBackbone<T>::operator()(const Var<T>& cube) const
{
    require_min_side(cube.shape());
    FeaturePyramid<T> out;
    Var<T> x = cube;
    for (int i = 0; i < kPyramidLevels; ++i) {
        for (const auto& conv : stages_[i]) x = relu(conv(x));
        out.levels[i] = x;
    }
    return out;
}

template <typename T>
double SpatialBackbone<T>::flops(int h, int w) const
{
    double total = 0;
    for (const auto& stage : stages_)
        for (const auto& conv : stage) {
            total += conv.flops(h, w);
            h = conv.out_extent(h);
            w = conv.out_extent(w);
        }
    return total;
}

template <typename T>
SpectralAttentionBlock<T>::SpectralAttentionBlock(ParamStore<T>& store, const std::string& name, int in_c, int out_c,
                                                  bool downsample)
    : attention(store, name + ".attention", in_c, out_c, 1),
      project(store, name + ".project", in_c, out_c, 1),
      output(store, name + ".output", out_c, out_c, downsample ? 3 : 1, downsample ? 2 : 1)
{
}

template <typename T>
SpectralAttentionOutput<T> SpectralAttentionBlock<T>::operator()(const Var<T>& x) const
{
    require_shape(x.shape().c() >= 1, "spectral attention: input has no channels");
    Var<T> v = softmax_channels(global_avg_pool(attention(x)));
    Var<T> a = relu(project(x));
    return {relu(output(mul(a, v))), v};
}

template <typename T>
double SpectralAttentionBlock<T>::flops(int h, int w) const
{
    return attention.flops(h, w) + project.flops(h, w) + output.flops(h, w);
}

template <typename T>
SpectralBranch<T>::SpectralBranch(ParamStore<T>& store, const std::string& name, const ModelConfig& cfg)
{
    int in_c = cfg.in_bands;
    for (int i = 0; i < kPyramidLevels; ++i) {
        blocks_[i] = SpectralAttentionBlock<T>(store, name + ".level" + std::to_string(i + 1), in_c, cfg.channels[i],
                                               true);
        in_c = cfg.channels[i];
    }
}

template <typename T>
FeaturePyramid<T> SpectralBranch<T>::operator()(const Var<T>& cube, std::vector<Var<T>>* weights) const
{
    require_min_side(cube.shape());
    FeaturePyramid<T> out;
    Var<T> x = cube;
    for (int i = 0; i < kPyramidLevels; ++i) {
        auto r = blocks_[i](x);
        if (weights) weights->push_back(r.weights);
        x = r.features;
        out.levels[i] = x;
    }
    return out;
}

template <typename T>
double SpectralBranch<T>::flops(int h, int w) const
{
    double total = 0;
    for (const auto& b : blocks_) {
        total += b.flops(h, w);
        h = b.output.out_extent(h);
        w = b.output.out_extent(w);
    }
    return total;
}

template <typename T>
Var<T> hierarchical_fuse(const Var<T>& spatial, const Var<T>& spectral, const Conv<T>& reweight)
{
    require_shape(spatial.shape() == spectral.shape(), "hierarchical_fuse: spatial " + spatial.shape().str() +
                                                           " vs spectral " + spectral.shape().str());
    Var<T> recal_spec = mul(relu(reweight(spatial)), spectral);
    Var<T> recal_spat = mul(spatial, global_avg_pool(spectral));
    return add(recal_spec, recal_spat);
}

template <typename T>
Sjfe<T>::Sjfe(ParamStore<T>& store, const std::string& name, const ModelConfig& cfg) : cfg_(cfg)
{
    cfg.validate();
    if (cfg.spatial_branch) spatial_.emplace_back(store, name + ".spatial", cfg);
    if (cfg.spectral_branch) spectral_.emplace_back(store, name + ".spectral", cfg);
    for (int i = 0; i < kPyramidLevels; ++i)
        reweight_[i] = Conv<T>(store, name + ".fuse" + std::to_string(i + 1), cfg.channels[i], cfg.channels[i], 1);
}

template <typename T>
SjfeOutput<T> Sjfe<T>::operator()(const Var<T>& cube) const
{
    require_shape(cube.shape().c() == cfg_.in_bands, "SJFE: channel axis mismatch, cube has " +
                                                         std::to_string(cube.shape().c()) + " bands, model expects " +
                                                         std::to_string(cfg_.in_bands));
    SjfeOutput<T> out;
    if (!spatial_.empty()) out.spatial = spatial_.front()(cube);
    if (!spectral_.empty()) out.spectral = spectral_.front()(cube);
    if (spatial_.empty()) out.spatial = out.spectral;
    if (spectral_.empty()) out.spectral = out.spatial;
    for (int i = 0; i < kPyramidLevels; ++i)
        out.joint.levels[i] = hierarchical_fuse(out.spatial.levels[i], out.spectral.levels[i], reweight_[i]);
    return out;
}

template <typename T>
double Sjfe<T>::flops(int h, int w) const
{
    double total = 0;
    if (!spatial_.empty()) total += spatial_.front().flops(h, w);
    if (!spectral_.empty()) total += spectral_.front().flops(h, w);
    for (int i = 0; i < kPyramidLevels; ++i)
        total += reweight_[i].flops(level_extent(h, i + 1), level_extent(w, i + 1));
    return total;
}

template struct FeaturePyramid<float>;
template struct FeaturePyramid<double>;
template class SpatialBackbone<float>;
template class SpatialBackbone<double>;
template class SpectralAttentionBlock<float>;
template class SpectralAttentionBlock<double>;
template class SpectralBranch<float>;
template class SpectralBranch<double>;
template class Sjfe<float>;
template class Sjfe<double>;
template Var<float> hierarchical_fuse(const Var<float>&, const Var<float>&, const Conv<float>&);
template Var<double> hierarchical_fuse(const Var<double>&, const Var<double>&, const Conv<double>&);

}  // namespace dssn
