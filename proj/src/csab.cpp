#include "dssn/csab.hpp"

namespace dssn {

template <typename T>
AlignedFeatures<T> shape_align(const FeaturePyramid<T>& pyramid, int q, const std::vector<Conv<T>>& projections)
{
    if (q < 1 || q > 3) throw ShapeError("shape_align: query level must be 1, 2 or 3, got " + std::to_string(q));
    require_shape(static_cast<int>(projections.size()) == kPyramidLevels - q + 1,
                  "shape_align: need one projection per level " + std::to_string(q) + "..5");
    const Shape qs = pyramid.level(q).shape();
    AlignedFeatures<T> out;
    for (int lvl = q; lvl <= kPyramidLevels; ++lvl) {
        Var<T> p = bilinear_resize(projections[lvl - q](pyramid.level(lvl)), qs.h(), qs.w());
        if (lvl == q)
            out.query = p;
        else
            out.keys.push_back(p);
    }
    return out;
}

template <typename T>
Var<T> similarity_maps(const Var<T>& query, const std::vector<Var<T>>& values)
{
    require_shape(!values.empty(), "similarity_maps: need at least one key level");
    std::vector<Var<T>> maps;
    for (const auto& v : values) maps.push_back(channel_distance(query, v));
    return maps.size() == 1 ? maps.front() : concat_channels(maps);
}

template <typename T>
Var<T> pixelwise_attention(const Var<T>& query, const std::vector<Var<T>>& keys)
{
    require_shape(!keys.empty(), "pixelwise_attention: need at least one key level");
    std::vector<Var<T>> logits;
    for (const auto& k : keys) logits.push_back(pixel_dot(query, k));
    return softmax_channels(logits.size() == 1 ? logits.front() : concat_channels(logits));
}

template <typename T>
Var<T> aggregate(const Var<T>& attention, const Var<T>& maps)
{
    require_shape(attention.shape() == maps.shape(),
                  "aggregate: attention " + attention.shape().str() + " vs maps " + maps.shape().str());
    return sum_channels(mul(attention, maps));
}

template <typename T>
Csab<T>::Csab(ParamStore<T>& store, const std::string& name, const ModelConfig& cfg, int q)
    : q_(q), pixelwise_(cfg.pixelwise_attention)
{
    if (q < 1 || q > 3) throw ShapeError("Csab: query level must be 1, 2 or 3");
    cfg.validate();
    const int hidden = cfg.hidden_width();
    if (hidden <= 0) throw ConfigError("Csab: hidden width must be positive");
    for (int lvl = q; lvl <= kPyramidLevels; ++lvl)
        align.emplace_back(store, name + ".align" + std::to_string(lvl), cfg.channels[lvl - 1], hidden, 1);
    q_proj = Conv<T>(store, name + ".q_proj", hidden, hidden, 1);
    for (int lvl = q + 1; lvl <= kPyramidLevels; ++lvl) {
        if (pixelwise_) k_proj.emplace_back(store, name + ".k_proj" + std::to_string(lvl), hidden, hidden, 1);
        v_proj.emplace_back(store, name + ".v_proj" + std::to_string(lvl), hidden, hidden, 1);
    }
}

template <typename T>
CsabOutput<T> Csab<T>::operator()(const FeaturePyramid<T>& pyramid) const
{
    AlignedFeatures<T> aligned = shape_align(pyramid, q_, align);
    Var<T> query = q_proj(aligned.query);
    std::vector<Var<T>> keys, values;
    for (std::size_t j = 0; j < aligned.keys.size(); ++j) {
        if (pixelwise_) keys.push_back(k_proj[j](aligned.keys[j]));
        values.push_back(v_proj[j](aligned.keys[j]));
    }
    CsabOutput<T> out;
    out.similarity = similarity_maps(query, values);
    if (pixelwise_) {
        out.attention = pixelwise_attention(query, keys);
        out.saliency = aggregate(out.attention, out.similarity);
    } else {
        out.saliency = sum_channels(out.similarity);
    }
    return out;
}

template <typename T>
double Csab<T>::flops(int h, int w) const
{
    const int qh = level_extent(h, q_), qw = level_extent(w, q_);
    double total = 0;
    for (int lvl = q_; lvl <= kPyramidLevels; ++lvl)
        total += align[lvl - q_].flops(level_extent(h, lvl), level_extent(w, lvl));
    total += q_proj.flops(qh, qw);
    for (const auto& k : k_proj) total += k.flops(qh, qw);
    for (const auto& v : v_proj) total += v.flops(qh, qw);
    // Distances and attention logits: one multiply-add per hidden channel each.
    const double per_key = 2.0 * qh * qw * q_proj.out_channels;
    total += per_key * static_cast<double>(v_proj.size() + k_proj.size());
    return total;
}

#define DSSN_CSAB(T)                                                                                              \
    template struct AlignedFeatures<T>;                                                                           \
    template AlignedFeatures<T> shape_align(const FeaturePyramid<T>&, int, const std::vector<Conv<T>>&);          \
    template Var<T> similarity_maps(const Var<T>&, const std::vector<Var<T>>&);                                   \
    template Var<T> pixelwise_attention(const Var<T>&, const std::vector<Var<T>>&);                               \
    template Var<T> aggregate(const Var<T>&, const Var<T>&);                                                      \
    template class Csab<T>;

DSSN_CSAB(float)
DSSN_CSAB(double)

}  // namespace dssn
