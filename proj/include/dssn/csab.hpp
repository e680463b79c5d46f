#pragma once

#include <vector>

#include "dssn/sjfe.hpp"

namespace dssn {

// Query level q plus key levels q+1..5, all projected to the hidden width
// and resized to level q's extent.
template <typename T>
struct AlignedFeatures {
    Var<T> query;
    std::vector<Var<T>> keys;
};

// `projections[k]` maps pyramid level q+k to the hidden width.
template <typename T>
AlignedFeatures<T> shape_align(const FeaturePyramid<T>& pyramid, int q, const std::vector<Conv<T>>& projections);

// M_j = ||query - values_j|| per pixel; one output channel per key level.
template <typename T>
Var<T> similarity_maps(const Var<T>& query, const std::vector<Var<T>>& values);

// A(x) = softmax_j(query(x) . keys_j(x)); one output channel per key level.
template <typename T>
Var<T> pixelwise_attention(const Var<T>& query, const std::vector<Var<T>>& keys);

// S(x) = sum_j A_j(x) M_j(x).
template <typename T>
Var<T> aggregate(const Var<T>& attention, const Var<T>& maps);

template <typename T>
struct CsabOutput {
    Var<T> saliency;    // N x H/2^q x W/2^q x 1
    Var<T> attention;   // N x H/2^q x W/2^q x J (undefined for direct summation)
    Var<T> similarity;  // N x H/2^q x W/2^q x J
};

// Cross-level saliency assessment for query level q in {1,2,3}; J = 5 - q.
template <typename T>
class Csab {
public:
    Csab(ParamStore<T>& store, const std::string& name, const ModelConfig& cfg, int q);
    CsabOutput<T> operator()(const FeaturePyramid<T>& pyramid) const;
    double flops(int h, int w) const;

    int query_level() const { return q_; }
    int key_count() const { return static_cast<int>(v_proj.size()); }

    std::vector<Conv<T>> align;
    Conv<T> q_proj;
    std::vector<Conv<T>> k_proj;  // empty for direct summation
    std::vector<Conv<T>> v_proj;

private:
    int q_ = 1;
    bool pixelwise_ = true;
};

}  // namespace dssn
