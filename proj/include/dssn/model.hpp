#pragma once

#include <array>
#include <memory>
#include <vector>

#include "dssn/csab.hpp"
#include "dssn/hrfm.hpp"
#include "dssn/sjfe.hpp"

namespace dssn {

template <typename T>
struct ModelOutput {
    Var<T> saliency;                   // S_m, N x H x W x 1 in [0,1]
    Var<T> deep;                       // P5' upsampled to H x W, in [0,1]
    std::array<Var<T>, 3> intermediate;  // S_1..S_3
    std::array<Var<T>, 3> attention;     // undefined when pixel-wise attention is off
    FeaturePyramid<T> pyramid;
};

template <typename T>
class DssnModel {
public:
    explicit DssnModel(const ModelConfig& cfg);
    DssnModel(const DssnModel&) = delete;
    DssnModel& operator=(const DssnModel&) = delete;

    ModelOutput<T> forward(const Var<T>& cube) const;
    // Convenience for inference on one cube; returns S_m as H x W values.
    Tensor<T> predict(const Tensor<T>& cube) const;

    const ModelConfig& config() const { return cfg_; }
    ParamStore<T>& params() { return store_; }
    const ParamStore<T>& params() const { return store_; }
    std::size_t param_count() const { return store_.scalar_count(); }
    double flops(int h, int w) const;

    const Sjfe<T>& sjfe() const { return *sjfe_; }
    const Csab<T>& csab(int q) const { return csab_.at(q - 1); }

private:
    ModelConfig cfg_;
    ParamStore<T> store_;
    std::unique_ptr<Sjfe<T>> sjfe_;
    std::vector<Csab<T>> csab_;
    std::unique_ptr<Hrfm<T>> hrfm_;
    std::unique_ptr<StackedFusion<T>> stacked_;
    Conv<T> deep_head_;
};

}  // namespace dssn
