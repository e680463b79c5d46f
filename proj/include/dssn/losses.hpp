#pragma once

#include <vector>

#include "dssn/autograd.hpp"
#include "dssn/hsi.hpp"

namespace dssn {

inline constexpr double kBceEpsilon = 1e-7;

// Targets and validity weights for a batch, both N x H x W x 1.
template <typename T>
struct LossTargets {
    Tensor<T> g;
    Tensor<T> mask;

    static LossTargets from(const std::vector<const GroundTruth*>& gts);
    static LossTargets from(const GroundTruth& gt) { return from(std::vector<const GroundTruth*>{&gt}); }
    void validate(const Shape& prediction) const;
};

// Every loss is computed per sample over its valid pixels, then averaged over
// the batch. A sample without valid pixels is an error.

// -[G log X + (1-G) log(1-X)], X clamped to [eps, 1-eps].
template <typename T>
Var<T> bce_loss(const Var<T>& x, const LossTargets<T>& t);

// 1 - sum(XG) / sum(X + G - XG). A zero denominator gives 0 and bumps
// `*degenerate` when provided.
template <typename T>
Var<T> iou_loss(const Var<T>& x, const LossTargets<T>& t, int* degenerate = nullptr);

// 1 - mean SSIM over valid window centres; 11x11 Gaussian window (sigma 1.5),
// zero padding, C1 = 0.01^2, C2 = 0.03^2. Ignore pixels are zeroed in X and G.
template <typename T>
Var<T> ssim_loss(const Var<T>& x, const LossTargets<T>& t);

struct LossSwitches {
    bool bce = true;
    bool iou = true;
    bool ssim = false;
    bool deep_supervision = true;

    int term_count() const { return (bce + iou + ssim) * (deep_supervision ? 2 : 1); }
};

// Enabled terms for the deep head (first) and then the final map, summed in
// that order: bce, iou, ssim.
template <typename T>
Var<T> total_loss(const Var<T>& deep, const Var<T>& saliency, const LossTargets<T>& t, const LossSwitches& s);

// Normalized 1-D Gaussian taps, length 11.
std::vector<double> ssim_window();

}  // namespace dssn
