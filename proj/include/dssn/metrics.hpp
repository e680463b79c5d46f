#pragma once

#include <optional>
#include <span>
#include <vector>

#include "dssn/config.hpp"
#include "dssn/hsi.hpp"

namespace dssn {

// All metrics take a row-major H x W map S with values in [0,1] and skip
// pixels labelled -1.

double mae(std::span<const double> s, const GroundTruth& gt);

// Thresholds k / (thresholds - 1), k = 0..thresholds-1; a pixel is
// predicted salient when S > threshold. Requires a valid foreground pixel.
std::vector<double> threshold_grid(const MetricConfig& cfg);
double f_beta_max(std::span<const double> s, const GroundTruth& gt, const MetricConfig& cfg = {});

// Adaptive-threshold enhanced alignment. Binarization is S >= min(2 mean(S), 1)
// and S > 0. All-background G scores mean(1 - FM), all-foreground mean(FM).
double e_measure(std::span<const double> s, const GroundTruth& gt);

// alpha * object + (1 - alpha) * region; region splits at the rounded
// foreground centroid. Clamped to [0, 1].
double s_measure(std::span<const double> s, const GroundTruth& gt, double alpha = 0.5);

struct AucCc {
    double auc = 0;
    double cc = 0;
};

// ROC over the threshold grid plus the (1,1) endpoint, trapezoid rule; CC is
// the Pearson correlation (0 if either side is constant). Needs both classes.
AucCc auc_cc(std::span<const double> s, const GroundTruth& gt, const MetricConfig& cfg = {});

struct ImageMetrics {
    double mae = 0;
    double e_measure = 0;
    double s_measure = 0;
    // Unset for an image without valid foreground.
    std::optional<double> f_beta;
    std::optional<double> auc;
    std::optional<double> cc;
};

ImageMetrics image_metrics(std::span<const double> s, const GroundTruth& gt, const MetricConfig& cfg = {});

}  // namespace dssn
