#pragma once

#include <functional>
#include <string>
#include <vector>

#include "dssn/evaluate.hpp"
#include "dssn/train.hpp"

namespace dssn {

enum class AblationAxis { modality, csab, hrfm, loss };

AblationAxis parse_ablation_axis(const std::string& name);
std::string axis_name(AblationAxis axis);

struct AblationRow {
    std::string label;  // e.g. "spatial+spectral", "csab+hrfm", "bce+iou"
    ModelConfig model;
    TrainConfig train;
};

// Row configurations derived from the base configs:
//   modality  spatial only, spectral only, both
//   csab      the 2 x 2 grid of CSAB / HRFM on-off
//   hrfm      HRFM replaced by stacked convolutions, then HRFM
//   loss      bce, iou, ssim, iou+ssim, bce+ssim, bce+iou+ssim, bce+iou
std::vector<AblationRow> ablation_rows(AblationAxis axis, const ModelConfig& model, const TrainConfig& train);

struct AblationResult {
    AblationRow row;
    EvalReport report;
    TrainResult training;
};

using AblationProgress = std::function<void(const AblationRow&, const EvalReport&)>;

// Trains one fresh model per row and evaluates it. A row whose training
// diverges gets a report with `failure` set instead of metrics.
std::vector<AblationResult> ablate(AblationAxis axis, const ModelConfig& model, const TrainConfig& train_cfg,
                                   const Dataset& train_set, const Dataset& test_set, const EvalOptions& eval,
                                   const AblationProgress& progress = {});

}  // namespace dssn
