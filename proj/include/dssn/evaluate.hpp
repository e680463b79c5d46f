#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "dssn/baselines.hpp"
#include "dssn/dataset.hpp"
#include "dssn/metrics.hpp"
#include "dssn/model.hpp"

namespace dssn {

struct ImageRecord {
    std::string id;
    ImageMetrics metrics;
};

struct MetricMeans {
    double mae = 0;
    double f_beta = 0;
    double e_measure = 0;
    double s_measure = 0;
    double auc = 0;
    double cc = 0;
    int images = 0;
    int f_beta_images = 0;  // images with a valid foreground pixel
    int auc_images = 0;     // images with both classes
};

struct EvalReport {
    std::string method;
    std::string year;
    int side = 0;
    std::vector<ImageRecord> images;
    MetricMeans means;
    std::optional<double> flops;         // per image at `side`
    std::optional<double> params;        // scalar parameter count
    std::optional<double> fps;           // unset when timing is disabled
    std::string failure;                 // non-empty when the run produced no maps
};

// Image-weighted means; F_beta / AUC / CC skip images where they are undefined.
MetricMeans mean_metrics(const std::vector<ImageRecord>& images);

using Predictor = std::function<std::vector<double>(const Sample&)>;

struct EvalOptions {
    std::string method = "model";
    std::string year = "-";
    bool timing = true;
    MetricConfig metrics;
};

EvalReport evaluate(const Predictor& predict, const Dataset& data, const EvalOptions& opts);
EvalReport evaluate_model(const DssnModel<float>& model, const Dataset& data, const EvalOptions& opts);
EvalReport evaluate_baseline(BaselineMode mode, const Dataset& data, const EvalOptions& opts);

std::vector<double> model_saliency(const DssnModel<float>& model, const Sample& s);

// Per-image rows then a "mean" row.
std::string report_csv(const EvalReport& r);
// One row per report, columns Method | Year | MAE | Fβ | Eξ | Sα | FLOPs (G) | #Params (M) | Speed (FPS).
std::string summary_table(const std::vector<EvalReport>& reports);
std::string summary_csv(const std::vector<EvalReport>& reports);

const std::vector<std::string>& summary_columns();

}  // namespace dssn
