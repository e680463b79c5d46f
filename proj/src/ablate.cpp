#include "dssn/ablate.hpp"

namespace dssn {

AblationAxis parse_ablation_axis(const std::string& name)
{
    if (name == "modality") return AblationAxis::modality;
    if (name == "csab") return AblationAxis::csab;
    if (name == "hrfm") return AblationAxis::hrfm;
    if (name == "loss") return AblationAxis::loss;
    throw Error("unknown ablation axis '" + name + "' (expected modality, csab, hrfm or loss)");
}

std::string axis_name(AblationAxis axis)
{
    switch (axis) {
    case AblationAxis::modality:
        return "modality";
    case AblationAxis::csab:
        return "csab";
    case AblationAxis::hrfm:
        return "hrfm";
    case AblationAxis::loss:
        return "loss";
    }
    return "?";
}

std::vector<AblationRow> ablation_rows(AblationAxis axis, const ModelConfig& model, const TrainConfig& train)
{
    std::vector<AblationRow> rows;
    auto add = [&](std::string label, auto&& edit) {
        AblationRow r{std::move(label), model, train};
        edit(r.model, r.train);
        rows.push_back(std::move(r));
    };
    switch (axis) {
    case AblationAxis::modality:
        add("spatial", [](ModelConfig& m, TrainConfig&) { m.spectral_branch = false; });
        add("spectral", [](ModelConfig& m, TrainConfig&) { m.spatial_branch = false; });
        add("spatial+spectral", [](ModelConfig&, TrainConfig&) {});
        break;
    case AblationAxis::csab:
        for (int hrfm = 0; hrfm < 2; ++hrfm)
            for (int csab = 0; csab < 2; ++csab) {
                std::string label = std::string(csab ? "csab" : "sum") + "+" + (hrfm ? "hrfm" : "stacked");
                add(label, [&](ModelConfig& m, TrainConfig&) {
                    m.pixelwise_attention = csab;
                    m.hrfm = hrfm;
                });
            }
        break;
    case AblationAxis::hrfm:
        add("stacked", [](ModelConfig& m, TrainConfig&) { m.hrfm = false; });
        add("hrfm", [](ModelConfig&, TrainConfig&) {});
        break;
    case AblationAxis::loss: {
        const struct {
            const char* label;
            bool bce, iou, ssim;
        } grid[] = {{"bce", true, false, false},      {"iou", false, true, false},
                    {"ssim", false, false, true},     {"iou+ssim", false, true, true},
                    {"bce+ssim", true, false, true},  {"bce+iou+ssim", true, true, true},
                    {"bce+iou", true, true, false}};
        for (const auto& g : grid)
            add(g.label, [&](ModelConfig&, TrainConfig& t) {
                t.bce = g.bce;
                t.iou = g.iou;
                t.ssim = g.ssim;
            });
        break;
    }
    }
    return rows;
}

std::vector<AblationResult> ablate(AblationAxis axis, const ModelConfig& model, const TrainConfig& train_cfg,
                                   const Dataset& train_set, const Dataset& test_set, const EvalOptions& eval,
                                   const AblationProgress& progress)
{
    std::vector<AblationResult> out;
    for (const auto& row : ablation_rows(axis, model, train_cfg)) {
        AblationResult r{row, {}, {}};
        DssnModel<float> m(row.model);
        EvalOptions opts = eval;
        opts.method = row.label;
        try {
            r.training = train(m, train_set, row.train);
            r.report = evaluate_model(m, test_set, opts);
        } catch (const DivergenceError& e) {
            r.report.method = row.label;
            r.report.year = opts.year;
            r.report.side = row.train.side;
            r.report.flops = m.flops(row.train.side, row.train.side);
            r.report.params = static_cast<double>(m.param_count());
            r.report.failure = e.what();
        }
        if (progress) progress(row, r.report);
        out.push_back(std::move(r));
    }
    return out;
}

}  // namespace dssn
