#include "dssn/evaluate.hpp"

#include <chrono>
#include <cstdio>
#include <sstream>

namespace dssn {

namespace {

std::string fixed(double v, int digits)
{
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", digits, v);
    return buf;
}

std::string opt(const std::optional<double>& v, int digits, double scale = 1)
{
    return v ? fixed(*v * scale, digits) : "-";
}

std::size_t display_width(const std::string& s)
{
    std::size_t n = 0;
    for (unsigned char c : s)
        if ((c & 0xC0) != 0x80) ++n;
    return n;
}

std::vector<std::string> summary_row(const EvalReport& r)
{
    if (!r.failure.empty())
        return {r.method, r.year, "-", "-", "-", "-", opt(r.flops, 3, 1e-9), opt(r.params, 3, 1e-6), "-"};
    return {r.method,
            r.year,
            fixed(r.means.mae, 3),
            fixed(r.means.f_beta, 3),
            fixed(r.means.e_measure, 3),
            fixed(r.means.s_measure, 3),
            opt(r.flops, 3, 1e-9),
            opt(r.params, 3, 1e-6),
            opt(r.fps, 2)};
}

std::string csv_cell(const std::string& s)
{
    if (s.find_first_of(",\"") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) out += c == '"' ? std::string("\"\"") : std::string(1, c);
    return out + "\"";
}

}  // namespace

const std::vector<std::string>& summary_columns()
{
    static const std::vector<std::string> cols{"Method", "Year",      "MAE",         "Fβ",         "Eξ",
                                               "Sα",     "FLOPs (G)", "#Params (M)", "Speed (FPS)"};
    return cols;
}

MetricMeans mean_metrics(const std::vector<ImageRecord>& images)
{
    MetricMeans m;
    for (const auto& r : images) {
        m.mae += r.metrics.mae;
        m.e_measure += r.metrics.e_measure;
        m.s_measure += r.metrics.s_measure;
        if (r.metrics.f_beta) {
            m.f_beta += *r.metrics.f_beta;
            ++m.f_beta_images;
        }
        if (r.metrics.auc) {
            m.auc += *r.metrics.auc;
            m.cc += *r.metrics.cc;
            ++m.auc_images;
        }
    }
    m.images = static_cast<int>(images.size());
    if (m.images > 0) {
        m.mae /= m.images;
        m.e_measure /= m.images;
        m.s_measure /= m.images;
    }
    if (m.f_beta_images > 0) m.f_beta /= m.f_beta_images;
    if (m.auc_images > 0) {
        m.auc /= m.auc_images;
        m.cc /= m.auc_images;
    }
    return m;
}

EvalReport evaluate(const Predictor& predict, const Dataset& data, const EvalOptions& opts)
{
    if (data.empty()) throw Error("evaluate: empty dataset");
    EvalReport r;
    r.method = opts.method;
    r.year = opts.year;
    r.side = data.front().cube.height;
    double seconds = 0;
    for (const auto& s : data) {
        s.gt.validate();
        const auto t0 = std::chrono::steady_clock::now();
        const std::vector<double> map = predict(s);
        seconds += std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        r.images.push_back({s.id, image_metrics(map, s.gt, opts.metrics)});
    }
    r.means = mean_metrics(r.images);
    if (opts.timing && seconds > 0) r.fps = static_cast<double>(data.size()) / seconds;
    return r;
}

std::vector<double> model_saliency(const DssnModel<float>& model, const Sample& s)
{
    const Tensor<float> out = model.predict(s.cube.to_tensor<float>());
    return std::vector<double>(out.storage().begin(), out.storage().end());
}

EvalReport evaluate_model(const DssnModel<float>& model, const Dataset& data, const EvalOptions& opts)
{
    EvalReport r = evaluate([&](const Sample& s) { return model_saliency(model, s); }, data, opts);
    r.flops = model.flops(r.side, r.side);
    r.params = static_cast<double>(model.param_count());
    return r;
}

EvalReport evaluate_baseline(BaselineMode mode, const Dataset& data, const EvalOptions& opts)
{
    return evaluate([mode](const Sample& s) { return classical_saliency(s.cube, mode).map; }, data, opts);
}

std::string report_csv(const EvalReport& r)
{
    std::ostringstream out;
    out << "id,mae,f_beta,e_measure,s_measure,auc,cc\n";
    for (const auto& img : r.images) {
        const auto& m = img.metrics;
        out << csv_cell(img.id) << "," << fixed(m.mae, 6) << "," << opt(m.f_beta, 6) << "," << fixed(m.e_measure, 6)
            << "," << fixed(m.s_measure, 6) << "," << opt(m.auc, 6) << "," << opt(m.cc, 6) << "\n";
    }
    const auto& m = r.means;
    out << "mean," << fixed(m.mae, 6) << "," << fixed(m.f_beta, 6) << "," << fixed(m.e_measure, 6) << ","
        << fixed(m.s_measure, 6) << "," << fixed(m.auc, 6) << "," << fixed(m.cc, 6) << "\n";
    return out.str();
}

std::string summary_table(const std::vector<EvalReport>& reports)
{
    std::vector<std::vector<std::string>> rows{summary_columns()};
    for (const auto& r : reports) rows.push_back(summary_row(r));
    std::vector<std::size_t> width(rows.front().size(), 0);
    for (const auto& row : rows)
        for (std::size_t i = 0; i < row.size(); ++i) width[i] = std::max(width[i], display_width(row[i]));
    std::ostringstream out;
    auto line = [&](const std::vector<std::string>& row) {
        for (std::size_t i = 0; i < row.size(); ++i) {
            if (i) out << " | ";
            out << row[i];
            if (i + 1 < row.size()) out << std::string(width[i] - display_width(row[i]), ' ');
        }
        out << "\n";
    };
    line(rows.front());
    for (std::size_t i = 0; i < width.size(); ++i) {
        if (i) out << "-+-";
        out << std::string(width[i], '-');
    }
    out << "\n";
    for (std::size_t i = 1; i < rows.size(); ++i) line(rows[i]);
    int excluded = 0;
    for (const auto& r : reports) excluded = std::max(excluded, r.means.images - r.means.f_beta_images);
    if (excluded > 0)
        out << "* " << excluded << " image(s) without foreground excluded from the Fβ and AUC means\n";
    for (const auto& r : reports)
        if (!r.failure.empty()) out << "* " << r.method << ": " << r.failure << "\n";
    return out.str();
}

std::string summary_csv(const std::vector<EvalReport>& reports)
{
    std::ostringstream out;
    const auto& cols = summary_columns();
    for (std::size_t i = 0; i < cols.size(); ++i) out << (i ? "," : "") << csv_cell(cols[i]);
    out << ",AUC,CC\n";
    for (const auto& r : reports) {
        const auto row = summary_row(r);
        for (std::size_t i = 0; i < row.size(); ++i) out << (i ? "," : "") << csv_cell(row[i]);
        out << "," << fixed(r.means.auc, 3) << "," << fixed(r.means.cc, 3) << "\n";
    }
    return out.str();
}

}  // namespace dssn
