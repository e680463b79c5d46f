#include "dssn/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace dssn {

namespace {

constexpr double kEps = std::numeric_limits<double>::epsilon();

void check_extent(std::span<const double> s, const GroundTruth& gt)
{
    if (s.size() != gt.labels.size())
        throw ShapeError("metric: map has " + std::to_string(s.size()) + " pixels, ground truth " +
                         std::to_string(gt.labels.size()));
}

struct ClassCounts {
    std::size_t fg = 0;
    std::size_t bg = 0;
};

ClassCounts class_counts(const GroundTruth& gt)
{
    ClassCounts c;
    for (auto l : gt.labels) {
        if (l == 1) ++c.fg;
        if (l == 0) ++c.bg;
    }
    return c;
}

// Per threshold index k, how many fg / bg pixels have S > th[k].
struct Sweep {
    std::vector<std::size_t> tp;
    std::vector<std::size_t> fp;
};

Sweep sweep(std::span<const double> s, const GroundTruth& gt, const std::vector<double>& th)
{
    const std::size_t n = th.size();
    std::vector<std::size_t> fg_hist(n + 1, 0), bg_hist(n + 1, 0);
    for (std::size_t i = 0; i < s.size(); ++i) {
        const auto l = gt.labels[i];
        if (l == -1) continue;
        // Number of thresholds strictly below S.
        const auto above = static_cast<std::size_t>(std::lower_bound(th.begin(), th.end(), s[i]) - th.begin());
        (l == 1 ? fg_hist : bg_hist)[above] += 1;
    }
    Sweep out{std::vector<std::size_t>(n, 0), std::vector<std::size_t>(n, 0)};
    std::size_t tp = 0, fp = 0;
    for (std::size_t k = n; k-- > 0;) {
        tp += fg_hist[k + 1];
        fp += bg_hist[k + 1];
        out.tp[k] = tp;
        out.fp[k] = fp;
    }
    return out;
}

double round_half_even(double v) { return std::nearbyint(v); }

struct Moments {
    double count = 0;
    double mean_x = 0;
    double mean_y = 0;
    double var_x = 0;
    double var_y = 0;
    double cov = 0;
};

// Sample (ddof = 1) moments of (x, y) pairs; variances are 0 for fewer than
// two samples.
Moments moments(const std::vector<double>& x, const std::vector<double>& y)
{
    Moments m;
    m.count = static_cast<double>(x.size());
    if (x.empty()) return m;
    for (std::size_t i = 0; i < x.size(); ++i) {
        m.mean_x += x[i];
        m.mean_y += y[i];
    }
    m.mean_x /= m.count;
    m.mean_y /= m.count;
    if (x.size() < 2) return m;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double dx = x[i] - m.mean_x, dy = y[i] - m.mean_y;
        m.var_x += dx * dx;
        m.var_y += dy * dy;
        m.cov += dx * dy;
    }
    m.var_x /= m.count - 1;
    m.var_y /= m.count - 1;
    m.cov /= m.count - 1;
    return m;
}

double region_ssim(const std::vector<double>& s, const std::vector<double>& g)
{
    const Moments m = moments(s, g);
    const double a = 4 * m.mean_x * m.mean_y * m.cov;
    const double b = (m.mean_x * m.mean_x + m.mean_y * m.mean_y) * (m.var_x + m.var_y);
    if (a != 0) return a / (b + kEps);
    return b == 0 ? 1.0 : 0.0;
}

// 2 x / (x^2 + 1 + sigma + eps) over the pixels of one class.
double object_score(const std::vector<double>& values)
{
    if (values.empty()) return 0;
    const Moments m = moments(values, values);
    return 2 * m.mean_x / (m.mean_x * m.mean_x + 1 + std::sqrt(m.var_x) + kEps);
}

}  // namespace

double mae(std::span<const double> s, const GroundTruth& gt)
{
    check_extent(s, gt);
    double acc = 0;
    std::size_t n = 0;
    for (std::size_t i = 0; i < s.size(); ++i) {
        const auto l = gt.labels[i];
        if (l == -1) continue;
        acc += std::abs(s[i] - (l == 1 ? 1.0 : 0.0));
        ++n;
    }
    if (n == 0) throw Error("mae: no valid pixels");
    return acc / static_cast<double>(n);
}

std::vector<double> threshold_grid(const MetricConfig& cfg)
{
    if (cfg.thresholds < 2) throw ConfigError("metric: threshold grid needs at least 2 levels");
    std::vector<double> th(cfg.thresholds);
    for (int k = 0; k < cfg.thresholds; ++k) th[k] = static_cast<double>(k) / (cfg.thresholds - 1);
    return th;
}

double f_beta_max(std::span<const double> s, const GroundTruth& gt, const MetricConfig& cfg)
{
    check_extent(s, gt);
    if (!(cfg.beta2 > 0)) throw ConfigError("f_beta_max: beta^2 must be positive");
    const ClassCounts c = class_counts(gt);
    if (c.fg == 0) throw Error("f_beta_max: no valid foreground pixel");
    const auto th = threshold_grid(cfg);
    const Sweep sw = sweep(s, gt, th);
    double best = 0;
    for (std::size_t k = 0; k < th.size(); ++k) {
        const double tp = static_cast<double>(sw.tp[k]);
        const double predicted = tp + static_cast<double>(sw.fp[k]);
        const double p = predicted > 0 ? tp / predicted : 0.0;
        const double r = tp / static_cast<double>(c.fg);
        const double den = cfg.beta2 * p + r;
        const double f = den > 0 ? (1 + cfg.beta2) * p * r / den : 0.0;
        best = std::max(best, f);
    }
    return best;
}

double e_measure(std::span<const double> s, const GroundTruth& gt)
{
    check_extent(s, gt);
    std::vector<double> fm, g;
    double sum_s = 0;
    for (std::size_t i = 0; i < s.size(); ++i)
        if (gt.labels[i] != -1) {
            sum_s += s[i];
            g.push_back(gt.labels[i] == 1 ? 1.0 : 0.0);
        }
    if (g.empty()) throw Error("e_measure: no valid pixels");
    const double n = static_cast<double>(g.size());
    const double th = std::min(2 * sum_s / n, 1.0);
    for (std::size_t i = 0; i < s.size(); ++i)
        if (gt.labels[i] != -1) fm.push_back(s[i] >= th && s[i] > 0 ? 1.0 : 0.0);

    double sum_fm = 0, sum_g = 0;
    for (std::size_t i = 0; i < g.size(); ++i) {
        sum_fm += fm[i];
        sum_g += g[i];
    }
    double acc = 0;
    if (sum_g == 0) {
        for (double v : fm) acc += 1 - v;
    } else if (sum_g == n) {
        for (double v : fm) acc += v;
    } else {
        const double mean_fm = sum_fm / n, mean_g = sum_g / n;
        for (std::size_t i = 0; i < g.size(); ++i) {
            const double a = fm[i] - mean_fm, b = g[i] - mean_g;
            const double align = 2 * a * b / (a * a + b * b + kEps);
            acc += (align + 1) * (align + 1) / 4;
        }
    }
    return acc / n;
}

double s_measure(std::span<const double> s, const GroundTruth& gt, double alpha)
{
    check_extent(s, gt);
    const int h = gt.height, w = gt.width;
    std::vector<double> fg_vals, bg_vals;
    double sum_s = 0, valid = 0, fy = 0, fx = 0;
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            const std::size_t i = static_cast<std::size_t>(y) * w + x;
            const auto l = gt.labels[i];
            if (l == -1) continue;
            valid += 1;
            sum_s += s[i];
            if (l == 1) {
                fg_vals.push_back(s[i]);
                fy += y;
                fx += x;
            } else {
                bg_vals.push_back(1 - s[i]);
            }
        }
    if (valid == 0) throw Error("s_measure: no valid pixels");
    const double u = static_cast<double>(fg_vals.size()) / valid;
    double score;
    if (fg_vals.empty()) {
        score = 1 - sum_s / valid;
    } else if (bg_vals.empty()) {
        score = sum_s / valid;
    } else {
        // Object term: the bg class uses (1 - S) against its own mask.
        const double object = u * object_score(fg_vals) + (1 - u) * object_score(bg_vals);

        const double nf = static_cast<double>(fg_vals.size());
        const int cx = static_cast<int>(round_half_even(fx / nf)) + 1;
        const int cy = static_cast<int>(round_half_even(fy / nf)) + 1;
        std::vector<double> qs[4], qg[4];
        for (int y = 0; y < h; ++y)
            for (int x = 0; x < w; ++x) {
                const std::size_t i = static_cast<std::size_t>(y) * w + x;
                const auto l = gt.labels[i];
                if (l == -1) continue;
                const int q = (y < cy ? 0 : 2) + (x < cx ? 0 : 1);
                qs[q].push_back(s[i]);
                qg[q].push_back(l == 1 ? 1.0 : 0.0);
            }
        double region = 0;
        for (int q = 0; q < 4; ++q)
            if (!qs[q].empty()) region += static_cast<double>(qs[q].size()) / valid * region_ssim(qs[q], qg[q]);
        score = alpha * object + (1 - alpha) * region;
    }
    return std::clamp(score, 0.0, 1.0);
}

AucCc auc_cc(std::span<const double> s, const GroundTruth& gt, const MetricConfig& cfg)
{
    check_extent(s, gt);
    const ClassCounts c = class_counts(gt);
    if (c.fg == 0 || c.bg == 0) throw Error("auc_cc: ground truth needs both classes among valid pixels");
    const auto th = threshold_grid(cfg);
    const Sweep sw = sweep(s, gt, th);

    AucCc out;
    // Points from the highest threshold down, then the (1,1) endpoint.
    double prev_f = 0, prev_t = 0;
    bool first = true;
    auto visit = [&](double f, double t) {
        if (!first) out.auc += (f - prev_f) * (t + prev_t) / 2;
        first = false;
        prev_f = f;
        prev_t = t;
    };
    for (std::size_t k = th.size(); k-- > 0;)
        visit(static_cast<double>(sw.fp[k]) / static_cast<double>(c.bg),
              static_cast<double>(sw.tp[k]) / static_cast<double>(c.fg));
    visit(1.0, 1.0);

    std::vector<double> xs, ys;
    for (std::size_t i = 0; i < s.size(); ++i)
        if (gt.labels[i] != -1) {
            xs.push_back(s[i]);
            ys.push_back(gt.labels[i] == 1 ? 1.0 : 0.0);
        }
    const Moments m = moments(xs, ys);
    out.cc = m.var_x > 0 && m.var_y > 0 ? m.cov / std::sqrt(m.var_x * m.var_y) : 0.0;
    return out;
}

ImageMetrics image_metrics(std::span<const double> s, const GroundTruth& gt, const MetricConfig& cfg)
{
    ImageMetrics m;
    m.mae = mae(s, gt);
    m.e_measure = e_measure(s, gt);
    m.s_measure = s_measure(s, gt, cfg.s_alpha);
    const ClassCounts c = class_counts(gt);
    if (c.fg > 0) m.f_beta = f_beta_max(s, gt, cfg);
    if (c.fg > 0 && c.bg > 0) {
        const AucCc a = auc_cc(s, gt, cfg);
        m.auc = a.auc;
        m.cc = a.cc;
    }
    return m;
}

}  // namespace dssn
