#pragma once

// Brute-force scalar reference implementations of the evaluation metrics.

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "dssn/hsi.hpp"

namespace oracle {

inline constexpr double kEps = std::numeric_limits<double>::epsilon();

inline double mae(const std::vector<double>& s, const dssn::GroundTruth& gt)
{
    double acc = 0;
    int n = 0;
    for (std::size_t i = 0; i < s.size(); ++i) {
        if (gt.labels[i] == -1) continue;
        acc += std::abs(s[i] - gt.labels[i]);
        ++n;
    }
    return acc / n;
}

struct Confusion {
    double tp = 0, fp = 0, fg = 0, bg = 0;
};

// Pixels with S > th counted as predicted salient.
inline Confusion confusion(const std::vector<double>& s, const dssn::GroundTruth& gt, double th)
{
    Confusion c;
    for (std::size_t i = 0; i < s.size(); ++i) {
        const int l = gt.labels[i];
        if (l == -1) continue;
        (l == 1 ? c.fg : c.bg) += 1;
        if (s[i] > th) (l == 1 ? c.tp : c.fp) += 1;
    }
    return c;
}

inline double f_beta_max(const std::vector<double>& s, const dssn::GroundTruth& gt, double beta2 = 0.3, int levels = 256)
{
    double best = 0;
    for (int k = 0; k < levels; ++k) {
        const Confusion c = confusion(s, gt, static_cast<double>(k) / (levels - 1));
        const double p = c.tp + c.fp > 0 ? c.tp / (c.tp + c.fp) : 0.0;
        const double r = c.tp / c.fg;
        const double f = beta2 * p + r > 0 ? (1 + beta2) * p * r / (beta2 * p + r) : 0.0;
        best = std::max(best, f);
    }
    return best;
}

// Trapezoid over ROC points from the highest threshold down, closed at (1, 1).
inline double auc(const std::vector<double>& s, const dssn::GroundTruth& gt, int levels = 256)
{
    std::vector<double> fpr, tpr;
    for (int k = levels - 1; k >= 0; --k) {
        const Confusion c = confusion(s, gt, static_cast<double>(k) / (levels - 1));
        fpr.push_back(c.fp / c.bg);
        tpr.push_back(c.tp / c.fg);
    }
    fpr.push_back(1.0);
    tpr.push_back(1.0);
    double a = 0;
    for (std::size_t i = 1; i < fpr.size(); ++i) a += (fpr[i] - fpr[i - 1]) * (tpr[i] + tpr[i - 1]) / 2;
    return a;
}

inline double mean(const std::vector<double>& v)
{
    double s = 0;
    for (double x : v) s += x;
    return v.empty() ? 0.0 : s / static_cast<double>(v.size());
}

// Sample covariance (ddof 1).
inline double cov(const std::vector<double>& a, const std::vector<double>& b)
{
    if (a.size() < 2) return 0;
    const double ma = mean(a), mb = mean(b);
    double s = 0;
    for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - ma) * (b[i] - mb);
    return s / static_cast<double>(a.size() - 1);
}

inline double cc(const std::vector<double>& s, const dssn::GroundTruth& gt)
{
    std::vector<double> a, b;
    for (std::size_t i = 0; i < s.size(); ++i)
        if (gt.labels[i] != -1) {
            a.push_back(s[i]);
            b.push_back(gt.labels[i]);
        }
    const double va = cov(a, a), vb = cov(b, b);
    return va > 0 && vb > 0 ? cov(a, b) / std::sqrt(va * vb) : 0.0;
}

inline double e_measure(const std::vector<double>& s, const dssn::GroundTruth& gt)
{
    std::vector<double> sv, g;
    for (std::size_t i = 0; i < s.size(); ++i)
        if (gt.labels[i] != -1) {
            sv.push_back(s[i]);
            g.push_back(gt.labels[i]);
        }
    const double th = std::min(2 * mean(sv), 1.0);
    std::vector<double> fm;
    for (double v : sv) fm.push_back(v >= th && v > 0 ? 1.0 : 0.0);
    const double n = static_cast<double>(g.size());
    const double mg = mean(g), mf = mean(fm);
    double acc = 0;
    for (std::size_t i = 0; i < g.size(); ++i) {
        double e;
        if (mg == 0)
            e = 1 - fm[i];
        else if (mg == 1)
            e = fm[i];
        else {
            const double a = fm[i] - mf, b = g[i] - mg;
            const double phi = 2 * a * b / (a * a + b * b + kEps);
            e = (1 + phi) * (1 + phi) / 4;
        }
        acc += e;
    }
    return acc / n;
}

inline double object_term(const std::vector<double>& v)
{
    if (v.empty()) return 0;
    const double m = mean(v);
    return 2 * m / (m * m + 1 + std::sqrt(cov(v, v)) + kEps);
}

inline double ssim_term(const std::vector<double>& x, const std::vector<double>& y)
{
    const double mx = mean(x), my = mean(y);
    const double a = 4 * mx * my * cov(x, y);
    const double b = (mx * mx + my * my) * (cov(x, x) + cov(y, y));
    if (a != 0) return a / (b + kEps);
    return b == 0 ? 1.0 : 0.0;
}

inline double s_measure(const std::vector<double>& s, const dssn::GroundTruth& gt, double alpha = 0.5)
{
    const int h = gt.height, w = gt.width;
    std::vector<double> all, fg, bg;
    std::vector<double> ys, xs;
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            const int l = gt.at(y, x);
            const double v = s[y * w + x];
            if (l == -1) continue;
            all.push_back(v);
            if (l == 1) {
                fg.push_back(v);
                ys.push_back(y);
                xs.push_back(x);
            } else {
                bg.push_back(1 - v);
            }
        }
    double score;
    if (fg.empty())
        score = 1 - mean(all);
    else if (bg.empty())
        score = mean(all);
    else {
        const double u = static_cast<double>(fg.size()) / static_cast<double>(all.size());
        const double object = u * object_term(fg) + (1 - u) * object_term(bg);
        const int cy = static_cast<int>(std::nearbyint(mean(ys))) + 1;
        const int cx = static_cast<int>(std::nearbyint(mean(xs))) + 1;
        const int y_lo[4] = {0, 0, cy, cy}, y_hi[4] = {cy, cy, h, h};
        const int x_lo[4] = {0, cx, 0, cx}, x_hi[4] = {cx, w, cx, w};
        double region = 0;
        for (int q = 0; q < 4; ++q) {
            std::vector<double> qs, qg;
            for (int y = y_lo[q]; y < std::min(y_hi[q], h); ++y)
                for (int x = x_lo[q]; x < std::min(x_hi[q], w); ++x)
                    if (gt.at(y, x) != -1) {
                        qs.push_back(s[y * w + x]);
                        qg.push_back(gt.at(y, x));
                    }
            if (!qs.empty())
                region += static_cast<double>(qs.size()) / static_cast<double>(all.size()) * ssim_term(qs, qg);
        }
        score = alpha * object + (1 - alpha) * region;
    }
    return std::clamp(score, 0.0, 1.0);
}

}  // namespace oracle
