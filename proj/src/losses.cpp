#include "dssn/losses.hpp"

#include <algorithm>
#include <cmath>

#include "dssn/ops.hpp"

namespace dssn {

namespace {

constexpr int kWindow = 11;
constexpr double kSigma = 1.5;
constexpr double kC1 = 0.01 * 0.01;
constexpr double kC2 = 0.03 * 0.03;

template <typename T>
std::vector<double> sample_valid_counts(const LossTargets<T>& t)
{
    const Shape& s = t.mask.shape();
    const std::size_t px = s.pixels();
    std::vector<double> count(s.n(), 0.0);
    for (int n = 0; n < s.n(); ++n) {
        for (std::size_t i = 0; i < px; ++i) count[n] += t.mask[n * px + i];
        if (count[n] <= 0) throw Error("loss: sample " + std::to_string(n) + " has no valid pixels");
    }
    return count;
}

template <typename T>
Node<T>* pred_parent(Node<T>& n)
{
    Node<T>* p = n.parents.empty() ? nullptr : n.parents[0].get();
    return p && p->requires_grad ? p : nullptr;
}

// Separable correlation with zero padding; symmetric taps.
void blur(const std::vector<double>& in, int h, int w, const std::vector<double>& taps, std::vector<double>& out)
{
    const int r = static_cast<int>(taps.size()) / 2;
    std::vector<double> tmp(in.size(), 0.0);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            double acc = 0;
            for (int k = -r; k <= r; ++k) {
                const int xx = x + k;
                if (xx >= 0 && xx < w) acc += taps[k + r] * in[static_cast<std::size_t>(y) * w + xx];
            }
            tmp[static_cast<std::size_t>(y) * w + x] = acc;
        }
    out.assign(in.size(), 0.0);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            double acc = 0;
            for (int k = -r; k <= r; ++k) {
                const int yy = y + k;
                if (yy >= 0 && yy < h) acc += taps[k + r] * tmp[static_cast<std::size_t>(yy) * w + x];
            }
            out[static_cast<std::size_t>(y) * w + x] = acc;
        }
}

}  // namespace

std::vector<double> ssim_window()
{
    std::vector<double> taps(kWindow);
    double total = 0;
    for (int i = 0; i < kWindow; ++i) {
        const double d = i - kWindow / 2;
        taps[i] = std::exp(-d * d / (2 * kSigma * kSigma));
        total += taps[i];
    }
    for (auto& t : taps) t /= total;
    return taps;
}

template <typename T>
LossTargets<T> LossTargets<T>::from(const std::vector<const GroundTruth*>& gts)
{
    if (gts.empty()) throw Error("loss targets: empty batch");
    const int h = gts.front()->height, w = gts.front()->width;
    LossTargets<T> t{Tensor<T>(Shape(static_cast<int>(gts.size()), h, w, 1)),
                     Tensor<T>(Shape(static_cast<int>(gts.size()), h, w, 1))};
    std::size_t k = 0;
    for (const GroundTruth* gt : gts) {
        if (gt->height != h || gt->width != w) throw ShapeError("loss targets: ground truths differ in extent");
        gt->validate();
        for (std::int8_t l : gt->labels) {
            t.g[k] = l == 1 ? T(1) : T(0);
            t.mask[k] = l == -1 ? T(0) : T(1);
            ++k;
        }
    }
    return t;
}

template <typename T>
void LossTargets<T>::validate(const Shape& prediction) const
{
    require_shape(prediction.c() == 1, "loss: prediction must have one channel, got " + prediction.str());
    require_shape(prediction == g.shape() && prediction == mask.shape(),
                  "loss: prediction " + prediction.str() + " vs targets " + g.shape().str());
}

template <typename T>
Var<T> bce_loss(const Var<T>& x, const LossTargets<T>& t)
{
    t.validate(x.shape());
    const auto count = sample_valid_counts(t);
    const int batch = x.shape().n();
    const std::size_t px = x.shape().pixels();
    const Tensor<T>& xv = x.value();
    double total = 0;
    for (int n = 0; n < batch; ++n) {
        double acc = 0;
        for (std::size_t i = n * px; i < (n + 1) * px; ++i) {
            if (t.mask[i] == T(0)) continue;
            const double p = std::clamp(static_cast<double>(xv[i]), kBceEpsilon, 1 - kBceEpsilon);
            const double g = t.g[i];
            acc -= t.mask[i] * (g * std::log(p) + (1 - g) * std::log(1 - p));
        }
        total += acc / count[n];
    }
    Tensor<T> out(scalar_shape(), static_cast<T>(total / batch));
    return make_result<T>("bce_loss", std::move(out), {x}, [t, count, batch, px](Node<T>& n) {
        Node<T>* p = pred_parent(n);
        if (!p) return;
        auto& g = p->grad_slot();
        const double up = n.grad[0];
        for (int b = 0; b < batch; ++b)
            for (std::size_t i = b * px; i < (b + 1) * px; ++i) {
                if (t.mask[i] == T(0)) continue;
                const double xv = p->value[i];
                if (xv < kBceEpsilon || xv > 1 - kBceEpsilon) continue;
                const double gt = t.g[i];
                const double d = -(gt / xv - (1 - gt) / (1 - xv)) * t.mask[i] / count[b] / batch;
                g[i] += static_cast<T>(up * d);
            }
    });
}

template <typename T>
Var<T> iou_loss(const Var<T>& x, const LossTargets<T>& t, int* degenerate)
{
    t.validate(x.shape());
    sample_valid_counts(t);
    const int batch = x.shape().n();
    const std::size_t px = x.shape().pixels();
    const Tensor<T>& xv = x.value();
    std::vector<double> inter(batch, 0.0), uni(batch, 0.0);
    double total = 0;
    for (int n = 0; n < batch; ++n) {
        for (std::size_t i = n * px; i < (n + 1) * px; ++i) {
            const double m = t.mask[i], p = xv[i], g = t.g[i];
            inter[n] += m * p * g;
            uni[n] += m * (p + g - p * g);
        }
        if (uni[n] == 0) {
            if (degenerate) ++*degenerate;
        } else {
            total += 1 - inter[n] / uni[n];
        }
    }
    Tensor<T> out(scalar_shape(), static_cast<T>(total / batch));
    return make_result<T>("iou_loss", std::move(out), {x}, [t, inter, uni, batch, px](Node<T>& n) {
        Node<T>* p = pred_parent(n);
        if (!p) return;
        auto& g = p->grad_slot();
        const double up = n.grad[0];
        for (int b = 0; b < batch; ++b) {
            if (uni[b] == 0) continue;
            const double u2 = uni[b] * uni[b];
            for (std::size_t i = b * px; i < (b + 1) * px; ++i) {
                const double gt = t.g[i];
                const double d = -(gt * uni[b] - inter[b] * (1 - gt)) / u2 * t.mask[i] / batch;
                g[i] += static_cast<T>(up * d);
            }
        }
    });
}

template <typename T>
Var<T> ssim_loss(const Var<T>& x, const LossTargets<T>& t)
{
    t.validate(x.shape());
    const auto count = sample_valid_counts(t);
    const int batch = x.shape().n(), h = x.shape().h(), w = x.shape().w();
    const std::size_t px = x.shape().pixels();
    const auto taps = ssim_window();

    // Per-sample derivative maps w.r.t. the blurred moments, already blurred
    // back onto pixel positions.
    struct Cache {
        std::vector<double> d_mu, d_exx, d_exy;
    };
    std::vector<Cache> cache(batch);
    double total = 0;
    for (int n = 0; n < batch; ++n) {
        std::vector<double> xs(px), gs(px), xx(px), gg(px), xg(px);
        for (std::size_t i = 0; i < px; ++i) {
            const double m = t.mask[n * px + i];
            xs[i] = m * x.value()[n * px + i];
            gs[i] = m * t.g[n * px + i];
            xx[i] = xs[i] * xs[i];
            gg[i] = gs[i] * gs[i];
            xg[i] = xs[i] * gs[i];
        }
        std::vector<double> mx, mg, exx, egg, exy;
        blur(xs, h, w, taps, mx);
        blur(gs, h, w, taps, mg);
        blur(xx, h, w, taps, exx);
        blur(gg, h, w, taps, egg);
        blur(xg, h, w, taps, exy);
        std::vector<double> d_mu(px, 0.0), d_exx(px, 0.0), d_exy(px, 0.0);
        double acc = 0;
        for (std::size_t i = 0; i < px; ++i) {
            const double m = t.mask[n * px + i];
            if (m == 0) continue;
            const double a1 = 2 * mx[i] * mg[i] + kC1;
            const double a2 = 2 * (exy[i] - mx[i] * mg[i]) + kC2;
            const double b1 = mx[i] * mx[i] + mg[i] * mg[i] + kC1;
            const double b2 = (exx[i] - mx[i] * mx[i]) + (egg[i] - mg[i] * mg[i]) + kC2;
            const double s = a1 * a2 / (b1 * b2);
            acc += m * s;
            const double wgt = -m / count[n] / batch;
            d_mu[i] = wgt * (2 * mg[i] * (a2 - a1) / (b1 * b2) - 2 * mx[i] * s / b1 + 2 * mx[i] * s / b2);
            d_exx[i] = wgt * (-s / b2);
            d_exy[i] = wgt * (2 * a1 / (b1 * b2));
        }
        total += 1 - acc / count[n];
        blur(d_mu, h, w, taps, cache[n].d_mu);
        blur(d_exx, h, w, taps, cache[n].d_exx);
        blur(d_exy, h, w, taps, cache[n].d_exy);
    }
    Tensor<T> out(scalar_shape(), static_cast<T>(total / batch));
    return make_result<T>("ssim_loss", std::move(out), {x}, [t, cache = std::move(cache), batch, px](Node<T>& n) {
        Node<T>* p = pred_parent(n);
        if (!p) return;
        auto& g = p->grad_slot();
        const double up = n.grad[0];
        for (int b = 0; b < batch; ++b) {
            const Cache& c = cache[b];
            for (std::size_t i = 0; i < px; ++i) {
                const std::size_t k = b * px + i;
                const double m = t.mask[k];
                if (m == 0) continue;
                const double xv = m * p->value[k];
                const double gv = m * t.g[k];
                g[k] += static_cast<T>(up * m * (c.d_mu[i] + 2 * xv * c.d_exx[i] + gv * c.d_exy[i]));
            }
        }
    });
}

template <typename T>
Var<T> total_loss(const Var<T>& deep, const Var<T>& saliency, const LossTargets<T>& t, const LossSwitches& s)
{
    if (s.term_count() == 0) throw Error("total_loss: no loss terms enabled");
    std::vector<Var<T>> terms;
    auto head = [&](const Var<T>& x) {
        if (s.bce) terms.push_back(bce_loss(x, t));
        if (s.iou) terms.push_back(iou_loss(x, t));
        if (s.ssim) terms.push_back(ssim_loss(x, t));
    };
    if (s.deep_supervision) head(deep);
    head(saliency);
    return add_n(terms);
}

#define DSSN_LOSSES(T)                                                                                  \
    template struct LossTargets<T>;                                                                     \
    template Var<T> bce_loss(const Var<T>&, const LossTargets<T>&);                                     \
    template Var<T> iou_loss(const Var<T>&, const LossTargets<T>&, int*);                               \
    template Var<T> ssim_loss(const Var<T>&, const LossTargets<T>&);                                    \
    template Var<T> total_loss(const Var<T>&, const Var<T>&, const LossTargets<T>&, const LossSwitches&);

DSSN_LOSSES(float)
DSSN_LOSSES(double)

}  // namespace dssn
