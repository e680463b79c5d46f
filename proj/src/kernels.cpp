#include "dssn/kernels.hpp"

#include <algorithm>
#include <cmath>

namespace dssn::kernels {

LinearTaps linear_taps(int in, int out)
{
    LinearTaps t;
    t.lo.resize(out);
    t.hi.resize(out);
    t.frac.resize(out);
    const double ratio = static_cast<double>(in) / out;
    for (int i = 0; i < out; ++i) {
        double src = (i + 0.5) * ratio - 0.5;
        if (src < 0.0) src = 0.0;
        int lo = static_cast<int>(src);
        if (lo > in - 1) lo = in - 1;
        t.lo[i] = lo;
        t.hi[i] = std::min(lo + 1, in - 1);
        t.frac[i] = src - lo;
    }
    return t;
}

template <typename T>
Tensor<T> bilinear_resize(const Tensor<T>& x, int out_h, int out_w)
{
    const Shape s = x.shape();
    require_shape(out_h >= 1 && out_w >= 1, "bilinear_resize: target extent must be >= 1");
    if (s.h() == out_h && s.w() == out_w) return x;
    const LinearTaps ty = linear_taps(s.h(), out_h);
    const LinearTaps tx = linear_taps(s.w(), out_w);
    const int C = s.c();
    Tensor<T> out(Shape(s.n(), out_h, out_w, C));
    for (int n = 0; n < s.n(); ++n)
        for (int oy = 0; oy < out_h; ++oy) {
            const T fy = static_cast<T>(ty.frac[oy]);
            const T* r0 = x.data() + x.index(n, ty.lo[oy], 0, 0);
            const T* r1 = x.data() + x.index(n, ty.hi[oy], 0, 0);
            for (int ox = 0; ox < out_w; ++ox) {
                const T fx = static_cast<T>(tx.frac[ox]);
                const T* a = r0 + static_cast<std::size_t>(tx.lo[ox]) * C;
                const T* b = r0 + static_cast<std::size_t>(tx.hi[ox]) * C;
                const T* c = r1 + static_cast<std::size_t>(tx.lo[ox]) * C;
                const T* d = r1 + static_cast<std::size_t>(tx.hi[ox]) * C;
                T* o = out.data() + out.index(n, oy, ox, 0);
                for (int ch = 0; ch < C; ++ch) {
                    const T top = a[ch] + fx * (b[ch] - a[ch]);
                    const T bot = c[ch] + fx * (d[ch] - c[ch]);
                    o[ch] = top + fy * (bot - top);
                }
            }
        }
    return out;
}

template <typename T>
Tensor<T> bilinear_resize_adjoint(const Tensor<T>& g, int in_h, int in_w)
{
    const Shape s = g.shape();
    if (s.h() == in_h && s.w() == in_w) return g;
    const LinearTaps ty = linear_taps(in_h, s.h());
    const LinearTaps tx = linear_taps(in_w, s.w());
    const int C = s.c();
    Tensor<T> dx(Shape(s.n(), in_h, in_w, C));
    for (int n = 0; n < s.n(); ++n)
        for (int oy = 0; oy < s.h(); ++oy) {
            const T fy = static_cast<T>(ty.frac[oy]);
            T* r0 = dx.data() + dx.index(n, ty.lo[oy], 0, 0);
            T* r1 = dx.data() + dx.index(n, ty.hi[oy], 0, 0);
            for (int ox = 0; ox < s.w(); ++ox) {
                const T fx = static_cast<T>(tx.frac[ox]);
                const T* go = g.data() + g.index(n, oy, ox, 0);
                T* a = r0 + static_cast<std::size_t>(tx.lo[ox]) * C;
                T* b = r0 + static_cast<std::size_t>(tx.hi[ox]) * C;
                T* c = r1 + static_cast<std::size_t>(tx.lo[ox]) * C;
                T* d = r1 + static_cast<std::size_t>(tx.hi[ox]) * C;
                const T wa = (T(1) - fy) * (T(1) - fx), wb = (T(1) - fy) * fx;
                const T wc = fy * (T(1) - fx), wd = fy * fx;
                for (int ch = 0; ch < C; ++ch) {
                    a[ch] += wa * go[ch];
                    b[ch] += wb * go[ch];
                    c[ch] += wc * go[ch];
                    d[ch] += wd * go[ch];
                }
            }
        }
    return dx;
}

int conv_out_extent(int in, int kernel, int stride)
{
    const int pad = kernel / 2;
    return (in + 2 * pad - kernel) / stride + 1;
}

template <typename T>
Tensor<T> conv2d_forward(const Tensor<T>& x, const Tensor<T>& w, const Tensor<T>* bias, int stride)
{
    const Shape xs = x.shape(), ws = w.shape();
    const int K = ws[0], Cin = ws[2], Cout = ws[3], pad = K / 2;
    const int Ho = conv_out_extent(xs.h(), K, stride), Wo = conv_out_extent(xs.w(), K, stride);
    Tensor<T> out(Shape(xs.n(), Ho, Wo, Cout));
    for (int n = 0; n < xs.n(); ++n)
        for (int oy = 0; oy < Ho; ++oy)
            for (int ox = 0; ox < Wo; ++ox) {
                T* __restrict o = out.data() + out.index(n, oy, ox, 0);
                if (bias)
                    for (int co = 0; co < Cout; ++co) o[co] = (*bias)[co];
                for (int ky = 0; ky < K; ++ky) {
                    const int iy = oy * stride + ky - pad;
                    if (iy < 0 || iy >= xs.h()) continue;
                    for (int kx = 0; kx < K; ++kx) {
                        const int ix = ox * stride + kx - pad;
                        if (ix < 0 || ix >= xs.w()) continue;
                        const T* __restrict xin = x.data() + x.index(n, iy, ix, 0);
                        const T* __restrict wt = w.data() + (static_cast<std::size_t>(ky) * K + kx) * Cin * Cout;
                        for (int ci = 0; ci < Cin; ++ci) {
                            const T xv = xin[ci];
                            const T* __restrict wr = wt + static_cast<std::size_t>(ci) * Cout;
                            for (int co = 0; co < Cout; ++co) o[co] += xv * wr[co];
                        }
                    }
                }
            }
    return out;
}

template <typename T>
Tensor<T> conv2d_backward(const Tensor<T>& x, const Tensor<T>& w, const Tensor<T>& g, int stride, Tensor<T>& dw,
                          Tensor<T>* db, bool need_dx)
{
    const Shape xs = x.shape(), ws = w.shape(), gs = g.shape();
    const int K = ws[0], Cin = ws[2], Cout = ws[3], pad = K / 2;
    const int Ho = gs.h(), Wo = gs.w();

    // (k, k, out, in) copy so the input-gradient inner loop runs over in_c.
    Tensor<T> wt_t;
    if (need_dx) {
        wt_t = Tensor<T>(Shape(K, K, Cout, Cin));
        for (int t = 0; t < K * K; ++t)
            for (int ci = 0; ci < Cin; ++ci)
                for (int co = 0; co < Cout; ++co)
                    wt_t[(static_cast<std::size_t>(t) * Cout + co) * Cin + ci] =
                        w[(static_cast<std::size_t>(t) * Cin + ci) * Cout + co];
    }
    Tensor<T> dx = need_dx ? Tensor<T>(xs) : Tensor<T>();

    for (int n = 0; n < xs.n(); ++n)
        for (int oy = 0; oy < Ho; ++oy)
            for (int ox = 0; ox < Wo; ++ox) {
                const T* __restrict go = g.data() + g.index(n, oy, ox, 0);
                if (db)
                    for (int co = 0; co < Cout; ++co) (*db)[co] += go[co];
                for (int ky = 0; ky < K; ++ky) {
                    const int iy = oy * stride + ky - pad;
                    if (iy < 0 || iy >= xs.h()) continue;
                    for (int kx = 0; kx < K; ++kx) {
                        const int ix = ox * stride + kx - pad;
                        if (ix < 0 || ix >= xs.w()) continue;
                        const std::size_t tap = static_cast<std::size_t>(ky) * K + kx;
                        const T* __restrict xin = x.data() + x.index(n, iy, ix, 0);
                        T* __restrict dwt = dw.data() + tap * Cin * Cout;
                        for (int ci = 0; ci < Cin; ++ci) {
                            const T xv = xin[ci];
                            T* __restrict dr = dwt + static_cast<std::size_t>(ci) * Cout;
                            for (int co = 0; co < Cout; ++co) dr[co] += xv * go[co];
                        }
                        if (need_dx) {
                            T* __restrict dxi = dx.data() + dx.index(n, iy, ix, 0);
                            const T* __restrict wtt = wt_t.data() + tap * Cout * Cin;
                            for (int co = 0; co < Cout; ++co) {
                                const T gv = go[co];
                                const T* __restrict wr = wtt + static_cast<std::size_t>(co) * Cin;
                                for (int ci = 0; ci < Cin; ++ci) dxi[ci] += gv * wr[ci];
                            }
                        }
                    }
                }
            }
    return dx;
}

#define DSSN_INSTANTIATE(T)                                                                              \
    template Tensor<T> bilinear_resize(const Tensor<T>&, int, int);                                      \
    template Tensor<T> bilinear_resize_adjoint(const Tensor<T>&, int, int);                              \
    template Tensor<T> conv2d_forward(const Tensor<T>&, const Tensor<T>&, const Tensor<T>*, int);        \
    template Tensor<T> conv2d_backward(const Tensor<T>&, const Tensor<T>&, const Tensor<T>&, int,        \
                                       Tensor<T>&, Tensor<T>*, bool);

DSSN_INSTANTIATE(float)
DSSN_INSTANTIATE(double)

}  // namespace dssn::kernels
