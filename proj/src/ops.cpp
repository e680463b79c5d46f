#include "dssn/ops.hpp"

#include <algorithm>
#include <cmath>

#include "dssn/kernels.hpp"

namespace dssn {

namespace {

template <typename T>
Node<T>* parent(Node<T>& n, std::size_t i)
{
    Node<T>* p = n.parents[i].get();
    return p->requires_grad ? p : nullptr;
}

template <typename T>
bool is_channel_vector_of(const Shape& v, const Shape& x)
{
    return v.n() == x.n() && v.h() == 1 && v.w() == 1 && v.c() == x.c();
}

std::string mismatch(const char* op, const Shape& a, const Shape& b)
{
    static const char* axes[] = {"batch", "height", "width", "channel"};
    for (int i = 0; i < 4; ++i)
        if (a[i] != b[i])
            return std::string(op) + ": " + axes[i] + " axis mismatch " + std::to_string(a[i]) + " vs " +
                   std::to_string(b[i]) + " (shapes " + a.str() + " and " + b.str() + ")";
    return std::string(op) + ": shape mismatch";
}

}  // namespace

template <typename T>
Var<T> conv2d(const Var<T>& x, const Var<T>& weights, const Var<T>& bias, int stride)
{
    const Shape xs = x.shape(), ws = weights.shape();
    require_shape(ws[0] == ws[1] && (ws[0] == 1 || ws[0] == 3),
                  "conv2d: kernel must be 1x1 or 3x3, got " + ws.str());
    require_shape(stride == 1 || stride == 2, "conv2d: stride must be 1 or 2, got " + std::to_string(stride));
    require_shape(xs.c() == ws[2], "conv2d: channel axis mismatch, input has " + std::to_string(xs.c()) +
                                       " channels but weights expect " + std::to_string(ws[2]));
    if (bias.defined())
        require_shape(bias.shape() == vector_shape(ws[3]),
                      "conv2d: bias shape " + bias.shape().str() + " does not match out channels " +
                          std::to_string(ws[3]));
    Tensor<T> out = kernels::conv2d_forward(x.value(), weights.value(), bias.defined() ? &bias.value() : nullptr,
                                            stride);
    std::vector<Var<T>> parents{x, weights};
    if (bias.defined()) parents.push_back(bias);
    return make_result<T>("conv2d", std::move(out), parents, [stride](Node<T>& n) {
        Node<T>* px = parent(n, 0);
        Node<T>* pw = parent(n, 1);
        Node<T>* pb = n.parents.size() > 2 ? parent(n, 2) : nullptr;
        const Tensor<T>& xv = n.parents[0]->value;
        const Tensor<T>& wv = n.parents[1]->value;
        Tensor<T> dw_local(wv.shape());
        Tensor<T> db_local = pb ? Tensor<T>(pb->value.shape()) : Tensor<T>();
        Tensor<T> dx = kernels::conv2d_backward(xv, wv, n.grad, stride, dw_local, pb ? &db_local : nullptr,
                                                px != nullptr);
        if (px) {
            auto& g = px->grad_slot();
            for (std::size_t i = 0; i < g.size(); ++i) g[i] += dx[i];
        }
        if (pw) {
            auto& g = pw->grad_slot();
            for (std::size_t i = 0; i < g.size(); ++i) g[i] += dw_local[i];
        }
        if (pb) {
            auto& g = pb->grad_slot();
            for (std::size_t i = 0; i < g.size(); ++i) g[i] += db_local[i];
        }
    });
}

template <typename T>
Var<T> bilinear_resize(const Var<T>& x, int out_h, int out_w)
{
    require_shape(out_h >= 1 && out_w >= 1, "bilinear_resize: target extent must be >= 1, got " +
                                                std::to_string(out_h) + "x" + std::to_string(out_w));
    const int in_h = x.shape().h(), in_w = x.shape().w();
    if (in_h == out_h && in_w == out_w) return x;
    return make_result<T>("bilinear_resize", kernels::bilinear_resize(x.value(), out_h, out_w), {x},
                          [in_h, in_w](Node<T>& n) {
                              Node<T>* px = parent(n, 0);
                              if (!px) return;
                              Tensor<T> dx = kernels::bilinear_resize_adjoint(n.grad, in_h, in_w);
                              auto& g = px->grad_slot();
                              for (std::size_t i = 0; i < g.size(); ++i) g[i] += dx[i];
                          });
}

template <typename T>
Var<T> global_avg_pool(const Var<T>& x)
{
    const Shape s = x.shape();
    require_shape(s.h() >= 1 && s.w() >= 1, "global_avg_pool: empty spatial extent " + s.str());
    const int C = s.c();
    const std::size_t P = s.pixels();
    Tensor<T> out(Shape(s.n(), 1, 1, C));
    for (int n = 0; n < s.n(); ++n) {
        const T* base = x.value().data() + x.value().index(n, 0, 0, 0);
        T* o = out.data() + static_cast<std::size_t>(n) * C;
        for (std::size_t p = 0; p < P; ++p)
            for (int c = 0; c < C; ++c) o[c] += base[p * C + c];
        for (int c = 0; c < C; ++c) o[c] /= static_cast<T>(P);
    }
    return make_result<T>("global_avg_pool", std::move(out), {x}, [P, C](Node<T>& n) {
        Node<T>* px = parent(n, 0);
        if (!px) return;
        auto& g = px->grad_slot();
        const int N = g.shape().n();
        for (int b = 0; b < N; ++b) {
            const T* go = n.grad.data() + static_cast<std::size_t>(b) * C;
            T* gi = g.data() + static_cast<std::size_t>(b) * P * C;
            for (std::size_t p = 0; p < P; ++p)
                for (int c = 0; c < C; ++c) gi[p * C + c] += go[c] / static_cast<T>(P);
        }
    });
}

template <typename T>
Var<T> softmax_channels(const Var<T>& x)
{
    const Shape s = x.shape();
    const int C = s.c();
    const std::size_t rows = s.numel() / C;
    Tensor<T> out(s);
    for (std::size_t r = 0; r < rows; ++r) {
        const T* in = x.value().data() + r * C;
        T* o = out.data() + r * C;
        T m = in[0];
        for (int c = 1; c < C; ++c) m = std::max(m, in[c]);
        T z = 0;
        for (int c = 0; c < C; ++c) {
            o[c] = std::exp(in[c] - m);
            z += o[c];
        }
        for (int c = 0; c < C; ++c) o[c] /= z;
    }
    return make_result<T>("softmax_channels", std::move(out), {x}, [rows, C](Node<T>& n) {
        Node<T>* px = parent(n, 0);
        if (!px) return;
        auto& g = px->grad_slot();
        for (std::size_t r = 0; r < rows; ++r) {
            const T* y = n.value.data() + r * C;
            const T* go = n.grad.data() + r * C;
            T dot = 0;
            for (int c = 0; c < C; ++c) dot += y[c] * go[c];
            for (int c = 0; c < C; ++c) g[r * C + c] += y[c] * (go[c] - dot);
        }
    });
}

template <typename T>
Var<T> channel_distance(const Var<T>& a, const Var<T>& b)
{
    require_shape(a.shape() == b.shape(), mismatch("channel_distance", a.shape(), b.shape()));
    const Shape s = a.shape();
    const int C = s.c();
    const std::size_t rows = s.numel() / C;
    Tensor<T> out(Shape(s.n(), s.h(), s.w(), 1));
    for (std::size_t r = 0; r < rows; ++r) {
        const T* pa = a.value().data() + r * C;
        const T* pb = b.value().data() + r * C;
        T acc = 0;
        for (int c = 0; c < C; ++c) {
            const T d = pa[c] - pb[c];
            acc += d * d;
        }
        out[r] = std::sqrt(acc);
    }
    return make_result<T>("channel_distance", std::move(out), {a, b}, [rows, C](Node<T>& n) {
        Node<T>* pa = parent(n, 0);
        Node<T>* pb = parent(n, 1);
        const T* va = n.parents[0]->value.data();
        const T* vb = n.parents[1]->value.data();
        T* ga = pa ? pa->grad_slot().data() : nullptr;
        T* gb = pb ? pb->grad_slot().data() : nullptr;
        for (std::size_t r = 0; r < rows; ++r) {
            const T dist = n.value[r];
            // Zero distance: use the zero subgradient.
            if (dist == T(0)) continue;
            const T k = n.grad[r] / dist;
            for (int c = 0; c < C; ++c) {
                const T d = (va[r * C + c] - vb[r * C + c]) * k;
                if (ga) ga[r * C + c] += d;
                if (gb) gb[r * C + c] -= d;
            }
        }
    });
}

template <typename T>
Var<T> pixel_dot(const Var<T>& a, const Var<T>& b)
{
    require_shape(a.shape() == b.shape(), mismatch("pixel_dot", a.shape(), b.shape()));
    const Shape s = a.shape();
    const int C = s.c();
    const std::size_t rows = s.numel() / C;
    Tensor<T> out(Shape(s.n(), s.h(), s.w(), 1));
    for (std::size_t r = 0; r < rows; ++r) {
        const T* pa = a.value().data() + r * C;
        const T* pb = b.value().data() + r * C;
        T acc = 0;
        for (int c = 0; c < C; ++c) acc += pa[c] * pb[c];
        out[r] = acc;
    }
    return make_result<T>("pixel_dot", std::move(out), {a, b}, [rows, C](Node<T>& n) {
        Node<T>* pa = parent(n, 0);
        Node<T>* pb = parent(n, 1);
        const T* va = n.parents[0]->value.data();
        const T* vb = n.parents[1]->value.data();
        T* ga = pa ? pa->grad_slot().data() : nullptr;
        T* gb = pb ? pb->grad_slot().data() : nullptr;
        for (std::size_t r = 0; r < rows; ++r) {
            const T go = n.grad[r];
            for (int c = 0; c < C; ++c) {
                if (ga) ga[r * C + c] += go * vb[r * C + c];
                if (gb) gb[r * C + c] += go * va[r * C + c];
            }
        }
    });
}

template <typename T>
Var<T> mul(const Var<T>& a, const Var<T>& b)
{
    const Shape sa = a.shape(), sb = b.shape();
    if (sa == sb) {
        Tensor<T> out(sa);
        for (std::size_t i = 0; i < out.size(); ++i) out[i] = a.value()[i] * b.value()[i];
        return make_result<T>("mul", std::move(out), {a, b}, [](Node<T>& n) {
            Node<T>* pa = parent(n, 0);
            Node<T>* pb = parent(n, 1);
            const auto& va = n.parents[0]->value;
            const auto& vb = n.parents[1]->value;
            if (pa) {
                auto& g = pa->grad_slot();
                for (std::size_t i = 0; i < g.size(); ++i) g[i] += n.grad[i] * vb[i];
            }
            if (pb) {
                auto& g = pb->grad_slot();
                for (std::size_t i = 0; i < g.size(); ++i) g[i] += n.grad[i] * va[i];
            }
        });
    }
    if (is_channel_vector_of<T>(sa, sb)) return mul(b, a);
    require_shape(is_channel_vector_of<T>(sb, sa), mismatch("mul", sa, sb));
    const int C = sa.c();
    const std::size_t P = sa.pixels();
    Tensor<T> out(sa);
    for (int bn = 0; bn < sa.n(); ++bn) {
        const T* v = b.value().data() + static_cast<std::size_t>(bn) * C;
        const std::size_t base = static_cast<std::size_t>(bn) * P * C;
        for (std::size_t p = 0; p < P; ++p)
            for (int c = 0; c < C; ++c) out[base + p * C + c] = a.value()[base + p * C + c] * v[c];
    }
    return make_result<T>("mul_channel", std::move(out), {a, b}, [P, C](Node<T>& n) {
        Node<T>* pa = parent(n, 0);
        Node<T>* pb = parent(n, 1);
        const auto& va = n.parents[0]->value;
        const auto& vb = n.parents[1]->value;
        const int N = va.shape().n();
        for (int bn = 0; bn < N; ++bn) {
            const std::size_t base = static_cast<std::size_t>(bn) * P * C;
            const T* v = vb.data() + static_cast<std::size_t>(bn) * C;
            T* ga = pa ? pa->grad_slot().data() + base : nullptr;
            T* gb = pb ? pb->grad_slot().data() + static_cast<std::size_t>(bn) * C : nullptr;
            for (std::size_t p = 0; p < P; ++p)
                for (int c = 0; c < C; ++c) {
                    const T go = n.grad[base + p * C + c];
                    if (ga) ga[p * C + c] += go * v[c];
                    if (gb) gb[c] += go * va[base + p * C + c];
                }
        }
    });
}

template <typename T>
Var<T> add(const Var<T>& a, const Var<T>& b)
{
    const Shape sa = a.shape(), sb = b.shape();
    if (sa == sb) {
        Tensor<T> out(sa);
        for (std::size_t i = 0; i < out.size(); ++i) out[i] = a.value()[i] + b.value()[i];
        return make_result<T>("add", std::move(out), {a, b}, [](Node<T>& n) {
            for (std::size_t k = 0; k < 2; ++k)
                if (Node<T>* p = parent(n, k)) {
                    auto& g = p->grad_slot();
                    for (std::size_t i = 0; i < g.size(); ++i) g[i] += n.grad[i];
                }
        });
    }
    if (is_channel_vector_of<T>(sa, sb)) return add(b, a);
    require_shape(is_channel_vector_of<T>(sb, sa), mismatch("add", sa, sb));
    const int C = sa.c();
    const std::size_t P = sa.pixels();
    Tensor<T> out(sa);
    for (int bn = 0; bn < sa.n(); ++bn) {
        const T* v = b.value().data() + static_cast<std::size_t>(bn) * C;
        const std::size_t base = static_cast<std::size_t>(bn) * P * C;
        for (std::size_t p = 0; p < P; ++p)
            for (int c = 0; c < C; ++c) out[base + p * C + c] = a.value()[base + p * C + c] + v[c];
    }
    return make_result<T>("add_channel", std::move(out), {a, b}, [P, C](Node<T>& n) {
        Node<T>* pa = parent(n, 0);
        Node<T>* pb = parent(n, 1);
        if (pa) {
            auto& g = pa->grad_slot();
            for (std::size_t i = 0; i < g.size(); ++i) g[i] += n.grad[i];
        }
        if (pb) {
            auto& g = pb->grad_slot();
            const int N = g.shape().n();
            for (int bn = 0; bn < N; ++bn)
                for (std::size_t p = 0; p < P; ++p)
                    for (int c = 0; c < C; ++c)
                        g[static_cast<std::size_t>(bn) * C + c] += n.grad[(bn * P + p) * C + c];
        }
    });
}

template <typename T>
Var<T> add_n(const std::vector<Var<T>>& xs)
{
    require_shape(!xs.empty(), "add_n: no inputs");
    const Shape s = xs.front().shape();
    Tensor<T> out(s);
    for (const auto& x : xs) {
        require_shape(x.shape() == s, mismatch("add_n", s, x.shape()));
        for (std::size_t i = 0; i < out.size(); ++i) out[i] += x.value()[i];
    }
    return make_result<T>("add_n", std::move(out), xs, [](Node<T>& n) {
        for (std::size_t k = 0; k < n.parents.size(); ++k)
            if (Node<T>* p = parent(n, k)) {
                auto& g = p->grad_slot();
                for (std::size_t i = 0; i < g.size(); ++i) g[i] += n.grad[i];
            }
    });
}

template <typename T>
Var<T> concat_channels(const std::vector<Var<T>>& xs)
{
    require_shape(!xs.empty(), "concat_channels: no inputs");
    const Shape s0 = xs.front().shape();
    std::vector<int> widths;
    int total = 0;
    for (const auto& x : xs) {
        const Shape s = x.shape();
        require_shape(s.n() == s0.n() && s.h() == s0.h() && s.w() == s0.w(),
                      mismatch("concat_channels", Shape(s0.n(), s0.h(), s0.w(), s.c()), s));
        widths.push_back(s.c());
        total += s.c();
    }
    const std::size_t rows = s0.numel() / s0.c();
    Tensor<T> out(Shape(s0.n(), s0.h(), s0.w(), total));
    int off = 0;
    for (std::size_t k = 0; k < xs.size(); ++k) {
        const int w = widths[k];
        const T* src = xs[k].value().data();
        for (std::size_t r = 0; r < rows; ++r)
            for (int c = 0; c < w; ++c) out[r * total + off + c] = src[r * w + c];
        off += w;
    }
    return make_result<T>("concat_channels", std::move(out), xs, [widths, total, rows](Node<T>& n) {
        int off = 0;
        for (std::size_t k = 0; k < widths.size(); ++k) {
            const int w = widths[k];
            if (Node<T>* p = parent(n, k)) {
                auto& g = p->grad_slot();
                for (std::size_t r = 0; r < rows; ++r)
                    for (int c = 0; c < w; ++c) g[r * w + c] += n.grad[r * total + off + c];
            }
            off += w;
        }
    });
}

template <typename T>
Var<T> sum_channels(const Var<T>& x)
{
    const Shape s = x.shape();
    const int C = s.c();
    const std::size_t rows = s.numel() / C;
    Tensor<T> out(Shape(s.n(), s.h(), s.w(), 1));
    for (std::size_t r = 0; r < rows; ++r) {
        T acc = 0;
        for (int c = 0; c < C; ++c) acc += x.value()[r * C + c];
        out[r] = acc;
    }
    return make_result<T>("sum_channels", std::move(out), {x}, [rows, C](Node<T>& n) {
        Node<T>* px = parent(n, 0);
        if (!px) return;
        auto& g = px->grad_slot();
        for (std::size_t r = 0; r < rows; ++r)
            for (int c = 0; c < C; ++c) g[r * C + c] += n.grad[r];
    });
}

template <typename T>
Var<T> relu(const Var<T>& x)
{
    Tensor<T> out(x.shape());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = x.value()[i] > T(0) ? x.value()[i] : T(0);
    return make_result<T>("relu", std::move(out), {x}, [](Node<T>& n) {
        Node<T>* px = parent(n, 0);
        if (!px) return;
        auto& g = px->grad_slot();
        const auto& xv = n.parents[0]->value;
        for (std::size_t i = 0; i < g.size(); ++i)
            if (xv[i] > T(0)) g[i] += n.grad[i];
    });
}

template <typename T>
Var<T> sigmoid(const Var<T>& x)
{
    Tensor<T> out(x.shape());
    for (std::size_t i = 0; i < out.size(); ++i) {
        const T v = x.value()[i];
        // Split by sign so exp never overflows.
        if (v >= T(0)) {
            out[i] = T(1) / (T(1) + std::exp(-v));
        } else {
            const T e = std::exp(v);
            out[i] = e / (T(1) + e);
        }
    }
    return make_result<T>("sigmoid", std::move(out), {x}, [](Node<T>& n) {
        Node<T>* px = parent(n, 0);
        if (!px) return;
        auto& g = px->grad_slot();
        for (std::size_t i = 0; i < g.size(); ++i) {
            const T y = n.value[i];
            g[i] += n.grad[i] * y * (T(1) - y);
        }
    });
}

template <typename T>
Var<T> scale(const Var<T>& x, T factor)
{
    Tensor<T> out(x.shape());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = x.value()[i] * factor;
    return make_result<T>("scale", std::move(out), {x}, [factor](Node<T>& n) {
        Node<T>* px = parent(n, 0);
        if (!px) return;
        auto& g = px->grad_slot();
        for (std::size_t i = 0; i < g.size(); ++i) g[i] += n.grad[i] * factor;
    });
}

template <typename T>
Var<T> sum(const Var<T>& x)
{
    T acc = 0;
    for (T v : x.value().values()) acc += v;
    return make_result<T>("sum", Tensor<T>::scalar(acc), {x}, [](Node<T>& n) {
        Node<T>* px = parent(n, 0);
        if (!px) return;
        auto& g = px->grad_slot();
        const T go = n.grad[0];
        for (std::size_t i = 0; i < g.size(); ++i) g[i] += go;
    });
}

template <typename T>
Var<T> mean(const Var<T>& x)
{
    const std::size_t count = x.value().size();
    require_shape(count > 0, "mean: empty tensor");
    return scale(sum(x), T(1) / static_cast<T>(count));
}

double pairwise_euclidean(std::span<const double> a, std::span<const double> b)
{
    require_shape(a.size() == b.size(), "pairwise_euclidean: length mismatch " + std::to_string(a.size()) +
                                            " vs " + std::to_string(b.size()));
    double acc = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double d = a[i] - b[i];
        acc += d * d;
    }
    return std::sqrt(acc);
}

void softmax_inplace(std::span<double> logits)
{
    if (logits.empty()) return;
    const double m = *std::max_element(logits.begin(), logits.end());
    double z = 0.0;
    for (double& v : logits) {
        v = std::exp(v - m);
        z += v;
    }
    for (double& v : logits) v /= z;
}

#define DSSN_OPS(T)                                                                \
    template Var<T> conv2d(const Var<T>&, const Var<T>&, const Var<T>&, int);      \
    template Var<T> bilinear_resize(const Var<T>&, int, int);                      \
    template Var<T> global_avg_pool(const Var<T>&);                                \
    template Var<T> softmax_channels(const Var<T>&);                               \
    template Var<T> channel_distance(const Var<T>&, const Var<T>&);                \
    template Var<T> pixel_dot(const Var<T>&, const Var<T>&);                       \
    template Var<T> mul(const Var<T>&, const Var<T>&);                             \
    template Var<T> add(const Var<T>&, const Var<T>&);                             \
    template Var<T> add_n(const std::vector<Var<T>>&);                             \
    template Var<T> concat_channels(const std::vector<Var<T>>&);                   \
    template Var<T> sum_channels(const Var<T>&);                                   \
    template Var<T> relu(const Var<T>&);                                           \
    template Var<T> sigmoid(const Var<T>&);                                        \
    template Var<T> scale(const Var<T>&, T);                                       \
    template Var<T> sum(const Var<T>&);                                            \
    template Var<T> mean(const Var<T>&);

DSSN_OPS(float)
DSSN_OPS(double)

}  // namespace dssn
