#include "dssn/optim.hpp"

#include <cmath>
#include <numbers>

namespace dssn {

template <typename T>
void nadam_step(const std::vector<Tensor<T>*>& params, const std::vector<const Tensor<T>*>& grads,
                NadamState<T>& state, double lr, const NadamConfig& cfg)
{
    require_shape(params.size() == grads.size(), "nadam_step: params/grads count mismatch");
    if (!(lr >= 0.0)) throw Error("nadam_step: learning rate must be non-negative");
    if (state.m.empty()) {
        for (const Tensor<T>* p : params) {
            state.m.emplace_back(p->shape());
            state.v.emplace_back(p->shape());
        }
    }
    require_shape(state.m.size() == params.size(), "nadam_step: state does not match parameter list");
    state.step += 1;
    const double t = static_cast<double>(state.step);
    const double b1 = cfg.beta1, b2 = cfg.beta2;
    const double c1 = 1.0 - std::pow(b1, t);
    const double c2 = 1.0 - std::pow(b2, t);
    for (std::size_t k = 0; k < params.size(); ++k) {
        Tensor<T>& p = *params[k];
        const Tensor<T>& g = *grads[k];
        require_shape(p.shape() == g.shape(),
                      "nadam_step: gradient shape " + g.shape().str() + " != parameter " + p.shape().str());
        Tensor<T>& m = state.m[k];
        Tensor<T>& v = state.v[k];
        for (std::size_t i = 0; i < p.size(); ++i) {
            const double gi = g[i];
            const double mi = b1 * m[i] + (1.0 - b1) * gi;
            const double vi = b2 * v[i] + (1.0 - b2) * gi * gi;
            m[i] = static_cast<T>(mi);
            v[i] = static_cast<T>(vi);
            const double m_hat = b1 * mi / c1 + (1.0 - b1) * gi / c1;
            const double v_hat = vi / c2;
            p[i] = static_cast<T>(p[i] - lr * m_hat / (std::sqrt(v_hat) + cfg.eps));
        }
    }
}

double cosine_lr(std::int64_t step, std::int64_t total, double lr0)
{
    if (total <= 0 || step < 0 || step > total)
        throw Error("cosine_lr: step " + std::to_string(step) + " outside [0, " + std::to_string(total) + "]");
    return lr0 * (1.0 + std::cos(std::numbers::pi * static_cast<double>(step) / static_cast<double>(total))) / 2.0;
}

template void nadam_step(const std::vector<Tensor<float>*>&, const std::vector<const Tensor<float>*>&,
                         NadamState<float>&, double, const NadamConfig&);
template void nadam_step(const std::vector<Tensor<double>*>&, const std::vector<const Tensor<double>*>&,
                         NadamState<double>&, double, const NadamConfig&);

}  // namespace dssn
