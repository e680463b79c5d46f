#include "dssn/hrfm.hpp"

#include "dssn/sjfe.hpp"

namespace dssn {

PathKind path_kind(int in_level, int out_level)
{
    if (in_level > out_level) return PathKind::upsample_conv;
    if (in_level == out_level) return PathKind::conv;
    if (in_level == out_level - 1) return PathKind::strided_conv;
    throw ShapeError("fusion path from level " + std::to_string(in_level) + " to level " +
                     std::to_string(out_level) + " is not covered");
}

std::array<FusionStageSpec, 3> hrfm_plan(const std::array<int, 3>& widths)
{
    return {FusionStageSpec{{1, 2, 3}, {0, 1, 2}, 1, widths[0]},
            FusionStageSpec{{0, 1, 2}, {0, 1}, widths[0], widths[1]},
            FusionStageSpec{{0, 1}, {0}, widths[1], widths[2]}};
}

template <typename T>
Var<T> FusionPath<T>::operator()(const Var<T>& x, int out_h, int out_w) const
{
    switch (kind) {
    case PathKind::upsample_conv:
        return conv(bilinear_resize(x, out_h, out_w));
    case PathKind::conv:
    case PathKind::strided_conv:
        break;
    }
    Var<T> y = conv(x);
    require_shape(y.shape().h() == out_h && y.shape().w() == out_w,
                  "fusion path " + std::to_string(in_level) + "->" + std::to_string(out_level) + " produced " +
                      y.shape().str());
    return y;
}

template <typename T>
int FusionPath<T>::out_extent(int in_extent, int target) const
{
    return kind == PathKind::upsample_conv ? conv.out_extent(target) : conv.out_extent(in_extent);
}

template <typename T>
FusionStage<T>::FusionStage(ParamStore<T>& store, const std::string& name, const FusionStageSpec& spec) : spec_(spec)
{
    for (int b : spec.out_levels) {
        std::vector<FusionPath<T>> row;
        for (int a : spec.in_levels) {
            FusionPath<T> p;
            p.in_level = a;
            p.out_level = b;
            p.kind = path_kind(a, b);
            p.conv = Conv<T>(store, name + ".from" + std::to_string(a) + "_to" + std::to_string(b), spec.in_channels,
                             spec.width, 3, p.kind == PathKind::strided_conv ? 2 : 1);
            row.push_back(std::move(p));
        }
        paths_.push_back(std::move(row));
    }
}

template <typename T>
void FusionStage<T>::check_extents(int h, int w) const
{
    for (const auto& row : paths_)
        for (const auto& p : row) {
            const int th = level_extent(h, p.out_level), tw = level_extent(w, p.out_level);
            const int gh = p.out_extent(level_extent(h, p.in_level), th);
            const int gw = p.out_extent(level_extent(w, p.in_level), tw);
            if (gh != th || gw != tw)
                throw ShapeError("fusion path " + std::to_string(p.in_level) + "->" + std::to_string(p.out_level) +
                                 " yields " + std::to_string(gh) + "x" + std::to_string(gw) + ", expected " +
                                 std::to_string(th) + "x" + std::to_string(tw));
        }
}

template <typename T>
Var<T> FusionStage<T>::path(std::size_t out_index, std::size_t in_index, const Var<T>& x, int h, int w) const
{
    const auto& p = paths_.at(out_index).at(in_index);
    return p(x, level_extent(h, p.out_level), level_extent(w, p.out_level));
}

template <typename T>
std::vector<Var<T>> FusionStage<T>::operator()(const std::vector<Var<T>>& inputs, int h, int w) const
{
    if (inputs.size() != spec_.in_levels.size())
        throw ShapeError("fusion stage: expected " + std::to_string(spec_.in_levels.size()) + " inputs, got " +
                         std::to_string(inputs.size()));
    for (std::size_t i = 0; i < inputs.size(); ++i) {
        const Shape& s = inputs[i].shape();
        const int lvl = spec_.in_levels[i];
        if (s.h() != level_extent(h, lvl) || s.w() != level_extent(w, lvl) || s.c() != spec_.in_channels)
            throw ShapeError("fusion stage: input at level " + std::to_string(lvl) + " has shape " + s.str());
    }
    std::vector<Var<T>> out;
    for (std::size_t r = 0; r < paths_.size(); ++r) {
        std::vector<Var<T>> terms;
        for (std::size_t i = 0; i < inputs.size(); ++i) terms.push_back(path(r, i, inputs[i], h, w));
        out.push_back(relu(add_n(terms)));
    }
    return out;
}

template <typename T>
double FusionStage<T>::flops(int h, int w) const
{
    double total = 0;
    for (const auto& row : paths_)
        for (const auto& p : row) {
            const int lvl = p.kind == PathKind::upsample_conv ? p.out_level : p.in_level;
            total += p.conv.flops(level_extent(h, lvl), level_extent(w, lvl));
        }
    return total;
}

template <typename T>
Hrfm<T>::Hrfm(ParamStore<T>& store, const std::string& name, const std::array<int, 3>& widths)
{
    const auto plan = hrfm_plan(widths);
    for (std::size_t i = 0; i < plan.size(); ++i)
        stages_.emplace_back(store, name + ".stage" + std::to_string(i + 1), plan[i]);
    head_ = Conv<T>(store, name + ".head", widths[2], 1, 3);
}

template <typename T>
void Hrfm<T>::check_extents(int h, int w) const
{
    for (const auto& s : stages_) s.check_extents(h, w);
}

template <typename T>
Var<T> Hrfm<T>::operator()(const std::vector<Var<T>>& maps, int h, int w) const
{
    check_extents(h, w);
    std::vector<Var<T>> x = maps;
    for (const auto& s : stages_) x = s(x, h, w);
    return sigmoid(head_(x.front()));
}

template <typename T>
double Hrfm<T>::flops(int h, int w) const
{
    double total = head_.flops(h, w);
    for (const auto& s : stages_) total += s.flops(h, w);
    return total;
}

template <typename T>
StackedFusion<T>::StackedFusion(ParamStore<T>& store, const std::string& name, const std::array<int, 3>& widths)
{
    int in_c = 3;
    for (int i = 0; i < 3; ++i) {
        convs_.emplace_back(store, name + ".conv" + std::to_string(i + 1), in_c, widths[i], 3);
        in_c = widths[i];
    }
    convs_.emplace_back(store, name + ".head", in_c, 1, 3);
}

template <typename T>
Var<T> StackedFusion<T>::operator()(const std::vector<Var<T>>& maps, int h, int w) const
{
    require_shape(maps.size() == 3, "stacked fusion: expected 3 maps");
    std::vector<Var<T>> up;
    for (const auto& m : maps) up.push_back(bilinear_resize(m, h, w));
    Var<T> x = concat_channels(up);
    for (std::size_t i = 0; i + 1 < convs_.size(); ++i) x = relu(convs_[i](x));
    return sigmoid(convs_.back()(x));
}

template <typename T>
double StackedFusion<T>::flops(int h, int w) const
{
    double total = 0;
    for (const auto& c : convs_) total += c.flops(h, w);
    return total;
}

template struct FusionPath<float>;
template struct FusionPath<double>;
template class FusionStage<float>;
template class FusionStage<double>;
template class Hrfm<float>;
template class Hrfm<double>;
template class StackedFusion<float>;
template class StackedFusion<double>;

}  // namespace dssn
