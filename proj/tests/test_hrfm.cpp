#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "dssn/hrfm.hpp"
#include "dssn/sjfe.hpp"
#include "oracles.hpp"

using namespace dssn;
using D = double;

namespace {

std::vector<Var<D>> level_maps(std::mt19937_64& rng, int side, const std::vector<int>& levels, int c, bool zero = false)
{
    std::vector<Var<D>> out;
    for (int l : levels) {
        const Shape s(1, level_extent(side, l), level_extent(side, l), c);
        out.push_back(leaf(zero ? Tensor<D>(s) : oracle::random_tensor<D>(rng, s, 0, 1), true));
    }
    return out;
}

void randomize_biases(ParamStore<D>& store, std::mt19937_64& rng)
{
    for (std::size_t i = 0; i < store.vars().size(); ++i)
        if (store.names()[i].ends_with(".bias"))
            store.vars()[i].mutable_value() = oracle::random_tensor<D>(rng, store.vars()[i].shape(), -0.3, 0.3);
}

}  // namespace

TEST_CASE("path rules")
{
    CHECK(path_kind(3, 1) == PathKind::upsample_conv);
    CHECK(path_kind(2, 1) == PathKind::upsample_conv);
    CHECK(path_kind(1, 1) == PathKind::conv);
    CHECK(path_kind(0, 1) == PathKind::strided_conv);
    CHECK_THROWS_AS(path_kind(0, 2), ShapeError);

    // All three rules land on the output extent, for every side the model accepts.
    std::mt19937_64 rng(1);
    for (const auto& spec : hrfm_plan({16, 8, 4})) {
        ParamStore<D> store(1);
        FusionStage<D> stage(store, "stage", spec);
        for (int side : {32, 40, 64, 100, 256}) {
            stage.check_extents(side, side);
            const auto in = level_maps(rng, side, spec.in_levels, spec.in_channels);
            for (std::size_t r = 0; r < spec.out_levels.size(); ++r)
                for (std::size_t i = 0; i < in.size(); ++i) {
                    const int e = level_extent(side, spec.out_levels[r]);
                    CHECK(stage.path(r, i, in[i], side, side).shape() == Shape(1, e, e, spec.width));
                }
        }
    }

    const auto plan = hrfm_plan({16, 8, 4});
    CHECK(plan[0].in_levels == std::vector<int>{1, 2, 3});
    CHECK(plan[0].out_levels == std::vector<int>{0, 1, 2});
    CHECK(plan[1].out_levels == std::vector<int>{0, 1});
    CHECK(plan[2].out_levels == std::vector<int>{0});
    for (int s = 0; s < 2; ++s) {
        CHECK(plan[s + 1].in_levels == plan[s].out_levels);
        CHECK(plan[s + 1].width < plan[s].width);
    }
}

TEST_CASE("fusion stage")
{
    std::mt19937_64 rng(2);
    ParamStore<D> store(2);
    const FusionStageSpec spec = hrfm_plan({6, 4, 2})[0];
    FusionStage<D> stage(store, "stage1", spec);

    const auto zero = stage(level_maps(rng, 64, spec.in_levels, 1, true), 64, 64);
    for (const auto& z : zero)
        for (double v : z.value().values()) CHECK(v == 0.0);

    randomize_biases(store, rng);
    const auto in = level_maps(rng, 64, spec.in_levels, 1);
    const auto out = stage(in, 64, 64);
    REQUIRE(out.size() == 3);
    for (std::size_t r = 0; r < out.size(); ++r) {
        std::vector<Tensor<D>> parts;
        for (std::size_t i = 0; i < in.size(); ++i) parts.push_back(stage.path(r, i, in[i], 64, 64).value());
        for (std::size_t k = 0; k < out[r].value().size(); ++k) {
            double s = 0;
            for (const auto& p : parts) s += p[k];
            CHECK(std::abs(out[r].value()[k] - std::max(s, 0.0)) <= 1e-6);
        }
    }

    // One nonzero input: each output is that input's path alone.
    ParamStore<D> clean(3);
    FusionStage<D> st(clean, "stage1", spec);
    auto only = level_maps(rng, 64, spec.in_levels, 1, true);
    only[1] = leaf(oracle::random_tensor<D>(rng, only[1].shape(), 0, 1), true);
    const auto iso = st(only, 64, 64);
    for (std::size_t r = 0; r < iso.size(); ++r) {
        const auto p = st.path(r, 1, only[1], 64, 64).value();
        for (std::size_t k = 0; k < p.size(); ++k) CHECK(iso[r].value()[k] == std::max(p[k], 0.0));
    }

    auto missing = in;
    missing.pop_back();
    CHECK_THROWS_AS(stage(missing, 64, 64), ShapeError);
    auto wrong = in;
    wrong[2] = constant(Tensor<D>(Shape(1, 5, 5, 1)));
    CHECK_THROWS_AS(stage(wrong, 64, 64), ShapeError);
}

TEST_CASE("full module")
{
    std::mt19937_64 rng(4);
    ParamStore<D> store(4);
    Hrfm<D> net(store, "hrfm", {16, 8, 4});
    const auto s = net(level_maps(rng, 256, {1, 2, 3}, 1), 256, 256);
    CHECK(s.shape() == Shape(1, 256, 256, 1));
    for (double v : s.value().values()) CHECK((v >= 0 && v <= 1));

    const auto half = net(level_maps(rng, 64, {1, 2, 3}, 1, true), 64, 64).value();
    for (double v : half.values()) CHECK(v == 0.5);

    CHECK_THROWS_AS(net(level_maps(rng, 64, {1, 2, 2}, 1), 64, 64), ShapeError);

    // Every intermediate map reaches the output.
    ParamStore<D> s2(5);
    Hrfm<D> small(s2, "hrfm", {4, 3, 2});
    randomize_biases(s2, rng);
    auto maps = level_maps(rng, 32, {1, 2, 3}, 1);
    backward(sum(small(maps, 32, 32)));
    for (const auto& m : maps) {
        double g = 0;
        for (double v : m.grad().values()) g += std::abs(v);
        CHECK(g > 0);
    }
}

TEST_CASE("stacked replacement")
{
    std::mt19937_64 rng(6);
    ParamStore<D> store(6);
    StackedFusion<D> net(store, "stacked", {16, 8, 4});
    const auto s = net(level_maps(rng, 64, {1, 2, 3}, 1), 64, 64);
    CHECK(s.shape() == Shape(1, 64, 64, 1));
    CHECK(store.vars().size() == 8);
    for (double v : s.value().values()) CHECK((v > 0 && v < 1));
}

TEST_CASE("stage widths must decrease")
{
    ModelConfig cfg;
    cfg.hrfm_widths = {8, 8, 4};
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
    cfg.hrfm_widths = {8, 4, 0};
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
}
