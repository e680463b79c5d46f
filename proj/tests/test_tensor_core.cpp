#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <limits>
#include <random>

#include "dssn/gradcheck.hpp"
#include "dssn/kernels.hpp"
#include "dssn/ops.hpp"
#include "dssn/optim.hpp"
#include "oracles.hpp"

using namespace dssn;
using D = double;

namespace {

Var<D> leaf_d(Tensor<D> t) { return leaf(std::move(t), true); }

void require_equal(const Tensor<D>& a, const Tensor<D>& b)
{
    REQUIRE(a.shape() == b.shape());
    for (std::size_t i = 0; i < a.size(); ++i) REQUIRE(a[i] == b[i]);
}

}  // namespace

TEST_CASE("conv2d identity and constant field")
{
    std::mt19937_64 rng(3);
    auto x = constant(oracle::random_tensor<D>(rng, Shape(1, 4, 5, 3)));
    Tensor<D> eye(Shape(1, 1, 3, 3));
    for (int c = 0; c < 3; ++c) eye[c * 3 + c] = 1;
    require_equal(conv2d(x, constant(eye), constant(Tensor<D>(vector_shape(3))), 1).value(), x.value());

    auto c = constant(Tensor<D>(Shape(1, 5, 5, 1), 0.7));
    auto y = conv2d(c, constant(Tensor<D>(Shape(3, 3, 1, 1), 1.0)), Var<D>{}, 1).value();
    for (int i = 1; i < 4; ++i)
        for (int j = 1; j < 4; ++j) CHECK(y.at(0, i, j, 0) == doctest::Approx(6.3).epsilon(1e-15));
    CHECK(y.at(0, 0, 0, 0) == doctest::Approx(4 * 0.7));
}

TEST_CASE("conv2d matches the loop oracle exactly")
{
    std::mt19937_64 rng(11);
    auto x = oracle::random_tensor<D>(rng, Shape(1, 5, 5, 2));
    auto w = oracle::random_tensor<D>(rng, Shape(3, 3, 2, 3));
    auto b = oracle::random_tensor<D>(rng, vector_shape(3));
    require_equal(conv2d(constant(x), constant(w), constant(b), 2).value(), oracle::conv2d(x, w, &b, 2));
    CHECK(conv2d(constant(x), constant(w), constant(b), 2).shape() == Shape(1, 3, 3, 3));

    for (int trial = 0; trial < 30; ++trial) {
        const int k = trial % 2 ? 3 : 1, stride = k == 3 && trial % 4 == 1 ? 2 : 1;
        const Shape xs(uniform_int(rng, 1, 2), uniform_int(rng, 1, 8), uniform_int(rng, 1, 8), uniform_int(rng, 1, 4));
        auto xi = oracle::random_tensor<D>(rng, xs);
        auto wi = oracle::random_tensor<D>(rng, Shape(k, k, xs.c(), uniform_int(rng, 1, 4)));
        const Tensor<D>* none = nullptr;
        require_equal(kernels::conv2d_forward(xi, wi, none, stride), oracle::conv2d(xi, wi, none, stride));
    }
}

TEST_CASE("conv2d rejects inconsistent shapes")
{
    auto x = constant(Tensor<D>(Shape(1, 4, 4, 2)));
    CHECK_THROWS_AS(conv2d(x, constant(Tensor<D>(Shape(3, 3, 3, 1))), Var<D>{}, 1), ShapeError);
    CHECK_THROWS_AS(conv2d(x, constant(Tensor<D>(Shape(5, 5, 2, 1))), Var<D>{}, 1), ShapeError);
    CHECK_THROWS_AS(conv2d(x, constant(Tensor<D>(Shape(3, 3, 2, 1))), Var<D>{}, 3), ShapeError);
    CHECK_THROWS_AS(conv2d(x, constant(Tensor<D>(Shape(1, 1, 2, 2))), constant(Tensor<D>(vector_shape(3))), 1),
                    ShapeError);
}

TEST_CASE("bilinear resize")
{
    auto c = constant(Tensor<D>(Shape(1, 3, 2, 2), 1.25));
    const auto r = bilinear_resize(c, 7, 5).value();
    CHECK(r.shape() == Shape(1, 7, 5, 2));
    for (double v : r.values()) CHECK(v == 1.25);

    Tensor<D> m(Shape(1, 2, 2, 1), std::vector<D>{0, 1, 2, 3});
    require_equal(bilinear_resize(constant(m), 2, 2).value(), m);

    // Half-pixel centres: rows sample 0, 0.25, 0.75, 1 of the way down.
    const auto up = bilinear_resize(constant(m), 4, 4).value();
    const double axis[4] = {0, 0.25, 0.75, 1};
    for (int y = 0; y < 4; ++y)
        for (int x = 0; x < 4; ++x) CHECK(up.at(0, y, x, 0) == 2 * axis[y] + axis[x]);
    require_equal(up, oracle::bilinear(m, 4, 4));

    std::mt19937_64 rng(5);
    for (int trial = 0; trial < 30; ++trial) {
        auto x = oracle::random_tensor<D>(rng, Shape(1, uniform_int(rng, 1, 8), uniform_int(rng, 1, 8),
                                                     uniform_int(rng, 1, 4)));
        const int oh = uniform_int(rng, 1, 9), ow = uniform_int(rng, 1, 9);
        require_equal(bilinear_resize(constant(x), oh, ow).value(), oracle::bilinear(x, oh, ow));
    }
    CHECK_THROWS_AS(bilinear_resize(constant(m), 0, 3), ShapeError);
}

TEST_CASE("global average pool")
{
    CHECK(global_avg_pool(constant(Tensor<D>(Shape(1, 3, 3, 2), -0.5))).value()[1] == -0.5);
    CHECK(global_avg_pool(constant(Tensor<D>(Shape(1, 2, 2, 1), std::vector<D>{0, 1, 2, 3}))).value().item() == 1.5);
    std::mt19937_64 rng(9);
    auto x = oracle::random_tensor<D>(rng, Shape(1, 7, 5, 3));
    const auto g = global_avg_pool(constant(x)).value();
    const auto o = oracle::gap(x);
    for (int c = 0; c < 3; ++c) CHECK(std::abs(g[c] - o[c]) <= 1e-12);
    auto s = oracle::random_tensor<D>(rng, Shape(2, 8, 8, 4));
    require_equal(global_avg_pool(constant(s)).value(), oracle::gap(s));
}

TEST_CASE("softmax")
{
    std::vector<double> one{3.0};
    softmax_inplace(one);
    CHECK(one[0] == 1.0);
    std::vector<double> eq(4, 2.5);
    softmax_inplace(eq);
    for (double v : eq) CHECK(v == doctest::Approx(0.25).epsilon(1e-15));
    std::vector<double> l{0.0, std::log(3.0)};
    softmax_inplace(l);
    CHECK(l[0] == doctest::Approx(0.25).epsilon(1e-14));
    CHECK(l[1] == doctest::Approx(0.75).epsilon(1e-14));

    std::mt19937_64 rng(2);
    auto x = oracle::random_tensor<D>(rng, Shape(2, 4, 3, 6), -8, 8);
    // Eighths shifted by an integer stay exact, so max-subtraction gives identical logits.
    for (auto& v : x.values()) v = std::round(v * 8) / 8;
    Tensor<D> shifted = x;
    for (auto& v : shifted.values()) v += 37;
    const auto a = softmax_channels(constant(x)).value();
    require_equal(a, softmax_channels(constant(shifted)).value());
    for (std::size_t p = 0; p < a.size() / 6; ++p) {
        double s = 0;
        std::vector<double> z(x.values().begin() + p * 6, x.values().begin() + p * 6 + 6);
        const auto ref = oracle::softmax(z);
        for (int c = 0; c < 6; ++c) {
            s += a[p * 6 + c];
            CHECK(a[p * 6 + c] > 0);
            CHECK(std::abs(a[p * 6 + c] - ref[c]) <= 1e-15);
        }
        CHECK(std::abs(s - 1) <= 1e-6);
    }
}

TEST_CASE("pairwise euclidean")
{
    const std::vector<double> a{0, 0}, b{3, 4};
    CHECK(pairwise_euclidean(a, b) == 5.0);
    CHECK(pairwise_euclidean(b, b) == 0.0);
    std::mt19937_64 rng(8);
    std::vector<double> p(32), q(32);
    for (int i = 0; i < 32; ++i) {
        p[i] = uniform(rng, -1, 1);
        q[i] = uniform(rng, -1, 1);
    }
    double s = 0;
    for (int i = 0; i < 32; ++i) s += (p[i] - q[i]) * (p[i] - q[i]);
    CHECK(std::abs(pairwise_euclidean(p, q) - std::sqrt(s)) <= 1e-12);
    CHECK_THROWS_AS(pairwise_euclidean(p, std::vector<double>(31)), ShapeError);
}

TEST_CASE("elementwise ops and channel broadcasting")
{
    std::mt19937_64 rng(4);
    auto a = oracle::random_tensor<D>(rng, Shape(1, 3, 3, 2));
    require_equal(mul(constant(a), constant(Tensor<D>(a.shape(), 1.0))).value(), a);
    require_equal(add(constant(a), constant(Tensor<D>(a.shape(), 0.0))).value(), a);

    Tensor<D> v(Shape(1, 1, 1, 2), std::vector<D>{2, 0.5});
    const auto m = mul(constant(a), constant(v)).value();
    const auto m2 = mul(constant(v), constant(a)).value();
    const auto s = add(constant(a), constant(v)).value();
    for (int y = 0; y < 3; ++y)
        for (int x = 0; x < 3; ++x)
            for (int c = 0; c < 2; ++c) {
                CHECK(m.at(0, y, x, c) == a.at(0, y, x, c) * v[c]);
                CHECK(m2.at(0, y, x, c) == a.at(0, y, x, c) * v[c]);
                CHECK(s.at(0, y, x, c) == a.at(0, y, x, c) + v[c]);
            }
    CHECK_THROWS_AS(mul(constant(a), constant(Tensor<D>(Shape(1, 1, 1, 3)))), ShapeError);
    CHECK_THROWS_AS(add(constant(a), constant(Tensor<D>(Shape(1, 3, 2, 2)))), ShapeError);
}

TEST_CASE("non-finite values are rejected")
{
    Tensor<D> t(Shape(1, 1, 1, 2), std::vector<D>{1, 1e308});
    CHECK_THROWS_AS(scale(constant(t), 10.0), NumericError);
    Tensor<D> n(Shape(1, 1, 1, 1), std::numeric_limits<D>::quiet_NaN());
    CHECK_THROWS_AS(constant(n), NumericError);
}

TEST_CASE("backward")
{
    std::mt19937_64 rng(1);
    auto x = leaf_d(oracle::random_tensor<D>(rng, Shape(1, 3, 4, 2)));
    backward(sum(x));
    for (double g : x.grad().values()) CHECK(g == 1.0);

    // Softmax Jacobian rows sum to zero: d(sum of outputs)/d(logits) = 0.
    auto z = leaf_d(Tensor<D>(Shape(1, 1, 1, 5), 0.3));
    backward(sum(softmax_channels(z)));
    for (double g : z.grad().values()) CHECK(std::abs(g) <= 1e-15);

    CHECK_THROWS_AS(backward(relu(x)), ShapeError);

    auto xi = leaf_d(oracle::random_tensor<D>(rng, Shape(1, 4, 4, 2)));
    auto w = leaf_d(oracle::random_tensor<D>(rng, Shape(3, 3, 2, 2)));
    auto b = leaf_d(oracle::random_tensor<D>(rng, vector_shape(2)));
    const double err = gradcheck([&] { return conv2d(xi, w, b, 1); }, {xi, w, b}, rng);
    CHECK(err <= 1e-4);

    // Two evaluations of the same graph give identical gradients.
    auto run = [&] {
        auto wl = leaf_d(w.value());
        backward(sum(sigmoid(conv2d(constant(xi.value()), wl, constant(b.value()), 2))));
        return wl.grad();
    };
    require_equal(run(), run());
}

TEST_CASE("gradient check suite")
{
    const auto results = run_gradcheck_suite(20, 1);
    CHECK(results.size() == gradcheck_names().size());
    for (const auto& r : results) {
        INFO(r.name << " worst " << r.worst);
        CHECK(r.cases == 20);
        CHECK(r.passed);
    }
}

TEST_CASE("nadam")
{
    const double lr = 0.01;
    Tensor<D> p = Tensor<D>::scalar(0), g = Tensor<D>::scalar(1);
    NadamState<D> st;
    nadam_step<D>({&p}, {&g}, st, lr);
    // m = 0.1, v = 0.001; m/(1-b1) = 1, g(1-b1)/(1-b1) = 1, sqrt(v/(1-b2)) = 1.
    CHECK(p.item() == doctest::Approx(-lr * (0.9 * 1 + 1) / (1 + 1e-8)).epsilon(1e-12));
    CHECK(st.step == 1);

    const double before = p.item();
    Tensor<D> zero = Tensor<D>::scalar(0);
    NadamState<D> warm;
    warm.m = {Tensor<D>::scalar(0)};
    warm.v = {Tensor<D>::scalar(0)};
    warm.step = 10;
    nadam_step<D>({&p}, {&zero}, warm, lr);
    CHECK(p.item() == before);

    Tensor<D> a = Tensor<D>::scalar(0.5), b = Tensor<D>::scalar(0.5), ga = Tensor<D>::scalar(-0.3);
    NadamState<D> s2;
    for (int i = 0; i < 5; ++i) nadam_step<D>({&a, &b}, {&ga, &ga}, s2, lr);
    CHECK(a.item() == b.item());
}

TEST_CASE("cosine schedule")
{
    CHECK(cosine_lr(0, 100, 0.02) == 0.02);
    CHECK(std::abs(cosine_lr(100, 100, 0.02)) <= 1e-18);
    CHECK(cosine_lr(50, 100, 0.02) == doctest::Approx(0.01).epsilon(1e-14));
    CHECK_THROWS(cosine_lr(101, 100, 0.02));
    CHECK_THROWS(cosine_lr(-1, 100, 0.02));
}
