#include <cmath>
#include <vector>

#include "blw/kernels.hpp"
#include "blw/layers.hpp"
#include "blw/rng.hpp"
#include "doctest.h"

using namespace blw;

namespace {

Tensor from_row(std::vector<double> v) {
    const std::size_t n = v.size();
    return Tensor({1, 1, n}, std::move(v));
}

ConvParams kernel_of(std::vector<double> taps, std::size_t dilation) {
    ConvParams p = ConvParams::zeros(1, 1, taps.size(), dilation);
    p.weights = std::move(taps);
    return p;
}

// Test oracle: literal double loop over taps with explicit zero reads.
Tensor direct_sum(const Tensor& x, const ConvParams& p) {
    Tensor y({x.batch(), p.out_channels, x.length()});
    const long L = static_cast<long>(x.length());
    const long half = static_cast<long>(p.kernel) / 2;
    const long step = static_cast<long>(p.dilation) + 1;
    for (std::size_t b = 0; b < x.batch(); ++b)
        for (std::size_t co = 0; co < p.out_channels; ++co)
            for (long i = 0; i < L; ++i) {
                double acc = p.bias[co];
                for (std::size_t ci = 0; ci < p.in_channels; ++ci)
                    for (long s = 0; s < static_cast<long>(p.kernel); ++s) {
                        const long j = i + (s - half) * step;
                        const double xv = (j >= 0 && j < L) ? x(b, ci, static_cast<std::size_t>(j)) : 0.0;
                        acc += p.weights[(co * p.in_channels + ci) * p.kernel + static_cast<std::size_t>(s)] * xv;
                    }
                y(b, co, static_cast<std::size_t>(i)) = acc;
            }
    return y;
}

ConvParams random_params(Rng& rng, std::size_t cout, std::size_t cin, std::size_t k, std::size_t r) {
    ConvParams p = ConvParams::zeros(cout, cin, k, r);
    for (double& w : p.weights) w = rng.uniform(-1, 1);
    for (double& b : p.bias) b = rng.uniform(-1, 1);
    return p;
}

Tensor random_tensor(Rng& rng, Shape s) {
    Tensor t(s);
    for (double& v : t.values()) v = rng.uniform(-1, 1);
    return t;
}

double max_abs_diff(std::span<const double> a, std::span<const double> b) {
    double m = 0;
    for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
    return m;
}

}  // namespace

TEST_CASE("conv1d worked examples") {
    const Tensor x = from_row({1, 2, 3, 4, 5});
    for (Backend be : {Backend::parallel, Backend::reference}) {
        CHECK(conv1d(x, kernel_of({0, 1, 0}, 0), be).values().size() == 5);
        auto id = conv1d(x, kernel_of({0, 1, 0}, 0), be);
        CHECK(std::vector<double>(id.values().begin(), id.values().end()) ==
              std::vector<double>{1, 2, 3, 4, 5});
        auto box = conv1d(x, kernel_of({1, 1, 1}, 0), be);
        CHECK(std::vector<double>(box.values().begin(), box.values().end()) ==
              std::vector<double>{3, 6, 9, 12, 9});
        auto dil = conv1d(x, kernel_of({1, 1, 1}, 1), be);
        CHECK(std::vector<double>(dil.values().begin(), dil.values().end()) ==
              std::vector<double>{4, 6, 9, 6, 8});
    }
}

TEST_CASE("conv1d errors") {
    const Tensor x({1, 2, 8});
    CHECK_THROWS_AS(conv1d(x, ConvParams::zeros(1, 3, 3)), ShapeError);
    CHECK_THROWS_AS(conv1d(x, ConvParams::zeros(1, 2, 4)), ConfigError);
}

TEST_CASE("parallel and reference kernels match the direct-sum oracle") {
    Rng rng(11);
    for (int trial = 0; trial < 60; ++trial) {
        const std::size_t B = 1 + rng.below(4);
        const std::size_t cin = 1 + rng.below(4);
        const std::size_t cout = 1 + rng.below(6);
        const std::size_t L = 1 + rng.below(70);
        const std::size_t K = std::array<std::size_t, 4>{3, 5, 9, 15}[rng.below(4)];
        const std::size_t r = std::array<std::size_t, 3>{0, 1, 3}[rng.below(3)];
        const ConvParams p = random_params(rng, cout, cin, K, r);
        const Tensor x = random_tensor(rng, {B, cin, L});
        const Tensor expect = direct_sum(x, p);
        CHECK(max_abs_diff(conv1d(x, p, Backend::parallel).values(), expect.values()) < 1e-12);
        CHECK(max_abs_diff(conv1d(x, p, Backend::reference).values(), expect.values()) < 1e-12);
    }
}

TEST_CASE("dilation equals a zero-stuffed kernel exactly") {
    Rng rng(5);
    for (std::size_t r : {1u, 2u, 3u}) {
        const ConvParams p = random_params(rng, 3, 2, 5, r);
        const std::size_t stuffed_k = (p.kernel - 1) * (r + 1) + 1;
        ConvParams q = ConvParams::zeros(3, 2, stuffed_k, 0);
        q.bias = p.bias;
        for (std::size_t co = 0; co < 3; ++co)
            for (std::size_t ci = 0; ci < 2; ++ci)
                for (std::size_t s = 0; s < p.kernel; ++s)
                    q.weight(co, ci, s * (r + 1)) = p.weights[(co * 2 + ci) * p.kernel + s];
        const Tensor x = random_tensor(rng, {2, 2, 40});
        const Tensor a = conv1d(x, p);
        const Tensor b = conv1d(x, q);
        CHECK(max_abs_diff(a.values(), b.values()) == 0.0);
    }
}

TEST_CASE("conv1d_backward") {
    Rng rng(3);
    const ConvParams p = random_params(rng, 3, 2, 3, 1);
    const Tensor x = random_tensor(rng, {1, 2, 7});

    SUBCASE("zero upstream gives zero gradients") {
        const auto g = conv1d_backward(x, p, Tensor({1, 3, 7}));
        for (double v : g.input.values()) CHECK(v == 0.0);
        for (double v : g.weights) CHECK(v == 0.0);
        for (double v : g.bias) CHECK(v == 0.0);
    }

    SUBCASE("bias gradient is the per-channel upstream sum") {
        const Tensor up = random_tensor(rng, {1, 3, 7});
        const auto g = conv1d_backward(x, p, up);
        for (std::size_t c = 0; c < 3; ++c) {
            double sum = 0;
            for (double v : up.row(0, c)) sum += v;
            CHECK(g.bias[c] == doctest::Approx(sum).epsilon(1e-14));
        }
    }

    SUBCASE("matches central differences") {
        const Tensor up = random_tensor(rng, {1, 3, 7});
        const auto g = conv1d_backward(x, p, up);
        auto J = [&](const Tensor& xx, const ConvParams& pp) {
            const Tensor y = conv1d(xx, pp);
            double s = 0;
            for (std::size_t i = 0; i < y.size(); ++i) s += y.values()[i] * up.values()[i];
            return s;
        };
        const double h = 1e-6;
        auto rel = [](double a, double n) {
            return std::abs(a - n) / std::max({std::abs(a), std::abs(n), 1e-8});
        };
        for (std::size_t i = 0; i < x.size(); ++i) {
            Tensor xp = x, xm = x;
            xp.values()[i] += h;
            xm.values()[i] -= h;
            CHECK(rel(g.input.values()[i], (J(xp, p) - J(xm, p)) / (2 * h)) < 1e-5);
        }
        for (std::size_t i = 0; i < p.weights.size(); ++i) {
            ConvParams pp = p, pm = p;
            pp.weights[i] += h;
            pm.weights[i] -= h;
            CHECK(rel(g.weights[i], (J(x, pp) - J(x, pm)) / (2 * h)) < 1e-5);
        }
        for (std::size_t i = 0; i < p.bias.size(); ++i) {
            ConvParams pp = p, pm = p;
            pp.bias[i] += h;
            pm.bias[i] -= h;
            CHECK(rel(g.bias[i], (J(x, pp) - J(x, pm)) / (2 * h)) < 1e-5);
        }
    }

    SUBCASE("upstream shape mismatch") {
        CHECK_THROWS_AS(conv1d_backward(x, p, Tensor({1, 2, 7})), ShapeError);
    }
}

TEST_CASE("parallel backward agrees with the serial reference") {
    Rng rng(21);
    for (int trial = 0; trial < 30; ++trial) {
        const std::size_t B = 1 + rng.below(4);
        const std::size_t cin = 1 + rng.below(5);
        const std::size_t cout = 1 + rng.below(9);
        const std::size_t L = 1 + rng.below(80);
        const std::size_t K = std::array<std::size_t, 4>{3, 5, 9, 15}[rng.below(4)];
        const std::size_t r = rng.below(4);
        const ConvParams p = random_params(rng, cout, cin, K, r);
        const Tensor x = random_tensor(rng, {B, cin, L});
        const Tensor up = random_tensor(rng, {B, cout, L});
        const auto a = conv1d_backward(x, p, up, Backend::parallel);
        const auto b = conv1d_backward(x, p, up, Backend::reference);
        CHECK(max_abs_diff(a.input.values(), b.input.values()) < 1e-11);
        CHECK(max_abs_diff(a.weights, b.weights) < 1e-10);
        CHECK(max_abs_diff(a.bias, b.bias) < 1e-11);
    }
}

TEST_CASE("kernels are independent of the thread count") {
    Rng rng(8);
    const ConvParams p = random_params(rng, 9, 6, 15, 3);
    const Tensor x = random_tensor(rng, {5, 6, 100});
    const Tensor up = random_tensor(rng, {5, 9, 100});
    const int saved = kernels::thread_count();
    kernels::set_thread_count(1);
    const Tensor y1 = conv1d(x, p);
    const auto g1 = conv1d_backward(x, p, up);
    kernels::set_thread_count(3);
    const Tensor y3 = conv1d(x, p);
    const auto g3 = conv1d_backward(x, p, up);
    kernels::set_thread_count(saved);
    CHECK(max_abs_diff(y1.values(), y3.values()) == 0.0);
    CHECK(max_abs_diff(g1.weights, g3.weights) == 0.0);
    CHECK(max_abs_diff(g1.input.values(), g3.input.values()) == 0.0);
}

TEST_CASE("single-precision forward tracks double") {
    Rng rng(4);
    const ConvParams p = random_params(rng, 4, 3, 9, 3);
    const Tensor x = random_tensor(rng, {2, 3, 64});
    const Tensor y = conv1d(x, p);
    std::vector<float> xf(x.values().begin(), x.values().end());
    std::vector<float> wf(p.weights.begin(), p.weights.end());
    std::vector<float> bf(p.bias.begin(), p.bias.end());
    TensorF xt({2, 3, 64}, xf);
    TensorF yt({2, 4, 64});
    kernels::conv_forward<float>(p.geometry(64), 2, block_of(std::as_const(xt)), wf, bf, block_of(yt));
    for (std::size_t i = 0; i < y.size(); ++i) CHECK(yt.values()[i] == doctest::Approx(y.values()[i]).epsilon(1e-4));
}
