#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "degrh/numerics.hpp"

using degrh::cplx;
using degrh::kPi;
using degrh::kTwoPi;
namespace num = degrh::num;

TEST_CASE("fft round trip and spectrum") {
    std::mt19937 rng(7);
    std::uniform_real_distribution<double> U(-1.0, 1.0);
    std::vector<cplx> a(256);
    for (auto& v : a) v = cplx(U(rng), U(rng));
    auto b = a;
    num::fft(b, false);
    num::fft(b, true);
    for (std::size_t i = 0; i < a.size(); ++i) CHECK(std::abs(a[i] - b[i]) < 1e-12);

    // e^{3 i theta} has a single spectral line at k = 3.
    const int n = 64;
    std::vector<cplx> c(n);
    for (int j = 0; j < n; ++j) {
        const double th = kTwoPi * j / n;
        c[j] = std::polar(1.0, 3.0 * th);
    }
    num::fft(c, false);
    for (int k = 0; k < n; ++k) {
        const double expected = (k == 3) ? n : 0.0;
        CHECK(std::abs(c[k] - cplx(expected, 0.0)) < 1e-10);
    }
}

TEST_CASE("gauss-legendre integrates polynomials exactly") {
    const auto& rule = num::gauss_legendre(8);
    double s0 = 0, s2 = 0, s7 = 0;
    for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
        s0 += rule.weights[i];
        s2 += rule.weights[i] * rule.nodes[i] * rule.nodes[i];
        s7 += rule.weights[i] * std::pow(rule.nodes[i], 7);
    }
    CHECK(s0 == doctest::Approx(2.0).epsilon(1e-14));
    CHECK(s2 == doctest::Approx(2.0 / 3.0).epsilon(1e-14));
    CHECK(std::abs(s7) < 1e-14);
}

TEST_CASE("gauss-jacobi handles endpoint singularities") {
    // Total weight equals int (1-t)^a (1+t)^b dt = 2^{a+b+1} B(a+1, b+1).
    for (auto [a, b] : {std::pair{-0.5, 0.0}, {-0.25, -0.75}, {-2.0 / 3.0, -1.0 / 3.0}}) {
        auto rule = num::gauss_jacobi(24, a, b);
        double s = 0;
        for (double w : rule.weights) s += w;
        const double exact = std::exp((a + b + 1.0) * std::log(2.0) + std::lgamma(a + 1.0) +
                                      std::lgamma(b + 1.0) - std::lgamma(a + b + 2.0));
        CHECK(s == doctest::Approx(exact).epsilon(1e-12));
    }

    // Smooth factor: self-convergence between 24 and 64 nodes.
    auto coarse = num::gauss_jacobi(24, -0.25, -0.75);
    auto fine = num::gauss_jacobi(64, -0.25, -0.75);
    auto apply = [](const num::QuadRule& r) {
        double s = 0;
        for (std::size_t i = 0; i < r.nodes.size(); ++i)
            s += r.weights[i] * std::cos(r.nodes[i]);
        return s;
    };
    CHECK(apply(coarse) == doctest::Approx(apply(fine)).epsilon(1e-12));
}

TEST_CASE("pchip interpolates monotone data monotonically") {
    std::vector<double> x, y;
    for (int i = 0; i <= 20; ++i) {
        x.push_back(i * 0.1);
        y.push_back(std::atan(2.0 * (i * 0.1 - 1.0)));
    }
    num::Pchip p(x, y);
    double prev = p(0.0);
    for (int k = 1; k <= 400; ++k) {
        const double t = 2.0 * k / 400.0;
        const double v = p(t);
        CHECK(v >= prev - 1e-12);
        prev = v;
        CHECK(std::abs(v - std::atan(2.0 * (t - 1.0))) < 4e-4);
    }
}

TEST_CASE("periodic spline reproduces a circle") {
    const int n = 64;
    std::vector<double> t(n + 1);
    std::vector<cplx> y(n + 1);
    for (int i = 0; i <= n; ++i) {
        t[i] = kTwoPi * i / n;
        y[i] = std::polar(2.0, t[i]);
    }
    num::PeriodicSplineC s(t, y);
    for (int k = 0; k < 100; ++k) {
        const double tt = kTwoPi * (k + 0.37) / 100.0;
        CHECK(std::abs(s(tt) - std::polar(2.0, tt)) < 1e-6);
        const cplx d = s.derivative(tt);
        CHECK(std::abs(d - cplx(0, 2) * std::polar(1.0, tt)) < 1e-4);
    }
}

TEST_CASE("winding number") {
    const int n = 128;
    std::vector<cplx> z3(n), zc(n), zs(n);
    for (int i = 0; i < n; ++i) {
        const double th = kTwoPi * i / n;
        z3[i] = std::polar(1.0, 3.0 * th);
        zc[i] = cplx(2.5, -0.3);
        zs[i] = std::polar(1.0, std::sin(th));
    }
    CHECK(num::winding_number(z3) == 3);
    CHECK(num::winding_number(zc) == 0);
    CHECK(num::winding_number(zs) == 0);
    double res = 1.0;
    num::winding_number(z3, kPi / 2, &res);
    CHECK(res < 1e-12);
}

TEST_CASE("unwrap phases") {
    std::vector<double> raw;
    for (int i = 0; i <= 100; ++i) raw.push_back(num::wrap_pm_pi(0.13 * i));
    num::unwrap_phases(raw);
    for (int i = 0; i <= 100; ++i) CHECK(raw[i] == doctest::Approx(0.13 * i).epsilon(1e-12));
}
