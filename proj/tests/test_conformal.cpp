#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "degrh/conformal.hpp"
#include "test_helpers.hpp"

using degrh::cplx;
using degrh::kPi;
using degrh::kTwoPi;
namespace conf = degrh::conformal;
namespace geom = degrh::geom;

namespace {
conf::MapOptions default_opts() { return {}; }
}  // namespace

TEST_CASE("unit disk maps to itself") {
    std::vector<conf::BoundarySide> sides(1);
    sides[0].t0 = 0.0;
    sides[0].t1 = kTwoPi;
    sides[0].w = [](double t) { return std::polar(1.0, t); };
    conf::DiskMapper map(sides, /*corners=*/false, cplx(0, 0), default_opts());

    // with center 0 the map is the identity up to rotation; here exactly z
    CHECK(std::abs(map.forward(cplx(0.5, 0.0))) == doctest::Approx(0.5).epsilon(1e-9));
    CHECK(std::abs(map.forward(cplx(0.2, -0.7)) - cplx(0.2, -0.7)) < 1e-9);
    CHECK(std::abs(map.forward(cplx(0, 0))) < 1e-12);
    // boundary angle is the polar angle
    for (double t : {0.3, 1.7, 4.4})
        CHECK(std::abs(degrh::num::wrap_2pi(map.boundary_angle(t)) - t) < 1e-9);
    // off-center disk map is a Moebius transform; check |f|=1 on the boundary
    conf::DiskMapper map2(sides, false, cplx(0.3, 0.2), default_opts());
    for (double t : {0.1, 2.0, 3.3, 5.9})
        CHECK(std::abs(std::abs(map2.forward(std::polar(1.0, t))) - 1.0) < 1e-8);
    CHECK(std::abs(map2.forward(cplx(0.3, 0.2))) < 1e-11);
    const cplx w = map2.inverse(cplx(0.4, -0.1));
    CHECK(std::abs(map2.forward(w) - cplx(0.4, -0.1)) < 1e-10);
}

TEST_CASE("upper half disk against the classical closed form") {
    // two smooth sides: diameter [-1, 1] and the upper arc; corners at +-1
    std::vector<conf::BoundarySide> sides(2);
    sides[0].t0 = 0.0;
    sides[0].t1 = 2.0;
    sides[0].w = [](double t) { return cplx(t - 1.0, 0.0); };
    sides[1].t0 = 2.0;
    sides[1].t1 = 2.0 + kPi;
    sides[1].w = [](double t) { return std::polar(1.0, t - 2.0); };
    const cplx pstar(0.0, 0.5);
    conf::DiskMapper map(sides, /*corners=*/true, pstar, default_opts());

    // oracle: q = ((1+z)/(1-z))^2 maps the half disk to the upper half plane;
    // w = (q - q*)/(q - conj(q*)) sends p* to 0.
    auto oracle = [&](cplx z) {
        const cplx q = std::pow((1.0 + z) / (1.0 - z), 2);
        const cplx qs = std::pow((1.0 + pstar) / (1.0 - pstar), 2);
        return (q - qs) / (q - std::conj(qs));
    };
    const double h = 1e-6;
    const cplx od = (oracle(pstar + h) - oracle(pstar - h)) / (2 * h);
    const cplx md = map.derivative(pstar);
    std::mt19937 rng(3);
    std::uniform_real_distribution<double> U(-0.9, 0.9);
    int checked = 0;
    while (checked < 16) {
        const cplx z(U(rng), std::abs(U(rng)));
        if (std::abs(z) > 0.85 || z.imag() < 0.08) continue;
        if (std::abs(z - pstar) < 0.05) continue;
        ++checked;
        const cplx a = oracle(z) * std::conj(od) / std::abs(od);
        const cplx b = map.forward(z) * std::conj(md) / std::abs(md);
        CHECK(std::abs(a - b) < 1e-5);
    }
    CHECK(map.max_corner_mismatch() < 1e-3);
}

TEST_CASE("ellipse: self-consistency of forward, inverse and boundary") {
    std::vector<conf::BoundarySide> sides(1);
    sides[0].t0 = 0.0;
    sides[0].t1 = kTwoPi;
    sides[0].w = [](double t) { return cplx(std::cos(t), 0.6 * std::sin(t)); };
    conf::DiskMapper map(sides, false, cplx(0.1, 0.05), default_opts());
    for (double t = 0.05; t < kTwoPi; t += 0.37) {
        const cplx zb = map.forward(sides[0].w(t));
        CHECK(std::abs(std::abs(zb) - 1.0) < 1e-8);
    }
    std::mt19937 rng(11);
    std::uniform_real_distribution<double> U(-1.0, 1.0);
    int n = 0;
    while (n < 25) {
        const cplx w(U(rng), 0.6 * U(rng));
        if (std::norm(w.real()) + std::norm(w.imag() / 0.6) > 0.8) continue;
        ++n;
        const cplx z = map.forward(w);
        CHECK(std::abs(z) < 1.0);
        CHECK(std::abs(map.inverse(z) - w) < 1e-8);
    }
    double prev = map.boundary_angle(0.01);
    for (double t = 0.21; t < kTwoPi; t += 0.2) {
        const double a = map.boundary_angle(t);
        CHECK(a > prev);
        prev = a;
    }
}

TEST_CASE("example atlas: collapse, alignment, residuals, orientation") {
    auto dec = testutil::example31_decomposition();
    auto F = [](double x, double y) { return testutil::example31_F(x, y); };

    SUBCASE("orientation derivation from the Jacobian of F") {
        auto dec2 = degrh::geom::decompose(testutil::disk2_domain(), testutil::example31_orbits());
        conf::orient_from_first_integral(dec2, F);
        CHECK(dec2.components[0].preserved);
        int strip = degrh::geom::locate(dec2, cplx(0, 0));
        CHECK_FALSE(dec2.components[strip].preserved);
    }

    degrh::Numerics num;
    auto atlas = conf::build_atlas(dec, F, {}, num);
    conf::align_all(atlas, dec);

    for (const auto& inc : dec.incidence) {
        const auto find_c = [&](int comp_id) {
            const auto& word = dec.components[comp_id].word;
            for (std::size_t k = 0; k < word.size(); ++k)
                if (word[k].orbit_id == inc.orbit_id) return atlas.comp(comp_id).c_images[k];
            throw std::runtime_error("missing");
        };
        const cplx ca = find_c(inc.component_a);
        const cplx cb = find_c(inc.component_b);
        CHECK(std::abs(ca - cb) < 1e-6);
        CHECK(std::abs(std::abs(ca) - 1.0) < 1e-9);
    }

    for (const auto& inc : dec.incidence) {
        for (int comp_id : {inc.component_a, inc.component_b}) {
            const auto& orb = dec.orbits[inc.orbit_id];
            cplx mean = 0.0;
            std::vector<cplx> vals;
            for (int i = 1; i < 32; ++i) {
                const double t = orb.curve.t0() + (orb.curve.t1() - orb.curve.t0()) * i / 32.0;
                const cplx p = orb.curve(t);
                const cplx z = conf::atlas_forward(atlas, dec, F, comp_id, p);
                vals.push_back(z);
                mean += z;
            }
            mean /= static_cast<double>(vals.size());
            double sd = 0.0;
            for (const auto& v : vals) sd += std::norm(v - mean);
            CHECK(std::sqrt(sd / vals.size()) < 1e-6);
        }
    }

    std::mt19937 rng(7);
    std::uniform_real_distribution<double> U(-2.0, 2.0);
    auto vf = testutil::example31_field();
    for (const auto& comp : dec.components) {
        const auto& ac = atlas.comp(comp.id);
        for (const auto& we : comp.word) {
            for (int i = 1; i < 12; ++i) {
                const double t = we.arc_begin + (we.arc_end - we.arc_begin) * i / 12.0;
                const cplx p = dec.domain.boundary(degrh::num::wrap_2pi(t));
                const cplx z = ac.map.forward(F(p.real(), p.imag()));
                CHECK(std::abs(std::abs(z) - 1.0) < 1e-6);
                const double ang = ac.map.angle_from_param(t);
                CHECK(std::abs(std::polar(1.0, ang) - z / std::abs(z)) < 1e-6);
            }
        }
        int n = 0;
        while (n < 20) {
            const cplx p(U(rng), U(rng));
            if (degrh::geom::try_locate(dec, p) != comp.id) continue;
            if (std::abs(p) > 1.9 || std::abs(std::abs(p.real()) - 1.0) < 0.1) continue;
            ++n;
            const cplx w = F(p.real(), p.imag());
            const cplx z = ac.map.forward(w);
            CHECK(std::abs(z) < 1.0 + 1e-9);
            CHECK(std::abs(ac.map.inverse(z) - w) < 1e-6);
            auto Z = [&](double x, double y) { return ac.map.forward(F(x, y)); };
            const cplx res = degrh::field::first_integral_residual(vf, Z, p.real(), p.imag());
            CHECK(std::abs(res) < 1e-6);
        }
        const auto& we = comp.word[0];
        double prev = ac.map.angle_from_param(we.arc_begin + 0.05 * (we.arc_end - we.arc_begin));
        bool inc_ok = true, dec_ok = true;
        for (int i = 2; i < 16; ++i) {
            const double t = we.arc_begin + (we.arc_end - we.arc_begin) * i / 16.0;
            const double a = ac.map.angle_from_param(t);
            inc_ok = inc_ok && a > prev;
            dec_ok = dec_ok && a < prev;
            prev = a;
        }
        CHECK((comp.preserved ? inc_ok : dec_ok));
    }

    SUBCASE("pushforward keeps unimodular data unimodular") {
        std::vector<double> angles;
        for (int i = 0; i < 64; ++i) angles.push_back(kTwoPi * (i + 0.5) / 64.0);
        auto h = [&](double t) { return std::polar(1.0, t); };
        for (const auto& comp : dec.components) {
            bool collision = false;
            std::vector<cplx> vals;
            try {
                vals = conf::boundary_pushforward(atlas, dec, comp.id, h, angles, 1e-9);
            } catch (const degrh::NumericError&) {
                collision = true;
            }
            if (collision) continue;
            for (const auto& v : vals) CHECK(std::abs(std::abs(v) - 1.0) < 1e-9);
        }
    }
}

TEST_CASE("align fixes the anchor side and is idempotent") {
    auto dec = testutil::example31_decomposition();
    auto F = [](double x, double y) { return testutil::example31_F(x, y); };
    degrh::Numerics num;
    auto atlas = conf::build_atlas(dec, F, {}, num);
    const int orbit = dec.components[0].word[0].orbit_id;
    const cplx before_c = atlas.comp(0).c_images[0];
    const cplx rot = conf::align(atlas, dec, orbit, 0);
    CHECK(std::abs(std::abs(rot) - 1.0) < 1e-12);
    CHECK(std::abs(atlas.comp(0).c_images[0] - before_c) == 0.0);
    const cplx rot2 = conf::align(atlas, dec, orbit, 0);
    CHECK(std::abs(rot2 - cplx(1, 0)) < 1e-12);
}
