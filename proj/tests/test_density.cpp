#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "tubepw/transforms.hpp"

using namespace tubepw;

namespace {

SpectralDensity halfline_exp(double a) {
    return SpectralDensity::truncated_exponential(make_cone({{1.0}}), {a});
}

}  // namespace

TEST_CASE("truncated exponential evaluation") {
    SpectralDensity f = halfline_exp(1.0);
    CHECK_THAT(eval_density(f, rvec{1.0}), Catch::Matchers::WithinRel(std::exp(-two_pi), 1e-12));
    CHECK(eval_density(f, rvec{-1.0}) == 0.0);  // outside the dual cone
}

TEST_CASE("triangle and bump evaluation") {
    SpectralDensity tri = SpectralDensity::triangle();
    CHECK(eval_density(tri, rvec{0.0}) == 1.0);
    CHECK(eval_density(tri, rvec{0.25}) == 0.75);
    CHECK(eval_density(tri, rvec{1.5}) == 0.0);

    SpectralDensity b = SpectralDensity::bump({0.0}, 0.5, 3);
    CHECK(eval_density(b, rvec{0.0}) == 1.0);
    CHECK(eval_density(b, rvec{0.6}) == 0.0);
    double u = 0.2 / 0.5;
    CHECK_THAT(eval_density(b, rvec{0.2}),
               Catch::Matchers::WithinRel(std::pow(1 - u * u, 3), 1e-14));
}

TEST_CASE("construction guards") {
    // w must be strictly inside the cone
    CHECK_THROWS_AS(SpectralDensity::truncated_exponential(make_cone({{1.0}}), {-1.0}), Error);
    CHECK_THROWS_AS(
        SpectralDensity::truncated_exponential(make_cone({{1, 0}, {0, 1}}), {1.0, 0.0}), Error);
    CHECK_THROWS_AS(SpectralDensity::gaussian({0.0}, -1.0), Error);
}

TEST_CASE("support honesty on random points") {
    std::mt19937 rng(4242);
    std::uniform_real_distribution<double> u(-5.0, 5.0);
    SpectralDensity fs[] = {halfline_exp(1.0), SpectralDensity::triangle(),
                            SpectralDensity::bump({0.3}, 0.4, 2)};
    for (const SpectralDensity& f : fs) {
        int outside = 0;
        for (int k = 0; k < 10000; ++k) {
            rvec t = {u(rng)};
            if (!f.support.contains(t, 0.0)) {
                ++outside;
                CHECK(eval_density(f, t) == 0.0);
            }
        }
        CHECK(outside > 1000);
    }
}

TEST_CASE("decay certificate on sampled dual rays") {
    ConeSpec q = make_cone({{1, 0}, {1, 2}});
    SpectralDensity f = SpectralDensity::truncated_exponential(q, {1.0, 0.5});
    CHECK(f.decay > 0);
    std::mt19937 rng(7);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    ConeSpec d = f.cone_dual;
    for (int k = 0; k < 300; ++k) {
        rvec t(2, 0.0);
        for (const rvec& g : d.generators) {
            double a = u(rng);
            for (int i = 0; i < 2; ++i) t[i] += a * g[i];
        }
        if (norm2(t) < 1e-9) continue;
        CHECK(dot(f.w, t) >= f.decay * norm2(t) - 1e-9);
    }
}

TEST_CASE("closed form transform: half-line exponential") {
    SpectralDensity f = halfline_exp(1.0);
    auto F = closed_form_transform(f);
    REQUIRE(F.has_value());
    // F(z) = 1/(2 pi (a - i z)) at z = i: 1/(4 pi)
    cplx v = F->eval({cplx(0.0, 1.0)});
    CHECK_THAT(v.real(), Catch::Matchers::WithinRel(1.0 / (4.0 * pi), 1e-13));
    CHECK_THAT(v.imag(), Catch::Matchers::WithinAbs(0.0, 1e-15));
}

TEST_CASE("closed form transform: gaussian and triangle at the origin") {
    auto G = closed_form_transform(SpectralDensity::gaussian({0.0}, 1.0));
    REQUIRE(G.has_value());
    CHECK_THAT(G->eval({cplx(0.0, 0.0)}).real(), Catch::Matchers::WithinRel(1.0, 1e-14));

    auto T = closed_form_transform(SpectralDensity::triangle());
    REQUIRE(T.has_value());
    CHECK_THAT(T->eval({cplx(0.0, 0.0)}).real(), Catch::Matchers::WithinRel(1.0, 1e-10));
    // sinc^2 at z = 1/2: (sin(pi/2)/(pi/2))^2 = 4/pi^2
    CHECK_THAT(T->eval({cplx(0.5, 0.0)}).real(),
               Catch::Matchers::WithinRel(4.0 / (pi * pi), 1e-12));

    CHECK_FALSE(closed_form_transform(SpectralDensity::bump({0.0}, 0.5)).has_value());
}

TEST_CASE("quadrature synthesis agrees with closed forms at sample points") {
    QuadSpec q;
    std::vector<SpectralDensity> ds = {halfline_exp(1.0), SpectralDensity::gaussian({0.2}, 0.8),
                                       SpectralDensity::triangle()};
    cvec zs = {cplx(0.0, 0.5), cplx(1.0, 1.0), cplx(-2.0, 0.3), cplx(0.3, 2.0), cplx(5.0, 0.7)};
    for (const SpectralDensity& f : ds) {
        auto F = closed_form_transform(f);
        REQUIRE(F.has_value());
        for (const cplx& z : zs) {
            cplx a = synthesize(f, {z}, q);
            cplx b = F->eval({z});
            CHECK_THAT(std::abs(a - b),
                       Catch::Matchers::WithinAbs(0.0, 1e-6 * std::abs(b) + 1e-12));
        }
    }
}

TEST_CASE("2-D quadrature synthesis matches product closed form on the quadrant") {
    ConeSpec q2 = make_cone({{1, 0}, {0, 1}});
    SpectralDensity f = SpectralDensity::truncated_exponential(q2, {1.0, 2.0});
    auto F = closed_form_transform(f);
    REQUIRE(F.has_value());
    QuadSpec q;
    cvec z = {cplx(0.5, 0.4), cplx(-1.0, 0.8)};
    cplx a = synthesize(f, z, q);
    cplx b = F->eval(z);
    CHECK_THAT(std::abs(a - b), Catch::Matchers::WithinAbs(0.0, 1e-8 * std::abs(b)));
    // oracle: product of half-plane kernels
    cplx c = 1.0 / (two_pi * (1.0 - cplx(0, 1) * z[0])) / (two_pi * (2.0 - cplx(0, 1) * z[1]));
    CHECK_THAT(std::abs(b - c), Catch::Matchers::WithinAbs(0.0, 1e-12 * std::abs(c)));
}

TEST_CASE("synthesis rejects a divergent slice") {
    SpectralDensity f = halfline_exp(1.0);
    QuadSpec q;
    CHECK_THROWS_AS(synthesize(f, {cplx(0.0, -2.0)}, q), Error);  // y = -2 < -a
    try {
        synthesize(f, {cplx(0.0, -2.0)}, q);
    } catch (const Error& e) {
        CHECK(e.code() == errc::divergent_slice);
    }
}

TEST_CASE("gaussian synthesis flags an undersized truncation radius") {
    SpectralDensity f = SpectralDensity::gaussian({0.0}, 1.0);
    QuadSpec q;
    q.t_truncation = 0.4;
    CHECK_THROWS_AS(synthesize_detailed(f, {cplx(0.0, 0.5)}, q), Error);
}

TEST_CASE("bump synthesis in 2-D runs and matches 1-D factorization at a point") {
    // separable check: 2-D bump is not a product, so just verify against a
    // brute tensor quadrature at one z
    SpectralDensity f = SpectralDensity::bump({0.0, 0.0}, 0.7, 3);
    QuadSpec q;
    cvec z = {cplx(0.3, 0.1), cplx(-0.2, 0.2)};
    cplx v = synthesize(f, z, q);
    GaussRule g = gauss_legendre(48);
    cplx brute = 0.0;
    for (int i = 0; i < 48; ++i)
        for (int j = 0; j < 48; ++j) {
            rvec t = {0.7 * g.nodes[i], 0.7 * g.nodes[j]};
            cplx ph = t[0] * z[0] + t[1] * z[1];
            brute += 0.7 * 0.7 * g.weights[i] * g.weights[j] * eval_density(f, t) *
                     std::exp(two_pi * cplx(0, 1) * ph);
        }
    CHECK_THAT(std::abs(v - brute), Catch::Matchers::WithinAbs(0.0, 1e-6));
}
