/// Initial data generation: steady-state gradient map, the four closed-form
/// perturbations, Lloyd quantization and the discrete sampling of the
/// perturbed steady state.

#include <catch2/catch_amalgamated.hpp>

#include <sgeady/initial_data.hpp>
#include <sgeady/sdot.hpp>

using namespace sgeady;

namespace {
const PhysicalParams params{};
const Domain udom{1e6, 10224.85};
} // namespace

TEST_CASE("steady gradient and its inverse") {
    CHECK(steady_gradient({0.0, -udom.H / 2}, params, udom).x == 0.0);
    CHECK(steady_gradient({0.0, -udom.H / 2}, params, udom).y == 0.0);
    // N^2/f^2 = 2500 with the standard parameters
    const Vec2 top = steady_gradient({0.0, udom.H / 2}, params, udom);
    CHECK(top.y == Catch::Approx(2500.0 * udom.H).epsilon(1e-12));
    // round trip
    const Vec2 x{-3.7e5, 1234.5};
    const Vec2 back = steady_gradient_inverse(steady_gradient(x, params, udom), params, udom);
    CHECK(back.x == Catch::Approx(x.x));
    CHECK(back.y == Catch::Approx(x.y));
}

TEST_CASE("unstable mode collapses to the constants at quarter period") {
    const ModeConstants mc = mode_constants(params, udom);
    const Vec2 g = perturbation(PerturbationKind::unstable, {udom.L / 2, 0.0}, params, udom);
    // cos(pi x1/L) = 0, sinh(0) = 0, cosh(0) = 1
    const double v_expected = -params.a * mc.a1;
    const double th_expected = -params.a * params.N * params.theta0 / params.g * mc.a2;
    CHECK(g.x == Catch::Approx(v_expected / params.f).epsilon(1e-12));
    CHECK(g.y ==
          Catch::Approx(params.g * th_expected / (params.f * params.f * params.theta0))
              .epsilon(1e-12));
}

TEST_CASE("stable mode at the domain edge") {
    const Domain sdom{1e6, 16374.56};
    const ModeConstants mc = mode_constants(params, sdom);
    const Vec2 g = perturbation(PerturbationKind::stable, {0.0, sdom.H / 2}, params, sdom);
    CHECK(g.x == 0.0);  // v vanishes with sin(0)
    const double th = params.a * params.N * params.theta0 / params.g *
                      (mc.a1 * std::sinh(mc.kappa) + mc.a2 * std::cosh(mc.kappa));
    CHECK(g.y ==
          Catch::Approx(params.g * th / (params.f * params.f * params.theta0)).epsilon(1e-12));
}

TEST_CASE("sine-in-both-coordinates perturbation vanishes on its nodal lines") {
    const Domain dom{1e6, 1e4};
    // x1/L + x2/H + 1/2 integer => G = 0
    const Vec2 g = perturbation(PerturbationKind::cullen, {dom.L / 2, 0.0}, params, dom);
    // sin(pi) only vanishes to round-off; compare against the amplitude scale
    const double amp = params.g * params.B / (params.theta0 * params.f * params.f);
    CHECK(std::abs(g.x) < 1e-15 * amp);
    CHECK(std::abs(g.y) < 1e-15 * amp);
    const Vec2 g2 = perturbation(PerturbationKind::cullen, {0.0, 0.3 * dom.H}, params, dom);
    CHECK(g2.x == Catch::Approx(g2.y * dom.H / dom.L));
}

TEST_CASE("squeezed mode equals the unstable mode at compressed height") {
    const Domain dom{1e6, 1e4};
    for (const Vec2 x : {Vec2{1e5, 2e3}, Vec2{-7e5, -4e3}, Vec2{0.0, 5e3}}) {
        const Vec2 a = perturbation(PerturbationKind::visram, x, params, dom);
        const Vec2 b = perturbation(PerturbationKind::unstable,
                                    {x.x, x.y / std::acos(-1.0)}, params, dom);
        CHECK(a.x == b.x);
        CHECK(a.y == b.y);
    }
}

TEST_CASE("normal modes have zero mean over the domain") {
    // midpoint quadrature of v and theta components of G_u
    const int nx = 200, ny = 80;
    double sv = 0.0, st = 0.0, amax = 0.0;
    for (int i = 0; i < nx; ++i) {
        for (int j = 0; j < ny; ++j) {
            const Vec2 x{-udom.L + (i + 0.5) * 2.0 * udom.L / nx,
                         -udom.H / 2 + (j + 0.5) * udom.H / ny};
            const Vec2 g = perturbation(PerturbationKind::unstable, x, params, udom);
            sv += g.x;
            st += g.y;
            amax = std::max({amax, std::abs(g.x), std::abs(g.y)});
        }
    }
    const double cells = static_cast<double>(nx) * ny;
    CHECK(std::abs(sv / cells) < 1e-8 * amax);
    CHECK(std::abs(st / cells) < 1e-8 * amax);
}

TEST_CASE("lloyd: single point moves to mid-height") {
    // the lone periodic cell is the whole rectangle; its x-average is the
    // seed's own abscissa, so only the height settles at the centre
    const auto start = triangular_lattice(1, params, udom);
    const auto pts = lloyd_quantize(1, udom, params, 1);
    REQUIRE(pts.size() == 1);
    CHECK(pts[0].x == Catch::Approx(start[0].x).margin(1e-9 * udom.L));
    CHECK(pts[0].y ==
          Catch::Approx(image_rectangle_height(params, udom) / 2).epsilon(1e-9));
}

TEST_CASE("lloyd quantization energy is non-increasing") {
    const int n = 60;
    std::vector<Vec2> pts = triangular_lattice(n, params, udom);
    double prev = std::numeric_limits<double>::infinity();
    for (int it = 0; it < 12; ++it) {
        const auto vor = image_voronoi(pts, udom, params);
        double e = 0.0;
        for (const auto& c : vor.cells) e += c.moment_rr;
        CHECK(e <= prev * (1.0 + 1e-12));
        prev = e;
        for (int i = 0; i < n; ++i) {
            const Vec2 c = vor.cells[i].centroid;
            pts[i] = {wrap_x(c.x, udom.L),
                      c.y + image_rectangle_height(params, udom) / 2};
        }
    }
}

TEST_CASE("lloyd cells become nearly uniform") {
    const int n = 400;
    const auto pts = lloyd_quantize(n, udom, params, 100);
    const auto vor = image_voronoi(pts, udom, params);
    const double mean = vor.total_area / n;
    double lo = 1e300, hi = 0.0;
    for (const auto& c : vor.cells) {
        lo = std::min(lo, c.area);
        hi = std::max(hi, c.area);
    }
    CHECK((hi - lo) / mean < 0.10);
}

TEST_CASE("discretize: masses partition the domain and unperturbed seeds sit in the image") {
    const int n = 300;
    const auto st = discretize(n, PerturbationKind::none, params, udom, 1.0, 40);
    REQUIRE(static_cast<int>(st.seeds.size()) == n);
    double total = 0.0;
    for (double m : st.masses) {
        CHECK(m > 0.0);
        total += m;
    }
    CHECK(std::abs(total - udom.area()) < 1e-10 * udom.area());
    const double height = image_rectangle_height(params, udom);
    for (const Vec2& z : st.seeds) {
        CHECK(z.x >= -udom.L);
        CHECK(z.x < udom.L);
        CHECK(z.y >= -1e-9 * height);
        CHECK(z.y <= height * (1.0 + 1e-9));
    }
}

TEST_CASE("perturbed discretization admits a positive-area initial guess") {
    const int n = 500;
    const auto st = discretize(n, PerturbationKind::unstable, params, udom, 1.0, 40);
    std::mt19937_64 rng(7);
    const auto [zt, w] = initial_weight_guess(st.seeds, udom, 1e-6 * udom.L, rng);
    const auto dia = build_laguerre(zt, w, udom);
    CHECK(dia.min_area() > 0.0);
}
