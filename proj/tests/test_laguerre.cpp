/// Laguerre diagram construction, moments and area derivatives, checked
/// against a Monte-Carlo point-location oracle and centered finite
/// differences as independent references.

#include <catch2/catch_amalgamated.hpp>

#include <sgeady/laguerre.hpp>

#include <Eigen/Dense>

#include <map>
#include <random>

using namespace sgeady;

namespace {

// Oracle: assign a point to the cell minimizing |x - z_j - k|^2 - w_j.
int locate(Vec2 x, const std::vector<Vec2>& z, const std::vector<double>& w,
           const Domain& dom) {
    int best = -1;
    double bestv = std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < z.size(); ++j) {
        const double dx = std::remainder(x.x - z[j].x, 2.0 * dom.L);
        const double dy = x.y - z[j].y;
        const double v = dx * dx + dy * dy - w[j];
        if (v < bestv) {
            bestv = v;
            best = static_cast<int>(j);
        }
    }
    return best;
}

std::vector<Vec2> random_seeds(std::mt19937_64& rng, int n, const Domain& dom,
                               double ylo, double yhi) {
    std::vector<Vec2> z(n);
    for (auto& p : z)
        p = {(-1.0 + 2.0 * uniform01(rng)) * dom.L, ylo + (yhi - ylo) * uniform01(rng)};
    return z;
}

} // namespace

TEST_CASE("single seed owns the whole strip") {
    const Domain dom{1e6, 1e4};
    const auto dia = build_laguerre({{2.5e5, 7e6}}, {3.0}, dom);
    CHECK(dia.cells[0].area == Catch::Approx(2e10).epsilon(1e-13));
    CHECK(dia.cells[0].centroid.x == Catch::Approx(2.5e5));
    CHECK(std::abs(dia.cells[0].centroid.y) < 1e-6);
    // closed-form second moment of the strip about the seed
    const double z2 = 7e6;
    const double expected =
        dom.area() * (dom.L * dom.L / 3.0 + dom.H * dom.H / 12.0 + z2 * z2);
    CHECK(dia.cells[0].moment_rr == Catch::Approx(expected).epsilon(1e-12));
    // both periodic self-contacts are recorded with equal length
    REQUIRE(dia.cells[0].edges.size() == 2);
    CHECK(dia.cells[0].edges[0].length == Catch::Approx(dom.H));
    CHECK(dia.cells[0].edges[1].length == Catch::Approx(dom.H));
}

TEST_CASE("two symmetric seeds split the domain in half") {
    const Domain dom{1e6, 1e4};
    const std::vector<Vec2> z{{-5e5, 0.0}, {5e5, 0.0}};
    const auto dia = build_laguerre(z, {0.0, 0.0}, dom);
    CHECK(dia.cells[0].area == Catch::Approx(dom.L * dom.H).epsilon(1e-12));
    CHECK(dia.cells[1].area == Catch::Approx(dom.L * dom.H).epsilon(1e-12));
}

TEST_CASE("unit square cell has |x-z|^2 integral 1/6") {
    const Domain dom{1.0, 1.0};
    const std::vector<Vec2> z{{-0.5, 0.0}, {0.5, 0.0}};
    const auto dia = build_laguerre(z, {0.0, 0.0}, dom);
    for (const auto& c : dia.cells) {
        CHECK(c.area == Catch::Approx(1.0).epsilon(1e-14));
        CHECK(c.moment_rr == Catch::Approx(1.0 / 6.0).epsilon(1e-13));
        CHECK(c.moment_xx == Catch::Approx(1.0 / 12.0).epsilon(1e-13));
    }
}

TEST_CASE("duplicate seeds are rejected") {
    const Domain dom{1e6, 1e4};
    const std::vector<Vec2> z{{1e5, 2e6}, {1e5, 2e6}, {0.0, 0.0}};
    CHECK_THROWS_AS(build_laguerre(z, {0.0, 0.0, 0.0}, dom), DuplicateSeeds);
    // duplicates across the periodic cut
    const std::vector<Vec2> z2{{-1e6, 5.0}, {1e6 - 1e-9, 5.0}};
    CHECK_THROWS_AS(build_laguerre(z2, {0.0, 0.0}, dom), DuplicateSeeds);
}

TEST_CASE("areas agree with Monte-Carlo point location") {
    const Domain dom{1e6, 1e4};
    std::mt19937_64 rng(2024);
    const int n = 20;
    const auto z = random_seeds(rng, n, dom, -dom.H / 2, dom.H / 2);
    std::vector<double> w(n);
    for (auto& v : w) v = uniform_symmetric(rng, 0.05 * dom.L * dom.L);

    const auto dia = build_laguerre(z, w, dom);
    CHECK(std::abs(dia.total_area - dom.area()) < 1e-10 * dom.area());

    const std::size_t samples = 10'000'000;
    std::vector<std::size_t> hits(n, 0);
    for (std::size_t k = 0; k < samples; ++k) {
        const Vec2 x{(-1.0 + 2.0 * uniform01(rng)) * dom.L,
                     (-0.5 + uniform01(rng)) * dom.H};
        ++hits[locate(x, z, w, dom)];
    }
    for (int i = 0; i < n; ++i) {
        const double p = dia.cells[i].area / dom.area();
        const double mc = static_cast<double>(hits[i]) / static_cast<double>(samples);
        const double sigma = std::sqrt(std::max(p * (1.0 - p), 1e-12) /
                                       static_cast<double>(samples));
        CHECK(std::abs(mc - p) < 5.0 * sigma + 1e-9);
    }
}

TEST_CASE("moments agree with Monte-Carlo quadrature") {
    const Domain dom{1e6, 1e4};
    std::mt19937_64 rng(7);
    const int n = 3;
    const auto z = random_seeds(rng, n, dom, 0.0, 2e6);
    std::vector<double> w(n);
    for (int i = 0; i < n; ++i) {
        const double d = std::max(z[i].y - dom.H / 2, 0.0);
        w[i] = d * d + uniform_symmetric(rng, 1e9);
    }

    const auto dia = build_laguerre(z, w, dom);
    REQUIRE(dia.min_area() > 0.0);

    const std::size_t samples = 10'000'000;
    std::vector<double> cnt(n, 0), sx(n, 0), sy(n, 0), sxx(n, 0), srr(n, 0);
    for (std::size_t k = 0; k < samples; ++k) {
        const Vec2 x{(-1.0 + 2.0 * uniform01(rng)) * dom.L,
                     (-0.5 + uniform01(rng)) * dom.H};
        const int i = locate(x, z, w, dom);
        // strip coordinates of the non-periodic cell of seed i
        const Vec2 u{std::remainder(x.x - z[i].x, 2.0 * dom.L), x.y - z[i].y};
        cnt[i] += 1.0;
        sx[i] += u.x;
        sy[i] += u.y;
        sxx[i] += u.x * u.x;
        srr[i] += u.norm2();
    }
    const double cell_weight = dom.area() / static_cast<double>(samples);
    for (int i = 0; i < n; ++i) {
        CHECK(dia.cells[i].area == Catch::Approx(cnt[i] * cell_weight).epsilon(5e-3));
        CHECK(dia.cells[i].centroid.x - z[i].x ==
              Catch::Approx(sx[i] / cnt[i]).margin(2e-3 * dom.L));
        CHECK(dia.cells[i].centroid.y - z[i].y ==
              Catch::Approx(sy[i] / cnt[i]).margin(2e-3 * dom.H));
        CHECK(dia.cells[i].moment_xx == Catch::Approx(sxx[i] * cell_weight).epsilon(1e-2));
        CHECK(dia.cells[i].moment_rr == Catch::Approx(srr[i] * cell_weight).epsilon(1e-2));
    }
}

TEST_CASE("partition of the domain holds for arbitrary weights") {
    const Domain dom{1e6, 1e4};
    std::mt19937_64 rng(99);
    for (int rep = 0; rep < 5; ++rep) {
        const int n = 5 + 13 * rep;
        const auto z = random_seeds(rng, n, dom, 0.0, 2.5e7);
        std::vector<double> w(n);
        for (int i = 0; i < n; ++i) {
            const double d = std::max(z[i].y - dom.H / 2, 0.0);
            w[i] = d * d + uniform_symmetric(rng, 1e9);
        }
        const auto dia = build_laguerre(z, w, dom);
        CHECK(std::abs(dia.total_area - dom.area()) < 1e-10 * dom.area());
    }
}

TEST_CASE("weights are defined up to a common shift") {
    const Domain dom{1e6, 1e4};
    std::mt19937_64 rng(5);
    const int n = 12;
    const auto z = random_seeds(rng, n, dom, -dom.H / 2, dom.H);
    std::vector<double> w(n), ws(n);
    for (int i = 0; i < n; ++i) {
        w[i] = uniform_symmetric(rng, 1e9);
        ws[i] = w[i] + 17.3;
    }
    const auto a = build_laguerre(z, w, dom);
    const auto b = build_laguerre(z, ws, dom);
    for (int i = 0; i < n; ++i) {
        CHECK(b.cells[i].area == Catch::Approx(a.cells[i].area).epsilon(1e-12));
        CHECK(b.cells[i].centroid.x ==
              Catch::Approx(a.cells[i].centroid.x).margin(1e-9 * dom.L));
        CHECK(b.cells[i].centroid.y ==
              Catch::Approx(a.cells[i].centroid.y).margin(1e-9 * dom.H));
    }
}

TEST_CASE("horizontal translation equivariance") {
    const Domain dom{1e6, 1e4};
    std::mt19937_64 rng(11);
    const int n = 17;
    const auto z = random_seeds(rng, n, dom, 0.0, 5e6);
    std::vector<double> w(n);
    for (auto& v : w) v = uniform_symmetric(rng, 1e9);
    const double delta = 0.37 * dom.L;
    std::vector<Vec2> zs(n);
    for (int i = 0; i < n; ++i) zs[i] = {wrap_x(z[i].x + delta, dom.L), z[i].y};

    const auto a = build_laguerre(z, w, dom);
    const auto b = build_laguerre(zs, w, dom);
    for (int i = 0; i < n; ++i) {
        CHECK(b.cells[i].area == Catch::Approx(a.cells[i].area).epsilon(1e-9));
        const Vec2 want{a.cells[i].centroid.x + delta, a.cells[i].centroid.y};
        CHECK(periodic_distance(b.cells[i].centroid, want, dom) < 1e-7 * dom.L);
    }
}

TEST_CASE("edge lengths are symmetric between neighbours") {
    const Domain dom{1e6, 1e4};
    std::mt19937_64 rng(21);
    const int n = 25;
    const auto z = random_seeds(rng, n, dom, -dom.H, dom.H);
    std::vector<double> w(n);
    for (auto& v : w) v = uniform_symmetric(rng, 5e8);
    const auto dia = build_laguerre(z, w, dom);

    std::map<std::tuple<int, int, int>, double> len;
    for (int i = 0; i < n; ++i)
        for (const auto& e : dia.cells[i].edges)
            len[{i, e.neighbor, e.shift}] = e.length;
    REQUIRE(!len.empty());
    for (const auto& [key, l] : len) {
        const auto [i, j, s] = key;
        auto it = len.find({j, i, -s});
        REQUIRE(it != len.end());
        CHECK(it->second == Catch::Approx(l).epsilon(1e-9));
    }
}

TEST_CASE("hinted rebuild matches the exact diagram") {
    const Domain dom{1e6, 1e4};
    std::mt19937_64 rng(31);
    const int n = 60;
    const auto z = random_seeds(rng, n, dom, 0.0, 1e6);
    std::vector<double> w(n);
    for (auto& v : w) v = uniform_symmetric(rng, 1e8);
    const auto base = build_laguerre(z, w, dom);

    SECTION("small motion stays on the fast path") {
        auto z2 = z;
        auto w2 = w;
        for (int i = 0; i < n; ++i) {
            z2[i] += {uniform_symmetric(rng, 50.0), uniform_symmetric(rng, 50.0)};
            w2[i] += uniform_symmetric(rng, 1e4);
        }
        const auto fast = build_laguerre(z2, w2, dom, base);
        const auto exact = build_laguerre(z2, w2, dom);
        CHECK(!fast.hint_fallback);
        for (int i = 0; i < n; ++i)
            CHECK(fast.cells[i].area == Catch::Approx(exact.cells[i].area).epsilon(1e-12));
    }

    SECTION("large motion falls back to the exact pass") {
        auto z2 = z;
        for (int i = 0; i < n; ++i) {
            z2[i] = {wrap_x(z2[i].x + uniform_symmetric(rng, 0.4 * dom.L), dom.L),
                     z2[i].y + uniform_symmetric(rng, 2e5)};
        }
        const auto fast = build_laguerre(z2, w, dom, base);
        const auto exact = build_laguerre(z2, w, dom);
        for (int i = 0; i < n; ++i)
            CHECK(fast.cells[i].area == Catch::Approx(exact.cells[i].area).epsilon(1e-12));
        CHECK(std::abs(fast.total_area - dom.area()) < 1e-10 * dom.area());
    }
}

TEST_CASE("weight derivative of areas matches finite differences") {
    const Domain dom{1e6, 1e4};
    std::mt19937_64 rng(41);
    const int n = 12;
    const auto z = random_seeds(rng, n, dom, -dom.H / 2, dom.H / 2);
    std::vector<double> w(n);
    for (auto& v : w) v = uniform_symmetric(rng, 1e8);
    const auto dia = build_laguerre(z, w, dom);
    REQUIRE(dia.min_area() > 0.0);

    const Eigen::MatrixXd dwm = Eigen::MatrixXd(weight_area_jacobian(dia));
    // symmetry and zero row sums
    CHECK((dwm - dwm.transpose()).cwiseAbs().maxCoeff() < 1e-12 * dwm.cwiseAbs().maxCoeff());
    CHECK(dwm.rowwise().sum().cwiseAbs().maxCoeff() < 1e-10 * dwm.cwiseAbs().maxCoeff());

    const double h = 1e-3 * dia.min_area();
    Eigen::MatrixXd fd(n, n);
    for (int j = 0; j < n; ++j) {
        auto wp = w, wm = w;
        wp[j] += h;
        wm[j] -= h;
        const auto dp = build_laguerre(z, wp, dom);
        const auto dm = build_laguerre(z, wm, dom);
        for (int i = 0; i < n; ++i)
            fd(i, j) = (dp.cells[i].area - dm.cells[i].area) / (2.0 * h);
    }
    CHECK((fd - dwm).cwiseAbs().maxCoeff() < 1e-5 * dwm.cwiseAbs().maxCoeff());
}

TEST_CASE("seed derivative of areas matches finite differences") {
    const Domain dom{1e6, 1e4};
    std::mt19937_64 rng(43);
    const int n = 10;
    const auto z = random_seeds(rng, n, dom, 0.0, 3e6);
    std::vector<double> w(n);
    for (int i = 0; i < n; ++i) {
        const double d = std::max(z[i].y - dom.H / 2, 0.0);
        w[i] = d * d;
    }
    const auto dia = build_laguerre(z, w, dom);
    REQUIRE(dia.min_area() > 0.0);

    const Eigen::MatrixXd dzm = Eigen::MatrixXd(seed_area_jacobian(dia));
    // columns orthogonal to the all-ones vector (total area is conserved)
    CHECK(dzm.colwise().sum().cwiseAbs().maxCoeff() < 1e-10 * dzm.cwiseAbs().maxCoeff());

    const double h = 1e-6 * dom.L;
    Eigen::MatrixXd fd(n, 2 * n);
    for (int l = 0; l < n; ++l) {
        for (int c = 0; c < 2; ++c) {
            auto zp = z, zm = z;
            (c == 0 ? zp[l].x : zp[l].y) += h;
            (c == 0 ? zm[l].x : zm[l].y) -= h;
            const auto dp = build_laguerre(zp, w, dom);
            const auto dm = build_laguerre(zm, w, dom);
            for (int i = 0; i < n; ++i)
                fd(i, 2 * l + c) = (dp.cells[i].area - dm.cells[i].area) / (2.0 * h);
        }
    }
    CHECK((fd - dzm).cwiseAbs().maxCoeff() < 1e-4 * dzm.cwiseAbs().maxCoeff());
}

TEST_CASE("empty cells report zero area and derivatives refuse them") {
    const Domain dom{1e6, 1e4};
    // a hugely disadvantaged weight empties the middle seed's cell
    const std::vector<Vec2> z{{-5e5, 0.0}, {0.0, 0.0}, {5e5, 0.0}};
    const std::vector<double> w{0.0, -1e12, 0.0};
    const auto dia = build_laguerre(z, w, dom);
    CHECK(dia.cells[1].area == 0.0);
    CHECK(dia.cells[1].poly.empty());
    CHECK(std::abs(dia.total_area - dom.area()) < 1e-10 * dom.area());
    CHECK_THROWS_AS(weight_area_jacobian(dia), EmptyCell);
    CHECK_THROWS_AS(seed_area_jacobian(dia), EmptyCell);
}
