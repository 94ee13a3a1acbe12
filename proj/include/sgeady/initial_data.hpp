#pragma once

// Discrete initial data: Lloyd quantization of the image rectangle of the
// steady shear flow, and the four initial perturbations of its gradient.

#include "laguerre.hpp"
#include "linear_stability.hpp"

namespace sgeady {

enum class PerturbationKind { none, unstable, stable, visram, cullen };

inline const char* to_string(PerturbationKind k) {
    switch (k) {
        case PerturbationKind::none: return "none";
        case PerturbationKind::unstable: return "unstable";
        case PerturbationKind::stable: return "stable";
        case PerturbationKind::visram: return "visram";
        case PerturbationKind::cullen: return "cullen";
    }
    return "?";
}

inline PerturbationKind perturbation_from_string(const std::string& s) {
    if (s == "none") return PerturbationKind::none;
    if (s == "unstable") return PerturbationKind::unstable;
    if (s == "stable") return PerturbationKind::stable;
    if (s == "visram") return PerturbationKind::visram;
    if (s == "cullen") return PerturbationKind::cullen;
    throw ConfigError("unknown perturbation kind: " + s);
}

struct ModeConstants {
    double bu;     // Burger number N H / (f L)
    double kappa;  // pi Bu / 2 for mode k = 1
    double a1;     // kappa coth kappa - 1
    double a2;     // sigma(kappa)
};

inline ModeConstants mode_constants(const PhysicalParams& p, const Domain& dom) {
    ModeConstants mc;
    mc.bu = burger_number(p, dom);
    mc.kappa = std::acos(-1.0) * mc.bu / 2.0;
    mc.a1 = mc.kappa / std::tanh(mc.kappa) - 1.0;
    mc.a2 = sigma_of_kappa(mc.kappa);
    return mc;
}

// Gradient of the steady-state geopotential: (x1, (N/f)^2 (x2 + H/2)).
inline Vec2 steady_gradient(Vec2 x, const PhysicalParams& p, const Domain& dom) {
    const double r = p.N * p.N / (p.f * p.f);
    return {x.x, r * (x.y + dom.H / 2)};
}

inline Vec2 steady_gradient_inverse(Vec2 y, const PhysicalParams& p, const Domain& dom) {
    const double r = p.f * p.f / (p.N * p.N);
    return {y.x, r * y.y - dom.H / 2};
}

// Perturbation G(x) = (v(x)/f, g theta(x) / (f^2 theta0)) of the steady
// gradient, evaluated from the closed-form modes.
inline Vec2 perturbation(PerturbationKind kind, Vec2 x, const PhysicalParams& p,
                         const Domain& dom) {
    const double pi = std::acos(-1.0);
    switch (kind) {
        case PerturbationKind::none:
            return {0.0, 0.0};
        case PerturbationKind::unstable: {
            const ModeConstants mc = mode_constants(p, dom);
            const double zt = 2.0 * mc.kappa * x.y / dom.H;
            const double cx = std::cos(pi * x.x / dom.L), sx = std::sin(pi * x.x / dom.L);
            const double sh = std::sinh(zt), ch = std::cosh(zt);
            const double v = -p.a * (mc.a2 * sh * cx + mc.a1 * ch * sx);
            const double th = p.a * p.N * p.theta0 / p.g * (mc.a1 * sh * cx - mc.a2 * ch * sx);
            return {v / p.f, p.g * th / (p.f * p.f * p.theta0)};
        }
        case PerturbationKind::stable: {
            const ModeConstants mc = mode_constants(p, dom);
            const double zt = 2.0 * mc.kappa * x.y / dom.H;
            const double cx = std::cos(pi * x.x / dom.L), sx = std::sin(pi * x.x / dom.L);
            const double sh = std::sinh(zt), ch = std::cosh(zt);
            const double v = -p.a * sx * (mc.a1 * ch + mc.a2 * sh);
            const double th = p.a * p.N * p.theta0 / p.g * cx * (mc.a1 * sh + mc.a2 * ch);
            return {v / p.f, p.g * th / (p.f * p.f * p.theta0)};
        }
        case PerturbationKind::visram:
            return perturbation(PerturbationKind::unstable, {x.x, x.y / pi}, p, dom);
        case PerturbationKind::cullen: {
            const double phase = pi * (x.x / dom.L + x.y / dom.H + 0.5);
            const double amp = p.g * p.B / (p.theta0 * p.f * p.f) * std::sin(phase);
            return {amp * dom.H / dom.L, amp};
        }
    }
    return {0.0, 0.0};
}

// The geostrophic image rectangle [-L, L) x [0, N^2 H / f^2] of the steady
// state, represented as a centered strip domain plus the vertical offset.
inline double image_rectangle_height(const PhysicalParams& p, const Domain& dom) {
    return p.N * p.N / (p.f * p.f) * dom.H;
}

// Points of a regular triangular lattice filling the image rectangle.  When
// n does not factor exactly, the deficit is spread over the rows so no row
// is left nearly empty.
inline std::vector<Vec2> triangular_lattice(int n, const PhysicalParams& p,
                                            const Domain& dom) {
    const double width = 2.0 * dom.L;
    const double height = image_rectangle_height(p, dom);
    int nx = static_cast<int>(std::lround(std::sqrt(n * width * std::sqrt(3.0) / (2.0 * height))));
    nx = std::max(nx, 1);
    const int rows = std::max(1, static_cast<int>(std::lround(static_cast<double>(n) / nx)));
    std::vector<Vec2> pts;
    pts.reserve(n);
    int placed = 0;
    for (int r = 0; r < rows; ++r) {
        const int cnt = (n - placed + rows - r - 1) / (rows - r);
        const double dx = width / cnt;
        const double off = (r % 2 == 0) ? 0.25 : 0.75;
        for (int c = 0; c < cnt; ++c)
            pts.push_back({wrap_x(-dom.L + (c + off) * dx, dom.L),
                           (r + 0.5) * height / rows});
        placed += cnt;
    }
    return pts;
}

// Lloyd's algorithm in the image rectangle: `iters` centroid updates of the
// periodic Voronoi tessellation, starting from the triangular lattice.
inline std::vector<Vec2> lloyd_quantize(int n, const Domain& dom, const PhysicalParams& p,
                                        int iters = 100) {
    if (n < 1) throw ConfigError("lloyd_quantize requires n >= 1");
    const double height = image_rectangle_height(p, dom);
    const Domain rect{dom.L, height};
    std::vector<Vec2> pts = triangular_lattice(n, p, dom);
    const std::vector<double> w(n, 0.0);

    auto centered = [&](const std::vector<Vec2>& q) {
        std::vector<Vec2> c(q.size());
        for (std::size_t i = 0; i < q.size(); ++i) c[i] = {q[i].x, q[i].y - height / 2};
        return c;
    };

    LaguerreDiagram vor = build_laguerre(centered(pts), w, rect);
    for (int it = 0; it < iters; ++it) {
        for (int i = 0; i < n; ++i) {
            const Vec2 c = vor.cells[i].centroid;
            pts[i] = {wrap_x(c.x, dom.L), c.y + height / 2};
        }
        vor = build_laguerre(centered(pts), w, rect, vor);
    }
    return pts;
}

// Final periodic Voronoi tessellation of the quantized points (used for the
// target masses and the quantization-energy diagnostic).
inline LaguerreDiagram image_voronoi(const std::vector<Vec2>& pts, const Domain& dom,
                                     const PhysicalParams& p) {
    const double height = image_rectangle_height(p, dom);
    const Domain rect{dom.L, height};
    std::vector<Vec2> c(pts.size());
    for (std::size_t i = 0; i < pts.size(); ++i) c[i] = {pts[i].x, pts[i].y - height / 2};
    return build_laguerre(c, std::vector<double>(pts.size(), 0.0), rect);
}

struct DiscreteState {
    std::vector<Vec2> seeds;    // initial seed positions, x canonical in [-L, L)
    std::vector<double> masses; // target cell areas, summing to |Omega|
};

// Quantize the perturbed steady state: Lloyd points in the image rectangle,
// pulled back to the fluid domain, perturbed, with masses proportional to
// the Voronoi cell areas.
inline DiscreteState discretize(int n, PerturbationKind kind, const PhysicalParams& p,
                                const Domain& dom, double amplitude = 1.0,
                                int lloyd_iters = 100) {
    const auto pts = lloyd_quantize(n, dom, p, lloyd_iters);
    const auto vor = image_voronoi(pts, dom, p);
    const double mass_ratio = p.f * p.f / (p.N * p.N);

    DiscreteState st;
    st.seeds.resize(n);
    st.masses.resize(n);
    for (int i = 0; i < n; ++i) {
        const Vec2 x = steady_gradient_inverse(pts[i], p, dom);
        const Vec2 g = perturbation(kind, x, p, dom);
        st.seeds[i] = {wrap_x(pts[i].x + amplitude * g.x, dom.L), pts[i].y + amplitude * g.y};
        st.masses[i] = mass_ratio * vor.cells[i].area;
    }
    return st;
}

} // namespace sgeady
