#pragma once

// Physical diagnostics of discrete states: geostrophic energy, RMS meridional
// velocity, recovery of (v, theta, P) from the tessellation, and metrics for
// comparing discrete solutions (weighted Euclidean, debiased Sinkhorn loss).

#include "laguerre.hpp"

#include <complex>

namespace sgeady {

struct EnergyBreakdown {
    double total = 0.0;      // E = K_v + P, per unit slab depth
    double kinetic = 0.0;    // K_v, meridional kinetic energy
    double potential = 0.0;  // P, referenced so the steady state has P = 0
};

inline EnergyBreakdown energy(const LaguerreDiagram& dia, const PhysicalParams& p) {
    const double f2 = p.f * p.f;
    double ixx = 0.0, vertical = 0.0;
    for (std::size_t i = 0; i < dia.size(); ++i) {
        ixx += dia.cells[i].moment_xx;
        vertical += dia.seeds[i].y * dia.cells[i].area * dia.cells[i].centroid.y;
    }
    EnergyBreakdown e;
    e.kinetic = 0.5 * f2 * ixx;
    const double lh3 = dia.domain.L * dia.domain.H * dia.domain.H * dia.domain.H;
    e.potential = -f2 * vertical + p.N * p.N * lh3 / 6.0;
    e.total = e.kinetic + e.potential;
    return e;
}

// RMS of the meridional velocity; satisfies rmsv^2 |Omega| = 2 K_v.
inline double rmsv(const LaguerreDiagram& dia, const PhysicalParams& p) {
    double ixx = 0.0;
    for (const auto& c : dia.cells) ixx += c.moment_xx;
    return p.f * std::sqrt(ixx / dia.domain.area());
}

// RMS meridional velocity sampled at the cell centroids.  This measures the
// resolved mode amplitude; unlike the exact integral it carries no
// within-cell quantization variance, which at moderate n would otherwise
// swamp the signal.
inline double rmsv_mode(const LaguerreDiagram& dia, const PhysicalParams& p) {
    double acc = 0.0;
    for (std::size_t i = 0; i < dia.size(); ++i) {
        const auto& c = dia.cells[i];
        const double vi = p.f * (dia.seeds[i].x - c.centroid.x);
        acc += c.area * vi * vi;
    }
    return std::sqrt(acc / dia.domain.area());
}

// Affine field descriptors on a non-periodic cell: v(x) = f (z_x - x_1),
// theta constant, P(x) = z . x + p_offset.
struct CellField {
    Vec2 gradient;         // nabla P on the cell, i.e. the seed
    double theta = 0.0;    // f^2 theta0 z_y / g
    double p_offset = 0.0; // -|z|^2 / 2 + w / 2

    double v_at(double x1, double f) const { return f * (gradient.x - x1); }
    double p_at(Vec2 x) const { return gradient.dot(x) + p_offset; }
};

inline std::vector<CellField> recover_fields(const LaguerreDiagram& dia,
                                             const std::vector<double>& weights,
                                             const PhysicalParams& p) {
    if (weights.size() != dia.size())
        throw LengthMismatch("recover_fields: weights length mismatch");
    std::vector<CellField> out(dia.size());
    for (std::size_t i = 0; i < dia.size(); ++i) {
        const Vec2 z = dia.seeds[i];
        out[i].gradient = z;
        out[i].theta = p.f * p.f * p.theta0 * z.y / p.g;
        out[i].p_offset = -0.5 * z.norm2() + 0.5 * weights[i];
    }
    return out;
}

inline double weighted_euclidean(const std::vector<Vec2>& za, const std::vector<Vec2>& zb,
                                 const std::vector<double>& masses) {
    if (za.size() != zb.size() || za.size() != masses.size())
        throw LengthMismatch("weighted_euclidean: length mismatch");
    double s = 0.0;
    for (std::size_t i = 0; i < za.size(); ++i) s += masses[i] * (za[i] - zb[i]).norm2();
    return std::sqrt(s);
}

// Factor (|Omega| max_i ||z_i||_inf^2)^{-1/2} used to report relative errors.
inline double comparison_normalization(const std::vector<Vec2>& z, const Domain& dom) {
    double m = 0.0;
    for (const Vec2& p : z) m = std::max({m, std::abs(p.x), std::abs(p.y)});
    return 1.0 / std::sqrt(dom.area() * m * m);
}

struct DiscreteMeasure {
    std::vector<Vec2> points;
    std::vector<double> masses;
};

// Complex amplitude of the first horizontal harmonic of the potential
// temperature perturbation; its argument tracks the phase of a travelling
// wave.
inline std::complex<double> theta_mode_amplitude(const LaguerreDiagram& dia,
                                                 const PhysicalParams& p) {
    const double pi = std::acos(-1.0);
    std::complex<double> amp{0.0, 0.0};
    for (std::size_t i = 0; i < dia.size(); ++i) {
        const auto& c = dia.cells[i];
        if (c.area <= 0.0) continue;
        const double dtheta =
            p.theta0 / p.g *
            (p.f * p.f * dia.seeds[i].y - p.N * p.N * (c.centroid.y + dia.domain.H / 2));
        amp += c.area * dtheta *
               std::exp(std::complex<double>(0.0, -pi * c.centroid.x / dia.domain.L));
    }
    return amp;
}

namespace detail {

// Log-domain Sinkhorn value OT_eps between normalized measures; the cost is
// squared Euclidean with periodic wrap in x when period > 0.
inline double sinkhorn_ot(const DiscreteMeasure& mu, const DiscreteMeasure& nu,
                          double eps, double period, double tol, int max_iters) {
    const std::size_t n = mu.points.size(), m = nu.points.size();
    auto log_weights = [](const std::vector<double>& w) {
        double total = 0.0;
        for (double v : w) total += v;
        std::vector<double> lw(w.size());
        for (std::size_t i = 0; i < w.size(); ++i) lw[i] = std::log(w[i] / total);
        return lw;
    };
    const std::vector<double> la = log_weights(mu.masses);
    const std::vector<double> lb = log_weights(nu.masses);

    std::vector<double> cost(n * m);
    double cmax = 1.0;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < m; ++j) {
            const double dx = period > 0.0
                                  ? std::remainder(mu.points[i].x - nu.points[j].x, period)
                                  : mu.points[i].x - nu.points[j].x;
            const double dy = mu.points[i].y - nu.points[j].y;
            cost[i * m + j] = dx * dx + dy * dy;
            cmax = std::max(cmax, cost[i * m + j]);
        }

    std::vector<double> f(n, 0.0), g(m, 0.0), scratch(std::max(n, m));
    auto lse = [&](const double* vals, std::size_t cnt) {
        double vmax = -std::numeric_limits<double>::infinity();
        for (std::size_t k = 0; k < cnt; ++k) vmax = std::max(vmax, vals[k]);
        double s = 0.0;
        for (std::size_t k = 0; k < cnt; ++k) s += std::exp(vals[k] - vmax);
        return vmax + std::log(s);
    };

    const double abs_tol = tol * cmax;
    for (int it = 0; it < max_iters; ++it) {
        double delta = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t j = 0; j < m; ++j)
                scratch[j] = lb[j] + (g[j] - cost[i * m + j]) / eps;
            const double fi = -eps * lse(scratch.data(), m);
            delta = std::max(delta, std::abs(fi - f[i]));
            f[i] = fi;
        }
        for (std::size_t j = 0; j < m; ++j) {
            for (std::size_t i = 0; i < n; ++i)
                scratch[i] = la[i] + (f[i] - cost[i * m + j]) / eps;
            const double gj = -eps * lse(scratch.data(), n);
            delta = std::max(delta, std::abs(gj - g[j]));
            g[j] = gj;
        }
        if (delta <= abs_tol) {
            double value = 0.0;
            for (std::size_t i = 0; i < n; ++i) value += std::exp(la[i]) * f[i];
            for (std::size_t j = 0; j < m; ++j) value += std::exp(lb[j]) * g[j];
            return value;
        }
    }
    throw NoConvergence("Sinkhorn iteration did not reach the fixed point");
}

// Self-transport OT_eps(mu, mu) via the damped symmetric fixed point, which
// contracts at a rate independent of eps.
inline double sinkhorn_self(const DiscreteMeasure& mu, double eps, double period,
                            double tol, int max_iters) {
    const std::size_t n = mu.points.size();
    double total = 0.0;
    for (double v : mu.masses) total += v;
    std::vector<double> la(n);
    for (std::size_t i = 0; i < n; ++i) la[i] = std::log(mu.masses[i] / total);

    std::vector<double> cost(n * n);
    double cmax = 1.0;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) {
            const double dx = period > 0.0
                                  ? std::remainder(mu.points[i].x - mu.points[j].x, period)
                                  : mu.points[i].x - mu.points[j].x;
            const double dy = mu.points[i].y - mu.points[j].y;
            cost[i * n + j] = dx * dx + dy * dy;
            cmax = std::max(cmax, cost[i * n + j]);
        }

    std::vector<double> f(n, 0.0), t(n), scratch(n);
    const double abs_tol = tol * cmax;
    for (int it = 0; it < max_iters; ++it) {
        double delta = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            double vmax = -std::numeric_limits<double>::infinity();
            for (std::size_t j = 0; j < n; ++j) {
                scratch[j] = la[j] + (f[j] - cost[i * n + j]) / eps;
                vmax = std::max(vmax, scratch[j]);
            }
            double s = 0.0;
            for (std::size_t j = 0; j < n; ++j) s += std::exp(scratch[j] - vmax);
            t[i] = -eps * (vmax + std::log(s));
        }
        for (std::size_t i = 0; i < n; ++i) {
            const double fi = 0.5 * (f[i] + t[i]);
            delta = std::max(delta, std::abs(fi - f[i]));
            f[i] = fi;
        }
        if (delta <= abs_tol) {
            double value = 0.0;
            for (std::size_t i = 0; i < n; ++i) value += std::exp(la[i]) * 2.0 * f[i];
            return value;
        }
    }
    throw NoConvergence("symmetric Sinkhorn iteration did not reach the fixed point");
}

} // namespace detail

// Debiased entropic loss S_eps(mu, nu) = OT_eps(mu,nu) - OT_eps(mu,mu)/2
// - OT_eps(nu,nu)/2.  Masses are normalized internally; pass period <= 0 for
// a plain Euclidean ground cost.
inline double sinkhorn_loss(const DiscreteMeasure& mu, const DiscreteMeasure& nu, double eps,
                            double period = 0.0, double tol = 1e-9, int max_iters = 10000) {
    if (mu.points.size() != mu.masses.size() || nu.points.size() != nu.masses.size())
        throw LengthMismatch("sinkhorn_loss: measure points/masses mismatch");
    for (double v : mu.masses)
        if (!(v > 0.0)) throw ConfigError("sinkhorn_loss: masses must be positive");
    for (double v : nu.masses)
        if (!(v > 0.0)) throw ConfigError("sinkhorn_loss: masses must be positive");
    const bool same = mu.points.size() == nu.points.size() && [&] {
        for (std::size_t i = 0; i < mu.points.size(); ++i)
            if (mu.points[i].x != nu.points[i].x || mu.points[i].y != nu.points[i].y ||
                mu.masses[i] != nu.masses[i])
                return false;
        return true;
    }();
    if (same) return 0.0;  // debiasing cancels exactly
    const double ab = detail::sinkhorn_ot(mu, nu, eps, period, tol, max_iters);
    const double aa = detail::sinkhorn_self(mu, eps, period, tol, max_iters);
    const double bb = detail::sinkhorn_self(nu, eps, period, tol, max_iters);
    return ab - 0.5 * aa - 0.5 * bb;
}

inline double sqrt_sinkhorn_loss(const DiscreteMeasure& mu, const DiscreteMeasure& nu,
                                 double eps, double period = 0.0) {
    return std::sqrt(std::max(sinkhorn_loss(mu, nu, eps, period), 0.0));
}

} // namespace sgeady
