#pragma once

// Normal-mode analysis of the steady shear flow: dispersion relation,
// growth rates, critical Burger number and analytic reference curves.

#include "core.hpp"

#include <complex>

namespace sgeady {

// 2 kappa coth 2 kappa - 1 - kappa^2; positive exactly for the exponentially
// growing wavenumbers.  tanh-based form stays finite for any kappa.
inline double growth_discriminant(double kappa) {
    const double k = std::abs(kappa);
    if (k == 0.0) return 0.0;
    return 2.0 * k / std::tanh(2.0 * k) - 1.0 - k * k;
}

// sigma(kappa) = sqrt(|(kappa - tanh kappa)(coth kappa - kappa)|)
inline double sigma_of_kappa(double kappa) {
    const double k = std::abs(kappa);
    if (k == 0.0) return 0.0;
    const double t = std::tanh(k);
    return std::sqrt(std::abs((k - t) * (1.0 / t - k)));
}

// (1 + kappa^2 - omega'^2) sinh 2k - 2k cosh 2k; real for real or purely
// imaginary omega'.
inline double dispersion_residual(double kappa, std::complex<double> omega_prime) {
    const std::complex<double> v =
        (1.0 + kappa * kappa - omega_prime * omega_prime) * std::sinh(2.0 * kappa) -
        2.0 * kappa * std::cosh(2.0 * kappa);
    return v.real();
}

struct CriticalValues {
    double kappa_crit;  // smallest positive root of the growth discriminant
    double bu_crit;     // 2 kappa_crit / pi
    double kappa_star;  // maximizer of the discriminant
    double sigma_star;  // sigma(kappa_star)
};

namespace detail {

template <class F>
double bisect_root(F f, double lo, double hi) {
    double flo = f(lo);
    for (int it = 0; it < 200 && hi - lo > 1e-15 * hi; ++it) {
        const double mid = 0.5 * (lo + hi);
        const double fm = f(mid);
        if ((flo > 0.0) == (fm > 0.0)) {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    // secant polish
    double a = lo, b = hi, fa = f(a), fb = f(b);
    for (int it = 0; it < 8 && fb != fa; ++it) {
        const double c = b - fb * (b - a) / (fb - fa);
        if (!(c > lo && c < hi)) break;
        a = b;
        fa = fb;
        b = c;
        fb = f(b);
    }
    return b;
}

template <class F>
double golden_max(F f, double lo, double hi) {
    const double phi = 0.5 * (std::sqrt(5.0) - 1.0);
    double a = lo, b = hi;
    double x1 = b - phi * (b - a), x2 = a + phi * (b - a);
    double f1 = f(x1), f2 = f(x2);
    for (int it = 0; it < 120 && b - a > 1e-13; ++it) {
        if (f1 < f2) {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + phi * (b - a);
            f2 = f(x2);
        } else {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - phi * (b - a);
            f1 = f(x1);
        }
    }
    return 0.5 * (a + b);
}

} // namespace detail

inline CriticalValues critical_values() {
    CriticalValues cv;
    cv.kappa_crit = detail::bisect_root(growth_discriminant, 0.5, 2.0);
    cv.bu_crit = 2.0 * cv.kappa_crit / std::acos(-1.0);
    cv.kappa_star = detail::golden_max(growth_discriminant, 0.1, cv.kappa_crit);
    cv.sigma_star = std::sqrt(growth_discriminant(cv.kappa_star));
    return cv;
}

enum class ModeClass { growing, decaying, oscillatory };

struct ModeResult {
    int k = 0;                // mode number
    double kappa = 0.0;       // k pi Bu / 2
    double rate = 0.0;        // sigma (growing) or gamma (oscillatory), dimensionless
    ModeClass cls = ModeClass::oscillatory;
    double omega = 0.0;       // growth rate in 1/s for growing modes
    double frequency = 0.0;   // oscillation frequency in 1/s for oscillatory modes
    double wave_speed = 0.0;  // c_k in m/s for oscillatory modes
};

// Classify mode k on a channel of height H and report its dimensional rate.
inline ModeResult growth_rate(const PhysicalParams& p, const Domain& dom, int k) {
    if (k == 0) throw ConfigError("mode number must be nonzero");
    ModeResult r;
    r.k = k;
    const double bu = burger_number(p, dom);
    r.kappa = k * std::acos(-1.0) * bu / 2.0;
    const double disc = growth_discriminant(r.kappa);
    const double dim = -p.g * p.s / (p.N * p.theta0);  // positive since s < 0
    if (disc >= 0.0) {
        r.cls = ModeClass::growing;
        r.rate = std::sqrt(disc);
        r.omega = dim * r.rate;
    } else {
        r.cls = ModeClass::oscillatory;
        r.rate = std::sqrt(-disc);
        r.frequency = dim * r.rate;
        r.wave_speed = dim * r.rate * dom.L / (k * std::acos(-1.0));
    }
    return r;
}

// Wave speed of short stable waves, -g s H / (2 f theta0).
inline double limiting_wave_speed(const PhysicalParams& p, const Domain& dom) {
    return -p.g * p.s * dom.H / (2.0 * p.f * p.theta0);
}

// Vertical velocity eigenfunction w-hat(x2) of mode k.  Vanishes at the
// channel walls; valid in both the growing and the oscillatory regime.
inline std::complex<double> eigenfunction_w(double x2, const PhysicalParams& p,
                                            const Domain& dom, int k) {
    if (k == 0) throw ConfigError("mode number must be nonzero");
    const double bu = burger_number(p, dom);
    const double kappa = k * std::acos(-1.0) * bu / 2.0;
    const std::complex<double> sig = std::sqrt(std::complex<double>(growth_discriminant(kappa)));
    const double a1 = kappa / std::tanh(kappa) - 1.0;
    const std::complex<double> amp_a = (p.g / p.N) * sig;
    const std::complex<double> amp_b = std::complex<double>(0.0, 1.0) * (p.g / p.N) * a1;
    const double zt = 2.0 * kappa * x2 / dom.H;
    const std::complex<double> shift = zt + std::complex<double>(0.0, 1.0) * sig;
    return amp_a * (std::sinh(zt) - shift * std::cosh(zt)) +
           amp_b * (std::cosh(zt) - shift * std::sinh(zt));
}

// Root-mean-square meridional velocity of the linearised normal-mode
// solution.  Grows like exp(omega t) in the unstable regime and is constant
// in the stable regime.
inline double analytic_rmsv(const PhysicalParams& p, const Domain& dom, bool unstable_mode,
                            double amplitude, double t) {
    const double bu = burger_number(p, dom);
    const double kappa = std::acos(-1.0) * bu / 2.0;  // k = 1
    const double a1 = kappa / std::tanh(kappa) - 1.0;
    const double a2 = sigma_of_kappa(kappa);
    // integrals of sinh^2 and cosh^2 of (2 kappa x2 / H) across the channel
    const double is = dom.H / (2.0 * kappa) * (0.5 * std::sinh(2.0 * kappa) - kappa);
    const double ic = dom.H / (2.0 * kappa) * (0.5 * std::sinh(2.0 * kappa) + kappa);
    const double rmsv0 = std::abs(amplitude) * std::abs(p.a) *
                         std::sqrt((a2 * a2 * is + a1 * a1 * ic) / (2.0 * dom.H));
    if (!unstable_mode) return rmsv0;
    const double omega = -p.g * p.s / (p.N * p.theta0) * a2;
    return rmsv0 * std::exp(omega * t);
}

} // namespace sgeady
