#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

namespace sgeady {

// ---------------------------------------------------------------------------
// Error types thrown by the solvers and the geometry kernel.
// ---------------------------------------------------------------------------

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct DuplicateSeeds : Error { using Error::Error; };
struct EmptyCell : Error { using Error::Error; };
struct SingularSystem : Error { using Error::Error; };
struct NoConvergence : Error { using Error::Error; };
struct BadInitialGuess : Error { using Error::Error; };
struct StepFloor : Error { using Error::Error; };
struct PeriodOverflow : Error { using Error::Error; };
struct LengthMismatch : Error { using Error::Error; };
struct ConfigError : Error { using Error::Error; };

// ---------------------------------------------------------------------------
// Small vector type
// ---------------------------------------------------------------------------

struct Vec2 {
    double x = 0.0;
    double y = 0.0;

    constexpr Vec2() = default;
    constexpr Vec2(double x_, double y_) : x(x_), y(y_) {}

    constexpr Vec2 operator+(Vec2 o) const { return {x + o.x, y + o.y}; }
    constexpr Vec2 operator-(Vec2 o) const { return {x - o.x, y - o.y}; }
    constexpr Vec2 operator-() const { return {-x, -y}; }
    constexpr Vec2 operator*(double s) const { return {x * s, y * s}; }
    constexpr Vec2& operator+=(Vec2 o) { x += o.x; y += o.y; return *this; }
    constexpr Vec2& operator-=(Vec2 o) { x -= o.x; y -= o.y; return *this; }

    constexpr double dot(Vec2 o) const { return x * o.x + y * o.y; }
    constexpr double cross(Vec2 o) const { return x * o.y - y * o.x; }
    constexpr double norm2() const { return x * x + y * y; }
    double norm() const { return std::hypot(x, y); }
};

constexpr Vec2 operator*(double s, Vec2 v) { return {v.x * s, v.y * s}; }

// ---------------------------------------------------------------------------
// Fluid domain: the strip [-L, L) x [-H/2, H/2], 2L-periodic in x.
// ---------------------------------------------------------------------------

struct Domain {
    double L = 0.0;  // half period in x (m)
    double H = 0.0;  // channel height (m)

    double area() const { return 2.0 * L * H; }
    double period() const { return 2.0 * L; }

    void validate() const {
        if (!(L > 0.0) || !(H > 0.0))
            throw ConfigError("domain requires L > 0 and H > 0");
    }
};

// Reduce an x coordinate to the canonical representative in [-L, L).
inline double wrap_x(double x, double L) {
    const double p = 2.0 * L;
    double r = x - p * std::floor((x + L) / p);
    // floor rounding can land exactly on +L; fold it back
    if (r >= L) r -= p;
    if (r < -L) r += p;
    return r;
}

// Integer copy count k minimizing |x1 - z1 - 2Lk|.
// Ties broken toward smaller |k|, then toward negative k.
inline long nearest_copy_count(double x1, double z1, double L) {
    const double p = 2.0 * L;
    const double d = (x1 - z1) / p;
    const double lo = std::floor(d);
    const long k_lo = static_cast<long>(lo);
    const long k_hi = k_lo + 1;
    const double e_lo = std::abs(d - static_cast<double>(k_lo));
    const double e_hi = std::abs(static_cast<double>(k_hi) - d);
    if (e_lo < e_hi) return k_lo;
    if (e_hi < e_lo) return k_hi;
    // equidistant: prefer the smaller magnitude, then the negative one
    const long a_lo = std::labs(k_lo), a_hi = std::labs(k_hi);
    if (a_lo != a_hi) return a_lo < a_hi ? k_lo : k_hi;
    return k_lo < k_hi ? k_lo : k_hi;
}

// Horizontal shift vector k_* in {2Lk e1} nearest to x - z.
inline Vec2 nearest_copy_shift(Vec2 x, Vec2 z, const Domain& dom) {
    const long k = nearest_copy_count(x.x, z.x, dom.L);
    return {2.0 * dom.L * static_cast<double>(k), 0.0};
}

// Distance accounting for 2L-periodicity in the first coordinate.
inline double periodic_distance(Vec2 x, Vec2 y, const Domain& dom) {
    const double dx = std::remainder(x.x - y.x, 2.0 * dom.L);
    return std::hypot(dx, x.y - y.y);
}

// ---------------------------------------------------------------------------
// Physical parameters of the slice model
// ---------------------------------------------------------------------------

struct PhysicalParams {
    double f = 1e-4;       // Coriolis parameter (1/s)
    double g = 10.0;       // gravity (m/s^2)
    double theta0 = 300.0; // reference potential temperature (K)
    double N = 0.005;      // buoyancy frequency (1/s)
    double s = -3e-6;      // meridional potential temperature gradient (K/m)
    double a = -7.5;       // normal-mode amplitude (m/s)
    double B = 0.25;       // perturbation amplitude used by the sine mode (K)

    // coefficient g s / (f theta0) of the rotation matrix in the seed ODE
    double j_factor() const { return g * s / (f * theta0); }

    void validate() const {
        if (!(f > 0.0) || !(g > 0.0) || !(theta0 > 0.0) || !(N > 0.0))
            throw ConfigError("physical parameters require f, g, theta0, N > 0");
        if (!(s < 0.0))
            throw ConfigError("physical parameters require s < 0");
    }
};

inline double burger_number(const PhysicalParams& p, const Domain& dom) {
    return p.N * dom.H / (p.f * dom.L);
}

constexpr double seconds_per_day = 86400.0;

// ---------------------------------------------------------------------------
// Deterministic uniform draws (bit-reproducible across platforms)
// ---------------------------------------------------------------------------

inline double uniform01(std::mt19937_64& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

inline double uniform_symmetric(std::mt19937_64& rng, double half_width) {
    return (2.0 * uniform01(rng) - 1.0) * half_width;
}

} // namespace sgeady
