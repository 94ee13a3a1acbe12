#pragma once

// Small time-series utilities for run analysis: growth-rate fits, peak
// detection, smoothing, phase tracking and energy-conservation error.

#include "core.hpp"

#include <complex>

namespace sgeady {

// Least-squares slope of log(y) against t over [t0, t1] (per unit of t).
inline double log_slope(const std::vector<double>& t, const std::vector<double>& y,
                        double t0, double t1) {
    double st = 0, sl = 0, stt = 0, stl = 0;
    std::size_t cnt = 0;
    for (std::size_t i = 0; i < t.size(); ++i) {
        if (t[i] < t0 || t[i] > t1 || !(y[i] > 0.0)) continue;
        const double l = std::log(y[i]);
        st += t[i];
        sl += l;
        stt += t[i] * t[i];
        stl += t[i] * l;
        ++cnt;
    }
    if (cnt < 2) throw Error("log_slope: fewer than two samples in the window");
    const double den = cnt * stt - st * st;
    return (cnt * stl - st * sl) / den;
}

// Time of the maximum sample within [t0, t1].
inline double argmax_time(const std::vector<double>& t, const std::vector<double>& y,
                          double t0, double t1) {
    double best = -std::numeric_limits<double>::infinity();
    double at = t0;
    bool found = false;
    for (std::size_t i = 0; i < t.size(); ++i) {
        if (t[i] < t0 || t[i] > t1) continue;
        if (y[i] > best) {
            best = y[i];
            at = t[i];
            found = true;
        }
    }
    if (!found) throw Error("argmax_time: empty window");
    return at;
}

// Centered moving average over +- half_window in time (uneven steps allowed).
inline std::vector<double> moving_average(const std::vector<double>& t,
                                          const std::vector<double>& y,
                                          double half_window) {
    std::vector<double> out(y.size());
    std::size_t lo = 0, hi = 0;
    double acc = 0.0;
    for (std::size_t i = 0; i < t.size(); ++i) {
        while (hi < t.size() && t[hi] <= t[i] + half_window) acc += y[hi++];
        while (lo < hi && t[lo] < t[i] - half_window) acc -= y[lo++];
        out[i] = acc / static_cast<double>(hi - lo);
    }
    return out;
}

// Times of samples that are maximal within +- separation and exceed
// threshold_frac of the global maximum.
inline std::vector<double> local_maxima_times(const std::vector<double>& t,
                                              const std::vector<double>& y,
                                              double separation, double threshold_frac) {
    double gmax = 0.0;
    for (double v : y) gmax = std::max(gmax, v);
    std::vector<double> out;
    for (std::size_t i = 0; i < y.size(); ++i) {
        if (y[i] < threshold_frac * gmax) continue;
        bool is_max = true;
        for (std::size_t j = 0; j < y.size() && is_max; ++j)
            if (std::abs(t[j] - t[i]) <= separation && y[j] > y[i]) is_max = false;
        if (is_max && (out.empty() || t[i] - out.back() > separation)) out.push_back(t[i]);
    }
    return out;
}

// Least-squares slope (rad per unit t) of the unwrapped argument of a
// complex series.
inline double phase_slope(const std::vector<double>& t,
                          const std::vector<std::complex<double>>& amp) {
    if (t.size() != amp.size() || t.size() < 2)
        throw Error("phase_slope: need at least two samples");
    const double pi = std::acos(-1.0);
    std::vector<double> ph(t.size());
    ph[0] = std::arg(amp[0]);
    for (std::size_t i = 1; i < t.size(); ++i) {
        double d = std::arg(amp[i]) - std::arg(amp[i - 1]);
        while (d > pi) d -= 2.0 * pi;
        while (d < -pi) d += 2.0 * pi;
        ph[i] = ph[i - 1] + d;
    }
    double st = 0, sp = 0, stt = 0, stp = 0;
    const auto n = static_cast<double>(t.size());
    for (std::size_t i = 0; i < t.size(); ++i) {
        st += t[i];
        sp += ph[i];
        stt += t[i] * t[i];
        stp += t[i] * ph[i];
    }
    return (n * stp - st * sp) / (n * stt - st * st);
}

// Energy-conservation error series (Ebar - E(t)) / Ebar about the temporal
// mean Ebar.
inline std::vector<double> energy_conservation_error(const std::vector<double>& e) {
    double mean = 0.0;
    for (double v : e) mean += v;
    mean /= static_cast<double>(e.size());
    std::vector<double> out(e.size());
    for (std::size_t i = 0; i < e.size(); ++i) out[i] = (mean - e[i]) / mean;
    return out;
}

} // namespace sgeady
