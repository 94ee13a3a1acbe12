#pragma once

// Time integration of the seed ODE dz/dt = J (c(z) - Pi z).  Each right-hand
// side evaluation is a semi-discrete transport solve; the adaptive
// Adams-Bashforth-2 stepper proposes seed and weight increments, halves the
// step until every predicted cell keeps positive area, and hands the
// predicted weights to the next solve as its warm start.

#include "sdot.hpp"

#include <functional>

namespace sgeady {

struct DynamicsConfig {
    double h_def = 30.0;           // default step (s)
    double T = 0.0;                // final time (s)
    double eta = 0.01;             // percentage mass tolerance of the inner solves
    int max_halvings = 20;
    bool adaptive = true;          // false: always propose h_def (still checked once)
    int max_newton_iters = 100;
    int max_backtracks = 40;
    double record_interval = 0.0;  // <= 0: keep every accepted state in the trajectory
    double perturbation_scale = -1.0;  // seed jitter of the cold start; < 0: 1e-6 L

    SolverConfig solver() const { return SolverConfig{eta, max_newton_iters, max_backtracks}; }

    void validate() const {
        solver().validate();
        if (!(h_def > 0.0) || !(T >= 0.0) || max_halvings < 0)
            throw ConfigError("dynamics config requires h_def > 0, T >= 0, max_halvings >= 0");
    }
};

struct TrajectoryRecord {
    double t = 0.0;
    std::vector<Vec2> seeds;      // unwrapped positions
    std::vector<double> weights;  // optimal weights at this state, last entry 0
    double step_size = 0.0;       // size of the accepted step leading here (0 at t = 0)
    int halvings = 0;             // halvings of that step
    int newton_iters = 0;         // iterations of this state's transport solve
};

struct Trajectory {
    std::vector<TrajectoryRecord> records;
    long steps = 0;
    long total_newton_iters = 0;
    long total_halvings = 0;
    long hint_fallbacks = 0;
};

// Everything an observer may want from an accepted step, without copies.
struct StepState {
    double t;
    const std::vector<Vec2>& seeds;
    const std::vector<double>& weights;
    const LaguerreDiagram& diagram;
    double step_size;
    int halvings;
    int newton_iters;
};

using StepObserver = std::function<void(const StepState&)>;

struct IntegrationAborted : Error {
    IntegrationAborted(const std::string& msg, Trajectory partial_)
        : Error(msg), partial(std::move(partial_)) {}
    Trajectory partial;
};

// Seed velocities J (c_i - (z_i . e1) e1) from a solved diagram.
inline std::vector<Vec2> seed_velocities(const LaguerreDiagram& dia,
                                         const PhysicalParams& p) {
    const double jf = p.j_factor();
    std::vector<Vec2> v(dia.size());
    for (std::size_t i = 0; i < dia.size(); ++i) {
        const Vec2 c = dia.cells[i].centroid;
        v[i] = {-jf * c.y, jf * (c.x - dia.seeds[i].x)};
    }
    return v;
}

struct RhsResult {
    std::vector<Vec2> velocity;
    SolveReport report;
};

// Evaluate the ODE right-hand side at z with a cold-started transport solve.
inline RhsResult rhs(const std::vector<Vec2>& seeds, const std::vector<double>& mbar,
                     const PhysicalParams& params, const Domain& dom,
                     const SolverConfig& cfg, std::mt19937_64& rng) {
    RhsResult r;
    r.report = solve_transport(seeds, mbar, cfg, dom, rng);
    r.velocity = seed_velocities(r.report.diagram, params);
    return r;
}

// Variable-step AB2 coefficients for previous step h_prev and proposal
// h_prop; c_prev + c_curr = h_prop.
inline std::pair<double, double> ab2_coefficients(double h_prev, double h_prop) {
    const double c_prev = -h_prop * h_prop / (2.0 * h_prev);
    const double c_curr = 0.5 * ((h_prop + h_prev) * (h_prop + h_prev) / h_prev - h_prev);
    return {c_prev, c_curr};
}

namespace detail {

// Keeps the accepted state nearest each multiple of the output interval.
class RecordCadence {
public:
    RecordCadence(Trajectory& traj, double interval) : traj_(traj), interval_(interval) {}

    void offer(const TrajectoryRecord& rec) {
        if (interval_ <= 0.0) {
            traj_.records.push_back(rec);
            return;
        }
        while (rec.t >= next_ - 1e-9) {
            if (have_prev_ && next_ - prev_.t < rec.t - next_)
                traj_.records.push_back(prev_);
            else
                traj_.records.push_back(rec);
            next_ += interval_;
        }
        prev_ = rec;
        have_prev_ = true;
    }

    void finish() {
        if (interval_ > 0.0 && have_prev_ &&
            (traj_.records.empty() || traj_.records.back().t != prev_.t))
            traj_.records.push_back(prev_);
    }

private:
    Trajectory& traj_;
    double interval_;
    double next_ = 0.0;
    TrajectoryRecord prev_;
    bool have_prev_ = false;
};

} // namespace detail

// Integrate from the discrete initial data with the adaptive AB2 scheme.
// The trajectory holds solved states; the observer sees every accepted step.
inline Trajectory integrate(const std::vector<Vec2>& z0, const std::vector<double>& mbar,
                            const PhysicalParams& params, const Domain& dom,
                            const DynamicsConfig& cfg, std::mt19937_64& rng,
                            const StepObserver& observer = {}) {
    cfg.validate();
    params.validate();
    const SolverConfig scfg = cfg.solver();
    const std::size_t n = z0.size();

    Trajectory traj;
    detail::RecordCadence cadence(traj, cfg.record_interval);

    std::vector<Vec2> z = z0;
    double t = 0.0;
    double last_h = 0.0;
    int last_l = 0;

    SolveReport rep;
    try {
        rep = solve_transport(z, mbar, scfg, dom, rng, cfg.perturbation_scale);
    } catch (const Error& e) {
        throw IntegrationAborted(std::string("initial transport solve failed: ") + e.what(),
                                 std::move(traj));
    }

    LaguerreDiagram next_dia;  // diagram of (z, predicted weights), when available
    bool have_next_dia = false;
    std::vector<double> w_guess;
    std::vector<Vec2> v_prev, v_curr;

    auto emit = [&]() {
        cadence.offer(TrajectoryRecord{t, z, rep.weights, last_h, last_l, rep.iterations});
        if (observer)
            observer(StepState{t, z, rep.weights, rep.diagram, last_h, last_l, rep.iterations});
        traj.total_newton_iters += rep.iterations;
        traj.total_halvings += last_l;
    };

    try {
        // state at t = 0, then one forward Euler step of size h_def
        v_curr = seed_velocities(rep.diagram, params);
        emit();
        if (cfg.T <= 0.0) {
            cadence.finish();
            return traj;
        }
        // Forward Euler start.  The weights are Taylor-predicted like in the
        // main loop: margins between vertically adjacent cells are thin
        // compared to the lever arm of the far-away seeds, so frozen weights
        // would force absurdly small first steps.  The same positive-area
        // halving rule guards the step.
        double h_prev = cfg.h_def;
        {
            const WeightJacobianAction jacobian(rep.diagram);
            bool accepted = false;
            const int lmax = cfg.adaptive ? cfg.max_halvings : 0;
            for (int l = 0; l <= lmax && !accepted; ++l) {
                const double h0 = cfg.h_def / static_cast<double>(1 << l);
                std::vector<Vec2> z_try(n), z_inc(n);
                for (std::size_t i = 0; i < n; ++i) {
                    z_inc[i] = h0 * v_curr[i];
                    z_try[i] = z[i] + z_inc[i];
                }
                const std::vector<double> w_inc = jacobian(z_inc);
                std::vector<double> w_try(n);
                for (std::size_t i = 0; i < n; ++i) w_try[i] = rep.weights[i] + w_inc[i];
                LaguerreDiagram dia_try;
                try {
                    dia_try = build_laguerre(z_try, w_try, dom, rep.diagram);
                } catch (const DuplicateSeeds&) {
                    continue;
                }
                if (dia_try.min_area() > 0.0) {
                    if (dia_try.hint_fallback) ++traj.hint_fallbacks;
                    z = std::move(z_try);
                    w_guess = std::move(w_try);
                    next_dia = std::move(dia_try);
                    have_next_dia = true;
                    t = h0;
                    h_prev = h0;
                    last_h = h0;
                    last_l = l;
                    accepted = true;
                }
            }
            if (!accepted)
                throw StepFloor("no positive-area forward Euler step after " +
                                std::to_string(cfg.max_halvings) + " halvings");
        }

        while (true) {
            // solve at the predicted state, warm-started from the prediction
            if (!have_next_dia)
                next_dia = build_laguerre(z, w_guess, dom, rep.diagram);
            if (next_dia.hint_fallback) ++traj.hint_fallbacks;
            rep = damped_newton_from(z, mbar, w_guess, std::move(next_dia), scfg);
            have_next_dia = false;
            ++traj.steps;

            v_prev = std::move(v_curr);
            v_curr = seed_velocities(rep.diagram, params);
            emit();
            if (t >= cfg.T - 1e-9 * cfg.h_def) break;

            const WeightJacobianAction jacobian(rep.diagram);
            bool accepted = false;
            const int lmax = cfg.adaptive ? cfg.max_halvings : 0;
            for (int l = 0; l <= lmax && !accepted; ++l) {
                const double h_l = cfg.h_def / static_cast<double>(1 << l);
                const auto [c_prev, c_curr] = ab2_coefficients(h_prev, h_l);
                std::vector<Vec2> z_try(n);
                std::vector<Vec2> z_inc(n);
                for (std::size_t i = 0; i < n; ++i) {
                    z_inc[i] = c_prev * v_prev[i] + c_curr * v_curr[i];
                    z_try[i] = z[i] + z_inc[i];
                }
                const std::vector<double> w_inc = jacobian(z_inc);
                std::vector<double> w_try(n);
                for (std::size_t i = 0; i < n; ++i) w_try[i] = rep.weights[i] + w_inc[i];

                LaguerreDiagram dia_try;
                try {
                    dia_try = build_laguerre(z_try, w_try, dom, rep.diagram);
                } catch (const DuplicateSeeds&) {
                    continue;  // collision at this step size; halve and retry
                }
                if (dia_try.min_area() > 0.0) {
                    if (dia_try.hint_fallback) ++traj.hint_fallbacks;
                    z = std::move(z_try);
                    w_guess = std::move(w_try);
                    next_dia = std::move(dia_try);
                    have_next_dia = true;
                    t += h_l;
                    h_prev = h_l;
                    last_h = h_l;
                    last_l = l;
                    accepted = true;
                }
            }
            if (!accepted)
                throw StepFloor("no positive-area step after " +
                                std::to_string(cfg.max_halvings) + " halvings at t = " +
                                std::to_string(t));
        }
    } catch (const IntegrationAborted&) {
        throw;
    } catch (const Error& e) {
        cadence.finish();
        throw IntegrationAborted(std::string(e.what()) + " (t = " + std::to_string(t) + " s)",
                                 std::move(traj));
    }

    cadence.finish();
    return traj;
}

} // namespace sgeady
