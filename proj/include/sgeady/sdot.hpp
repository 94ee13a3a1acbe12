#pragma once

// Semi-discrete optimal transport on the periodic strip: maximize the
// concave Kantorovich functional over cell weights with a damped Newton
// iteration.  The Newton system is the (n-1)x(n-1) principal block of the
// area Laplacian D_w m, solved by sparse LDLT; backtracking halves the step
// until every cell keeps at least half of the initially smallest mass and
// the sup-norm area residual contracts.

#include "laguerre.hpp"

#include <Eigen/SparseCholesky>

#include <numeric>

namespace sgeady {

struct SolverConfig {
    double eta = 0.01;         // percentage mass tolerance
    int max_newton_iters = 100;
    int max_backtracks = 40;

    void validate() const {
        if (!(eta > 0.0) || max_newton_iters < 1 || max_backtracks < 1)
            throw ConfigError("solver config requires eta > 0 and positive iteration caps");
    }
};

struct SolveReport {
    std::vector<double> weights;        // optimal weights, last entry exactly 0
    int iterations = 0;
    double final_residual = 0.0;        // max_i |m_i - mbar_i| at the solution
    std::vector<int> backtrack_counts;  // per Newton iteration
    std::vector<double> residuals;      // sup-norm residual after each iteration
    LaguerreDiagram diagram;            // diagram generated by (z, weights)
};

inline void validate_target_masses(const std::vector<double>& mbar, const Domain& dom) {
    if (mbar.empty()) throw ConfigError("target masses are empty");
    double sum = 0.0;
    for (double m : mbar) {
        if (!(m > 0.0)) throw ConfigError("target masses must be positive");
        sum += m;
    }
    if (std::abs(sum - dom.area()) > 1e-12 * dom.area())
        throw ConfigError("target masses must sum to the domain area");
}

namespace detail {

inline double area_residual(const LaguerreDiagram& dia, const std::vector<double>& mbar) {
    double r = 0.0;
    for (std::size_t i = 0; i < mbar.size(); ++i)
        r = std::max(r, std::abs(dia.cells[i].area - mbar[i]));
    return r;
}

// Principal (n-1)x(n-1) block of D_w m.
inline Eigen::SparseMatrix<double> reduced_weight_hessian(const LaguerreDiagram& dia) {
    const int n = static_cast<int>(dia.size());
    const double period = dia.domain.period();
    std::vector<Eigen::Triplet<double>> trip;
    std::vector<double> diag(n, 0.0);
    for (int i = 0; i < n; ++i) {
        if (dia.cells[i].area <= 0.0)
            throw EmptyCell("transport solve requires positive cell areas (cell " +
                            std::to_string(i) + ")");
        for (const CellEdge& e : dia.cells[i].edges) {
            if (e.neighbor <= i) continue;
            const int j = e.neighbor;
            const Vec2 d{dia.seeds[j].x + period * e.shift - dia.seeds[i].x,
                         dia.seeds[j].y - dia.seeds[i].y};
            const double v = -0.5 * e.length / d.norm();
            if (i < n - 1 && j < n - 1) {
                trip.emplace_back(i, j, v);
                trip.emplace_back(j, i, v);
            }
            diag[i] -= v;
            diag[j] -= v;
        }
    }
    for (int i = 0; i < n - 1; ++i) trip.emplace_back(i, i, diag[i]);
    Eigen::SparseMatrix<double> m(n - 1, n - 1);
    m.setFromTriplets(trip.begin(), trip.end());
    return m;
}

} // namespace detail

// Kantorovich functional K(w) = sum_i int_{C_i} |x - z_i|_per^2 + w . (mbar - m).
inline double kantorovich(const std::vector<Vec2>& seeds, const std::vector<double>& weights,
                          const std::vector<double>& mbar, const Domain& dom) {
    validate_target_masses(mbar, dom);
    const auto dia = build_laguerre(seeds, weights, dom);
    double k = 0.0;
    for (std::size_t i = 0; i < dia.size(); ++i)
        k += dia.cells[i].moment_rr + weights[i] * (mbar[i] - dia.cells[i].area);
    return k;
}

// Newton direction d solving D^2 K d = -grad K with d_n = 0, i.e. the reduced
// system (D_w m) d = mbar - m.
inline Eigen::VectorXd newton_direction_from(const LaguerreDiagram& dia,
                                             const std::vector<double>& mbar) {
    const int n = static_cast<int>(dia.size());
    Eigen::VectorXd d = Eigen::VectorXd::Zero(n);
    if (n == 1) return d;
    const Eigen::SparseMatrix<double> a = detail::reduced_weight_hessian(dia);
    Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> ldlt(a);
    if (ldlt.info() != Eigen::Success)
        throw SingularSystem("Newton system factorization failed");
    Eigen::VectorXd rhs(n - 1);
    for (int i = 0; i < n - 1; ++i) rhs[i] = mbar[i] - dia.cells[i].area;
    const Eigen::VectorXd head = ldlt.solve(rhs);
    if (!head.allFinite())
        throw SingularSystem("Newton system solve produced non-finite values");
    d.head(n - 1) = head;
    return d;
}

inline Eigen::VectorXd newton_direction(const std::vector<Vec2>& seeds,
                                        const std::vector<double>& weights,
                                        const std::vector<double>& mbar, const Domain& dom) {
    validate_target_masses(mbar, dom);
    return newton_direction_from(build_laguerre(seeds, weights, dom), mbar);
}

// Damped Newton iteration started from an already-built diagram of (z, w0).
inline SolveReport damped_newton_from(const std::vector<Vec2>& seeds,
                                      const std::vector<double>& mbar,
                                      std::vector<double> w, LaguerreDiagram dia,
                                      const SolverConfig& cfg) {
    cfg.validate();
    const std::size_t n = seeds.size();
    const double min_mbar = *std::min_element(mbar.begin(), mbar.end());
    const double eps = 0.5 * std::min(dia.min_area(), min_mbar);
    if (!(eps > 0.0))
        throw BadInitialGuess("initial weights generate an empty cell");
    const double eta_abs = cfg.eta / 100.0 * min_mbar;

    SolveReport rep;
    double residual = detail::area_residual(dia, mbar);
    rep.residuals.push_back(residual);
    while (residual >= eta_abs) {
        if (rep.iterations >= cfg.max_newton_iters)
            throw NoConvergence("damped Newton did not reach tolerance in " +
                                std::to_string(cfg.max_newton_iters) + " iterations");
        const Eigen::VectorXd d = newton_direction_from(dia, mbar);

        bool accepted = false;
        double scale = 1.0;
        for (int l = 0; l <= cfg.max_backtracks; ++l, scale *= 0.5) {
            std::vector<double> w_try(n);
            for (std::size_t i = 0; i < n; ++i) w_try[i] = w[i] + scale * d[i];
            LaguerreDiagram dia_try = build_laguerre(seeds, w_try, dia.domain, dia);
            const double res_try = detail::area_residual(dia_try, mbar);
            const double shrink = 1.0 - 0.5 * scale;  // 1 - 2^{-(l+1)}
            if (dia_try.min_area() >= eps && res_try <= shrink * residual) {
                w = std::move(w_try);
                dia = std::move(dia_try);
                residual = res_try;
                rep.backtrack_counts.push_back(l);
                rep.residuals.push_back(residual);
                accepted = true;
                break;
            }
        }
        if (!accepted)
            throw NoConvergence("backtracking exhausted after " +
                                std::to_string(cfg.max_backtracks) + " halvings");
        ++rep.iterations;
    }

    const double shift = w[n - 1];
    for (double& v : w) v -= shift;
    w[n - 1] = 0.0;
    rep.weights = std::move(w);
    rep.final_residual = residual;
    rep.diagram = std::move(dia);
    return rep;
}

inline SolveReport damped_newton(const std::vector<Vec2>& seeds,
                                 const std::vector<double>& mbar,
                                 const std::vector<double>& w0, const SolverConfig& cfg,
                                 const Domain& dom, const LaguerreDiagram* hint = nullptr) {
    validate_target_masses(mbar, dom);
    if (seeds.size() != mbar.size() || seeds.size() != w0.size())
        throw LengthMismatch("damped_newton: inconsistent input lengths");
    LaguerreDiagram dia = hint ? build_laguerre(seeds, w0, dom, *hint)
                               : build_laguerre(seeds, w0, dom);
    return damped_newton_from(seeds, mbar, w0, std::move(dia), cfg);
}

// Weights from the squared periodic distance of each seed to the domain,
// after a random horizontal perturbation making the first components
// almost-surely distinct.  The result generates cells of positive area.
inline std::pair<std::vector<Vec2>, std::vector<double>>
initial_weight_guess(const std::vector<Vec2>& seeds, const Domain& dom,
                     double perturbation_scale, std::mt19937_64& rng) {
    std::vector<Vec2> zt = seeds;
    std::vector<double> w(seeds.size(), 0.0);
    for (std::size_t i = 0; i < zt.size(); ++i) {
        zt[i].x += uniform_symmetric(rng, perturbation_scale);
        const double above = zt[i].y - dom.H / 2;
        const double below = zt[i].y + dom.H / 2;
        if (above > 0.0)
            w[i] = above * above;
        else if (below < 0.0)
            w[i] = below * below;
    }
    return {std::move(zt), std::move(w)};
}

// Cold-start solve at z: perturb seeds, solve there with the distance-squared
// weights, then solve at z itself warm-started from that optimum.
//
// States whose seeds stack in near-vertical columns far above or below the
// domain make the distance-squared guess produce sliver cells below the
// area round-off; the perturbation scale is then escalated tenfold a few
// times.  The hop back to the requested seeds bisects on demand so the
// mass-positivity precondition holds at every intermediate solve.
inline SolveReport solve_transport(const std::vector<Vec2>& seeds,
                                   const std::vector<double>& mbar,
                                   const SolverConfig& cfg, const Domain& dom,
                                   std::mt19937_64& rng,
                                   double perturbation_scale = -1.0) {
    if (perturbation_scale < 0.0) perturbation_scale = 1e-6 * dom.L;
    const double min_mbar = *std::min_element(mbar.begin(), mbar.end());
    SolveReport warm;
    std::vector<Vec2> zt;
    bool started = false;
    std::string failure = "sliver cells at every perturbation scale";
    constexpr int attempts = 5;
    for (int attempt = 0; attempt < attempts && !started; ++attempt, perturbation_scale *= 10.0) {
        try {
            auto [z1, w0] = initial_weight_guess(seeds, dom, perturbation_scale, rng);
            // seeds stacked in vertical columns leave sliver cells near the
            // area round-off; solving from those wastes the backtracking
            // budget, so escalate the scale instead (except as a last resort)
            if (attempt + 1 < attempts) {
                const double guess_min = build_laguerre(z1, w0, dom).min_area();
                if (guess_min < 1e-9 * min_mbar) continue;
            }
            warm = damped_newton(z1, mbar, w0, cfg, dom);
            zt = std::move(z1);
            started = true;
        } catch (const BadInitialGuess& e) {
            failure = e.what();
        } catch (const NoConvergence& e) {
            failure = e.what();
        }
    }
    if (!started)
        throw BadInitialGuess("cold start failed despite perturbation-scale escalation: " +
                              failure);

    std::vector<std::vector<Vec2>> targets{seeds};
    int splits = 0;
    while (!targets.empty()) {
        try {
            SolveReport rep =
                damped_newton(targets.back(), mbar, warm.weights, cfg, dom, &warm.diagram);
            zt = std::move(targets.back());
            targets.pop_back();
            warm = std::move(rep);
        } catch (const BadInitialGuess&) {
            if (++splits > 32) throw;
            std::vector<Vec2> mid(seeds.size());
            for (std::size_t i = 0; i < seeds.size(); ++i)
                mid[i] = 0.5 * (zt[i] + targets.back()[i]);
            targets.push_back(std::move(mid));
        }
    }
    return warm;
}

// D_z w_*: the (-A^{-1} B ; 0) block solution of D_w m D_z w_* = -D_z m,
// returned dense (n x 2n).
inline Eigen::MatrixXd optimal_weight_jacobian(const LaguerreDiagram& dia) {
    const int n = static_cast<int>(dia.size());
    Eigen::MatrixXd out = Eigen::MatrixXd::Zero(n, 2 * n);
    if (n == 1) return out;
    const Eigen::SparseMatrix<double> a = detail::reduced_weight_hessian(dia);
    Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> ldlt(a);
    if (ldlt.info() != Eigen::Success)
        throw SingularSystem("weight Jacobian factorization failed");
    const Eigen::SparseMatrix<double> b = seed_area_jacobian(dia);
    const Eigen::MatrixXd bd = Eigen::MatrixXd(b).topRows(n - 1);
    out.topRows(n - 1) = -ldlt.solve(bd);
    if (!out.allFinite()) throw SingularSystem("weight Jacobian solve failed");
    return out;
}

// Action of D_z w_* on a seed displacement field, factorizing A once.
class WeightJacobianAction {
public:
    explicit WeightJacobianAction(const LaguerreDiagram& dia)
        : n_(static_cast<int>(dia.size())), b_(seed_area_jacobian(dia)) {
        if (n_ > 1) {
            ldlt_.compute(detail::reduced_weight_hessian(dia));
            if (ldlt_.info() != Eigen::Success)
                throw SingularSystem("weight Jacobian factorization failed");
        }
    }

    // w_inc = D_z w_* z_inc, last entry 0
    std::vector<double> operator()(const std::vector<Vec2>& z_inc) const {
        if (static_cast<int>(z_inc.size()) != n_)
            throw LengthMismatch("weight Jacobian action: wrong displacement length");
        std::vector<double> w_inc(n_, 0.0);
        if (n_ == 1) return w_inc;
        Eigen::VectorXd dz(2 * n_);
        for (int i = 0; i < n_; ++i) {
            dz[2 * i] = z_inc[i].x;
            dz[2 * i + 1] = z_inc[i].y;
        }
        const Eigen::VectorXd rhs = -(b_ * dz).head(n_ - 1);
        const Eigen::VectorXd head = ldlt_.solve(rhs);
        if (!head.allFinite()) throw SingularSystem("weight Jacobian solve failed");
        for (int i = 0; i < n_ - 1; ++i) w_inc[i] = head[i];
        return w_inc;
    }

private:
    int n_;
    Eigen::SparseMatrix<double> b_;
    Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> ldlt_;
};

} // namespace sgeady
