#pragma once

// Deterministic DAE kernel shared by every method: Newton iteration, DC
// operating point with source stepping, and BE / TR / Gear-2 transient
// integration with local-truncation-error step control.
//
// A problem supplies Q(X), F(X), the excitation B~u(t) and a factorized
// Jacobian alpha dQ/dX + dF/dX. The linear solve is the problem's choice,
// which is how the stochastic-testing solver plugs in its block-decoupled
// factorization while the Galerkin solver uses one dense LU.

#include "gpcsim/errors.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <memory>
#include <optional>
#include <string>
#include <tuple>
#include <vector>

namespace gpcsim {

class LinearSolve {
public:
    virtual ~LinearSolve() = default;
    virtual Eigen::VectorXd solve(const Eigen::VectorXd& rhs) const = 0;
};

/// LU with a singularity check. Eigen's rcond estimate misses exactly zero
/// pivots, so the pivot magnitudes are checked as well.
class DenseLinearSolve final : public LinearSolve {
public:
    explicit DenseLinearSolve(const Eigen::MatrixXd& J, double min_rcond = 1e-16) : lu_(J) {
        if (J.size() == 0) return;
        const Eigen::VectorXd piv = lu_.matrixLU().diagonal().cwiseAbs();
        const double rc = lu_.rcond();
        const bool zero_pivot = !(piv.minCoeff() > 1e-24 * piv.maxCoeff());
        if (zero_pivot || !std::isfinite(rc) || rc < min_rcond)
            throw SingularMatrixError("Jacobian is numerically singular",
                                      zero_pivot || !(rc > 0) ? std::numeric_limits<double>::infinity() : 1.0 / rc);
    }
    Eigen::VectorXd solve(const Eigen::VectorXd& rhs) const override { return lu_.solve(rhs); }

private:
    Eigen::PartialPivLU<Eigen::MatrixXd> lu_;
};

class DaeProblem {
public:
    virtual ~DaeProblem() = default;
    virtual Eigen::Index size() const = 0;
    /// Q(X) and F(X).
    virtual void evaluate(const Eigen::VectorXd& X, Eigen::VectorXd& Q, Eigen::VectorXd& F) const = 0;
    /// Factorization of alpha dQ/dX + dF/dX at X.
    virtual std::unique_ptr<LinearSolve> linearize(const Eigen::VectorXd& X, double alpha) const = 0;
    /// B~ u(t).
    virtual Eigen::VectorXd excitation(double t) const = 0;
    /// B~ u for DC analyses.
    virtual Eigen::VectorXd dc_excitation() const { return excitation(0.0); }
    /// Input breakpoints in (t0, t1].
    virtual std::vector<double> breakpoints(double, double) const { return {}; }
    /// Per-component magnitude used to scale truncation-error tolerances.
    virtual Eigen::VectorXd error_scale(const Eigen::VectorXd& X) const { return X.cwiseAbs(); }
};

// ---- Newton ---------------------------------------------------------------

enum class Damping { None, LineLimited };

struct NewtonConfig {
    double abstol = 1e-10;
    double reltol = 1e-8;
    int max_iters = 60;
    Damping damping = Damping::LineLimited;
    double max_update = 1.0;  // infinity-norm cap on one update when damping

    void validate() const {
        if (!(abstol > 0.0) || !(reltol > 0.0)) throw DomainError("Newton tolerances must be positive");
        if (max_iters < 1) throw DomainError("Newton needs max_iters >= 1");
        if (!(max_update > 0.0)) throw DomainError("max_update must be positive");
    }
};

struct NewtonResult {
    Eigen::VectorXd x;
    int iterations = 0;
    bool converged = false;
    double residual_norm = std::numeric_limits<double>::infinity();
    std::string message;
};

/// Solve alpha Q(X) + F(X) = b. An iterate X_{j+1} is accepted when
///   ||R(X_{j+1})|| <= abstol + reltol max(||X||, ||alpha Q||, ||F||, ||b||)  and
///   ||J(X_j)^{-1} R(X_{j+1})|| <= abstol + reltol ||X_{j+1}||,
/// the second being the next Newton update estimated with the factorization
/// already at hand, so a linear problem converges in one iteration. The
/// residual test is relative to its largest term because alpha Q alone can
/// be many orders above the residual's rounding floor at small steps.
inline NewtonResult newton_solve(const DaeProblem& p, const Eigen::VectorXd& x0, double alpha,
                                 const Eigen::VectorXd& b, const NewtonConfig& cfg) {
    cfg.validate();
    NewtonResult r;
    r.x = x0;
    Eigen::VectorXd Q, F;
    auto residual = [&](const Eigen::VectorXd& X, Eigen::VectorXd& R) {
        p.evaluate(X, Q, F);
        R = alpha * Q + F - b;
        return R.allFinite();
    };
    Eigen::VectorXd R;
    try {
        if (!residual(r.x, R)) {
            r.message = "non-finite residual at the initial guess";
            return r;
        }
    } catch (const Error& e) {
        r.message = e.what();
        return r;
    }
    for (int it = 1; it <= cfg.max_iters; ++it) {
        r.iterations = it;
        std::unique_ptr<LinearSolve> J;
        Eigen::VectorXd dx;
        try {
            J = p.linearize(r.x, alpha);
            dx = J->solve(-R);
        } catch (const Error& e) {
            r.message = e.what();
            return r;
        }
        if (!dx.allFinite()) {
            r.message = "non-finite Newton update";
            return r;
        }
        if (cfg.damping == Damping::LineLimited) {
            const double m = dx.lpNorm<Eigen::Infinity>();
            if (m > cfg.max_update) dx *= cfg.max_update / m;
        }
        // Back off on evaluation failures (e.g. parameters leaving their domain).
        Eigen::VectorXd xn;
        bool ok = false;
        for (int cut = 0; cut < 12 && !ok; ++cut, dx *= 0.5) {
            xn = r.x + dx;
            try {
                ok = residual(xn, R);
            } catch (const EvaluationError&) {
                ok = false;
            }
        }
        if (!ok) {
            r.message = "evaluation failed along the Newton direction";
            return r;
        }
        r.x = xn;
        const double tol = cfg.abstol + cfg.reltol * r.x.lpNorm<Eigen::Infinity>();
        const double terms = std::max({r.x.lpNorm<Eigen::Infinity>(), std::abs(alpha) * Q.lpNorm<Eigen::Infinity>(),
                                       F.lpNorm<Eigen::Infinity>(), b.lpNorm<Eigen::Infinity>()});
        r.residual_norm = R.lpNorm<Eigen::Infinity>();
        if (r.residual_norm <= cfg.abstol + cfg.reltol * terms) {
            const Eigen::VectorXd next = J->solve(R);
            if (next.allFinite() && next.lpNorm<Eigen::Infinity>() <= tol) {
                r.converged = true;
                return r;
            }
        }
    }
    r.message = "Newton did not converge in " + std::to_string(cfg.max_iters) + " iterations";
    return r;
}

// ---- DC ------------------------------------------------------------------

struct DcResult {
    Eigen::VectorXd x;
    int newton_iterations = 0;
    bool source_stepping = false;
};

/// DC operating point for excitation b: direct Newton, then source stepping
/// over ten increments (subdividing failed increments) as a homotopy.
inline DcResult dc_solve(const DaeProblem& p, const Eigen::VectorXd& x0, const Eigen::VectorXd& b,
                         const NewtonConfig& cfg = {}) {
    DcResult out;
    auto direct = newton_solve(p, x0, 0.0, b, cfg);
    out.newton_iterations += direct.iterations;
    if (direct.converged) {
        out.x = std::move(direct.x);
        return out;
    }
    out.source_stepping = true;
    Eigen::VectorXd x = Eigen::VectorXd::Zero(p.size());
    auto start = newton_solve(p, x, 0.0, Eigen::VectorXd::Zero(p.size()), cfg);
    out.newton_iterations += start.iterations;
    if (!start.converged)
        throw DcFailure("DC failed: direct Newton (" + direct.message + ") and the zero-source start (" +
                            start.message + ") both failed",
                        start.residual_norm);
    x = start.x;
    double lambda = 0.0, step = 0.1;
    double last_residual = start.residual_norm;
    while (lambda < 1.0) {
        const double target = std::min(1.0, lambda + step);
        auto r = newton_solve(p, x, 0.0, target * b, cfg);
        out.newton_iterations += r.iterations;
        if (r.converged) {
            x = r.x;
            lambda = target;
            step = std::min(0.1, step * 2.0);
        } else {
            step *= 0.5;
            last_residual = r.residual_norm;
            if (step < 1e-4)
                throw DcFailure("DC failed: source stepping stalled at " + std::to_string(lambda) + " (" +
                                    r.message + ")",
                                last_residual);
        }
    }
    out.x = std::move(x);
    return out;
}

// ---- transient -----------------------------------------------------------

enum class Scheme { BackwardEuler, Trapezoidal, Gear2 };

inline const char* scheme_name(Scheme s) {
    switch (s) {
    case Scheme::BackwardEuler: return "be";
    case Scheme::Trapezoidal: return "tr";
    case Scheme::Gear2: return "gear2";
    }
    return "?";
}

struct StepControl {
    Scheme scheme = Scheme::Gear2;
    double lte_tol = 1e-4;      // relative, per component
    double lte_abstol = 1e-6;   // absolute floor of the per-component tolerance
    double h_init = 0.0;        // step after start and after each breakpoint; 0 = h_max * 1e-3
    double h_min = 0.0;         // 0 = span * 1e-12
    double h_max = 0.0;         // 0 = span / 50
    double grow = 2.0;
    double shrink = 0.5;
    double min_factor = 0.1;
    std::optional<double> fixed_step;  // uniform grid, LTE recorded but never acted on

    void validate() const {
        if (!(lte_tol > 0.0) || !(lte_abstol >= 0.0)) throw DomainError("LTE tolerances must be positive");
        if (!(grow >= 1.0) || !(shrink > 0.0 && shrink < 1.0) || !(min_factor > 0.0 && min_factor <= shrink))
            throw DomainError("inconsistent step-size factors");
        if (h_min < 0.0 || h_max < 0.0 || h_init < 0.0) throw DomainError("step bounds must be non-negative");
        if (h_max > 0.0 && h_min > h_max) throw DomainError("h_min exceeds h_max");
        if (fixed_step && !(*fixed_step > 0.0)) throw DomainError("fixed step must be positive");
    }
};

struct TransientStats {
    long accepted = 0;
    long rejected = 0;
    long newton_iterations = 0;
};

struct TransientResult {
    std::vector<double> t;
    std::vector<Eigen::VectorXd> x;
    std::vector<double> lte;              // normalized LTE per accepted step (0 where not estimable)
    std::vector<char> straddles_breakpoint;  // the LTE stencil spans an input breakpoint
    TransientStats stats;
};

/// Step-by-step integrator with copyable state; restoring a saved state and
/// continuing reproduces the original run bit for bit.
class TransientIntegrator {
public:
    struct Point {
        double t;
        Eigen::VectorXd x, q;
    };
    struct State {
        std::deque<Point> history;  // newest first, at most four, all since the last restart
        Eigen::VectorXd qdot;       // dq/dt at the newest point
        double h = 0.0;
        TransientStats stats;
        long fixed_index = 0;
    };

    TransientIntegrator(const DaeProblem& p, double t0, double tstop, const Eigen::VectorXd& x0, StepControl ctl = {},
                        NewtonConfig newton = {})
        : p_(p), t0_(t0), tstop_(tstop), ctl_(ctl), newton_(newton) {
        ctl_.validate();
        newton_.validate();
        if (!(tstop > t0)) throw DomainError("transient stop time must exceed the start time");
        const double span = tstop - t0;
        if (ctl_.h_max == 0.0) ctl_.h_max = span / 50.0;
        if (ctl_.h_min == 0.0) ctl_.h_min = span * 1e-12;
        if (ctl_.h_init == 0.0) ctl_.h_init = ctl_.h_max * 1e-3;
        ctl_.h_init = std::clamp(ctl_.h_init, ctl_.h_min, ctl_.h_max);
        bps_ = p.breakpoints(t0, tstop);
        Point start{t0, x0, {}};
        Eigen::VectorXd F;
        p_.evaluate(x0, start.q, F);
        state_.qdot = p_.excitation(t0) - F;
        state_.history.push_front(std::move(start));
        state_.h = ctl_.fixed_step ? *ctl_.fixed_step : ctl_.h_init;
    }

    const State& state() const { return state_; }
    void restore(const State& s) { state_ = s; }
    double time() const { return state_.history.front().t; }
    const Eigen::VectorXd& current() const { return state_.history.front().x; }
    bool done() const { return time() >= tstop_ - 1e-12 * (tstop_ - t0_); }
    const StepControl& control() const { return ctl_; }

    /// Advance by one accepted step. Returns the normalized LTE of that step
    /// and whether its stencil straddled a breakpoint.
    std::pair<double, bool> step() {
        if (done()) throw DomainError("integration already reached the stop time");
        for (;;) {
            const double t = time();
            double h;
            bool hits_bp = false;
            if (ctl_.fixed_step) {
                const double tn = std::min(tstop_, t0_ + static_cast<double>(state_.fixed_index + 1) * *ctl_.fixed_step);
                h = tn - t;
            } else {
                h = std::clamp(state_.h, ctl_.h_min, ctl_.h_max);
                const double next = next_stop(t);
                if (t + h >= next - ctl_.h_min) {
                    h = next - t;
                    hits_bp = true;
                } else if (t + 2.0 * h > next) {
                    h = 0.5 * (next - t);
                }
            }
            const Scheme scheme = effective_scheme();
            const auto [alpha, b] = discretize(scheme, t + h, h);
            // Newton starts from the last accepted point.
            NewtonResult nr = newton_solve(p_, current(), alpha, b, newton_);
            state_.stats.newton_iterations += nr.iterations;
            if (!nr.converged) {
                ++state_.stats.rejected;
                if (ctl_.fixed_step)
                    throw TransientFailure("Newton failed on the fixed-step grid: " + nr.message, t + h);
                state_.h = h * 0.25;
                if (state_.h < ctl_.h_min)
                    throw TransientFailure("step size fell below h_min after Newton failure: " + nr.message, t);
                continue;
            }
            Point np{t + h, std::move(nr.x), {}};
            Eigen::VectorXd F;
            p_.evaluate(np.x, np.q, F);
            const auto [err, order, straddle] = lte(np);
            if (!ctl_.fixed_step && err > 1.0) {
                ++state_.stats.rejected;
                const double f = std::max(ctl_.min_factor, std::min(ctl_.shrink, 0.9 * std::pow(err, -1.0 / (order + 1))));
                state_.h = h * f;
                if (state_.h < ctl_.h_min) throw TransientFailure("step size fell below h_min on LTE rejection", t);
                continue;
            }
            // Accept.
            ++state_.stats.accepted;
            state_.qdot = p_.excitation(np.t) - F;
            state_.history.push_front(std::move(np));
            while (state_.history.size() > 4) state_.history.pop_back();
            if (ctl_.fixed_step) {
                ++state_.fixed_index;
            } else if (hits_bp) {
                // Derivatives jump at an input breakpoint: restart the history.
                Point keep = state_.history.front();
                state_.history.clear();
                state_.history.push_front(std::move(keep));
                state_.h = std::min(ctl_.h_init, h);
            } else {
                const double f = err > 0.0 ? std::clamp(0.9 * std::pow(err, -1.0 / (order + 1)), ctl_.shrink, ctl_.grow)
                                           : ctl_.grow;
                state_.h = h * f;
            }
            return {err, straddle};
        }
    }

    TransientResult run() {
        TransientResult out;
        out.t.push_back(time());
        out.x.push_back(current());
        out.lte.push_back(0.0);
        out.straddles_breakpoint.push_back(0);
        while (!done()) {
            const auto [err, straddle] = step();
            out.t.push_back(time());
            out.x.push_back(current());
            out.lte.push_back(err);
            out.straddles_breakpoint.push_back(straddle ? 1 : 0);
        }
        out.stats = state_.stats;
        return out;
    }

private:
    double next_stop(double t) const {
        const double eps = 1e-12 * (tstop_ - t0_);
        for (double b : bps_)
            if (b > t + eps) return std::min(b, tstop_);
        return tstop_;
    }

    Scheme effective_scheme() const {
        // One BE step after (re)start: TR needs a trustworthy dq/dt, Gear-2 two points.
        if (state_.history.size() < 2 && !ctl_.fixed_step) return Scheme::BackwardEuler;
        if (state_.history.size() < 2 && ctl_.scheme != Scheme::Trapezoidal) return Scheme::BackwardEuler;
        return ctl_.scheme;
    }

    /// alpha and b of  alpha Q(X) + F(X) = b  for a step to tn.
    std::pair<double, Eigen::VectorXd> discretize(Scheme s, double tn, double h) const {
        const auto& h0 = state_.history[0];
        Eigen::VectorXd b = p_.excitation(tn);
        switch (s) {
        case Scheme::BackwardEuler: {
            const double a = 1.0 / h;
            b += a * h0.q;
            return {a, b};
        }
        case Scheme::Trapezoidal: {
            const double a = 2.0 / h;
            b += a * h0.q + state_.qdot;
            return {a, b};
        }
        case Scheme::Gear2: {
            const auto& h1 = state_.history[1];
            const double rho = h / (h0.t - h1.t);
            const double a = (1.0 + 2.0 * rho) / ((1.0 + rho) * h);
            b += ((1.0 + rho) * h0.q - rho * rho / (1.0 + rho) * h1.q) / h;
            return {a, b};
        }
        }
        return {0.0, b};
    }

    /// Normalized LTE of a candidate point, from divided differences of the
    /// state over the candidate and the stored history:
    ///   BE      h^2/2 |x''|        with x'' ~ 2 [t0..t2]x
    ///   TR      h^3/12 |x'''|      with x''' ~ 6 [t0..t3]x
    ///   Gear-2  h(h+h')/6 |x'''| / (alpha h)
    /// Falls back to the BE estimate with three points; with two, returns 0.
    std::tuple<double, int, bool> lte(const Point& np) const {
        std::vector<const Point*> pts{&np};
        for (const auto& p : state_.history) pts.push_back(&p);
        const Scheme scheme = effective_scheme();
        const std::size_t want = scheme == Scheme::BackwardEuler ? 3 : 4;
        const std::size_t use = std::min(want, pts.size());
        if (use < 3) return {0.0, 1, false};
        // Divided differences.
        std::vector<Eigen::VectorXd> dd;
        for (std::size_t i = 0; i < use; ++i) dd.push_back(pts[i]->x);
        for (std::size_t k = 1; k < use; ++k)
            for (std::size_t i = use - 1; i >= k; --i) {
                dd[i] = (dd[i - 1] - dd[i]) / (pts[i - k]->t - pts[i]->t);
                if (i == k) break;
            }
        const double h = pts[0]->t - pts[1]->t;
        Eigen::VectorXd e;
        int order;
        if (use == 3) {
            e = (h * h) * dd[2].cwiseAbs();
            order = 1;
        } else if (scheme == Scheme::Trapezoidal) {
            e = (0.5 * h * h * h) * dd[3].cwiseAbs();
            order = 2;
        } else {
            const double h2 = pts[1]->t - pts[2]->t;
            const double rho = h / h2;
            const double alpha = (1.0 + 2.0 * rho) / ((1.0 + rho) * h);
            e = (h * (h + h2) / alpha) * dd[3].cwiseAbs();
            order = 2;
        }
        const Eigen::VectorXd scale = p_.error_scale(np.x).cwiseMax(p_.error_scale(pts[1]->x));
        const Eigen::VectorXd tol = (ctl_.lte_tol * scale).array() + ctl_.lte_abstol;
        const double err = (e.array() / tol.array()).maxCoeff();
        bool straddle = false;
        const double lo = pts[use - 1]->t, hi = pts[0]->t;
        for (double b : bps_)
            if (b > lo && b < hi) straddle = true;
        return {err, order, straddle};
    }

    const DaeProblem& p_;
    double t0_, tstop_;
    StepControl ctl_;
    NewtonConfig newton_;
    std::vector<double> bps_;
    State state_;
};

inline TransientResult transient_solve(const DaeProblem& p, double t0, double tstop, const Eigen::VectorXd& x0,
                                       const StepControl& ctl = {}, const NewtonConfig& newton = {}) {
    return TransientIntegrator(p, t0, tstop, x0, ctl, newton).run();
}

} // namespace gpcsim
