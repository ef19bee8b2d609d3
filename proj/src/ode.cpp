#include "unrest/ode.hpp"

#include <cmath>

#include "unrest/errors.hpp"
#include "unrest/numerics.hpp"

namespace unrest {

namespace {

struct Rhs {
    const ModelSpec& m;
    double mask0;
    void operator()(double u, double v, double& du, double& dv) const {
        du = u * (m.r_at(v) * m.f_at(u) * mask0 - m.omega);
        dv = m.psi_at(u, v, 0.0);
    }
};

} // namespace

Trajectory simulate_homogeneous(const ModelSpec& model, double u0, double v0, double dt,
                                double t_end, int stride) {
    if (!(u0 >= 0.0)) throw PreconditionViolated("simulate_homogeneous: u0 must be >= 0");
    if (!(v0 > 0.0 && v0 < 1.0))
        throw PreconditionViolated("simulate_homogeneous: v0 must lie in (0,1)");
    if (!(dt > 0.0) || !(t_end > 0.0) || stride < 1)
        throw PreconditionViolated("simulate_homogeneous: dt, t_end and stride must be positive");

    const Rhs rhs{model, model.mask_at(0.0)};
    const long nsteps = static_cast<long>(std::ceil(t_end / dt - 1e-9));

    Trajectory traj;
    traj.samples.reserve(static_cast<std::size_t>(nsteps / stride) + 2);
    double u = u0, v = v0;
    traj.max_u = u0;
    traj.t_at_max_u = 0.0;
    traj.samples.push_back({0.0, u, v});

    try {
        double k1u, k1v, k2u, k2v, k3u, k3v, k4u, k4v;
        for (long i = 1; i <= nsteps; ++i) {
            rhs(u, v, k1u, k1v);
            rhs(u + 0.5 * dt * k1u, v + 0.5 * dt * k1v, k2u, k2v);
            rhs(u + 0.5 * dt * k2u, v + 0.5 * dt * k2v, k3u, k3v);
            rhs(u + dt * k3u, v + dt * k3v, k4u, k4v);
            u += dt / 6.0 * (k1u + 2.0 * k2u + 2.0 * k3u + k4u);
            v += dt / 6.0 * (k1v + 2.0 * k2v + 2.0 * k3v + k4v);
            double t = i * dt;
            if (!std::isfinite(u) || !std::isfinite(v))
                throw BlowUp("non-finite trajectory at t = " + num::fmt17(t));
            if (u > traj.max_u) {
                traj.max_u = u;
                traj.t_at_max_u = t;
            }
            if (i % stride == 0 || i == nsteps) traj.samples.push_back({t, u, v});
        }
        traj.u_end = u;
        traj.v_end = v;
        rhs(u, v, traj.terminal_du, traj.terminal_dv);
    } catch (const EvalDomainError& e) {
        throw BlowUp(std::string("expression domain error: ") + e.what());
    }
    return traj;
}

PhaseMetrics phase_metrics(const Trajectory& traj) {
    double speed = std::abs(traj.terminal_du) + std::abs(traj.terminal_dv);
    if (!(speed < 1e-8))
        throw NotConverged("phase_metrics: |du/dt| + |dv/dt| = " + num::fmt17(speed) +
                           " at t_end, not quasi-stationary");
    return {traj.v_end, traj.max_u};
}

Trajectory run_to_stationarity(const ModelSpec& model, double u0, double v0, double dt,
                               double t_end, int stride) {
    for (;;) {
        Trajectory traj = simulate_homogeneous(model, u0, v0, dt, t_end, stride);
        double speed = std::abs(traj.terminal_du) + std::abs(traj.terminal_dv);
        if (speed < 1e-8) return traj;
        if (t_end > 1e6 / 2.0)
            throw NotConverged("run_to_stationarity: not quasi-stationary by t = " +
                               num::fmt17(t_end));
        t_end *= 2.0;
    }
}

} // namespace unrest
