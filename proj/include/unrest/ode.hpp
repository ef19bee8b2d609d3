#pragma once

#include <vector>

#include "unrest/model.hpp"

namespace unrest {

struct OdeSample {
    double t = 0.0, u = 0.0, v = 0.0;
};

struct Trajectory {
    std::vector<OdeSample> samples; // every stride-th step plus the final one
    double u_end = 0.0, v_end = 0.0;
    double max_u = 0.0, t_at_max_u = 0.0;
    // Right-hand-side values at t_end; phase_metrics' stationarity gate.
    double terminal_du = 0.0, terminal_dv = 0.0;
};

// Space-homogeneous system (diffusion dropped, psi and mask taken at x = 0)
// integrated with classic fixed-step RK4:
//   du/dt = u (r(v) f(u) mask(0) - omega),  dv/dt = psi(u, v, 0).
// Requires u0 >= 0 and v0 in (0,1); throws BlowUp on non-finite values.
Trajectory simulate_homogeneous(const ModelSpec& model, double u0, double v0, double dt,
                                double t_end, int stride = 1);

struct PhaseMetrics {
    double v_inf = 0.0;
    double max_u = 0.0;
};

// v_inf = v_end, max_u from the tracked extremum. Requires the trajectory to
// be quasi-stationary: |du/dt| + |dv/dt| < 1e-8 at t_end, else NotConverged.
PhaseMetrics phase_metrics(const Trajectory& traj);

// simulate_homogeneous with t_end doubled until phase_metrics accepts the
// trajectory; gives up (rethrows NotConverged) beyond t_end = 1e6.
Trajectory run_to_stationarity(const ModelSpec& model, double u0, double v0, double dt,
                               double t_end = 100.0, int stride = 1);

} // namespace unrest
