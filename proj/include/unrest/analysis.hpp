#pragma once

#include <optional>
#include <utility>
#include <vector>

#include "unrest/pde.hpp"

namespace unrest {

enum class Side { Leftmost, Rightmost };

// Smallest (Leftmost) or largest (Rightmost) x where u crosses
// fraction * sup(u), linearly interpolated between the adjacent nodes.
// Absent when sup(u) < 1e-6 (no front to speak of).
std::optional<double> half_max_position(const std::vector<double>& u, const GridSpec& grid,
                                        double fraction = 0.5, Side side = Side::Leftmost);

struct SpeedEstimate {
    double c = 0.0; // signed: exactly (x2 - x1) / (t2 - t1)
    double t1 = 0.0, t2 = 0.0;
    double x1 = 0.0, x2 = 0.0; // half-sup positions at t1, t2
    // Theoretical bracket when a model is supplied: c_b absent below the
    // tension threshold. Reported speeds are |c|; the measured front here is
    // the leftmost one, so c itself is negative for an expanding solution.
    std::optional<double> c_b;
    std::optional<double> c_1;
};

// Positions the leftmost (by default) half-sup front at the snapshots nearest
// t1 and t2. Throws NoFront when either profile has none, FrontTooClose when
// a measured position is within 20*dx of a boundary, PreconditionViolated
// when both times resolve to the same snapshot.
SpeedEstimate estimate_speed(const RunRecord& run, double t1 = 99.0, double t2 = 399.0,
                             Side side = Side::Leftmost);
// Same, with the (c_b, c_1) bracket attached when the model admits one.
SpeedEstimate estimate_speed(const RunRecord& run, const ModelSpec& model, double t1 = 99.0,
                             double t2 = 399.0, Side side = Side::Leftmost);

// Default sampling times (99, 399), shortened proportionally when t_end < 400.
std::pair<double, double> speed_sample_times(double t_end);
// Relative tolerance for speed comparisons: 5%, widened to 8% when t2 < 200.
double speed_rel_tolerance(double t2);

// Mean of v at the center node over the trailing window of the series.
// Quasi-stationarity precondition: every trailing sample differs from the
// sample one window earlier by less than 1e-4, else NotConverged.
double final_tension(const RunRecord& run, double window);

struct Thresholds {
    double eps_calm = 1e-3;         // "activity has died" level
    double eps_level = 2e-2;        // distance to u_star(1) for an upheaval
    double osc_amp = 1e-3;          // amplitude for a slope flip to count
    double terrace_ratio = 1.2;     // min max/min level-speed ratio
    double tension_window = 50.0;   // final_tension trailing window
};

enum class Verdict { Calm, Riot, LastingUpheaval, Terrace, Oscillatory, Undetermined };

const char* verdict_name(Verdict v);

struct Evidence {
    double sup_u_end = 0.0;
    double u_center_end = 0.0;
    double v_center_end = 0.0;
    std::optional<double> v_inf_estimate;
    std::vector<double> front_speeds; // 0, 1, or 2 tracked levels
    int oscillation_count = 0;
    std::optional<double> u_star_1; // u_star(1) when it exists
};

struct Classification {
    Verdict verdict = Verdict::Undetermined;
    bool oscillatory = false;
    Evidence evidence;
};

// Decision procedure, in order: Calm when sup u died; else LastingUpheaval
// when the center sits at u_star(1); else Riot when a front exists, the
// center is calm and the final tension dropped below v_b. A two-plateau
// profile whose tracked half-level sets move at speeds differing by more
// than terrace_ratio overrides the earlier verdict with Terrace. The
// oscillatory flag (>= 3 slope sign changes of amplitude > osc_amp behind
// the front) is computed independently and promotes an otherwise
// Undetermined verdict to Oscillatory.
Classification classify(const RunRecord& run, const ModelSpec& model,
                        const Thresholds& thresholds = {});

// Aligns the t_b profile's half-sup position onto the t_a profile by a
// sub-grid linear-interpolation shift and returns the max-norm difference
// of u over the overlapping nodes with x <= 0 (the measured, leftmost front;
// the mirrored right front would dominate otherwise). Small values are
// numerical evidence that the run has settled onto a traveling profile.
double wave_residual(const RunRecord& run, double t_a, double t_b);

struct EigenResult {
    double lambda_b = 0.0;
    std::vector<double> eigenvector; // positive, max-normalized
    int iterations = 0;
    double residual = 0.0; // max-norm of A*phi - lambda*phi
};

// Smallest eigenvalue of A = -d1 * (Neumann second difference)
//                            - diag(r(v_b(x)) f(0) mask(x) - omega)
// by inverse power iteration with shift (min potential) - 1, run until the
// max-norm residual drops to 1e-8; NotConverged after 1e5 iterations.
// The profile must be nodewise in (0,1).
EigenResult principal_eigenvalue(const ModelSpec& model, const std::vector<double>& v_b_profile,
                                 const GridSpec& grid);

} // namespace unrest
