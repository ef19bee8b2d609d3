#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "unrest/model.hpp"

namespace unrest {

// Uniform 1-D grid on [-half_width, half_width]; x = 0 is always a node, so
// half_width must be an integer multiple of dx. x_at(i) = -half_width + i*dx
// is exact for integer spacings, which the translation tests rely on.
struct GridSpec {
    double half_width = 400.0;
    double dx = 1.0;

    int nodes() const;
    int center() const { return (nodes() - 1) / 2; }
    double x_at(int i) const { return -half_width + i * dx; }
    void validate() const; // throws ConfigSchema
};

enum class Kernel { Serial, OpenMP };

struct SimParams {
    double dt = 0.05;
    double t_end = 400.0;
    std::vector<double> snapshot_times; // mapped to nearest steps, deduplicated
    double snapshot_every = 0.0;        // > 0: also snapshot every multiple of this
    int series_stride = 20;             // record the series every this many steps
    Kernel kernel = Kernel::Serial;

    // Throws CflViolation when dt * 2 * max(d1,d2) / dx^2 > 1 - 1e-9, and
    // ConfigSchema on nonsensical values.
    void validate(const GridSpec& grid, const ModelSpec& model) const;
};

struct State {
    double t = 0.0;
    std::vector<double> u, v;
};

struct SeriesSample {
    double t = 0.0;
    double sup_u = 0.0;
    double u_center = 0.0;
    double v_center = 0.0;
    std::optional<double> front_x; // leftmost half-sup crossing; absent below 1e-6 sup
};

struct RunRecord {
    GridSpec grid;
    SimParams params;
    std::string model_fingerprint;
    std::vector<State> snapshots; // always ends with the final state
    std::vector<SeriesSample> series;
    bool stopped_early = false; // observer asked to stop before t_end
};

// Samples u0(x), v0(x) at the grid nodes and validates them: both finite,
// u0 >= 0 and not identically zero, v0 in [0,1]. Throws InvalidInitialData.
State initial_state(const GridSpec& grid, const CompiledExpr& u0, const CompiledExpr& v0);

// One explicit Euler step (Neumann ends via ghost reflection), then the
// bounds pass: u clamped to >= 0 and v to [0,1] when the violation is at
// most 1e-9, PositivityViolation beyond that, BlowUp on non-finite values.
// Advances s.t by dt.
void step(State& s, const ModelSpec& model, const GridSpec& grid, const SimParams& params);

// Called at every series sample; return false to stop the run early.
using Observer = std::function<bool(const State&, const SeriesSample&)>;

// Runs nsteps = ceil(t_end/dt - 1e-9) Euler steps with t = i*dt held exact.
// The series records step 0, every series_stride-th step, and the final step;
// snapshots are taken at the steps nearest the requested times plus the final
// step. At each series sample the run aborts with FrontTooClose when either
// outermost half-sup crossing sits within 20*dx of a boundary.
RunRecord simulate(const ModelSpec& model, const GridSpec& grid, const SimParams& params,
                   State state, const Observer& observer = {});

namespace pdetail {
// Kernel bodies, exposed for the serial-vs-OpenMP equivalence tests and the
// benchmark. Both write u_out/v_out reading only u/v (double buffering).
void step_kernel_serial(const ModelSpec& model, const std::vector<double>& x, double dt,
                        double inv_dx2, const std::vector<double>& mask,
                        const std::vector<double>& u, const std::vector<double>& v,
                        std::vector<double>& u_out, std::vector<double>& v_out);
void step_kernel_omp(const ModelSpec& model, const std::vector<double>& x, double dt,
                     double inv_dx2, const std::vector<double>& mask,
                     const std::vector<double>& u, const std::vector<double>& v,
                     std::vector<double>& u_out, std::vector<double>& v_out);
} // namespace pdetail

} // namespace unrest
