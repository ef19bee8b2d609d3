#include "unrest/pde.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <iostream>
#include <set>

#include "unrest/analysis.hpp"
#include "unrest/errors.hpp"
#include "unrest/numerics.hpp"

namespace unrest {

int GridSpec::nodes() const {
    return 2 * static_cast<int>(std::llround(half_width / dx)) + 1;
}

void GridSpec::validate() const {
    if (!(half_width > 0.0) || !(dx > 0.0))
        throw ConfigSchema("grid: half_width and dx must be positive");
    double k = half_width / dx;
    double kr = std::round(k);
    if (std::abs(k - kr) > 1e-9 * std::max(1.0, kr))
        throw ConfigSchema("grid: half_width must be an integer multiple of dx");
    if (kr < 2.0) throw ConfigSchema("grid: needs at least 5 nodes (half_width >= 2*dx)");
    if (kr > 5e7) throw ConfigSchema("grid: too many nodes");
}

void SimParams::validate(const GridSpec& grid, const ModelSpec& model) const {
    grid.validate();
    if (!(dt > 0.0)) throw ConfigSchema("params: dt must be positive");
    if (!(t_end > 0.0)) throw ConfigSchema("params: t_end must be positive");
    if (t_end < dt) throw ConfigSchema("params: t_end must be at least dt");
    if (series_stride < 1) throw ConfigSchema("params: series_stride must be >= 1");
    if (snapshot_every < 0.0) throw ConfigSchema("params: snapshot_every must be >= 0");
    for (double s : snapshot_times)
        if (!std::isfinite(s) || s < 0.0)
            throw ConfigSchema("params: snapshot times must be finite and >= 0");
    double cfl = dt * 2.0 * std::max(model.d1, model.d2) / (grid.dx * grid.dx);
    if (cfl > 1.0 - 1e-9)
        throw CflViolation("dt * 2 * max(d1,d2) / dx^2 = " + num::fmt17(cfl) +
                           " exceeds the explicit-Euler stability bound (reduce dt)");
}

State initial_state(const GridSpec& grid, const CompiledExpr& u0, const CompiledExpr& v0) {
    grid.validate();
    const int n = grid.nodes();
    State s;
    s.u.resize(n);
    s.v.resize(n);
    double sup = 0.0;
    for (int i = 0; i < n; ++i) {
        double x = grid.x_at(i);
        double uv = u0.eval_uvxt(0.0, 0.0, x, 0.0);
        double vv = v0.eval_uvxt(0.0, 0.0, x, 0.0);
        if (!std::isfinite(uv) || !std::isfinite(vv))
            throw InvalidInitialData("initial data is not finite at x = " + num::fmt17(x));
        if (uv < 0.0)
            throw InvalidInitialData("u0(" + num::fmt17(x) + ") = " + num::fmt17(uv) + " < 0");
        if (vv <= 0.0 || vv >= 1.0)
            throw InvalidInitialData("v0(" + num::fmt17(x) + ") = " + num::fmt17(vv) +
                                     " outside (0,1)");
        s.u[i] = uv;
        s.v[i] = vv;
        sup = std::max(sup, uv);
    }
    // A vanishing u0 leaves (0, v0) stationary; legal, but almost always a scenario typo.
    if (sup == 0.0) std::cerr << "warning: u0 vanishes at every grid node\n";
    return s;
}

namespace {

// Single-node Euler update, shared verbatim by both kernels so their results
// are bitwise identical. um/up (vm/vp) are the left/right neighbours with the
// Neumann ghost reflection already applied at the ends.
inline void update_node(const ModelSpec& m, double dt, double inv_dx2, double um, double uc,
                        double up, double vm, double vc, double vp, double maski, double xi,
                        double& uo, double& vo) {
    double lap_u = (um - 2.0 * uc + up) * inv_dx2;
    double lap_v = (vm - 2.0 * vc + vp) * inv_dx2;
    double growth = m.r.eval_uvxt(0.0, vc, 0.0, 0.0) * m.f.eval_uvxt(uc, 0.0, 0.0, 0.0) * maski -
                    m.omega;
    uo = uc + dt * (m.d1 * lap_u + uc * growth);
    vo = vc + dt * (m.d2 * lap_v + m.psi.eval_uvxt(uc, vc, xi, 0.0));
}

inline void node_dispatch(const ModelSpec& m, double dt, double inv_dx2,
                          const std::vector<double>& mask, const std::vector<double>& x,
                          const std::vector<double>& u, const std::vector<double>& v,
                          std::vector<double>& u_out, std::vector<double>& v_out, long i, long n) {
    long im = i == 0 ? 1 : i - 1;
    long ip = i == n - 1 ? n - 2 : i + 1;
    update_node(m, dt, inv_dx2, u[im], u[i], u[ip], v[im], v[i], v[ip], mask[i], x[i], u_out[i],
                v_out[i]);
}

} // namespace

namespace pdetail {

void step_kernel_serial(const ModelSpec& model, const std::vector<double>& x, double dt,
                        double inv_dx2, const std::vector<double>& mask,
                        const std::vector<double>& u, const std::vector<double>& v,
                        std::vector<double>& u_out, std::vector<double>& v_out) {
    const long n = static_cast<long>(u.size());
    for (long i = 0; i < n; ++i)
        node_dispatch(model, dt, inv_dx2, mask, x, u, v, u_out, v_out, i, n);
}

void step_kernel_omp(const ModelSpec& model, const std::vector<double>& x, double dt,
                     double inv_dx2, const std::vector<double>& mask,
                     const std::vector<double>& u, const std::vector<double>& v,
                     std::vector<double>& u_out, std::vector<double>& v_out) {
#ifdef _OPENMP
    const long n = static_cast<long>(u.size());
    std::exception_ptr eptr = nullptr;
    bool bad = false;
#pragma omp parallel for schedule(static)
    for (long i = 0; i < n; ++i) {
        if (bad) continue; // exceptions must not escape the parallel region
        try {
            node_dispatch(model, dt, inv_dx2, mask, x, u, v, u_out, v_out, i, n);
        } catch (...) {
#pragma omp critical
            {
                if (!eptr) eptr = std::current_exception();
                bad = true;
            }
        }
    }
    if (eptr) std::rethrow_exception(eptr);
#else
    step_kernel_serial(model, x, dt, inv_dx2, mask, u, v, u_out, v_out);
#endif
}

} // namespace pdetail

namespace {

// Owns the per-run precomputations (node coordinates, sampled mask) and the
// double buffers. advance() leaves s.t untouched; the caller owns time.
class Stepper {
public:
    Stepper(const ModelSpec& model, const GridSpec& grid, const SimParams& params)
        : model_(model), dt_(params.dt), inv_dx2_(1.0 / (grid.dx * grid.dx)),
          kernel_(params.kernel) {
        const int n = grid.nodes();
        x_.resize(n);
        mask_.resize(n);
        for (int i = 0; i < n; ++i) {
            x_[i] = grid.x_at(i);
            mask_[i] = model.mask_at(x_[i]);
            if (!std::isfinite(mask_[i]))
                throw InvalidInitialData("mask is not finite at x = " + num::fmt17(x_[i]));
        }
        u_buf_.resize(n);
        v_buf_.resize(n);
    }

    void advance(State& s) {
        try {
            if (kernel_ == Kernel::OpenMP)
                pdetail::step_kernel_omp(model_, x_, dt_, inv_dx2_, mask_, s.u, s.v, u_buf_,
                                         v_buf_);
            else
                pdetail::step_kernel_serial(model_, x_, dt_, inv_dx2_, mask_, s.u, s.v, u_buf_,
                                            v_buf_);
        } catch (const EvalDomainError& e) {
            // A domain error mid-run means the state left the expressions'
            // domain, i.e. the solution degenerated: report it as a blow-up.
            throw BlowUp(std::string("expression domain error at t = ") + num::fmt17(s.t + dt_) +
                         ": " + e.what());
        }
        enforce_bounds(s.t + dt_);
        s.u.swap(u_buf_);
        s.v.swap(v_buf_);
    }

private:
    void enforce_bounds(double t_next) {
        const long n = static_cast<long>(u_buf_.size());
        for (long i = 0; i < n; ++i) {
            double& u = u_buf_[i];
            double& v = v_buf_[i];
            if (!std::isfinite(u) || !std::isfinite(v))
                throw BlowUp("non-finite state at t = " + num::fmt17(t_next) +
                             ", x = " + num::fmt17(x_[i]));
            if (u < 0.0) {
                if (u < -1e-9)
                    throw PositivityViolation("u = " + num::fmt17(u) + " at t = " +
                                              num::fmt17(t_next) + ", x = " + num::fmt17(x_[i]));
                u = 0.0;
            }
            if (v < 0.0) {
                if (v < -1e-9)
                    throw PositivityViolation("v = " + num::fmt17(v) + " at t = " +
                                              num::fmt17(t_next) + ", x = " + num::fmt17(x_[i]));
                v = 0.0;
            } else if (v > 1.0) {
                if (v > 1.0 + 1e-9)
                    throw PositivityViolation("v = " + num::fmt17(v) + " > 1 at t = " +
                                              num::fmt17(t_next) + ", x = " + num::fmt17(x_[i]));
                v = 1.0;
            }
        }
    }

    const ModelSpec& model_;
    double dt_;
    double inv_dx2_;
    Kernel kernel_;
    std::vector<double> x_, mask_, u_buf_, v_buf_;
};

SeriesSample make_sample(const State& s, const GridSpec& grid) {
    SeriesSample smp;
    smp.t = s.t;
    smp.sup_u = *std::max_element(s.u.begin(), s.u.end());
    smp.u_center = s.u[grid.center()];
    smp.v_center = s.v[grid.center()];
    smp.front_x = half_max_position(s.u, grid, 0.5, Side::Leftmost);
    return smp;
}

void guard_front(const State& s, const GridSpec& grid) {
    auto left = half_max_position(s.u, grid, 0.5, Side::Leftmost);
    if (!left) return;
    auto right = half_max_position(s.u, grid, 0.5, Side::Rightmost);
    double margin = 20.0 * grid.dx;
    if (*left <= -grid.half_width + margin || *right >= grid.half_width - margin)
        throw FrontTooClose("activity front within " + num::fmt17(margin) +
                            " of the boundary at t = " + num::fmt17(s.t) +
                            " (enlarge half_width or shorten t_end)");
}

} // namespace

void step(State& s, const ModelSpec& model, const GridSpec& grid, const SimParams& params) {
    if (s.u.size() != static_cast<std::size_t>(grid.nodes()) || s.v.size() != s.u.size())
        throw PreconditionViolated("step: state size does not match the grid");
    Stepper st(model, grid, params);
    st.advance(s);
    s.t += params.dt;
}

RunRecord simulate(const ModelSpec& model, const GridSpec& grid, const SimParams& params,
                   State state, const Observer& observer) {
    params.validate(grid, model);
    if (state.u.size() != static_cast<std::size_t>(grid.nodes()) || state.v.size() != state.u.size())
        throw PreconditionViolated("simulate: state size does not match the grid");

    const double t0 = state.t;
    const long nsteps = static_cast<long>(std::ceil(params.t_end / params.dt - 1e-9));

    std::set<long> snap_steps;
    auto to_step = [&](double t) {
        return std::clamp(std::llround(t / params.dt), 0ll, static_cast<long long>(nsteps));
    };
    for (double t : params.snapshot_times) snap_steps.insert(to_step(t));
    if (params.snapshot_every > 0.0)
        for (double t = 0.0; t <= params.t_end + 0.5 * params.dt; t += params.snapshot_every)
            snap_steps.insert(to_step(t));
    snap_steps.insert(nsteps);

    RunRecord rec;
    rec.grid = grid;
    rec.params = params;
    rec.model_fingerprint = model.fingerprint();

    Stepper stepper(model, grid, params);

    auto sample = [&]() -> bool { // false: observer asked to stop
        SeriesSample smp = make_sample(state, grid);
        if (smp.sup_u >= 1e-6) guard_front(state, grid);
        rec.series.push_back(smp);
        return !observer || observer(state, smp);
    };

    if (snap_steps.count(0)) rec.snapshots.push_back(state);
    if (!sample()) {
        rec.stopped_early = true;
    } else {
        for (long i = 1; i <= nsteps; ++i) {
            stepper.advance(state);
            state.t = t0 + i * params.dt; // not accumulated: keeps t = i*dt exact
            if (snap_steps.count(i)) rec.snapshots.push_back(state);
            if (i % params.series_stride == 0 || i == nsteps) {
                if (!sample()) {
                    rec.stopped_early = true;
                    break;
                }
            }
        }
    }

    if (rec.snapshots.empty() || rec.snapshots.back().t != state.t)
        rec.snapshots.push_back(state);
    return rec;
}

} // namespace unrest
