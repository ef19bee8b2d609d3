#include "unrest/analysis.hpp"

#include <algorithm>
#include <cmath>

#include "unrest/errors.hpp"
#include "unrest/numerics.hpp"

namespace unrest {

std::optional<double> half_max_position(const std::vector<double>& u, const GridSpec& grid,
                                        double fraction, Side side) {
    if (!(fraction > 0.0 && fraction < 1.0))
        throw PreconditionViolated("half_max_position: fraction must lie in (0,1)");
    if (u.empty()) return std::nullopt;
    const int n = static_cast<int>(u.size());
    double sup = *std::max_element(u.begin(), u.end());
    if (sup < 1e-6) return std::nullopt;
    const double level = fraction * sup;
    if (side == Side::Leftmost) {
        int i = 0;
        while (i < n && u[i] < level) ++i;
        if (i == 0) return grid.x_at(0);
        double frac = (level - u[i - 1]) / (u[i] - u[i - 1]);
        return grid.x_at(i - 1) + frac * grid.dx;
    }
    int i = n - 1;
    while (i >= 0 && u[i] < level) --i;
    if (i == n - 1) return grid.x_at(n - 1);
    double frac = (u[i] - level) / (u[i] - u[i + 1]);
    return grid.x_at(i) + frac * grid.dx;
}

namespace {

const State& nearest_snapshot(const RunRecord& run, double t, const char* what) {
    if (run.snapshots.empty()) throw PreconditionViolated(std::string(what) + ": run has no snapshots");
    const State* best = &run.snapshots.front();
    for (const State& s : run.snapshots)
        if (std::abs(s.t - t) < std::abs(best->t - t)) best = &s;
    return *best;
}

double front_or_throw(const State& s, const GridSpec& grid, Side side) {
    auto p = half_max_position(s.u, grid, 0.5, side);
    if (!p) throw NoFront("no front at t = " + num::fmt17(s.t));
    return *p;
}

} // namespace

SpeedEstimate estimate_speed(const RunRecord& run, double t1, double t2, Side side) {
    const State& a = nearest_snapshot(run, t1, "estimate_speed");
    const State& b = nearest_snapshot(run, t2, "estimate_speed");
    if (&a == &b)
        throw PreconditionViolated("estimate_speed: t1 and t2 resolve to the same snapshot (t = " +
                                   num::fmt17(a.t) + ")");
    SpeedEstimate e;
    e.t1 = a.t;
    e.t2 = b.t;
    e.x1 = front_or_throw(a, run.grid, side);
    e.x2 = front_or_throw(b, run.grid, side);
    double margin = 20.0 * run.grid.dx;
    for (double x : {e.x1, e.x2})
        if (x <= -run.grid.half_width + margin || x >= run.grid.half_width - margin)
            throw FrontTooClose("measured front at x = " + num::fmt17(x) +
                                " is within 20*dx of the boundary");
    e.c = (e.x2 - e.x1) / (e.t2 - e.t1);
    return e;
}

SpeedEstimate estimate_speed(const RunRecord& run, const ModelSpec& model, double t1, double t2,
                             Side side) {
    SpeedEstimate e = estimate_speed(run, t1, t2, side);
    double f0 = model.f_at(0.0);
    double k1 = model.r_at(1.0) * f0 - model.omega;
    double kb = model.r_at(model.v_b) * f0 - model.omega;
    if (k1 > 0.0) e.c_1 = 2.0 * std::sqrt(model.d1 * k1);
    if (kb > 0.0) e.c_b = 2.0 * std::sqrt(model.d1 * kb);
    return e;
}

std::pair<double, double> speed_sample_times(double t_end) {
    if (t_end >= 400.0) return {99.0, 399.0};
    double s = t_end / 400.0;
    return {99.0 * s, 399.0 * s};
}

double speed_rel_tolerance(double t2) { return t2 < 200.0 ? 0.08 : 0.05; }

double final_tension(const RunRecord& run, double window) {
    if (!(window > 0.0)) throw PreconditionViolated("final_tension: window must be positive");
    const auto& ser = run.series;
    if (ser.empty()) throw NotConverged("final_tension: run has no series samples");
    const double t_last = ser.back().t;
    if (ser.front().t > t_last - 2.0 * window + 1e-9)
        throw NotConverged("final_tension: series shorter than two windows");

    auto v_at = [&](double t) { // nearest sample; series is sorted in t
        const SeriesSample* best = &ser.front();
        for (const auto& s : ser)
            if (std::abs(s.t - t) < std::abs(best->t - t)) best = &s;
        return best->v_center;
    };

    double sum = 0.0;
    int count = 0;
    for (const auto& s : ser) {
        if (s.t < t_last - window - 1e-9) continue;
        double earlier = v_at(s.t - window);
        if (std::abs(s.v_center - earlier) >= 1e-4)
            throw NotConverged("final_tension: v_center still drifting at t = " + num::fmt17(s.t) +
                               " (|dv| = " + num::fmt17(std::abs(s.v_center - earlier)) + ")");
        sum += s.v_center;
        ++count;
    }
    return sum / count;
}

const char* verdict_name(Verdict v) {
    switch (v) {
    case Verdict::Calm: return "Calm";
    case Verdict::Riot: return "Riot";
    case Verdict::LastingUpheaval: return "LastingUpheaval";
    case Verdict::Terrace: return "Terrace";
    case Verdict::Oscillatory: return "Oscillatory";
    case Verdict::Undetermined: return "Undetermined";
    }
    return "Undetermined";
}

namespace {

// Zigzag count of slope direction changes of u between the center node and
// the leading front, counting only reversals with amplitude above osc_amp.
int count_oscillations(const std::vector<double>& u, const GridSpec& grid, double front_x,
                       double osc_amp) {
    const int n = static_cast<int>(u.size());
    int last = std::min(n - 1, static_cast<int>(std::floor((front_x + grid.half_width) / grid.dx)));
    int count = 0;
    int dir = 0;
    double ref = u[grid.center()];
    for (int i = grid.center() + 1; i <= last; ++i) {
        double d = u[i] - ref;
        if (dir == 0) {
            if (std::abs(d) > osc_amp) {
                dir = d > 0.0 ? 1 : -1;
                ref = u[i];
            }
        } else if (dir > 0 ? u[i] > ref : u[i] < ref) {
            ref = u[i]; // still running with the current slope
        } else if (std::abs(d) > osc_amp) {
            ++count; // confirmed reversal
            dir = -dir;
            ref = u[i];
        }
    }
    return count;
}

// First downward crossing of `level` right of the center node.
std::optional<double> first_down_crossing(const std::vector<double>& u, const GridSpec& grid,
                                          double level) {
    const int n = static_cast<int>(u.size());
    for (int i = grid.center(); i + 1 < n; ++i)
        if (u[i] >= level && u[i + 1] < level)
            return grid.x_at(i) + grid.dx * (u[i] - level) / (u[i] - u[i + 1]);
    return std::nullopt;
}

// Rightmost downward crossing of `level`.
std::optional<double> last_down_crossing(const std::vector<double>& u, const GridSpec& grid,
                                         double level) {
    const int n = static_cast<int>(u.size());
    for (int i = n - 2; i >= 0; --i)
        if (u[i] >= level && u[i + 1] < level)
            return grid.x_at(i) + grid.dx * (u[i] - level) / (u[i] - u[i + 1]);
    return std::nullopt;
}

// Plateau scan on [center, front] of the final profile: maximal segments with
// |du| < 1e-4 * dx spanning >= 10 nodes. Plateau values below eps_calm are
// calm regions, not terrace steps, and are dropped.
std::vector<double> plateau_values(const std::vector<double>& u, const GridSpec& grid,
                                   double front_x, double eps_calm) {
    const int n = static_cast<int>(u.size());
    int last = std::min(n - 1, static_cast<int>(std::floor((front_x + grid.half_width) / grid.dx)));
    std::vector<double> values;
    int start = grid.center();
    for (int i = grid.center(); i <= last; ++i) {
        bool flat = i < last && std::abs(u[i + 1] - u[i]) < 1e-4 * grid.dx;
        if (!flat) {
            if (i - start + 1 >= 10) {
                double mean = 0.0;
                for (int j = start; j <= i; ++j) mean += u[j];
                mean /= i - start + 1;
                if (mean >= eps_calm) values.push_back(mean);
            }
            start = i + 1;
        }
    }
    return values;
}

struct TerraceSpeeds {
    double fast = 0.0, slow = 0.0;
};

std::optional<TerraceSpeeds> detect_terrace(const RunRecord& run, const Thresholds& thr) {
    if (run.snapshots.size() < 2) return std::nullopt;
    const GridSpec& g = run.grid;
    const State& b = run.snapshots.back();
    const State& a = run.snapshots[run.snapshots.size() - 2];
    if (!(b.t > a.t)) return std::nullopt;
    auto lead = half_max_position(b.u, g, 0.5, Side::Rightmost);
    if (!lead) return std::nullopt;

    auto values = plateau_values(b.u, g, *lead, thr.eps_calm);
    if (values.size() < 2) return std::nullopt;
    double p_hi = *std::max_element(values.begin(), values.end());
    double p_lo = *std::min_element(values.begin(), values.end());
    if (p_hi - p_lo < 5e-2) return std::nullopt;

    // The high tracked level first drops at the trailing (slow) step; the low
    // one last drops at the leading front.
    auto hi_a = first_down_crossing(a.u, g, 0.5 * p_hi);
    auto hi_b = first_down_crossing(b.u, g, 0.5 * p_hi);
    auto lo_a = last_down_crossing(a.u, g, 0.5 * p_lo);
    auto lo_b = last_down_crossing(b.u, g, 0.5 * p_lo);
    if (!hi_a || !hi_b || !lo_a || !lo_b) return std::nullopt;
    double dt = b.t - a.t;
    double s_slow = (*hi_b - *hi_a) / dt;
    double s_fast = (*lo_b - *lo_a) / dt;
    if (s_slow <= 0.0 || s_fast <= 0.0) return std::nullopt;
    double ratio = std::max(s_fast, s_slow) / std::min(s_fast, s_slow);
    if (ratio <= thr.terrace_ratio) return std::nullopt;
    return TerraceSpeeds{s_fast, s_slow};
}

} // namespace

Classification classify(const RunRecord& run, const ModelSpec& model, const Thresholds& thr) {
    if (run.snapshots.empty()) throw PreconditionViolated("classify: run has no snapshots");
    const GridSpec& g = run.grid;
    const State& fin = run.snapshots.back();

    Classification out;
    Evidence& ev = out.evidence;
    ev.sup_u_end = *std::max_element(fin.u.begin(), fin.u.end());
    ev.u_center_end = fin.u[g.center()];
    ev.v_center_end = fin.v[g.center()];
    try {
        ev.u_star_1 = u_star(model, 1.0);
    } catch (const Error&) {
        // no positive activity equilibrium at v = 1
    }
    double v_inf = ev.v_center_end;
    try {
        v_inf = final_tension(run, thr.tension_window);
    } catch (const NotConverged&) {
        // fall back to the last center value
    }
    ev.v_inf_estimate = v_inf;

    auto lead = half_max_position(fin.u, g, 0.5, Side::Rightmost);
    if (lead && run.snapshots.size() >= 2) {
        const State& prev = run.snapshots[run.snapshots.size() - 2];
        auto prev_lead = half_max_position(prev.u, g, 0.5, Side::Rightmost);
        if (prev_lead && fin.t > prev.t)
            ev.front_speeds = {(*lead - *prev_lead) / (fin.t - prev.t)};
    }
    ev.oscillation_count = lead ? count_oscillations(fin.u, g, *lead, thr.osc_amp) : 0;
    out.oscillatory = ev.oscillation_count >= 3;

    if (ev.sup_u_end < thr.eps_calm)
        out.verdict = Verdict::Calm;
    else if (ev.u_star_1 && std::abs(ev.u_center_end - *ev.u_star_1) < thr.eps_level)
        out.verdict = Verdict::LastingUpheaval;
    else if (lead && ev.u_center_end < thr.eps_calm && v_inf < model.v_b)
        out.verdict = Verdict::Riot;
    else
        out.verdict = Verdict::Undetermined;

    if (auto terr = detect_terrace(run, thr)) {
        out.verdict = Verdict::Terrace;
        ev.front_speeds = {terr->fast, terr->slow};
    } else if (out.verdict == Verdict::Undetermined && out.oscillatory) {
        out.verdict = Verdict::Oscillatory;
    }
    return out;
}

double wave_residual(const RunRecord& run, double t_a, double t_b) {
    const State& a = nearest_snapshot(run, t_a, "wave_residual");
    const State& b = nearest_snapshot(run, t_b, "wave_residual");
    if (&a == &b)
        throw PreconditionViolated("wave_residual: t_a and t_b resolve to the same snapshot");
    const GridSpec& g = run.grid;
    double xa = front_or_throw(a, g, Side::Leftmost);
    double xb = front_or_throw(b, g, Side::Leftmost);
    double shift = xb - xa;
    const int n = g.nodes();
    double res = 0.0;
    for (int i = 0; i < n && g.x_at(i) <= 0.0; ++i) {
        double xs = g.x_at(i) + shift;
        if (xs < g.x_at(0) || xs > g.x_at(n - 1)) continue;
        int j = std::min(n - 2, static_cast<int>(std::floor((xs + g.half_width) / g.dx)));
        double frac = (xs - g.x_at(j)) / g.dx;
        double val = b.u[j] * (1.0 - frac) + b.u[j + 1] * frac;
        res = std::max(res, std::abs(a.u[i] - val));
    }
    return res;
}

EigenResult principal_eigenvalue(const ModelSpec& model, const std::vector<double>& v_b_profile,
                                 const GridSpec& grid) {
    grid.validate();
    const int n = grid.nodes();
    if (static_cast<int>(v_b_profile.size()) != n)
        throw PreconditionViolated("principal_eigenvalue: profile size does not match the grid");
    for (double v : v_b_profile)
        if (!(v > 0.0 && v < 1.0))
            throw PreconditionViolated("principal_eigenvalue: profile values must lie in (0,1)");

    const double f0 = model.f_at(0.0);
    const double h = model.d1 / (grid.dx * grid.dx);
    std::vector<double> pot(n);
    for (int i = 0; i < n; ++i)
        pot[i] = model.r_at(v_b_profile[i]) * f0 * model.mask_at(grid.x_at(i)) - model.omega;
    const double sigma = -*std::max_element(pot.begin(), pot.end()) - 1.0;

    // A phi (Neumann: doubled off-diagonal weight in the boundary rows).
    auto apply_A = [&](const std::vector<double>& p, std::vector<double>& out) {
        out[0] = (2.0 * h - pot[0]) * p[0] - 2.0 * h * p[1];
        for (int i = 1; i < n - 1; ++i)
            out[i] = -h * p[i - 1] + (2.0 * h - pot[i]) * p[i] - h * p[i + 1];
        out[n - 1] = -2.0 * h * p[n - 2] + (2.0 * h - pot[n - 1]) * p[n - 1];
    };

    std::vector<double> lower(n - 1, -h), upper(n - 1, -h), diag(n);
    upper[0] = -2.0 * h;
    lower[n - 2] = -2.0 * h;
    for (int i = 0; i < n; ++i) diag[i] = 2.0 * h - pot[i] - sigma;

    // Weighted inner product making A self-adjoint (half weights at the ends).
    auto dot_w = [&](const std::vector<double>& p, const std::vector<double>& q) {
        double s = 0.5 * (p[0] * q[0] + p[n - 1] * q[n - 1]);
        for (int i = 1; i < n - 1; ++i) s += p[i] * q[i];
        return s;
    };

    EigenResult res;
    std::vector<double> phi(n, 1.0), work(n), scratch;
    const int max_iters = 100000;
    for (int iter = 1; iter <= max_iters; ++iter) {
        work = phi;
        num::solve_tridiag(lower, diag, upper, work, scratch);
        int arg = 0;
        for (int i = 1; i < n; ++i)
            if (std::abs(work[i]) > std::abs(work[arg])) arg = i;
        double scale = work[arg]; // signed: top entry becomes +1
        for (int i = 0; i < n; ++i) phi[i] = work[i] / scale;

        apply_A(phi, work);
        double lambda = dot_w(phi, work) / dot_w(phi, phi);
        double r = 0.0;
        for (int i = 0; i < n; ++i) r = std::max(r, std::abs(work[i] - lambda * phi[i]));
        if (r <= 1e-8) {
            res.lambda_b = lambda;
            res.eigenvector = phi;
            res.iterations = iter;
            res.residual = r;
            return res;
        }
    }
    throw NotConverged("principal_eigenvalue: residual above 1e-8 after 1e5 iterations");
}

} // namespace unrest
