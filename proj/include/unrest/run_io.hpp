#pragma once

#include <optional>
#include <string>
#include <vector>

#include "unrest/analysis.hpp"
#include "unrest/ode.hpp"
#include "unrest/pde.hpp"

namespace unrest {

// Emits into out_dir (created if missing):
//   snapshots.ndjson  one {"t","x","u","v"} object per snapshot, 17 significant
//                     digits so re-reading is bit-exact;
//   series.csv        t,sup_u,u_center,v_center,front_x (front_x empty when absent);
//   summary.csv       verdict,oscillatory,sup_u_end,u_center_end,v_center_end,
//                     v_inf,front_speed_1,front_speed_2,oscillation_count,
//                     model_fingerprint;
//   snapshot_<t>.svg  per snapshot when svg is set: u solid blue, v dashed brown.
void write_run(const RunRecord& run, const Classification& cls, const std::string& out_dir,
               bool svg = false);

// Rebuilds a RunRecord from a write_run directory: snapshots.ndjson (grid
// recovered from the x array) plus series.csv when present. The model
// fingerprint is not recoverable and is left empty.
RunRecord read_run(const std::string& dir);

struct SweepRow {
    double value = 0.0;
    std::optional<SpeedEstimate> speed;
    std::optional<Classification> cls;
    std::optional<double> v_inf;
    std::string note; // non-empty when the point failed (error text)
};

// sweep.csv: value,verdict,oscillatory,c,c_b,c_1,v_inf,sup_u_end,
// u_center_end,v_center_end,note — absent observables serialize as empty
// cells; c columns report |c| (propagation speed magnitudes).
void write_sweep(const std::vector<SweepRow>& rows, const std::string& csv_path);

// trajectory.csv: t,u,v rows for the ODE subcommand.
void write_trajectory(const Trajectory& traj, const std::string& csv_path);

// eigenvector.csv: x,phi rows.
void write_eigenvector(const EigenResult& res, const GridSpec& grid,
                       const std::string& csv_path);

} // namespace unrest
