#pragma once

#include <string>
#include <vector>

#include "pdn/scenario.hpp"

namespace pdn {

struct RunOptions {
    std::string out_dir = "out";
    int threads = 1;
    int ndivi = -1;              // >= 0 overrides the scenario value
    std::string scheme;          // "", "tw" or "cd" override
    long long steps_cap = -1;
    unsigned seed = 0;           // recorded in the summary, used by test tooling
    int snapshot_stride = 10;    // fields every Nth output row
};

struct RunReport {
    RunHistory history;
    std::vector<RefineDims> refine_levels;
    RefineDims realized;
    long long steps = 0;
    double dt = 0.0;
    double wall_seconds = 0.0;
    double assembly_seconds = 0.0;
    double exchange_seconds = 0.0;
    double projection_seconds = 0.0;
    double io_seconds = 0.0;
    int threads = 1;
    std::vector<std::string> warnings;
    std::string csv_path, contact_log_path, summary_path;
    std::vector<std::string> snapshot_paths;
};

/// Executes the scenario's coupled loop and writes the CSV time series, the
/// per-step contact log, VTK-legacy snapshots and a JSON run summary.
RunReport run_scenario(const Scenario& scenario, const RunOptions& opt);

/// Time-series CSV, schema: t,f_n,f_t1,f_t2,d_striker,ke,ie,de,n_contact,resets
void write_history_csv(const std::string& path, const std::vector<HistoryRow>& rows);

/// Per-step contact log: step,time,n_constrained,n_released,resets,f_normal
void write_contact_log_csv(const std::string& path, const std::vector<HistoryRow>& rows);

/// VTK legacy ASCII unstructured grid with nodal displacement vectors and
/// per-element damage fields.
void write_vtk_snapshot(const std::string& path, const MeshModel& mesh,
                        const std::vector<double>& displacement,
                        const std::vector<double>& d1, const std::vector<double>& d2,
                        const std::vector<double>& dcoh);

void write_summary_json(const std::string& path, const RunReport& report);

struct BenchPoint {
    int threads = 1;
    double seconds = 0.0;
    double speedup = 1.0;
    double efficiency = 1.0;
};

/// Strong-scaling measurement: the same scenario run for a fixed step count
/// at each worker count; speedup t0/tN, efficiency t0 N0 / (tN N).
std::vector<BenchPoint> scale_bench(const Scenario& scenario, const std::vector<int>& threads,
                                    long long steps);

} // namespace pdn
