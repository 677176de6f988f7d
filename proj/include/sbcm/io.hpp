#pragma once

#include <filesystem>
#include <string>

#include "sbcm/estimators.hpp"
#include "sbcm/rasch.hpp"
#include "sbcm/experiments.hpp"
#include "sbcm/simulate.hpp"

namespace sbcm {

// printf("%.17g"): round-trippable doubles everywhere files are written
std::string format_double(double v);

// Write via a temp file in the same directory plus atomic rename, so a
// failed run never leaves a truncated artifact behind.
void atomic_write_file(const std::filesystem::path& path, const std::string& content);

// ---- trace ------------------------------------------------------------
// {"config": {...}, "schedule": [[i,j],...], "outcomes": "0110...",
//  "x0": [...]}; states are never serialized (recomputable via replay).
std::string trace_to_json(const Trace& trace);
Trace trace_from_json(const std::string& text);

// trajectory CSV: t,agent_id,opinion for every state x^0..x^T
std::string trajectory_to_csv(const Trace& trace);

// ---- estimate reports ---------------------------------------------------
// rasch: analytic bias/variance diagnostics, attached when available
// (epsilon mode with an interior estimate)
std::string report_to_json(const EstimateReport& report,
                           const BiasVarianceReport* rasch = nullptr);

// ---- experiment plans -----------------------------------------------------
ExperimentPlan plan_from_json(const std::string& text);
std::string plan_to_json(const ExperimentPlan& plan);

// ---- experiment results ---------------------------------------------------
// eps_battery.csv: N,T,eps_true,q,k,eps_hat,error,exists
std::string eps_battery_to_csv(const ExperimentResult& r);
// mu_battery.csv: N,T,mu_true,q,k,mu_hat,error,exists,boundary_hit,flat_flag
std::string mu_battery_to_csv(const ExperimentResult& r);
std::string aggregates_to_csv(const ExperimentResult& r);
// surface_long.csv: epsilon,mu,nll,cell_id
std::string surface_long_to_csv(const SurfaceScanResult& r);
// minima_census.csv: cell_id,eps_true,mu_true,n_minima,eps_hat,mu_hat,nll_min
std::string minima_census_to_csv(const SurfaceScanResult& r);
// wide nll matrix per cell: header row = mu grid, first column = eps grid
std::string surface_matrix_to_csv(const SurfaceCell& cell);
// rho_sweep.csv: rho,bias,bound
std::string rho_sweep_to_csv(const RhoSweepResult& r);

// Parse a battery record CSV (eps or mu schema) back into records.
std::vector<CellRecord> records_from_csv(const std::string& text);

// Consistency check on load: recompute the per-cell moments from the
// record rows and compare against the stored aggregates exactly (floats
// are printed round-trippably, so equality is well defined).  Throws on
// mismatch.
void verify_aggregates_csv(const std::string& records_csv,
                           const std::string& aggregates_csv);

std::string read_file(const std::filesystem::path& path);

}  // namespace sbcm
