#pragma once

#include "mick/copula.hpp"
#include "mick/solver.hpp"

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace mick {

//! max_ij |a_ij - b_ij|. Throws Errc::GridMismatch when the sizes differ.
double sup_cell_difference(const CheckerboardDensity& a, const CheckerboardDensity& b);

//! Sup-norm gap between the solver density and the Frank checkerboard on the same grid.
double compare_to_frank(const SolverReport& report, const FrankParameter& p);

struct SweepRun {
    int n = 0;
    bool ok = false;
    double sup_error = 0.0;
    //! Present for converged runs and for NoConvergence (best iterate).
    std::optional<SolverReport> report;
    std::string error;
};

struct SweepResult {
    std::vector<int> grid_sizes;
    std::vector<double> sup_errors;
    double tau = 0.0;
    //! Frank parameter matched to tau; empty for tau = 0 (independence).
    std::optional<double> theta;
    std::vector<SweepRun> runs;

    bool complete() const;
};

//! Solves MICK for every grid size and compares against the Frank
//! checkerboard with the matching parameter. Runs are independent and are
//! spread over up to `threads` workers (0: MICK_THREADS or hardware
//! concurrency). Per-grid failures are recorded, never thrown.
SweepResult convergence_sweep(double tau, const std::vector<int>& grid_sizes, const SolverConfig& cfg_template,
                              int threads = 0);

//! Header "n,sup_error,achieved_tau,implied_theta,converged", one row per grid.
std::string sweep_to_csv(const SweepResult& sweep);

//! Line chart of sup error against grid size, log-log axes.
std::string sweep_to_svg(const SweepResult& sweep);

//! Command-line entry point. Returns 0 on success, 1 on numeric failure and 2
//! on usage errors.
int cli_main(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

} // namespace mick
