#pragma once

#include "mick/copula.hpp"
#include "mick/error.hpp"

#include <Eigen/Dense>

#include <optional>
#include <vector>

namespace mick {

struct SolverConfig {
    int n = 8;
    double target_tau = 0.0;
    double tol_tau = 1e-6;
    double tol_fix = 1e-9;
    int max_outer = 60;
    int max_inner = 5000;
    double damping = 0.5;
    //! Starting multiplier; empty selects theta_from_tau(target_tau) / 4.
    std::optional<double> multiplier_init;

    //! Throws Errc::InvalidArgument on a malformed configuration.
    void validate() const;
};

// Iterate of the discrete stationarity system
//   log p_ij = alpha_i + beta_j + 2 * multiplier * S_ij(p).
// The potentials absorb the additive constant.
struct SolverState {
    CheckerboardDensity density;
    double multiplier = 0.0;
    Eigen::VectorXd row_potentials;
    Eigen::VectorXd col_potentials;
};

struct MultiplierProbe {
    double multiplier;
    double tau;
};

struct SolverReport {
    SolverState state;
    double achieved_tau = 0.0;
    double stationarity_residual = 0.0;
    int outer_iterations = 0;
    int inner_iterations_total = 0;
    bool converged = false;
    //! 4 * multiplier, the continuum Frank parameter matching the multiplier.
    double implied_theta = 0.0;
    //! Every (multiplier, tau) pair evaluated by the outer search.
    std::vector<MultiplierProbe> trace;
    //! Whether tau was increasing in the multiplier over the trace.
    bool monotone_trace = true;
    SolverConfig config;
};

//! Raised by solve_mick when the iteration limits run out. Carries the best
//! iterate found.
class NoConvergence : public Error {
public:
    NoConvergence(const std::string& what, SolverReport best)
        : Error(Errc::NoConvergence, what), best_(std::move(best)) {}

    const SolverReport& best() const noexcept { return best_; }

private:
    SolverReport best_;
};

//! Largest Kendall's tau attainable on an n-grid (tau of the diagonal checkerboard).
double tau_max(int n);

//! Sum of p log p over the cells.
double negentropy(const CheckerboardDensity& c);

//! Scales a positive kernel by diagonal factors so that every row and column
//! sums to 1/n. Throws Errc::NotConverged if the cap is hit.
CheckerboardDensity sinkhorn_project(const Eigen::MatrixXd& kernel, double tol = 1e-13,
                                     int max_iterations = 100000);

//! Sup-norm of the double-centred matrix log p - 2 * multiplier * S(p); zero
//! exactly when p satisfies the stationarity system. Optionally returns the
//! fitted potentials.
double stationarity_residual(const CheckerboardDensity& c, double multiplier,
                             Eigen::VectorXd* row_potentials = nullptr,
                             Eigen::VectorXd* col_potentials = nullptr);

struct InnerResult {
    SolverState state;
    int iterations = 0;
    double residual = 0.0;
    bool converged = false;
    double final_damping = 0.0;
};

//! Damped self-consistent iteration p <- Sinkhorn(exp(E)), with the exponent
//! relaxed towards 2 * multiplier * S(p). Throws Errc::DivergenceDetected if
//! a mass underflows or the residual grows over the whole run.
InnerResult inner_fixed_point(const SolverState& start, double multiplier, const SolverConfig& cfg);

struct MultiplierSearch {
    double multiplier = 0.0;
    InnerResult inner;
    double achieved_tau = 0.0;
    int evaluations = 0;
    int inner_iterations_total = 0;
    std::vector<MultiplierProbe> trace;
    bool converged = false;
};

//! Secant/bisection search for the multiplier whose fixed point has the
//! target tau. Throws Errc::BracketFailure if the target cannot be bracketed.
MultiplierSearch outer_multiplier_search(const SolverConfig& cfg);

//! Minimum-information checkerboard copula with fixed Kendall's tau.
SolverReport solve_mick(const SolverConfig& cfg);

} // namespace mick
