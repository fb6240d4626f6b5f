#pragma once

#include "mick/copula.hpp"

#include <Eigen/Dense>

#include <functional>
#include <span>

namespace mick {

// Signed quadrant mass sums
//   S_ij = sum_{k,l} sgn(i - k) sgn(j - l) Delta_kl,
// i.e. the gradient (up to a factor 2) of the Kendall's tau functional.
struct ConcordancePotential {
    int n = 0;
    Eigen::MatrixXd values;
};

// Kendall's tau of a piecewise-uniform density:
//   tau = sum_{i,j,k,l} sgn(k - i) sgn(l - j) Delta_ij Delta_kl.
// Pairs sharing a row or column band contribute nothing because the two
// points are independent and identically uniform along the shared axis.
double kendall_tau_checkerboard(const CheckerboardDensity& c);
ConcordancePotential concordance_potential(const CheckerboardDensity& c);

// Unvalidated matrix forms, used by the solver's inner loop.
double kendall_tau_masses(const Eigen::MatrixXd& masses);
Eigen::MatrixXd concordance_potential_masses(const Eigen::MatrixXd& masses);

//! Sample Kendall's tau, (concordant - discordant) / (N choose 2), in
//! O(N log N). Tied pairs count as neither.
double kendall_tau_sample(std::span<const UvPair> pairs);

using BivariateFunction = std::function<double(double, double)>;

//! Residual of the proportional local-dependence equation
//!   d^2/du dv log p(u,v) = constant * p(u,v)
//! at the interior nodes of an n-grid, with the mixed derivative taken by the
//! centered 4-point stencil of step h = 1/n. Boundary nodes are set to 0.
//! Throws Errc::NonPositiveDensity when a stencil value is not positive.
GridFunction liouville_residual(const BivariateFunction& density, double constant, int n);

//! F(u,v) = (e^{-t} - e^{-tv} - e^{-tu} + e^{-t(u+v)}) / (e^{-t} - 1), so
//! that the Frank cdf is -(1/t) log F.
double frank_F(const FrankParameter& p, double u, double v);

//! Largest |frank_cdf - (-(1/t) log F)| over the (n+1) x (n+1) node grid.
double frank_F_identity(const FrankParameter& p, int n);

} // namespace mick
