#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <vector>

namespace mick {

//! Frank copula parameter. Any finite nonzero value is representable; the
//! closed-form evaluators additionally require |theta| <= kMaxSupportedTheta.
class FrankParameter {
public:
    static constexpr double kMaxSupportedTheta = 50.0;

    explicit FrankParameter(double theta);

    double theta() const noexcept { return theta_; }
    bool supported() const noexcept;

private:
    double theta_;
};

//! n x n cell masses of a piecewise-uniform copula density on [0,1]^2.
//! Row index i runs along u, column index j along v. Every row and column
//! sums to 1/n.
class CheckerboardDensity {
public:
    static constexpr double kMarginalTolerance = 1e-10;

    //! The 1 x 1 density with unit mass.
    CheckerboardDensity() : masses_(Eigen::MatrixXd::Ones(1, 1)) {}

    //! Throws Errc::InvalidDensity when a mass is negative or non-finite or a
    //! marginal deviates from 1/n by more than tol.
    static CheckerboardDensity from_masses(Eigen::MatrixXd masses,
                                           double tol = kMarginalTolerance);
    static CheckerboardDensity uniform(int n);

    int n() const noexcept { return static_cast<int>(masses_.rows()); }
    const Eigen::MatrixXd& masses() const noexcept { return masses_; }
    double operator()(int i, int j) const { return masses_(i, j); }

    //! Largest |row or column sum - 1/n|.
    double max_marginal_error() const;

    bool operator==(const CheckerboardDensity& other) const
    {
        return masses_ == other.masses_;
    }

private:
    explicit CheckerboardDensity(Eigen::MatrixXd masses)
        : masses_(std::move(masses)) {}

    Eigen::MatrixXd masses_;
};

//! Values of a bivariate function at the nodes (i/n, j/n), i, j = 0..n.
struct GridFunction {
    int n = 0;
    Eigen::MatrixXd values;

    double operator()(int i, int j) const { return values(i, j); }
    double sup_abs() const { return values.cwiseAbs().maxCoeff(); }
};

struct UvPair {
    double u;
    double v;
};

double frank_cdf(const FrankParameter& p, double u, double v);
double frank_density(const FrankParameter& p, double u, double v);

//! Conditional distribution dC/du evaluated at (u, v).
double frank_conditional_cdf(const FrankParameter& p, double u, double v);

//! psi(t) for t >= 0, mapping [0, inf) onto (0, 1].
double frank_generator(const FrankParameter& p, double t);
//! psi^{-1}(s) for s in (0, 1].
double frank_generator_inverse(const FrankParameter& p, double s);

//! Draws pairs by conditional inversion: u uniform, v = C_{2|1}^{-1}(w | u).
std::vector<UvPair> frank_sample(const FrankParameter& p, int count, std::uint64_t seed);

// Debye function of order one, D_1(x) = (1/x) * int_0^x t / (e^t - 1) dt.
// D_1(0) is defined by continuity as 1.
double debye_d1(double x);

//! Kendall's tau of the Frank copula.
double tau_from_theta(const FrankParameter& p);

//! Inverse of tau_from_theta. The result satisfies
//! |tau_from_theta(result) - tau| <= tol.
FrankParameter theta_from_tau(double tau, double tol = 1e-13);

//! Cell masses Delta_ij = C(i/n, j/n) - C((i-1)/n, j/n) - C(i/n, (j-1)/n)
//! + C((i-1)/n, (j-1)/n).
CheckerboardDensity frank_checkerboard(const FrankParameter& p, int n);

//! Copula cdf of the checkerboard density (bilinear inside each cell).
double checkerboard_cdf_eval(const CheckerboardDensity& c, double u, double v);

//! Checkerboard cdf at every node (i/n, j/n).
GridFunction checkerboard_cdf_nodes(const CheckerboardDensity& c);

} // namespace mick
