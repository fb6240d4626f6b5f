#include "mick/copula.hpp"

#include "mick/error.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

namespace mick {

namespace {

// B_{2m} / (2m+1)!, m = 1..10.
constexpr double kDebyeSeries[] = {
    1.0 / 36.0,
    -1.0 / 3600.0,
    1.0 / 211680.0,
    -1.0 / 10886400.0,
    (5.0 / 66.0) / 39916800.0,
    (-691.0 / 2730.0) / 6227020800.0,
    (7.0 / 6.0) / 1307674368000.0,
    (-3617.0 / 510.0) / 355687428096000.0,
    (43867.0 / 798.0) / 121645100408832000.0,
    (-174611.0 / 330.0) / 51090942171709440000.0,
};

// Below this |x| the Bernoulli series is used, above it the exponential sum.
constexpr double kSeriesCutoff = 1.0;

void require_unit(double x, const char* name)
{
    if (!(x >= 0.0 && x <= 1.0)) {
        std::ostringstream os;
        os << name << " = " << x << " is outside [0, 1]";
        throw Error(Errc::OutOfRange, os.str());
    }
}

void require_supported(const FrankParameter& p)
{
    if (!p.supported()) {
        std::ostringstream os;
        os << "|theta| = " << std::abs(p.theta()) << " exceeds the supported range "
           << FrankParameter::kMaxSupportedTheta;
        throw Error(Errc::OutOfRange, os.str());
    }
}

// For t > 0 the Frank cdf is -(1/t) log F with
//   F(u, v) = N(u, v) / (1 - e^{-t}),
//   N(u, v) = e^{-tu} (1 - e^{-tv}) + e^{-t} (e^{t(1-v)} - 1),
// a sum of two nonnegative terms, so N is free of cancellation.
double frank_n_positive(double t, double u, double v)
{
    return -std::exp(-t * u) * std::expm1(-t * v) + std::exp(-t) * std::expm1(t * (1.0 - v));
}

double frank_cdf_positive(double t, double u, double v)
{
    const double n = frank_n_positive(t, u, v);
    return -(std::log(n) - std::log(-std::expm1(-t))) / t;
}

double frank_density_positive(double t, double u, double v)
{
    const double n = frank_n_positive(t, u, v);
    return t * (-std::expm1(-t)) * std::exp(-t * (u + v)) / (n * n);
}

double debye_d1_positive(double x)
{
    if (x < kSeriesCutoff) {
        const double x2 = x * x;
        double sum = 0.0;
        double power = x2;
        for (double coeff : kDebyeSeries) {
            sum += coeff * power;
            power *= x2;
        }
        return 1.0 - x / 4.0 + sum;
    }
    // int_0^x t/(e^t - 1) dt = pi^2/6 - sum_k e^{-kx} (x/k + 1/k^2)
    double tail = 0.0;
    for (int k = 1; k < 200; ++k) {
        const double dk = k;
        const double term = std::exp(-dk * x) * (x / dk + 1.0 / (dk * dk));
        tail += term;
        if (term < 1e-18 * tail)
            break;
    }
    return (std::numbers::pi * std::numbers::pi / 6.0 - tail) / x;
}

double tau_positive(double t)
{
    if (t < kSeriesCutoff) {
        // 1 - (4/t)(1 - D_1(t)) = 4 sum_m B_{2m} t^{2m-1} / (2m+1)!
        const double t2 = t * t;
        double sum = 0.0;
        double power = t;
        for (double coeff : kDebyeSeries) {
            sum += coeff * power;
            power *= t2;
        }
        return 4.0 * sum;
    }
    return 1.0 - 4.0 / t * (1.0 - debye_d1_positive(t));
}

double tau_derivative_positive(double t)
{
    if (t < 1e-2)
        return 1.0 / 9.0 - t * t / 300.0;
    return 4.0 / (t * t) + 4.0 / (t * std::expm1(t)) - 8.0 * debye_d1_positive(t) / (t * t);
}

} // namespace

FrankParameter::FrankParameter(double theta) : theta_(theta)
{
    if (!std::isfinite(theta) || theta == 0.0) {
        std::ostringstream os;
        os << "Frank parameter must be finite and nonzero, got " << theta;
        throw Error(Errc::InvalidArgument, os.str());
    }
}

bool FrankParameter::supported() const noexcept
{
    return std::abs(theta_) <= kMaxSupportedTheta;
}

CheckerboardDensity CheckerboardDensity::from_masses(Eigen::MatrixXd masses, double tol)
{
    if (masses.rows() == 0 || masses.rows() != masses.cols())
        throw Error(Errc::InvalidDensity, "checkerboard masses must form a non-empty square matrix");
    if (!masses.allFinite() || masses.minCoeff() < 0.0)
        throw Error(Errc::InvalidDensity, "checkerboard masses must be finite and nonnegative");
    CheckerboardDensity density(std::move(masses));
    const double err = density.max_marginal_error();
    if (!(err <= tol)) {
        std::ostringstream os;
        os << "checkerboard marginals deviate from 1/n by " << err << " (tolerance " << tol << ")";
        throw Error(Errc::InvalidDensity, os.str());
    }
    return density;
}

CheckerboardDensity CheckerboardDensity::uniform(int n)
{
    if (n < 1)
        throw Error(Errc::InvalidArgument, "grid size must be positive");
    const double mass = 1.0 / (static_cast<double>(n) * n);
    return CheckerboardDensity(Eigen::MatrixXd::Constant(n, n, mass));
}

double CheckerboardDensity::max_marginal_error() const
{
    const double target = 1.0 / n();
    const double rows = (masses_.rowwise().sum().array() - target).abs().maxCoeff();
    const double cols = (masses_.colwise().sum().array() - target).abs().maxCoeff();
    return std::max(rows, cols);
}

double frank_cdf(const FrankParameter& p, double u, double v)
{
    require_supported(p);
    require_unit(u, "u");
    require_unit(v, "v");
    if (u == 0.0 || v == 0.0)
        return 0.0;
    if (u == 1.0)
        return v;
    if (v == 1.0)
        return u;
    const double t = p.theta();
    // The log1p form is accurate unless its argument approaches -1, which
    // happens only for large positive parameters.
    const double c = t >= 1.0 ? frank_cdf_positive(t, u, v)
                              : -std::log1p(std::expm1(-t * u) * std::expm1(-t * v) / std::expm1(-t)) / t;
    return std::clamp(c, 0.0, std::min(u, v));
}

double frank_density(const FrankParameter& p, double u, double v)
{
    require_supported(p);
    require_unit(u, "u");
    require_unit(v, "v");
    const double t = p.theta();
    return t > 0.0 ? frank_density_positive(t, u, v) : frank_density_positive(-t, u, 1.0 - v);
}

double frank_conditional_cdf(const FrankParameter& p, double u, double v)
{
    require_supported(p);
    require_unit(u, "u");
    require_unit(v, "v");
    const double t = std::abs(p.theta());
    const double w = p.theta() > 0.0 ? v : 1.0 - v;
    const double h = -std::exp(-t * u) * std::expm1(-t * w) / frank_n_positive(t, u, w);
    return p.theta() > 0.0 ? h : 1.0 - h;
}

double frank_generator(const FrankParameter& p, double t)
{
    require_supported(p);
    if (!(t >= 0.0))
        throw Error(Errc::OutOfRange, "generator argument must be >= 0");
    const double theta = p.theta();
    return -std::log1p(std::expm1(-theta) * std::exp(-t)) / theta;
}

double frank_generator_inverse(const FrankParameter& p, double s)
{
    require_supported(p);
    if (!(s > 0.0 && s <= 1.0)) {
        std::ostringstream os;
        os << "generator inverse needs s in (0, 1], got " << s;
        throw Error(Errc::OutOfRange, os.str());
    }
    const double theta = p.theta();
    return -std::log(std::expm1(-theta * s) / std::expm1(-theta));
}

std::vector<UvPair> frank_sample(const FrankParameter& p, int count, std::uint64_t seed)
{
    require_supported(p);
    if (count < 1)
        throw Error(Errc::InvalidArgument, "sample count must be >= 1");

    const double t = std::abs(p.theta());
    const double et = std::exp(-t);
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unif(0.0, 1.0);

    std::vector<UvPair> out;
    out.reserve(static_cast<std::size_t>(count));
    for (int k = 0; k < count; ++k) {
        const double u = unif(rng);
        const double w = unif(rng);
        // Closed-form inverse of dC/du for the positive parameter.
        const double a = std::exp(-t * u);
        double v = -(std::log(a * (1.0 - w) + w * et) - std::log(a * (1.0 - w) + w)) / t;
        v = std::clamp(v, 0.0, 1.0);
        out.push_back({u, p.theta() > 0.0 ? v : 1.0 - v});
    }
    return out;
}

double debye_d1(double x)
{
    if (!std::isfinite(x))
        throw Error(Errc::InvalidArgument, "debye_d1 needs a finite argument");
    if (x >= 0.0)
        return debye_d1_positive(x);
    // D_1(-y) = D_1(y) + y/2
    return debye_d1_positive(-x) - x / 2.0;
}

double tau_from_theta(const FrankParameter& p)
{
    const double t = p.theta();
    const double tau = tau_positive(std::abs(t));
    return t > 0.0 ? tau : -tau;
}

FrankParameter theta_from_tau(double tau, double tol)
{
    if (!(tol > 0.0))
        throw Error(Errc::InvalidArgument, "tolerance must be positive");
    if (!(std::abs(tau) < 1.0)) {
        std::ostringstream os;
        os << "tau = " << tau << " has no Frank parameter (|tau| must be < 1)";
        throw Error(Errc::NonInvertible, os.str());
    }
    if (tau == 0.0)
        throw Error(Errc::ZeroTau, "tau = 0 corresponds to independence, which has no Frank parameter");

    const double target = std::abs(tau);
    double lo = 1e-6;
    double hi = FrankParameter::kMaxSupportedTheta;
    while (tau_positive(lo) > target && lo > 1e-300)
        lo /= 16.0;
    while (tau_positive(hi) < target) {
        hi *= 2.0;
        if (!std::isfinite(hi))
            throw Error(Errc::NonInvertible, "could not bracket the Frank parameter");
    }

    double mid = 0.5 * (lo + hi);
    for (int it = 0; it < 2000; ++it) {
        mid = 0.5 * (lo + hi);
        const double resid = tau_positive(mid) - target;
        if (std::abs(resid) <= tol || mid == lo || mid == hi)
            break;
        (resid < 0.0 ? lo : hi) = mid;
    }

    // One Newton step; kept only if it does not worsen the residual.
    const double resid = tau_positive(mid) - target;
    const double polished = mid - resid / tau_derivative_positive(mid);
    double theta = mid;
    if (polished > 0.0 && std::isfinite(polished)
        && std::abs(tau_positive(polished) - target) <= std::abs(resid))
        theta = polished;

    return FrankParameter(tau > 0.0 ? theta : -theta);
}

CheckerboardDensity frank_checkerboard(const FrankParameter& p, int n)
{
    require_supported(p);
    if (n < 1)
        throw Error(Errc::InvalidArgument, "grid size must be positive");

    // Mixed second difference of C = -(1/t) log F. F is bilinear in
    // (e^{-tu} - 1, e^{-tv} - 1), so the cross-ratio of F over a cell is
    //   F11 F00 / (F10 F01) = 1 + dP dQ / ((e^{-t} - 1) F10 F01),
    // which keeps tiny cell masses accurate to full relative precision.
    const double t = std::abs(p.theta());
    const double h = 1.0 / n;
    const double denom = -std::expm1(-t);
    Eigen::MatrixXd f(n + 1, n + 1);
    for (int i = 0; i <= n; ++i)
        for (int j = 0; j <= n; ++j)
            f(i, j) = frank_n_positive(t, i * h, j * h) / denom;

    Eigen::VectorXd step(n);
    const double em = std::expm1(-t * h);
    for (int i = 0; i < n; ++i)
        step(i) = std::exp(-t * i * h) * em;

    Eigen::MatrixXd masses(n, n);
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
            const double ratio = step(i) * step(j) / (-denom * f(i + 1, j) * f(i, j + 1));
            // Heavy cells: the cross-ratio itself is small, take its logarithm directly.
            const double log_cross = ratio > -0.5 ? std::log1p(ratio)
                                                  : std::log(f(i + 1, j + 1)) + std::log(f(i, j))
                                                        - std::log(f(i + 1, j)) - std::log(f(i, j + 1));
            const int col = p.theta() > 0.0 ? j : n - 1 - j;
            masses(i, col) = -log_cross / t;
        }
    }
    return CheckerboardDensity::from_masses(std::move(masses));
}

double checkerboard_cdf_eval(const CheckerboardDensity& c, double u, double v)
{
    require_unit(u, "u");
    require_unit(v, "v");
    const int n = c.n();
    const auto& m = c.masses();
    double total = 0.0;
    for (int i = 0; i < n; ++i) {
        const double wu = std::clamp(n * u - i, 0.0, 1.0);
        if (wu == 0.0)
            break;
        for (int j = 0; j < n; ++j) {
            const double wv = std::clamp(n * v - j, 0.0, 1.0);
            if (wv == 0.0)
                break;
            total += m(i, j) * wu * wv;
        }
    }
    return total;
}

GridFunction checkerboard_cdf_nodes(const CheckerboardDensity& c)
{
    const int n = c.n();
    GridFunction g{n, Eigen::MatrixXd::Zero(n + 1, n + 1)};
    for (int i = 1; i <= n; ++i)
        for (int j = 1; j <= n; ++j)
            g.values(i, j) = c(i - 1, j - 1) + g.values(i - 1, j) + g.values(i, j - 1)
                             - g.values(i - 1, j - 1);
    return g;
}

} // namespace mick
