#pragma once

// Reference computations used only by the tests. None of these call into the
// code paths they are used to check.

#include <Eigen/Dense>
#include <algorithm>

#include <cmath>
#include <functional>
#include <map>
#include <numbers>
#include <random>
#include <stdexcept>
#include <utility>
#include <vector>

namespace oracle {

struct GaussRule {
    std::vector<double> nodes;
    std::vector<double> weights;
};

// Gauss-Legendre nodes on [-1, 1] by Newton iteration on P_n.
inline GaussRule gauss_legendre(int order)
{
    GaussRule rule;
    rule.nodes.resize(order);
    rule.weights.resize(order);
    for (int k = 0; k < order; ++k) {
        double x = std::cos(std::numbers::pi * (k + 0.75) / (order + 0.5));
        double dp = 0.0;
        for (int it = 0; it < 100; ++it) {
            double p0 = 1.0, p1 = x;
            for (int m = 2; m <= order; ++m) {
                const double p2 = ((2.0 * m - 1.0) * x * p1 - (m - 1.0) * p0) / m;
                p0 = p1;
                p1 = p2;
            }
            dp = order * (x * p1 - p0) / (x * x - 1.0);
            const double dx = p1 / dp;
            x -= dx;
            if (std::abs(dx) < 1e-16)
                break;
        }
        double p0 = 1.0, p1 = x;
        for (int m = 2; m <= order; ++m) {
            const double p2 = ((2.0 * m - 1.0) * x * p1 - (m - 1.0) * p0) / m;
            p0 = p1;
            p1 = p2;
        }
        dp = order * (x * p1 - p0) / (x * x - 1.0);
        rule.nodes[k] = x;
        rule.weights[k] = 2.0 / ((1.0 - x * x) * dp * dp);
    }
    return rule;
}

inline double integrate(const std::function<double(double)>& f, double a, double b, int order = 64, int panels = 1)
{
    static thread_local std::map<int, GaussRule> cache;
    auto it = cache.find(order);
    if (it == cache.end())
        it = cache.emplace(order, gauss_legendre(order)).first;
    const GaussRule* rule = &it->second;
    double total = 0.0;
    const double width = (b - a) / panels;
    for (int p = 0; p < panels; ++p) {
        const double lo = a + p * width, hi = lo + width;
        const double mid = 0.5 * (lo + hi), half = 0.5 * (hi - lo);
        for (std::size_t k = 0; k < rule->nodes.size(); ++k)
            total += half * rule->weights[k] * f(mid + half * rule->nodes[k]);
    }
    return total;
}

inline double integrate2d(const std::function<double(double, double)>& f, double a, double b, double c, double d,
                          int order = 64)
{
    return integrate([&](double x) { return integrate([&](double y) { return f(x, y); }, c, d, order); }, a, b,
                     order);
}

// D_1 straight from the defining integral.
inline double debye_d1_quadrature(double x)
{
    auto integrand = [](double t) { return t == 0.0 ? 1.0 : t / std::expm1(t); };
    const int panels = std::max(1, static_cast<int>(std::ceil(std::abs(x))));
    return integrate(integrand, 0.0, x, 64, panels) / x;
}

inline double tau_from_theta_quadrature(double theta)
{
    return 1.0 - 4.0 / theta * (1.0 - debye_d1_quadrature(theta));
}

inline double sgn(double x)
{
    return (x > 0) - (x < 0);
}

// O(n^4) signed quadrant sums.
inline Eigen::MatrixXd brute_potential(const Eigen::MatrixXd& m)
{
    const int n = static_cast<int>(m.rows());
    Eigen::MatrixXd s = Eigen::MatrixXd::Zero(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            for (int k = 0; k < n; ++k)
                for (int l = 0; l < n; ++l)
                    s(i, j) += sgn(i - k) * sgn(j - l) * m(k, l);
    return s;
}

inline double brute_tau(const Eigen::MatrixXd& m)
{
    return (m.array() * brute_potential(m).array()).sum();
}

// Orthogonal projection onto matrices with zero row and column sums.
inline Eigen::MatrixXd project_marginals(const Eigen::MatrixXd& g)
{
    const Eigen::VectorXd rows = g.rowwise().mean();
    const Eigen::RowVectorXd cols = g.colwise().mean();
    const double grand = g.mean();
    Eigen::MatrixXd out = g;
    for (Eigen::Index i = 0; i < g.rows(); ++i)
        for (Eigen::Index j = 0; j < g.cols(); ++j)
            out(i, j) = g(i, j) - rows(i) - cols(j) + grand;
    return out;
}

inline double entropy_objective(const Eigen::MatrixXd& x)
{
    return (x.array() * x.array().log()).sum();
}

// Projected gradient descent with Armijo backtracking for
//   min sum x log x - mu * tau(x) + rho/2 (tau(x) - target)^2
// over matrices with uniform marginals, starting from the uniform density.
inline Eigen::MatrixXd projected_gradient(int n, double mu, double rho, double target, Eigen::MatrixXd x,
                                          double grad_tol = 1e-13, int max_iter = 200000)
{
    auto objective = [&](const Eigen::MatrixXd& y) {
        const double t = brute_tau(y);
        return entropy_objective(y) - mu * t + 0.5 * rho * (t - target) * (t - target);
    };
    auto gradient = [&](const Eigen::MatrixXd& y) {
        const double coeff = mu - rho * (brute_tau(y) - target);
        return Eigen::MatrixXd(
            project_marginals((y.array().log() + 1.0).matrix() - 2.0 * coeff * brute_potential(y)));
    };
    // Spectral (Barzilai-Borwein) steps, nonmonotone Armijo over a short window.
    double step = 1.0 / (n * n);
    double fx = objective(x);
    Eigen::MatrixXd grad = gradient(x);
    std::vector<double> history{fx};
    double best_gnorm = grad.cwiseAbs().maxCoeff();
    int stall = 0;
    for (int it = 0; it < max_iter; ++it) {
        const double gnorm = grad.cwiseAbs().maxCoeff();
        if (gnorm < grad_tol)
            break;
        if (gnorm < 0.5 * best_gnorm) {
            best_gnorm = gnorm;
            stall = 0;
        } else if (++stall > 2000) {
            break;
        }
        const double reference = *std::max_element(history.begin(), history.end());
        Eigen::MatrixXd trial;
        double ft = 0.0;
        for (;;) {
            trial = x - step * grad;
            if (trial.minCoeff() > 0.0) {
                ft = objective(trial);
                if (ft <= reference - 1e-4 * step * grad.squaredNorm())
                    break;
            }
            step *= 0.5;
            if (step < 1e-30)
                return x;
        }
        const Eigen::MatrixXd next_grad = gradient(trial);
        const Eigen::MatrixXd s = trial - x;
        const Eigen::MatrixXd y = next_grad - grad;
        const double sy = (s.array() * y.array()).sum();
        step = sy > 0.0 ? std::clamp(s.squaredNorm() / sy, 1e-12, 1e6) : 1.0 / (n * n);
        x = trial;
        fx = ft;
        grad = next_grad;
        history.push_back(fx);
        if (history.size() > 10)
            history.erase(history.begin());
    }
    return x;
}

// Fixed-multiplier stationary point (no tau constraint).
inline Eigen::MatrixXd penalized_optimum(int n, double mu)
{
    const Eigen::MatrixXd start = Eigen::MatrixXd::Constant(n, n, 1.0 / (n * n));
    return projected_gradient(n, mu, 0.0, 0.0, start);
}

struct ConstrainedOptimum {
    Eigen::MatrixXd density;
    double multiplier;
};

// Augmented Lagrangian around projected_gradient for the tau-constrained problem.
inline ConstrainedOptimum constrained_optimum(int n, double target, double rho = 50.0)
{
    Eigen::MatrixXd x = Eigen::MatrixXd::Constant(n, n, 1.0 / (n * n));
    double mu = 0.0;
    for (int outer = 0; outer < 200; ++outer) {
        x = projected_gradient(n, mu, rho, target, x);
        const double gap = brute_tau(x) - target;
        mu -= rho * gap;
        if (std::abs(gap) < 1e-13)
            break;
    }
    return {x, mu};
}

// Plain alternating scaling, for building test densities.
inline Eigen::MatrixXd scale_to_uniform(Eigen::MatrixXd k)
{
    const double n = static_cast<double>(k.rows());
    for (int it = 0; it < 20000; ++it) {
        k = (k.array().colwise() / (k.rowwise().sum().array() * n)).matrix();
        k = (k.array().rowwise() / (k.colwise().sum().array() * n)).matrix();
        if ((k.rowwise().sum().array() * n - 1.0).abs().maxCoeff() < 1e-14)
            break;
    }
    return k;
}

inline Eigen::MatrixXd random_density(int n, std::mt19937_64& rng, double spread = 1.0)
{
    std::normal_distribution<double> normal(0.0, spread);
    Eigen::MatrixXd k(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            k(i, j) = std::exp(normal(rng));
    return scale_to_uniform(k);
}

// A random density with the prescribed tau: a random kernel tilted by
// exp(s (i - c)(j - c)), with s found by bisection. Returns false when the
// tilt cannot reach the target (the draw is rejected).
inline bool random_density_with_tau(int n, double target, std::mt19937_64& rng, Eigen::MatrixXd& out)
{
    std::normal_distribution<double> normal(0.0, 0.7);
    Eigen::MatrixXd base(n, n), tilt(n, n);
    const double c = 0.5 * (n - 1);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            base(i, j) = normal(rng);
            tilt(i, j) = (i - c) * (j - c);
        }
    auto tau_at = [&](double s) {
        out = scale_to_uniform((base + s * tilt).array().exp().matrix());
        return brute_tau(out) - target;
    };
    double lo = -20.0, hi = 20.0;
    if (tau_at(lo) > 0.0 || tau_at(hi) < 0.0)
        return false;
    for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (lo + hi);
        (tau_at(mid) < 0.0 ? lo : hi) = mid;
        if (hi - lo < 1e-15)
            break;
    }
    return std::abs(tau_at(0.5 * (lo + hi))) < 1e-12;
}

// Pairwise concordance, O(N^2).
inline double brute_sample_tau(const std::vector<std::pair<double, double>>& pts)
{
    double sum = 0.0;
    const std::size_t n = pts.size();
    for (std::size_t a = 0; a < n; ++a)
        for (std::size_t b = a + 1; b < n; ++b)
            sum += sgn(pts[a].first - pts[b].first) * sgn(pts[a].second - pts[b].second);
    return sum / (n * (n - 1) / 2.0);
}

} // namespace oracle
