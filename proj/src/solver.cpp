#include "mick/solver.hpp"

#include "mick/concordance.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <sstream>

namespace mick {

namespace {

// Multipliers beyond this magnitude are treated as a failed bracket search.
constexpr double kMultiplierLimit = 1e4;
constexpr double kMinDamping = 1e-8;

// Diagonal scaling in place: out = diag(r) K diag(c). r and c carry over
// between calls as a warm start.
int sinkhorn_scale(const Eigen::MatrixXd& kernel, Eigen::VectorXd& r, Eigen::VectorXd& c,
                   Eigen::MatrixXd& out, double tol, int max_iterations)
{
    const Eigen::Index n = kernel.rows();
    const double target = 1.0 / static_cast<double>(n);
    if (r.size() != n)
        r = Eigen::VectorXd::Ones(n);
    if (c.size() != n)
        c = Eigen::VectorXd::Ones(n);

    for (int it = 1; it <= max_iterations; ++it) {
        r = (target / (kernel * c).array()).matrix();
        c = (target / (kernel.transpose() * r).array()).matrix();
        const Eigen::ArrayXd rows = r.array() * (kernel * c).array();
        const double err = ((rows - target).abs() / target).maxCoeff();
        if (!std::isfinite(err))
            throw Error(Errc::NotConverged, "Sinkhorn scaling produced non-finite values");
        if (err <= tol) {
            out = r.asDiagonal() * kernel * c.asDiagonal();
            return it;
        }
    }
    std::ostringstream os;
    os << "Sinkhorn scaling did not reach tolerance " << tol << " in " << max_iterations << " iterations";
    throw Error(Errc::NotConverged, os.str());
}

double centred_sup(const Eigen::MatrixXd& m, Eigen::VectorXd* row_potentials, Eigen::VectorXd* col_potentials)
{
    const Eigen::VectorXd rows = m.rowwise().mean();
    const Eigen::RowVectorXd cols = m.colwise().mean();
    const double grand = m.mean();
    double sup = 0.0;
    for (Eigen::Index i = 0; i < m.rows(); ++i)
        for (Eigen::Index j = 0; j < m.cols(); ++j)
            sup = std::max(sup, std::abs(m(i, j) - rows(i) - cols(j) + grand));
    if (row_potentials)
        *row_potentials = rows;
    if (col_potentials)
        *col_potentials = (cols.array() - grand).matrix().transpose();
    return sup;
}

Eigen::MatrixXd stationarity_matrix(const Eigen::MatrixXd& masses, double multiplier)
{
    return masses.array().log().matrix() - 2.0 * multiplier * concordance_potential_masses(masses);
}

SolverState uniform_state(int n)
{
    return {CheckerboardDensity::uniform(n), 0.0, Eigen::VectorXd::Constant(n, -2.0 * std::log(n)),
            Eigen::VectorXd::Zero(n)};
}

} // namespace

void SolverConfig::validate() const
{
    auto fail = [](const std::string& msg) { throw Error(Errc::InvalidArgument, msg); };
    if (n < 1)
        fail("grid size n must be >= 1");
    if (!(std::abs(target_tau) < 1.0))
        fail("target tau must lie in (-1, 1)");
    if (!(tol_tau > 0.0) || !(tol_fix > 0.0))
        fail("tolerances must be positive");
    if (max_outer < 1 || max_inner < 1)
        fail("iteration limits must be >= 1");
    if (!(damping > 0.0 && damping <= 1.0))
        fail("damping must lie in (0, 1]");
    if (multiplier_init && !std::isfinite(*multiplier_init))
        fail("initial multiplier must be finite");
}

double tau_max(int n)
{
    if (n < 1)
        throw Error(Errc::InvalidArgument, "grid size must be positive");
    const Eigen::MatrixXd diagonal = Eigen::MatrixXd::Identity(n, n) / static_cast<double>(n);
    return kendall_tau_masses(diagonal);
}

double negentropy(const CheckerboardDensity& c)
{
    double sum = 0.0;
    for (Eigen::Index j = 0; j < c.masses().cols(); ++j)
        for (Eigen::Index i = 0; i < c.masses().rows(); ++i) {
            const double p = c.masses()(i, j);
            if (p > 0.0)
                sum += p * std::log(p);
        }
    return sum;
}

CheckerboardDensity sinkhorn_project(const Eigen::MatrixXd& kernel, double tol, int max_iterations)
{
    if (kernel.rows() == 0 || kernel.rows() != kernel.cols())
        throw Error(Errc::InvalidArgument, "Sinkhorn kernel must be a non-empty square matrix");
    if (!kernel.allFinite() || !(kernel.minCoeff() > 0.0))
        throw Error(Errc::InvalidArgument, "Sinkhorn kernel entries must be positive and finite");
    Eigen::VectorXd r, c;
    Eigen::MatrixXd out;
    sinkhorn_scale(kernel, r, c, out, tol, max_iterations);
    return CheckerboardDensity::from_masses(std::move(out));
}

double stationarity_residual(const CheckerboardDensity& c, double multiplier, Eigen::VectorXd* row_potentials,
                             Eigen::VectorXd* col_potentials)
{
    if (!(c.masses().minCoeff() > 0.0))
        throw Error(Errc::NonPositiveDensity, "stationarity residual needs strictly positive masses");
    return centred_sup(stationarity_matrix(c.masses(), multiplier), row_potentials, col_potentials);
}

InnerResult inner_fixed_point(const SolverState& start, double multiplier, const SolverConfig& cfg)
{
    cfg.validate();
    Eigen::MatrixXd p = start.density.masses();
    if (!(p.minCoeff() > 0.0))
        throw Error(Errc::InvalidArgument, "inner iteration needs a strictly positive starting density");

    Eigen::MatrixXd exponent = p.array().log().matrix();
    Eigen::VectorXd r, c;
    double damping = cfg.damping;
    double residual = std::numeric_limits<double>::infinity();
    double initial_residual = residual;
    double previous = residual;
    int rises = 0;
    int it = 0;
    bool converged = false;

    for (;;) {
        const Eigen::MatrixXd drive = 2.0 * multiplier * concordance_potential_masses(p);
        residual = centred_sup(p.array().log().matrix() - drive, nullptr, nullptr);
        if (it == 0)
            initial_residual = residual;
        if (residual <= cfg.tol_fix) {
            converged = true;
            break;
        }
        if (it == cfg.max_inner)
            break;

        // Halve the damping when the residual keeps growing.
        if (residual > previous) {
            if (++rises >= 2) {
                damping *= 0.5;
                rises = 0;
                if (damping < kMinDamping)
                    throw Error(Errc::DivergenceDetected, "fixed-point iteration keeps oscillating");
            }
        } else {
            rises = 0;
        }
        previous = residual;

        exponent = (1.0 - damping) * exponent + damping * drive;
        const Eigen::MatrixXd kernel = (exponent.array() - exponent.maxCoeff()).exp().matrix();
        sinkhorn_scale(kernel, r, c, p, 1e-13, 100000);
        if (!p.allFinite() || !(p.minCoeff() > 0.0))
            throw Error(Errc::DivergenceDetected, "a cell mass underflowed during the fixed-point iteration");
        ++it;
    }

    if (!converged && !(residual < initial_residual)) {
        std::ostringstream os;
        os << "fixed-point iteration did not contract (residual " << initial_residual << " -> " << residual
           << " after " << it << " iterations)";
        throw Error(Errc::DivergenceDetected, os.str());
    }

    InnerResult result{{CheckerboardDensity::from_masses(std::move(p)), multiplier, {}, {}}, it, residual, converged,
                       damping};
    result.residual =
        stationarity_residual(result.state.density, multiplier, &result.state.row_potentials,
                              &result.state.col_potentials);
    return result;
}

MultiplierSearch outer_multiplier_search(const SolverConfig& cfg)
{
    cfg.validate();
    const double target = cfg.target_tau;
    MultiplierSearch out;

    if (target == 0.0) {
        out.inner = {uniform_state(cfg.n), 0, 0.0, true, cfg.damping};
        out.converged = true;
        return out;
    }

    double start = cfg.multiplier_init ? *cfg.multiplier_init : theta_from_tau(target).theta() / 4.0;
    if (start == 0.0 || (start > 0.0) != (target > 0.0))
        start = target;

    // Converged states keyed by multiplier, used to warm-start nearby solves.
    std::map<double, SolverState> cache;
    auto warm_start = [&](double lambda) -> SolverState {
        if (cache.empty())
            return uniform_state(cfg.n);
        auto above = cache.lower_bound(lambda);
        if (above == cache.end())
            return std::prev(above)->second;
        if (above == cache.begin())
            return above->second;
        auto below = std::prev(above);
        return (lambda - below->first <= above->first - lambda) ? below->second : above->second;
    };

    // f(lambda) = tau(lambda) - target is increasing, and f(0) = -target.
    double lo = 0.0, hi = 0.0;
    double f_lo = 0.0, f_hi = 0.0;
    bool have_lo = false, have_hi = false;
    if (target > 0.0) {
        have_lo = true;
        f_lo = -target;
    } else {
        have_hi = true;
        f_hi = -target;
    }

    double best_abs = std::numeric_limits<double>::infinity();
    double prev_x = 0.0, prev_f = -target;
    double x = start;
    int stalls = 0;

    while (out.evaluations < cfg.max_outer) {
        if (!std::isfinite(x) || std::abs(x) > kMultiplierLimit) {
            double tau_lo = 0.0, tau_hi = 0.0;
            for (const auto& probe : out.trace) {
                tau_lo = std::min(tau_lo, probe.tau);
                tau_hi = std::max(tau_hi, probe.tau);
            }
            std::ostringstream os;
            os << "could not bracket tau = " << target << "; achieved tau range [" << tau_lo << ", " << tau_hi << "]";
            throw Error(Errc::BracketFailure, os.str());
        }

        ++out.evaluations;
        bool diverged = false;
        InnerResult inner;
        try {
            inner = inner_fixed_point(warm_start(x), x, cfg);
        } catch (const Error& e) {
            if (e.code() != Errc::DivergenceDetected)
                throw;
            diverged = true;
        }

        double fx = std::numeric_limits<double>::quiet_NaN();
        if (!diverged) {
            out.inner_iterations_total += inner.iterations;
            const double tau = kendall_tau_checkerboard(inner.state.density);
            fx = tau - target;
            out.trace.push_back({x, tau});
            if (inner.converged)
                cache.insert_or_assign(x, inner.state);
            if (std::abs(fx) < best_abs) {
                best_abs = std::abs(fx);
                out.multiplier = x;
                out.inner = inner;
                out.achieved_tau = tau;
            }
            if (std::abs(fx) <= cfg.tol_tau && inner.converged) {
                out.converged = true;
                break;
            }
        }

        // A diverged solve is treated as overshooting in the direction of travel.
        const bool below = !diverged && fx < 0.0;
        const double old_width = (have_lo && have_hi) ? std::abs(hi - lo) : 0.0;
        if (diverged) {
            if (target > 0.0) {
                have_hi = true;
                hi = x;
                f_hi = std::numeric_limits<double>::quiet_NaN();
            } else {
                have_lo = true;
                lo = x;
                f_lo = std::numeric_limits<double>::quiet_NaN();
            }
        } else if (below) {
            have_lo = true;
            lo = x;
            f_lo = fx;
        } else {
            have_hi = true;
            hi = x;
            f_hi = fx;
        }

        double next;
        if (have_lo && have_hi) {
            const double width = std::abs(hi - lo);
            if (old_width > 0.0 && width > 0.5 * old_width)
                ++stalls;
            else
                stalls = 0;
            const bool secant_ok = std::isfinite(f_lo) && std::isfinite(f_hi) && stalls < 2;
            next = secant_ok ? lo - f_lo * (hi - lo) / (f_hi - f_lo) : 0.5 * (lo + hi);
            const double margin = 1e-3 * width;
            if (!(next > std::min(lo, hi) + margin && next < std::max(lo, hi) - margin)) {
                next = 0.5 * (lo + hi);
                stalls = 0;
            }
        } else {
            // One-sided: extrapolate with a secant through the previous point,
            // stepping away from the known side by a bounded amount.
            double secant = x - fx * (x - prev_x) / (fx - prev_f);
            const double dir = have_lo ? 1.0 : -1.0;
            const double min_step = 0.05 * std::abs(x) + 1e-3;
            const double max_step = 3.0 * std::abs(x) + 1.0;
            double step = dir * (secant - x);
            if (!std::isfinite(step))
                step = max_step;
            next = x + dir * std::clamp(step, min_step, max_step);
        }
        if (!diverged) {
            prev_x = x;
            prev_f = fx;
        }
        x = next;
    }

    if (out.trace.empty())
        throw Error(Errc::DivergenceDetected, "every fixed-point solve diverged");
    return out;
}

SolverReport solve_mick(const SolverConfig& cfg)
{
    cfg.validate();
    const double limit = tau_max(cfg.n);
    if (std::abs(cfg.target_tau) >= limit && cfg.target_tau != 0.0) {
        std::ostringstream os;
        os << "|tau| = " << std::abs(cfg.target_tau) << " is not attainable on a " << cfg.n << "-grid (tau_max = "
           << limit << ")";
        throw Error(Errc::TauInfeasible, os.str());
    }

    MultiplierSearch search = outer_multiplier_search(cfg);

    SolverReport report{search.inner.state,
                        kendall_tau_checkerboard(search.inner.state.density),
                        search.inner.residual,
                        search.evaluations,
                        search.inner_iterations_total,
                        false,
                        4.0 * search.multiplier,
                        search.trace,
                        true,
                        cfg};
    report.converged = search.converged && std::abs(report.achieved_tau - cfg.target_tau) <= cfg.tol_tau
                       && report.stationarity_residual <= cfg.tol_fix;

    std::vector<MultiplierProbe> sorted = report.trace;
    std::sort(sorted.begin(), sorted.end(),
              [](const MultiplierProbe& a, const MultiplierProbe& b) { return a.multiplier < b.multiplier; });
    for (std::size_t k = 1; k < sorted.size(); ++k)
        if (sorted[k].tau < sorted[k - 1].tau)
            report.monotone_trace = false;

    if (!report.converged) {
        std::ostringstream os;
        os << "MICK solve did not converge: tau " << report.achieved_tau << " vs target " << cfg.target_tau
           << ", stationarity residual " << report.stationarity_residual;
        throw NoConvergence(os.str(), std::move(report));
    }
    return report;
}

} // namespace mick
