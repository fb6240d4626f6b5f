#include "mick/concordance.hpp"

#include "mick/error.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <vector>

namespace mick {

Eigen::MatrixXd concordance_potential_masses(const Eigen::MatrixXd& masses)
{
    const Eigen::Index n = masses.rows();
    // cum(a, b) = sum of masses with k < a and l < b.
    Eigen::MatrixXd cum = Eigen::MatrixXd::Zero(n + 1, n + 1);
    for (Eigen::Index a = 1; a <= n; ++a)
        for (Eigen::Index b = 1; b <= n; ++b)
            cum(a, b) = masses(a - 1, b - 1) + cum(a - 1, b) + cum(a, b - 1) - cum(a - 1, b - 1);

    Eigen::MatrixXd s(n, n);
    const double total = cum(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = 0; j < n; ++j) {
            const double below_left = cum(i, j);
            const double below_right = cum(i, n) - cum(i, j + 1);
            const double above_left = cum(n, j) - cum(i + 1, j);
            const double above_right = total - cum(i + 1, n) - cum(n, j + 1) + cum(i + 1, j + 1);
            s(i, j) = below_left + above_right - below_right - above_left;
        }
    }
    return s;
}

double kendall_tau_masses(const Eigen::MatrixXd& masses)
{
    const Eigen::MatrixXd s = concordance_potential_masses(masses);
    double tau = 0.0;
    for (Eigen::Index j = 0; j < masses.cols(); ++j)
        for (Eigen::Index i = 0; i < masses.rows(); ++i)
            tau += masses(i, j) * s(i, j);
    return tau;
}

double kendall_tau_checkerboard(const CheckerboardDensity& c)
{
    return kendall_tau_masses(c.masses());
}

ConcordancePotential concordance_potential(const CheckerboardDensity& c)
{
    return {c.n(), concordance_potential_masses(c.masses())};
}

namespace {

// Merge sort counting strict inversions of ys.
long long count_inversions(std::vector<double>& ys, std::vector<double>& buf, std::size_t lo, std::size_t hi)
{
    if (hi - lo < 2)
        return 0;
    const std::size_t mid = lo + (hi - lo) / 2;
    long long swaps = count_inversions(ys, buf, lo, mid) + count_inversions(ys, buf, mid, hi);
    std::size_t a = lo, b = mid, k = lo;
    while (a < mid && b < hi) {
        if (ys[b] < ys[a]) {
            swaps += static_cast<long long>(mid - a);
            buf[k++] = ys[b++];
        } else {
            buf[k++] = ys[a++];
        }
    }
    while (a < mid)
        buf[k++] = ys[a++];
    while (b < hi)
        buf[k++] = ys[b++];
    std::copy(buf.begin() + static_cast<std::ptrdiff_t>(lo), buf.begin() + static_cast<std::ptrdiff_t>(hi),
              ys.begin() + static_cast<std::ptrdiff_t>(lo));
    return swaps;
}

template <class Key>
long long tied_pairs(const std::vector<UvPair>& sorted, Key key)
{
    long long ties = 0;
    std::size_t run = 1;
    for (std::size_t k = 1; k <= sorted.size(); ++k) {
        if (k < sorted.size() && key(sorted[k]) == key(sorted[k - 1])) {
            ++run;
        } else {
            ties += static_cast<long long>(run * (run - 1) / 2);
            run = 1;
        }
    }
    return ties;
}

} // namespace

double kendall_tau_sample(std::span<const UvPair> pairs)
{
    const std::size_t count = pairs.size();
    if (count < 2)
        throw Error(Errc::InvalidArgument, "Kendall's tau needs at least two pairs");

    // Knight's algorithm.
    std::vector<UvPair> sorted(pairs.begin(), pairs.end());
    std::sort(sorted.begin(), sorted.end(),
              [](const UvPair& a, const UvPair& b) { return a.u < b.u || (a.u == b.u && a.v < b.v); });
    const long long tied_u = tied_pairs(sorted, [](const UvPair& p) { return p.u; });
    const long long tied_uv = tied_pairs(sorted, [](const UvPair& p) { return std::pair{p.u, p.v}; });

    std::vector<double> ys(count), buf(count);
    for (std::size_t k = 0; k < count; ++k)
        ys[k] = sorted[k].v;
    const long long discordant = count_inversions(ys, buf, 0, count);

    std::vector<UvPair> by_v(sorted);
    std::sort(by_v.begin(), by_v.end(), [](const UvPair& a, const UvPair& b) { return a.v < b.v; });
    const long long tied_v = tied_pairs(by_v, [](const UvPair& p) { return p.v; });

    const double all = static_cast<double>(count) * (count - 1) / 2.0;
    const double untied = all - tied_u - tied_v + tied_uv;
    // discordant counts strict inversions; pairs tied in v only are never counted.
    return (untied - 2.0 * discordant) / all;
}

GridFunction liouville_residual(const BivariateFunction& density, double constant, int n)
{
    if (n < 8)
        throw Error(Errc::InvalidArgument, "liouville_residual needs n >= 8");
    const double h = 1.0 / n;
    auto log_density = [&](double u, double v) {
        const double d = density(u, v);
        if (!(d > 0.0)) {
            std::ostringstream os;
            os << "density is not positive at (" << u << ", " << v << "): " << d;
            throw Error(Errc::NonPositiveDensity, os.str());
        }
        return std::log(d);
    };

    GridFunction r{n, Eigen::MatrixXd::Zero(n + 1, n + 1)};
    for (int i = 1; i < n; ++i) {
        const double u = i * h;
        for (int j = 1; j < n; ++j) {
            const double v = j * h;
            const double mixed = (log_density((i + 1) * h, (j + 1) * h) - log_density((i + 1) * h, (j - 1) * h)
                                  - log_density((i - 1) * h, (j + 1) * h) + log_density((i - 1) * h, (j - 1) * h))
                                 / (4.0 * h * h);
            const double d = density(u, v);
            if (!(d > 0.0))
                log_density(u, v);
            r.values(i, j) = mixed - constant * d;
        }
    }
    return r;
}

double frank_F(const FrankParameter& p, double u, double v)
{
    const double t = p.theta();
    return (std::exp(-t) - std::exp(-t * v) - std::exp(-t * u) + std::exp(-t * (u + v))) / (std::exp(-t) - 1.0);
}

double frank_F_identity(const FrankParameter& p, int n)
{
    if (n < 2)
        throw Error(Errc::InvalidArgument, "frank_F_identity needs n >= 2");
    double sup = 0.0;
    for (int i = 0; i <= n; ++i) {
        for (int j = 0; j <= n; ++j) {
            const double u = static_cast<double>(i) / n;
            const double v = static_cast<double>(j) / n;
            const double via_f = -std::log(frank_F(p, u, v)) / p.theta();
            sup = std::max(sup, std::abs(frank_cdf(p, u, v) - via_f));
        }
    }
    return sup;
}

} // namespace mick
