#include "mick/harness.hpp"

#include "mick/error.hpp"
#include "mick/io.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <limits>
#include <sstream>
#include <thread>

namespace mick {

double sup_cell_difference(const CheckerboardDensity& a, const CheckerboardDensity& b)
{
    if (a.n() != b.n()) {
        std::ostringstream os;
        os << "grid sizes differ: " << a.n() << " vs " << b.n();
        throw Error(Errc::GridMismatch, os.str());
    }
    return (a.masses() - b.masses()).cwiseAbs().maxCoeff();
}

double compare_to_frank(const SolverReport& report, const FrankParameter& p)
{
    const CheckerboardDensity& density = report.state.density;
    return sup_cell_difference(density, frank_checkerboard(p, density.n()));
}

bool SweepResult::complete() const
{
    return std::all_of(runs.begin(), runs.end(), [](const SweepRun& r) { return r.ok; });
}

namespace {

int worker_count(int requested, std::size_t jobs)
{
    int threads = requested;
    if (threads <= 0) {
        if (const char* env = std::getenv("MICK_THREADS"))
            threads = std::atoi(env);
    }
    if (threads <= 0)
        threads = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
    return std::max(1, std::min(threads, static_cast<int>(jobs)));
}

SweepRun run_one(int n, double tau, const std::optional<FrankParameter>& frank, const SolverConfig& tmpl)
{
    SweepRun run;
    run.n = n;
    SolverConfig cfg = tmpl;
    cfg.n = n;
    cfg.target_tau = tau;
    const CheckerboardDensity reference = frank ? frank_checkerboard(*frank, n) : CheckerboardDensity::uniform(n);
    try {
        run.report = solve_mick(cfg);
        run.ok = true;
    } catch (const NoConvergence& e) {
        run.report = e.best();
        run.error = std::string(to_string(e.code())) + ": " + e.what();
    } catch (const Error& e) {
        run.error = std::string(to_string(e.code())) + ": " + e.what();
    }
    run.sup_error = run.report ? sup_cell_difference(run.report->state.density, reference)
                               : std::numeric_limits<double>::quiet_NaN();
    return run;
}

} // namespace

SweepResult convergence_sweep(double tau, const std::vector<int>& grid_sizes, const SolverConfig& cfg_template,
                              int threads)
{
    if (grid_sizes.empty())
        throw Error(Errc::InvalidArgument, "sweep needs at least one grid size");
    for (std::size_t k = 0; k < grid_sizes.size(); ++k) {
        if (grid_sizes[k] < 1 || (k > 0 && grid_sizes[k] <= grid_sizes[k - 1]))
            throw Error(Errc::InvalidArgument, "sweep grid sizes must be positive and strictly ascending");
    }

    SweepResult result;
    result.tau = tau;
    result.grid_sizes = grid_sizes;
    std::optional<FrankParameter> frank;
    if (tau != 0.0) {
        frank = theta_from_tau(tau);
        result.theta = frank->theta();
    }

    result.runs.resize(grid_sizes.size());
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t k; (k = next.fetch_add(1)) < grid_sizes.size();)
            result.runs[k] = run_one(grid_sizes[k], tau, frank, cfg_template);
    };
    const int workers = worker_count(threads, grid_sizes.size());
    std::vector<std::thread> pool;
    for (int w = 1; w < workers; ++w)
        pool.emplace_back(worker);
    worker();
    for (auto& t : pool)
        t.join();

    for (const auto& run : result.runs)
        result.sup_errors.push_back(run.sup_error);
    return result;
}

std::string sweep_to_csv(const SweepResult& sweep)
{
    std::string out = "n,sup_error,achieved_tau,implied_theta,converged\n";
    for (const auto& run : sweep.runs) {
        const double tau = run.report ? run.report->achieved_tau : std::numeric_limits<double>::quiet_NaN();
        const double theta = run.report ? run.report->implied_theta : std::numeric_limits<double>::quiet_NaN();
        out += std::to_string(run.n) + ',' + format_double(run.sup_error) + ',' + format_double(tau) + ','
               + format_double(theta) + ',' + (run.ok ? "true" : "false") + '\n';
    }
    return out;
}

std::string sweep_to_svg(const SweepResult& sweep)
{
    constexpr double width = 640, height = 420;
    constexpr double left = 80, right = 20, top = 40, bottom = 60;
    const double plot_w = width - left - right;
    const double plot_h = height - top - bottom;

    std::vector<std::pair<double, double>> pts;
    for (const auto& run : sweep.runs)
        if (std::isfinite(run.sup_error) && run.sup_error > 0.0)
            pts.emplace_back(std::log2(run.n), std::log10(run.sup_error));

    std::ostringstream os;
    os.precision(6);
    os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height
       << "\" viewBox=\"0 0 " << width << ' ' << height << "\">\n"
       << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
       << "<text x=\"" << width / 2 << "\" y=\"24\" text-anchor=\"middle\" font-family=\"sans-serif\" "
          "font-size=\"15\">sup |Frank - MICK| vs grid size (tau = "
       << sweep.tau << ")</text>\n"
       << "<line x1=\"" << left << "\" y1=\"" << top + plot_h << "\" x2=\"" << left + plot_w << "\" y2=\""
       << top + plot_h << "\" stroke=\"black\"/>\n"
       << "<line x1=\"" << left << "\" y1=\"" << top << "\" x2=\"" << left << "\" y2=\"" << top + plot_h
       << "\" stroke=\"black\"/>\n";

    if (!pts.empty()) {
        auto [xmin, xmax] = std::minmax_element(pts.begin(), pts.end(),
                                                [](auto& a, auto& b) { return a.first < b.first; });
        auto [ymin, ymax] = std::minmax_element(pts.begin(), pts.end(),
                                                [](auto& a, auto& b) { return a.second < b.second; });
        const double x0 = xmin->first, x1 = std::max(xmax->first, x0 + 1.0);
        const double y0 = std::floor(ymin->second), y1 = std::max(std::ceil(ymax->second), y0 + 1.0);
        auto sx = [&](double x) { return left + (x - x0) / (x1 - x0) * plot_w; };
        auto sy = [&](double y) { return top + plot_h - (y - y0) / (y1 - y0) * plot_h; };

        for (const auto& run : sweep.runs) {
            const double x = sx(std::log2(run.n));
            os << "<text x=\"" << x << "\" y=\"" << top + plot_h + 20
               << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\">" << run.n << "</text>\n";
        }
        for (double y = y0; y <= y1; y += 1.0)
            os << "<text x=\"" << left - 8 << "\" y=\"" << sy(y) + 4
               << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"12\">1e" << y << "</text>\n";
        os << "<polyline fill=\"none\" stroke=\"steelblue\" stroke-width=\"2\" points=\"";
        for (const auto& [x, y] : pts)
            os << sx(x) << ',' << sy(y) << ' ';
        os << "\"/>\n";
        for (const auto& [x, y] : pts)
            os << "<circle cx=\"" << sx(x) << "\" cy=\"" << sy(y) << "\" r=\"4\" fill=\"steelblue\"/>\n";
    }
    os << "<text x=\"" << left + plot_w / 2 << "\" y=\"" << height - 15
       << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"13\">grid size n</text>\n"
       << "</svg>\n";
    return os.str();
}

} // namespace mick
