#include "mick/concordance.hpp"
#include "mick/error.hpp"
#include "mick/harness.hpp"
#include "mick/io.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdio>
#include <filesystem>
#include <ostream>
#include <sstream>

namespace mick {

namespace {

// Usage problems detected after CLI11 has parsed successfully.
struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

std::string fixed(double x, int decimals)
{
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", decimals, x);
    return buf;
}

std::vector<int> parse_grid_list(const std::string& text)
{
    std::vector<int> grids;
    std::stringstream ss(text);
    for (std::string item; std::getline(ss, item, ',');) {
        try {
            std::size_t used = 0;
            grids.push_back(std::stoi(item, &used));
            if (used != item.size())
                throw UsageError("bad grid size '" + item + "'");
        } catch (const std::logic_error&) {
            throw UsageError("bad grid size '" + item + "'");
        }
    }
    if (grids.empty())
        throw UsageError("--grids needs at least one grid size");
    return grids;
}

void print_error(std::ostream& err, std::string_view code, std::string_view message)
{
    err << nlohmann::json{{"error", code}, {"message", message}}.dump() << '\n';
}

} // namespace

int cli_main(int argc, const char* const* argv, std::ostream& out, std::ostream& err)
{
    CLI::App app{"Frank copula and minimum-information copula under fixed Kendall's tau"};
    app.name("mick-copula");
    app.require_subcommand(1);

    // frank ...
    auto* frank = app.add_subcommand("frank", "Closed-form Frank copula family");
    frank->require_subcommand(1);

    double theta = 0.0, u = 0.0, v = 0.0, tau = 0.0;
    bool want_pdf = false, want_cdf = false;
    int n = 0, count = 0, precision = 3;
    std::uint64_t seed = 0;
    std::string out_path, svg_path, report_path, grids_text = "4,8,16,32,64";

    auto* eval = frank->add_subcommand("eval", "Evaluate the cdf or density at (u, v)");
    eval->add_option("--theta", theta, "Frank parameter")->required();
    eval->add_option("--u", u)->required();
    eval->add_option("--v", v)->required();
    auto* cdf_flag = eval->add_flag("--cdf", want_cdf, "Evaluate the cdf (default)");
    eval->add_flag("--pdf", want_pdf, "Evaluate the density")->excludes(cdf_flag);

    auto* ftau = frank->add_subcommand("tau", "Kendall's tau for a Frank parameter");
    ftau->add_option("--theta", theta)->required();
    ftau->add_option("--precision", precision, "Decimals printed")->check(CLI::Range(0, 17));

    auto* ftheta = frank->add_subcommand("theta", "Frank parameter for a Kendall's tau");
    ftheta->add_option("--tau", tau)->required();
    ftheta->add_option("--precision", precision, "Decimals printed")->check(CLI::Range(0, 17));

    auto* fcb = frank->add_subcommand("checkerboard", "Checkerboard cell masses of the Frank copula");
    fcb->add_option("--theta", theta)->required();
    fcb->add_option("--n", n)->required()->check(CLI::PositiveNumber);
    fcb->add_option("--out", out_path, "Output .json or .csv")->required();

    auto* fsample = frank->add_subcommand("sample", "Draw pairs from the Frank copula");
    fsample->add_option("--theta", theta)->required();
    fsample->add_option("--count", count)->required()->check(CLI::PositiveNumber);
    fsample->add_option("--seed", seed)->required();
    fsample->add_option("--out", out_path, "Output .csv")->required();

    // mick ...
    auto* mick = app.add_subcommand("mick", "Minimum-information copula under fixed Kendall's tau");
    mick->require_subcommand(1);
    SolverConfig cfg;

    auto* solve = mick->add_subcommand("solve", "Solve the checkerboard problem");
    solve->add_option("--tau", cfg.target_tau)->required();
    solve->add_option("--n", cfg.n)->required()->check(CLI::PositiveNumber);
    solve->add_option("--tol-tau", cfg.tol_tau);
    solve->add_option("--tol-fix", cfg.tol_fix);
    solve->add_option("--damping", cfg.damping);
    solve->add_option("--max-outer", cfg.max_outer);
    solve->add_option("--max-inner", cfg.max_inner);
    solve->add_option("--out", out_path, "Report .json")->required();

    auto* compare = mick->add_subcommand("compare", "Sup-norm gap between a solver report and the Frank checkerboard");
    compare->add_option("--report", report_path)->required();
    compare->add_option("--theta", theta)->required();

    auto* sweep = mick->add_subcommand("sweep", "Gap to the Frank checkerboard over several grid sizes");
    sweep->add_option("--tau", tau)->required();
    sweep->add_option("--grids", grids_text, "Comma-separated ascending grid sizes");
    sweep->add_option("--out", out_path, "Output .csv")->required();
    sweep->add_option("--svg", svg_path, "Optional .svg chart");

    // verify ...
    auto* verify = app.add_subcommand("verify", "Identity and PDE checks for the Frank family");
    verify->require_subcommand(1);
    auto* liouville = verify->add_subcommand("liouville", "Finite-difference residual of d2 log c = 2 theta c");
    liouville->add_option("--theta", theta)->required();
    liouville->add_option("--n", n)->required()->check(CLI::Range(8, 1 << 14));
    liouville->add_option("--out", out_path, "Optional residual grid .csv");
    auto* identity = verify->add_subcommand("identity", "Check C = -(1/theta) log F on a node grid");
    identity->add_option("--theta", theta)->required();
    int identity_n = 50;
    identity->add_option("--n", identity_n, "Grid resolution")->check(CLI::Range(2, 1 << 14));

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return 0;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return 0;
    } catch (const CLI::ParseError& e) {
        print_error(err, "usage", e.what());
        return 2;
    }

    const auto ext = std::filesystem::path(out_path).extension().string();
    try {
        if (*eval) {
            const FrankParameter p(theta);
            out << format_double(want_pdf ? frank_density(p, u, v) : frank_cdf(p, u, v)) << '\n';
        } else if (*ftau) {
            out << fixed(tau_from_theta(FrankParameter(theta)), precision) << '\n';
        } else if (*ftheta) {
            out << fixed(theta_from_tau(tau).theta(), precision) << '\n';
        } else if (*fcb) {
            if (ext != ".json" && ext != ".csv")
                throw UsageError("--out must end in .json or .csv");
            const FrankParameter p(theta);
            const auto density = frank_checkerboard(p, n);
            const std::string text = ext == ".json"
                                         ? density_to_json(density, {tau_from_theta(p), theta}).dump(2) + "\n"
                                         : density_to_csv(density);
            write_text_file(out_path, text);
            out << "wrote " << out_path << '\n';
        } else if (*fsample) {
            if (ext != ".csv")
                throw UsageError("--out must end in .csv");
            const auto pairs = frank_sample(FrankParameter(theta), count, seed);
            write_text_file(out_path, samples_to_csv(pairs));
            out << "wrote " << out_path << '\n';
        } else if (*solve) {
            const SolverReport report = solve_mick(cfg);
            write_text_file(out_path, report_to_json(report).dump(2) + "\n");
            out << nlohmann::json{{"n", cfg.n},
                                  {"achieved_tau", report.achieved_tau},
                                  {"multiplier", report.state.multiplier},
                                  {"implied_theta", report.implied_theta},
                                  {"converged", report.converged}}
                       .dump()
                << '\n';
        } else if (*compare) {
            const SolverReport report = report_from_json(nlohmann::json::parse(read_text_file(report_path)));
            out << format_double(compare_to_frank(report, FrankParameter(theta))) << '\n';
        } else if (*sweep) {
            const auto grids = parse_grid_list(grids_text);
            const SweepResult result = convergence_sweep(tau, grids, cfg);
            const std::string csv = sweep_to_csv(result);
            write_text_file(out_path, csv);
            if (!svg_path.empty())
                write_text_file(svg_path, sweep_to_svg(result));
            out << csv;
            if (!result.complete()) {
                for (const auto& run : result.runs)
                    if (!run.ok)
                        print_error(err, "SweepIncomplete", "n=" + std::to_string(run.n) + ": " + run.error);
                return 1;
            }
        } else if (*liouville) {
            const FrankParameter p(theta);
            auto density = [&](double a, double b) { return frank_density(p, a, b); };
            const GridFunction residual = liouville_residual(density, 2.0 * theta, n);
            const double coarse = residual.sup_abs();
            const double fine = liouville_residual(density, 2.0 * theta, 2 * n).sup_abs();
            if (!out_path.empty())
                write_text_file(out_path, grid_function_to_csv(residual));
            out << nlohmann::json{{"theta", theta},
                                  {"n", n},
                                  {"sup_residual", coarse},
                                  {"sup_residual_2n", fine},
                                  {"ratio", coarse / fine}}
                       .dump()
                << '\n';
        } else if (*identity) {
            const FrankParameter p(theta);
            out << nlohmann::json{{"theta", theta},
                                  {"n", identity_n},
                                  {"sup_deviation", frank_F_identity(p, identity_n)},
                                  {"F00", frank_F(p, 0.0, 0.0)},
                                  {"F11", frank_F(p, 1.0, 1.0)}}
                       .dump()
                << '\n';
        }
    } catch (const UsageError& e) {
        print_error(err, "usage", e.what());
        return 2;
    } catch (const Error& e) {
        print_error(err, to_string(e.code()), e.what());
        return 1;
    } catch (const nlohmann::json::exception& e) {
        print_error(err, to_string(Errc::ParseError), e.what());
        return 1;
    }
    return 0;
}

} // namespace mick
