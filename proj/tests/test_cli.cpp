#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "mick/harness.hpp"
#include "mick/io.hpp"

#include <json.hpp>

#include <filesystem>
#include <random>
#include <sstream>
#include <string>
#include <vector>

using namespace mick;
namespace fs = std::filesystem;

namespace {

struct Run {
    int code;
    std::string out;
    std::string err;
};

Run run(std::vector<std::string> args)
{
    args.insert(args.begin(), "mick-copula");
    std::vector<const char*> argv;
    for (const auto& a : args)
        argv.push_back(a.c_str());
    std::ostringstream out, err;
    const int code = cli_main(static_cast<int>(argv.size()), argv.data(), out, err);
    return {code, out.str(), err.str()};
}

struct TempDir {
    fs::path path = fs::temp_directory_path() / ("mick_cli_" + std::to_string(std::random_device{}()));
    TempDir() { fs::create_directories(path); }
    ~TempDir() { fs::remove_all(path); }
    std::string operator/(const std::string& name) const { return (path / name).string(); }
};

std::vector<std::string> lines(const std::string& text)
{
    std::vector<std::string> result;
    std::istringstream in(text);
    for (std::string line; std::getline(in, line);)
        result.push_back(line);
    return result;
}

nlohmann::json error_json(const Run& r)
{
    return nlohmann::json::parse(lines(r.err).at(0));
}

} // namespace

TEST_CASE("frank tau prints three decimals")
{
    const auto r = run({"frank", "tau", "--theta", "3"});
    CHECK(r.code == 0);
    CHECK(r.out == "0.307\n");
    CHECK(run({"frank", "tau", "--theta", "-3"}).out == "-0.307\n");
    CHECK(run({"frank", "tau", "--theta", "3", "--precision", "6"}).out == "0.307247\n");
}

TEST_CASE("frank theta inverts frank tau")
{
    const auto r = run({"frank", "theta", "--tau", "0.3072469594307238", "--precision", "9"});
    CHECK(r.code == 0);
    CHECK(r.out == "3.000000000\n");
    const auto zero = run({"frank", "theta", "--tau", "0"});
    CHECK(zero.code == 1);
    CHECK(error_json(zero).at("error") == "ZeroTau");
}

TEST_CASE("frank eval")
{
    const auto cdf = run({"frank", "eval", "--theta", "3", "--u", "0.5", "--v", "0.5"});
    CHECK(cdf.code == 0);
    CHECK(std::stod(cdf.out) == doctest::Approx(0.33608869914093570).epsilon(1e-14));
    const auto explicit_cdf = run({"frank", "eval", "--theta", "3", "--u", "0.5", "--v", "0.5", "--cdf"});
    CHECK(explicit_cdf.out == cdf.out);
    const auto pdf = run({"frank", "eval", "--theta", "3", "--u", "0.5", "--v", "0.5", "--pdf"});
    CHECK(pdf.code == 0);
    CHECK(std::stod(pdf.out) == doctest::Approx(frank_density(FrankParameter(3.0), 0.5, 0.5)));
    CHECK(run({"frank", "eval", "--theta", "3", "--u", "0.5", "--v", "0.5", "--pdf", "--cdf"}).code == 2);
    const auto bad = run({"frank", "eval", "--theta", "3", "--u", "1.5", "--v", "0.5"});
    CHECK(bad.code == 1);
    CHECK(error_json(bad).at("error") == "OutOfRange");
    CHECK(error_json(run({"frank", "eval", "--theta", "80", "--u", "0.5", "--v", "0.5"})).at("error")
          == "OutOfRange");
}

TEST_CASE("frank checkerboard writes JSON or CSV")
{
    TempDir dir;
    const auto json_run = run({"frank", "checkerboard", "--theta", "3", "--n", "8", "--out", dir / "cb.json"});
    CHECK(json_run.code == 0);
    const auto record = density_from_json(nlohmann::json::parse(read_text_file(dir / "cb.json")));
    const auto expected = frank_checkerboard(FrankParameter(3.0), 8);
    CHECK((record.density == expected));
    CHECK(record.meta.theta == 3.0);
    CHECK(record.meta.tau == tau_from_theta(FrankParameter(3.0)));

    CHECK(run({"frank", "checkerboard", "--theta", "3", "--n", "8", "--out", dir / "cb.csv"}).code == 0);
    CHECK((density_from_csv(read_text_file(dir / "cb.csv")) == expected));

    const auto bad = run({"frank", "checkerboard", "--theta", "3", "--n", "8", "--out", dir / "cb.txt"});
    CHECK(bad.code == 2);
    CHECK(error_json(bad).at("error") == "usage");
    CHECK(!fs::exists(dir / "cb.txt"));
}

TEST_CASE("frank sample is reproducible by seed")
{
    TempDir dir;
    CHECK(run({"frank", "sample", "--theta", "3", "--count", "50", "--seed", "9", "--out", dir / "a.csv"}).code == 0);
    CHECK(run({"frank", "sample", "--theta", "3", "--count", "50", "--seed", "9", "--out", dir / "b.csv"}).code == 0);
    CHECK(run({"frank", "sample", "--theta", "3", "--count", "50", "--seed", "10", "--out", dir / "c.csv"}).code == 0);
    const auto a = read_text_file(dir / "a.csv");
    CHECK(a == read_text_file(dir / "b.csv"));
    CHECK(a != read_text_file(dir / "c.csv"));
    CHECK(a == samples_to_csv(frank_sample(FrankParameter(3.0), 50, 9)));
    CHECK(lines(a).size() == 51);
    CHECK(run({"frank", "sample", "--theta", "3", "--count", "5", "--seed", "1", "--out", dir / "s.json"}).code == 2);
}

TEST_CASE("mick solve at tau = 0 writes the uniform density")
{
    TempDir dir;
    const auto r = run({"mick", "solve", "--tau", "0", "--n", "8", "--out", dir / "r.json"});
    CHECK(r.code == 0);
    const auto summary = nlohmann::json::parse(r.out);
    CHECK(summary.at("converged") == true);
    const auto report = report_from_json(nlohmann::json::parse(read_text_file(dir / "r.json")));
    CHECK(report.state.density.n() == 8);
    CHECK((report.state.density.masses().array() - 1.0 / 64).abs().maxCoeff() <= 1e-9);
}

TEST_CASE("mick solve then compare")
{
    TempDir dir;
    const auto r = run({"mick", "solve", "--tau", "0.307", "--n", "8", "--tol-tau", "1e-8", "--tol-fix", "1e-10",
                        "--damping", "0.4", "--out", dir / "r.json"});
    REQUIRE(r.code == 0);
    const auto report = report_from_json(nlohmann::json::parse(read_text_file(dir / "r.json")));
    CHECK(std::abs(report.achieved_tau - 0.307) <= 1e-8);
    CHECK(report.config.damping == 0.4);
    CHECK(report.config.tol_fix == 1e-10);

    const auto matched = run({"mick", "compare", "--report", dir / "r.json", "--theta", "3"});
    const auto wrong = run({"mick", "compare", "--report", dir / "r.json", "--theta", "2"});
    CHECK(matched.code == 0);
    CHECK(std::stod(matched.out) == compare_to_frank(report, FrankParameter(3.0)));
    CHECK(std::stod(matched.out) < std::stod(wrong.out));

    const auto missing = run({"mick", "compare", "--report", dir / "nope.json", "--theta", "3"});
    CHECK(missing.code == 1);
    CHECK(error_json(missing).at("error") == "ParseError");
    write_text_file(dir / "junk.json", "{not json");
    CHECK(error_json(run({"mick", "compare", "--report", dir / "junk.json", "--theta", "3"})).at("error")
          == "ParseError");
}

TEST_CASE("mick solve numeric failures exit 1 with diagnostic JSON")
{
    TempDir dir;
    const auto infeasible = run({"mick", "solve", "--tau", "0.9", "--n", "4", "--out", dir / "r.json"});
    CHECK(infeasible.code == 1);
    CHECK(error_json(infeasible).at("error") == "TauInfeasible");
    CHECK(!error_json(infeasible).at("message").get<std::string>().empty());

    const auto starved =
        run({"mick", "solve", "--tau", "0.307", "--n", "8", "--max-outer", "1", "--out", dir / "r.json"});
    CHECK(starved.code == 1);
    CHECK(error_json(starved).at("error") == "NoConvergence");

    const auto bad_cfg = run({"mick", "solve", "--tau", "0.3", "--n", "8", "--damping", "0", "--out", dir / "r.json"});
    CHECK(bad_cfg.code == 1);
    CHECK(error_json(bad_cfg).at("error") == "InvalidArgument");
}

TEST_CASE("mick sweep prints and writes the CSV")
{
    TempDir dir;
    const auto r = run({"mick", "sweep", "--tau", "0.307", "--grids", "4,8,16", "--out", dir / "s.csv", "--svg",
                        dir / "s.svg"});
    REQUIRE(r.code == 0);
    CHECK(r.out == read_text_file(dir / "s.csv"));
    const auto rows = lines(r.out);
    REQUIRE(rows.size() == 4);
    CHECK(rows[0] == "n,sup_error,achieved_tau,implied_theta,converged");
    double previous = 1.0;
    for (int k = 1; k <= 3; ++k) {
        const double err = std::stod(rows[k].substr(rows[k].find(',') + 1));
        CHECK(err < previous);
        previous = err;
    }
    const auto svg = read_text_file(dir / "s.svg");
    CHECK(svg.rfind("<svg", 0) == 0);

    const auto bad = run({"mick", "sweep", "--tau", "0.307", "--grids", "8,4", "--out", dir / "x.csv"});
    CHECK(bad.code == 1);
    CHECK(error_json(bad).at("error") == "InvalidArgument");
    CHECK(run({"mick", "sweep", "--tau", "0.307", "--grids", "4,x", "--out", dir / "x.csv"}).code == 2);

    const auto partial = run({"mick", "sweep", "--tau", "0.6", "--grids", "2,8", "--out", dir / "p.csv"});
    CHECK(partial.code == 1);
    CHECK(error_json(partial).at("error") == "SweepIncomplete");
    CHECK(lines(read_text_file(dir / "p.csv")).size() == 3);
}

TEST_CASE("verify subcommands")
{
    TempDir dir;
    const auto l = run({"verify", "liouville", "--theta", "3", "--n", "64", "--out", dir / "res.csv"});
    REQUIRE(l.code == 0);
    const auto lj = nlohmann::json::parse(l.out);
    CHECK(lj.at("ratio").get<double>() >= 3.0);
    CHECK(lines(read_text_file(dir / "res.csv")).size() == 1 + 65 * 65);
    CHECK(run({"verify", "liouville", "--theta", "3", "--n", "4"}).code == 2);

    const auto i = run({"verify", "identity", "--theta", "-2"});
    REQUIRE(i.code == 0);
    const auto ij = nlohmann::json::parse(i.out);
    CHECK(ij.at("sup_deviation").get<double>() <= 1e-12);
    CHECK(ij.at("F00").get<double>() == 1.0);
    CHECK(ij.at("F11").get<double>() == doctest::Approx(std::exp(2.0)).epsilon(1e-15));
}

TEST_CASE("usage errors exit 2 with a JSON line")
{
    for (const auto& args : std::vector<std::vector<std::string>>{{},
                                                                  {"frank"},
                                                                  {"frank", "tau"},
                                                                  {"frank", "tau", "--theta", "abc"},
                                                                  {"bogus"},
                                                                  {"mick", "solve", "--tau", "0.3"},
                                                                  {"frank", "tau", "--theta", "3", "--extra"}}) {
        const auto r = run(args);
        CAPTURE(r.err);
        CHECK(r.code == 2);
        CHECK(error_json(r).at("error") == "usage");
    }
    const auto help = run({"--help"});
    CHECK(help.code == 0);
    CHECK(help.out.find("mick-copula") != std::string::npos);
}
