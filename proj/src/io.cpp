#include "mick/io.hpp"

#include "mick/error.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <vector>

namespace mick {

namespace {

[[noreturn]] void parse_fail(const std::string& msg)
{
    throw Error(Errc::ParseError, msg);
}

double parse_double(std::string_view text)
{
    while (!text.empty() && (text.front() == ' ' || text.front() == '\t'))
        text.remove_prefix(1);
    while (!text.empty() && (text.back() == ' ' || text.back() == '\t' || text.back() == '\r'))
        text.remove_suffix(1);
    double value = 0.0;
    const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
    if (ec != std::errc() || ptr != text.data() + text.size())
        parse_fail("not a number: '" + std::string(text) + "'");
    return value;
}

nlohmann::json optional_number(const std::optional<double>& x)
{
    return x ? nlohmann::json(*x) : nlohmann::json(nullptr);
}

std::optional<double> read_optional(const nlohmann::json& j, const char* key)
{
    if (!j.contains(key) || j.at(key).is_null())
        return std::nullopt;
    return j.at(key).get<double>();
}

nlohmann::json vector_to_json(const Eigen::VectorXd& v)
{
    return std::vector<double>(v.data(), v.data() + v.size());
}

Eigen::VectorXd vector_from_json(const nlohmann::json& j)
{
    const auto values = j.get<std::vector<double>>();
    return Eigen::Map<const Eigen::VectorXd>(values.data(), static_cast<Eigen::Index>(values.size()));
}

} // namespace

std::string format_double(double x)
{
    char buf[64];
    const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, x);
    return std::string(buf, ptr);
}

nlohmann::json density_to_json(const CheckerboardDensity& c, const DensityMeta& meta)
{
    std::vector<double> flat;
    flat.reserve(static_cast<std::size_t>(c.n()) * c.n());
    for (int i = 0; i < c.n(); ++i)
        for (int j = 0; j < c.n(); ++j)
            flat.push_back(c(i, j));
    return {{"n", c.n()},
            {"masses", flat},
            {"meta", {{"tau", optional_number(meta.tau)}, {"theta", optional_number(meta.theta)}}}};
}

DensityRecord density_from_json(const nlohmann::json& j)
{
    try {
        const int n = j.at("n").get<int>();
        const auto flat = j.at("masses").get<std::vector<double>>();
        if (n < 1 || flat.size() != static_cast<std::size_t>(n) * n)
            parse_fail("density JSON: masses must hold n*n values");
        Eigen::MatrixXd m(n, n);
        for (int i = 0; i < n; ++i)
            for (int j2 = 0; j2 < n; ++j2)
                m(i, j2) = flat[static_cast<std::size_t>(i) * n + j2];
        DensityMeta meta;
        if (j.contains("meta")) {
            meta.tau = read_optional(j.at("meta"), "tau");
            meta.theta = read_optional(j.at("meta"), "theta");
        }
        return {CheckerboardDensity::from_masses(std::move(m)), meta};
    } catch (const nlohmann::json::exception& e) {
        parse_fail(std::string("density JSON: ") + e.what());
    }
}

std::string density_to_csv(const CheckerboardDensity& c)
{
    std::string out;
    for (int i = 0; i < c.n(); ++i) {
        for (int j = 0; j < c.n(); ++j) {
            if (j > 0)
                out += ',';
            out += format_double(c(i, j));
        }
        out += '\n';
    }
    return out;
}

CheckerboardDensity density_from_csv(std::string_view text)
{
    std::vector<std::vector<double>> rows;
    std::size_t pos = 0;
    while (pos < text.size()) {
        std::size_t end = text.find('\n', pos);
        if (end == std::string_view::npos)
            end = text.size();
        std::string_view line = text.substr(pos, end - pos);
        pos = end + 1;
        if (line.find_first_not_of(" \t\r") == std::string_view::npos)
            continue;
        std::vector<double> row;
        std::size_t start = 0;
        for (;;) {
            const std::size_t comma = line.find(',', start);
            row.push_back(parse_double(line.substr(start, comma - start)));
            if (comma == std::string_view::npos)
                break;
            start = comma + 1;
        }
        rows.push_back(std::move(row));
    }
    const std::size_t n = rows.size();
    if (n == 0)
        parse_fail("density CSV is empty");
    Eigen::MatrixXd m(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
    for (std::size_t i = 0; i < n; ++i) {
        if (rows[i].size() != n)
            parse_fail("density CSV must have n rows of n values");
        for (std::size_t j = 0; j < n; ++j)
            m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
    }
    return CheckerboardDensity::from_masses(std::move(m));
}

nlohmann::json config_to_json(const SolverConfig& cfg)
{
    return {{"n", cfg.n},
            {"target_tau", cfg.target_tau},
            {"tol_tau", cfg.tol_tau},
            {"tol_fix", cfg.tol_fix},
            {"max_outer", cfg.max_outer},
            {"max_inner", cfg.max_inner},
            {"damping", cfg.damping},
            {"multiplier_init", cfg.multiplier_init ? nlohmann::json(*cfg.multiplier_init) : nlohmann::json("auto")}};
}

SolverConfig config_from_json(const nlohmann::json& j)
{
    try {
        SolverConfig cfg;
        cfg.n = j.at("n").get<int>();
        cfg.target_tau = j.at("target_tau").get<double>();
        cfg.tol_tau = j.at("tol_tau").get<double>();
        cfg.tol_fix = j.at("tol_fix").get<double>();
        cfg.max_outer = j.at("max_outer").get<int>();
        cfg.max_inner = j.at("max_inner").get<int>();
        cfg.damping = j.at("damping").get<double>();
        const auto& init = j.at("multiplier_init");
        if (init.is_number())
            cfg.multiplier_init = init.get<double>();
        else if (!(init.is_string() && init.get<std::string>() == "auto"))
            parse_fail("multiplier_init must be a number or \"auto\"");
        return cfg;
    } catch (const nlohmann::json::exception& e) {
        parse_fail(std::string("solver config JSON: ") + e.what());
    }
}

nlohmann::json report_to_json(const SolverReport& report)
{
    nlohmann::json trace = nlohmann::json::array();
    for (const auto& probe : report.trace)
        trace.push_back({{"multiplier", probe.multiplier}, {"tau", probe.tau}});
    const DensityMeta meta{report.config.target_tau, report.implied_theta};
    return {{"state",
             {{"density", density_to_json(report.state.density, meta)},
              {"multiplier", report.state.multiplier},
              {"row_potentials", vector_to_json(report.state.row_potentials)},
              {"col_potentials", vector_to_json(report.state.col_potentials)}}},
            {"achieved_tau", report.achieved_tau},
            {"stationarity_residual", report.stationarity_residual},
            {"outer_iterations", report.outer_iterations},
            {"inner_iterations_total", report.inner_iterations_total},
            {"converged", report.converged},
            {"implied_theta", report.implied_theta},
            {"trace", trace},
            {"monotone_trace", report.monotone_trace},
            {"config", config_to_json(report.config)}};
}

SolverReport report_from_json(const nlohmann::json& j)
{
    try {
        const auto& state = j.at("state");
        SolverReport r;
        r.state.density = density_from_json(state.at("density")).density;
        r.state.multiplier = state.at("multiplier").get<double>();
        r.state.row_potentials = vector_from_json(state.at("row_potentials"));
        r.state.col_potentials = vector_from_json(state.at("col_potentials"));
        r.achieved_tau = j.at("achieved_tau").get<double>();
        r.stationarity_residual = j.at("stationarity_residual").get<double>();
        r.outer_iterations = j.at("outer_iterations").get<int>();
        r.inner_iterations_total = j.at("inner_iterations_total").get<int>();
        r.converged = j.at("converged").get<bool>();
        r.implied_theta = j.at("implied_theta").get<double>();
        for (const auto& probe : j.at("trace"))
            r.trace.push_back({probe.at("multiplier").get<double>(), probe.at("tau").get<double>()});
        r.monotone_trace = j.at("monotone_trace").get<bool>();
        r.config = config_from_json(j.at("config"));
        return r;
    } catch (const nlohmann::json::exception& e) {
        parse_fail(std::string("solver report JSON: ") + e.what());
    }
}

std::string samples_to_csv(std::span<const UvPair> pairs)
{
    std::string out = "u,v\n";
    for (const auto& p : pairs)
        out += format_double(p.u) + ',' + format_double(p.v) + '\n';
    return out;
}

std::string grid_function_to_csv(const GridFunction& g)
{
    std::string out = "u,v,value\n";
    for (int i = 0; i <= g.n; ++i)
        for (int j = 0; j <= g.n; ++j)
            out += format_double(static_cast<double>(i) / g.n) + ',' + format_double(static_cast<double>(j) / g.n)
                   + ',' + format_double(g(i, j)) + '\n';
    return out;
}

std::string read_text_file(const std::filesystem::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw Error(Errc::ParseError, "cannot open " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_text_file(const std::filesystem::path& path, std::string_view text)
{
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw Error(Errc::InvalidArgument, "cannot write " + path.string());
    out << text;
    if (!out)
        throw Error(Errc::InvalidArgument, "failed writing " + path.string());
}

} // namespace mick
