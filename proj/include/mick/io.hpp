#pragma once

#include "mick/copula.hpp"
#include "mick/solver.hpp"

#include <json.hpp>

#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>

namespace mick {

struct DensityMeta {
    std::optional<double> tau;
    std::optional<double> theta;
};

struct DensityRecord {
    CheckerboardDensity density;
    DensityMeta meta;
};

//! Shortest decimal string that parses back to the same double.
std::string format_double(double x);

// {"n": int, "masses": row-major n*n array, "meta": {"tau": x|null, "theta": x|null}}
nlohmann::json density_to_json(const CheckerboardDensity& c, const DensityMeta& meta = {});
DensityRecord density_from_json(const nlohmann::json& j);

// n lines of n comma-separated values, no header.
std::string density_to_csv(const CheckerboardDensity& c);
CheckerboardDensity density_from_csv(std::string_view text);

nlohmann::json config_to_json(const SolverConfig& cfg);
SolverConfig config_from_json(const nlohmann::json& j);

nlohmann::json report_to_json(const SolverReport& report);
SolverReport report_from_json(const nlohmann::json& j);

std::string samples_to_csv(std::span<const UvPair> pairs);

//! "u,v,value" rows for every node of the grid.
std::string grid_function_to_csv(const GridFunction& g);

std::string read_text_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, std::string_view text);

} // namespace mick
