#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "stablecoin/dynamics.hpp"
#include "stablecoin/economy.hpp"
#include "stablecoin/equilibrium.hpp"
#include "stablecoin/stats.hpp"
#include "stablecoin/types.hpp"

namespace stablecoin::io {

struct DynamicsSettings {
    int n = 20;
    int max_iter = 1000;
    std::optional<std::uint64_t> seed;
};

struct AnalysisSettings {
    int lag = 1;
    double alpha = 0.1;
};

struct SimulateSettings {
    int steps = 100;
    std::optional<double> theta;  // defaults to theta_under + 0.05
    int shock_step = 10;
    double shock_fraction = 0.3;
    int agents = 100;
};

/// Everything one scenario file describes.
struct ScenarioConfig {
    std::string source;
    StablecoinSpec spec;
    EconomyParams economy;
    int grid_points = 101;
    DynamicsSettings dynamics;
    AnalysisSettings analysis;
    SimulateSettings simulate;

    EconomyFunctions build_economy() const;
    std::vector<double> theta_grid() const;
};

/// Parses `key = value` lines (`#` starts a comment). Throws ParseError for
/// syntax problems and missing required keys, ValidationError listing every
/// semantic problem otherwise.
ScenarioConfig parse_config(std::string_view text, const std::string& source);
ScenarioConfig load_config(const std::filesystem::path& path);

/// `name` as a path if it exists, else `<config_dir>/<name>.cfg`.
std::filesystem::path resolve_config(const std::string& name,
                                     const std::filesystem::path& config_dir);

// --- primitives ---------------------------------------------------------------

/// 17 significant digits; "inf", "-inf" and "nan" for non-finite values.
std::string format_number(double x);
/// Throws InvalidArgument on anything but a complete number.
double parse_number(std::string_view text);

stats::Date parse_date(std::string_view text);
std::string format_date(stats::Date date);

// --- series -------------------------------------------------------------------

/// Reads a headered CSV. Rows are sorted by date and a repeated date keeps
/// its last row. With `positive`, a value <= 0 raises NonPositivePrice.
std::vector<stats::Observation> load_series(const std::filesystem::path& path,
                                            const std::string& date_column,
                                            const std::string& value_column, bool positive);

stats::PriceSeries load_price_series(const std::filesystem::path& path,
                                     stats::Target target = stats::Target::point());
stats::VSeries load_v_series(const std::filesystem::path& path);

// --- reports --------------------------------------------------------------------

void write_zone_csv(std::ostream& out, const ZoneReport& report);
/// Inverse of write_zone_csv; the design is not stored and stays FiatFull.
ZoneReport read_zone_csv(std::istream& in);
nlohmann::json zone_report_json(const ZoneReport& report);

nlohmann::json equilibrium_json(const EquilibriumPoint& point);
nlohmann::json dynamics_json(const DynamicsResult& result);

void write_path_csv(std::ostream& out, std::span<const PathPoint> path);

}  // namespace stablecoin::io
