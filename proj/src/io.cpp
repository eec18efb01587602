#include "stablecoin/io.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <limits>
#include <map>
#include <set>
#include <sstream>

#include "stablecoin/errors.hpp"

namespace stablecoin::io {

namespace {

std::string_view trim(std::string_view s) {
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
    return s;
}

std::string lower(std::string_view s) {
    std::string out(s);
    for (char& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return out;
}

std::vector<std::string> split_csv(std::string_view line) {
    std::vector<std::string> out;
    std::string cell;
    bool quoted = false;
    for (char c : line) {
        if (c == '"') {
            quoted = !quoted;
        } else if (c == ',' && !quoted) {
            out.emplace_back(trim(cell));
            cell.clear();
        } else {
            cell.push_back(c);
        }
    }
    out.emplace_back(trim(cell));
    return out;
}

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ParseError(path.string(), 0, "", "cannot open file");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::optional<double> opt_number(const std::string& cell) {
    if (cell.empty()) return std::nullopt;
    return parse_number(cell);
}

// --- config keys ------------------------------------------------------------

using Setter = std::function<void(ScenarioConfig&, std::string_view)>;

int to_int(std::string_view v) {
    const double d = parse_number(v);
    if (d != std::floor(d) || std::abs(d) > 1e9) throw InvalidArgument("expected an integer");
    return static_cast<int>(d);
}

std::uint64_t to_seed(std::string_view v) {
    std::uint64_t out = 0;
    const auto* end = v.data() + v.size();
    const auto [ptr, ec] = std::from_chars(v.data(), end, out);
    if (ec != std::errc() || ptr != end) throw InvalidArgument("expected a non-negative integer");
    return out;
}

const std::map<std::string, Setter>& config_keys() {
    static const std::map<std::string, Setter> keys = {
        {"spec.design",
         [](ScenarioConfig& c, std::string_view v) {
             const auto d = parse_design(v);
             if (!d) throw InvalidArgument("unknown design '" + std::string(v) + "'");
             c.spec.design = *d;
         }},
        {"spec.total_supply",
         [](ScenarioConfig& c, std::string_view v) { c.spec.total_supply = parse_number(v); }},
        {"spec.fiat_reserve",
         [](ScenarioConfig& c, std::string_view v) { c.spec.fiat_reserve = parse_number(v); }},
        {"spec.collateral",
         [](ScenarioConfig& c, std::string_view v) { c.spec.collateral_id = std::string(v); }},
        {"grid.theta_min",
         [](ScenarioConfig& c, std::string_view v) { c.economy.interval.min = parse_number(v); }},
        {"grid.theta_max",
         [](ScenarioConfig& c, std::string_view v) { c.economy.interval.max = parse_number(v); }},
        {"grid.points", [](ScenarioConfig& c, std::string_view v) { c.grid_points = to_int(v); }},
        {"economy.price.beta",
         [](ScenarioConfig& c, std::string_view v) { c.economy.beta = parse_number(v); }},
        {"economy.no_intervention.e_min",
         [](ScenarioConfig& c, std::string_view v) { c.economy.e_min = parse_number(v); }},
        {"economy.no_intervention.e_max",
         [](ScenarioConfig& c, std::string_view v) { c.economy.e_max = parse_number(v); }},
        {"economy.r_c.family",
         [](ScenarioConfig& c, std::string_view v) {
             const auto f = lower(v);
             if (f == "linear") {
                 c.economy.ratio_family = RatioFamily::Linear;
             } else if (f == "exponential") {
                 c.economy.ratio_family = RatioFamily::Exponential;
             } else {
                 throw InvalidArgument("unknown r_c family '" + std::string(v) + "'");
             }
         }},
        {"economy.r_c.alpha",
         [](ScenarioConfig& c, std::string_view v) { c.economy.alpha = parse_number(v); }},
        {"economy.r_c.k",
         [](ScenarioConfig& c, std::string_view v) { c.economy.k = parse_number(v); }},
        {"economy.reserve.v0",
         [](ScenarioConfig& c, std::string_view v) { c.economy.reserve_v0 = parse_number(v); }},
        {"economy.collateralization.o0",
         [](ScenarioConfig& c, std::string_view v) { c.economy.collateral_o0 = parse_number(v); }},
        {"economy.incentive.rate",
         [](ScenarioConfig& c, std::string_view v) { c.economy.incentive_rate = parse_number(v); }},
        {"economy.liquidation.theta_l",
         [](ScenarioConfig& c, std::string_view v) {
             c.economy.liquidation_theta = parse_number(v);
         }},
        {"economy.liquidation.debtors",
         [](ScenarioConfig& c, std::string_view v) { c.economy.debtors = to_int(v); }},
        {"dynamics.n", [](ScenarioConfig& c, std::string_view v) { c.dynamics.n = to_int(v); }},
        {"dynamics.max_iter",
         [](ScenarioConfig& c, std::string_view v) { c.dynamics.max_iter = to_int(v); }},
        {"dynamics.seed",
         [](ScenarioConfig& c, std::string_view v) { c.dynamics.seed = to_seed(v); }},
        {"analysis.lag", [](ScenarioConfig& c, std::string_view v) { c.analysis.lag = to_int(v); }},
        {"analysis.alpha",
         [](ScenarioConfig& c, std::string_view v) { c.analysis.alpha = parse_number(v); }},
        {"simulate.steps",
         [](ScenarioConfig& c, std::string_view v) { c.simulate.steps = to_int(v); }},
        {"simulate.theta",
         [](ScenarioConfig& c, std::string_view v) { c.simulate.theta = parse_number(v); }},
        {"simulate.shock_step",
         [](ScenarioConfig& c, std::string_view v) { c.simulate.shock_step = to_int(v); }},
        {"simulate.shock_fraction",
         [](ScenarioConfig& c, std::string_view v) { c.simulate.shock_fraction = parse_number(v); }},
        {"simulate.agents",
         [](ScenarioConfig& c, std::string_view v) { c.simulate.agents = to_int(v); }},
    };
    return keys;
}

const std::vector<std::string> kRequiredKeys = {"spec.design", "grid.theta_min", "grid.theta_max"};

std::vector<std::string> semantic_problems(const ScenarioConfig& c) {
    std::vector<std::string> out;
    const auto guard = [&](const std::function<void()>& check) {
        try {
            check();
        } catch (const Error& e) {
            out.push_back(e.code() + ": " + e.what());
        }
    };
    guard([&] { c.spec.validate(); });
    const auto& iv = c.economy.interval;
    if (!(iv.min < iv.max)) out.push_back("grid: theta_min must be < theta_max");
    if (c.grid_points < 2) out.push_back("grid.points: must be >= 2");
    if (!(c.economy.beta > 0.0 && c.economy.beta <= 1.0)) {
        out.push_back("economy.price.beta: must be in (0, 1]");
    }
    if (c.economy.incentive_rate < 0.0) out.push_back("economy.incentive.rate: must be >= 0");
    if (c.economy.debtors < 1) out.push_back("economy.liquidation.debtors: must be >= 1");
    if (c.dynamics.n < 1 || c.dynamics.n > 10000) out.push_back("dynamics.n: must be in [1, 10000]");
    if (c.dynamics.max_iter < 1) out.push_back("dynamics.max_iter: must be >= 1");
    if (c.analysis.lag < 1) out.push_back("analysis.lag: must be >= 1");
    if (!(c.analysis.alpha > 0.0 && c.analysis.alpha < 1.0)) {
        out.push_back("analysis.alpha: must be in (0, 1)");
    }
    if (c.simulate.steps < 1) out.push_back("simulate.steps: must be >= 1");
    if (c.simulate.agents < 1 || c.simulate.agents > 10000) {
        out.push_back("simulate.agents: must be in [1, 10000]");
    }
    if (!(c.simulate.shock_fraction >= 0.0 && c.simulate.shock_fraction <= 1.0)) {
        out.push_back("simulate.shock_fraction: must be in [0, 1]");
    }
    if (c.simulate.theta && iv.min < iv.max && !iv.contains(*c.simulate.theta)) {
        out.push_back("simulate.theta: outside [theta_min, theta_max]");
    }
    if (iv.min < iv.max && c.spec.total_supply > 0.0 && c.economy.debtors >= 1) {
        const auto econ = build_economy_unchecked(c.economy, c.spec.total_supply);
        for (auto& v : collect_economy_violations(econ)) out.push_back(std::move(v));
    }
    return out;
}

std::string opt_cell(const std::optional<double>& x) {
    return x ? format_number(*x) : std::string();
}

nlohmann::json opt_json(const std::optional<double>& x) {
    return x ? nlohmann::json(*x) : nlohmann::json(nullptr);
}

}  // namespace

// ---------------------------------------------------------------------------

EconomyFunctions ScenarioConfig::build_economy() const {
    return stablecoin::build_economy(economy, spec.total_supply);
}

std::vector<double> ScenarioConfig::theta_grid() const {
    return stablecoin::theta_grid(economy.interval, grid_points);
}

ScenarioConfig parse_config(std::string_view text, const std::string& source) {
    ScenarioConfig cfg;
    cfg.source = source;
    std::set<std::string> seen;
    int line_no = 0;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        const std::size_t end = std::min(text.find('\n', pos), text.size());
        std::string_view line = text.substr(pos, end - pos);
        pos = end + 1;
        ++line_no;
        if (const auto hash = line.find('#'); hash != std::string_view::npos) {
            line = line.substr(0, hash);
        }
        line = trim(line);
        if (line.empty()) continue;

        const auto eq = line.find('=');
        if (eq == std::string_view::npos) {
            throw ParseError(source, line_no, "", "expected 'key = value'");
        }
        const std::string key = lower(trim(line.substr(0, eq)));
        const std::string_view value = trim(line.substr(eq + 1));
        const auto it = config_keys().find(key);
        if (it == config_keys().end()) throw ParseError(source, line_no, key, "unknown key");
        if (!seen.insert(key).second) throw ParseError(source, line_no, key, "duplicate key");
        if (value.empty()) throw ParseError(source, line_no, key, "missing value");
        try {
            it->second(cfg, value);
        } catch (const Error& e) {
            throw ParseError(source, line_no, key, e.what());
        }
    }
    for (const auto& key : kRequiredKeys) {
        if (!seen.count(key)) throw ParseError(source, 0, key, "required key is missing");
    }
    // A fully backed coin without an explicit reserve holds its whole supply.
    if (cfg.spec.design == Design::FiatFull && !seen.count("spec.fiat_reserve")) {
        cfg.spec.fiat_reserve = cfg.spec.total_supply;
    }
    if (auto problems = semantic_problems(cfg); !problems.empty()) {
        throw ValidationError(std::move(problems));
    }
    return cfg;
}

ScenarioConfig load_config(const std::filesystem::path& path) {
    return parse_config(read_file(path), path.string());
}

std::filesystem::path resolve_config(const std::string& name,
                                     const std::filesystem::path& config_dir) {
    if (std::filesystem::is_regular_file(name)) return name;
    const auto candidate = config_dir / (name + ".cfg");
    if (std::filesystem::is_regular_file(candidate)) return candidate;
    throw ParseError(name, 0, "", "no such config (also looked for " + candidate.string() + ")");
}

// ---------------------------------------------------------------------------

std::string format_number(double x) {
    if (std::isnan(x)) return "nan";
    if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

double parse_number(std::string_view text) {
    text = trim(text);
    if (text == "inf" || text == "+inf") return std::numeric_limits<double>::infinity();
    if (text == "-inf") return -std::numeric_limits<double>::infinity();
    if (text == "nan") return std::numeric_limits<double>::quiet_NaN();
    if (!text.empty() && text.front() == '+') text.remove_prefix(1);
    double out = 0.0;
    const auto* end = text.data() + text.size();
    const auto [ptr, ec] = std::from_chars(text.data(), end, out);
    if (text.empty() || ec != std::errc() || ptr != end) {
        throw InvalidArgument("not a number: '" + std::string(text) + "'");
    }
    return out;
}

stats::Date parse_date(std::string_view text) {
    text = trim(text);
    int y = 0;
    unsigned m = 0, d = 0;
    char tail = 0;
    const std::string s(text);
    if (s.size() != 10 || std::sscanf(s.c_str(), "%4d-%2u-%2u%c", &y, &m, &d, &tail) != 3) {
        throw InvalidArgument("expected an ISO date YYYY-MM-DD, got '" + s + "'");
    }
    const std::chrono::year_month_day ymd{std::chrono::year{y}, std::chrono::month{m},
                                          std::chrono::day{d}};
    if (!ymd.ok()) throw InvalidArgument("invalid calendar date '" + s + "'");
    return std::chrono::sys_days{ymd};
}

std::string format_date(stats::Date date) {
    const std::chrono::year_month_day ymd{date};
    char buf[16];
    std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", static_cast<int>(ymd.year()),
                  static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()));
    return buf;
}

// ---------------------------------------------------------------------------

std::vector<stats::Observation> load_series(const std::filesystem::path& path,
                                            const std::string& date_column,
                                            const std::string& value_column, bool positive) {
    const std::string file = path.string();
    std::istringstream in(read_file(path));
    std::string line;
    int line_no = 0;
    std::optional<std::size_t> date_idx, value_idx;
    std::map<stats::Date, double> rows;

    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (trim(line).empty()) continue;
        const auto cells = split_csv(line);
        if (!date_idx) {
            for (std::size_t i = 0; i < cells.size(); ++i) {
                if (lower(cells[i]) == lower(date_column)) date_idx = i;
                if (lower(cells[i]) == lower(value_column)) value_idx = i;
            }
            if (!date_idx) throw ParseError(file, line_no, date_column, "column not in header");
            if (!value_idx) throw ParseError(file, line_no, value_column, "column not in header");
            continue;
        }
        if (cells.size() <= std::max(*date_idx, *value_idx)) {
            throw ParseError(file, line_no, "", "row has too few columns");
        }
        stats::Date date;
        double value = 0.0;
        try {
            date = parse_date(cells[*date_idx]);
        } catch (const Error& e) {
            throw ParseError(file, line_no, date_column, e.what());
        }
        try {
            value = parse_number(cells[*value_idx]);
        } catch (const Error& e) {
            throw ParseError(file, line_no, value_column, e.what());
        }
        if (!std::isfinite(value)) throw ParseError(file, line_no, value_column, "not finite");
        if (positive && !(value > 0.0)) {
            throw NonPositivePrice(file + ":" + std::to_string(line_no) + ": " + value_column +
                                   " must be positive, got " + cells[*value_idx]);
        }
        if (!positive && value < 0.0) {
            throw ParseError(file, line_no, value_column, "must be non-negative");
        }
        rows[date] = value;  // a later row for the same day wins
    }
    if (!date_idx) throw ParseError(file, 0, "", "missing header row");

    std::vector<stats::Observation> out;
    out.reserve(rows.size());
    for (const auto& [date, value] : rows) out.push_back({date, value});
    return out;
}

stats::PriceSeries load_price_series(const std::filesystem::path& path, stats::Target target) {
    return {load_series(path, "date", "price", true), target};
}

stats::VSeries load_v_series(const std::filesystem::path& path) {
    return {load_series(path, "date", "v", false)};
}

// ---------------------------------------------------------------------------

void write_zone_csv(std::ostream& out, const ZoneReport& report) {
    out << "theta,zone,theta_bar,theta_under,theta_circ,theta_star\n";
    const std::string tail = opt_cell(report.theta_bar) + "," + opt_cell(report.theta_under) +
                             "," + opt_cell(report.theta_circ) + "," +
                             opt_cell(report.theta_star);
    for (const auto& [theta, zone] : report.grid) {
        out << format_number(theta) << ',' << to_string(zone) << ',' << tail << '\n';
    }
}

ZoneReport read_zone_csv(std::istream& in) {
    ZoneReport report;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line_no == 1 || trim(line).empty()) continue;
        const auto cells = split_csv(line);
        if (cells.size() != 6) throw ParseError("zones.csv", line_no, "", "expected 6 columns");
        const auto zone = parse_zone(cells[1]);
        if (!zone) throw ParseError("zones.csv", line_no, "zone", "unknown zone");
        try {
            report.grid.emplace_back(parse_number(cells[0]), *zone);
            report.theta_bar = opt_number(cells[2]);
            report.theta_under = opt_number(cells[3]);
            report.theta_circ = opt_number(cells[4]);
            report.theta_star = opt_number(cells[5]);
        } catch (const InvalidArgument& e) {
            throw ParseError("zones.csv", line_no, "", e.what());
        }
    }
    return report;
}

nlohmann::json zone_report_json(const ZoneReport& report) {
    nlohmann::json grid = nlohmann::json::array();
    for (const auto& [theta, zone] : report.grid) {
        grid.push_back({{"theta", theta}, {"zone", std::string(to_string(zone))}});
    }
    return {{"design", std::string(to_string(report.design))},
            {"theta_bar", opt_json(report.theta_bar)},
            {"theta_under", opt_json(report.theta_under)},
            {"theta_circ", opt_json(report.theta_circ)},
            {"theta_star", opt_json(report.theta_star)},
            {"monotone", report.is_monotone()},
            {"grid", grid}};
}

nlohmann::json equilibrium_json(const EquilibriumPoint& point) {
    return {{"price", point.price},
            {"market_supply", point.market_supply},
            {"kind", std::string(to_string(point.kind))},
            {"supporting_belief", point.supporting_belief}};
}

nlohmann::json dynamics_json(const DynamicsResult& result) {
    const auto& s = result.final_state;
    nlohmann::json eq = nlohmann::json::array();
    for (const auto& p : result.equilibrium_set) eq.push_back(equilibrium_json(p));
    nlohmann::json out = {
        {"converged", result.converged},
        {"iterations", result.iterations},
        {"final_state",
         {{"market_supply", s.market_supply},
          {"redemption_demand", s.redemption_demand},
          {"price", s.price},
          {"remaining_reserve",
           std::isfinite(s.remaining_reserve) ? nlohmann::json(s.remaining_reserve)
                                              : nlohmann::json(nullptr)},
          {"sellers", s.sellers},
          {"redeemers", s.redeemers},
          {"holders", s.holders}}},
        {"equilibrium_set", eq},
        {"zone_estimate", result.zone_estimate ? nlohmann::json(std::string(to_string(
                                                     *result.zone_estimate)))
                                               : nlohmann::json(nullptr)}};
    return out;
}

void write_path_csv(std::ostream& out, std::span<const PathPoint> path) {
    out << "step,theta,M,Q,price,r_c\n";
    for (const auto& p : path) {
        out << p.step << ',' << format_number(p.theta) << ',' << format_number(p.market_supply)
            << ',' << format_number(p.redemption_demand) << ',' << format_number(p.price) << ','
            << format_number(p.ratio) << '\n';
    }
}

}  // namespace stablecoin::io
