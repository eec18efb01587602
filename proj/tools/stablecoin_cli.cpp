#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "stablecoin/dynamics.hpp"
#include "stablecoin/equilibrium.hpp"
#include "stablecoin/errors.hpp"
#include "stablecoin/io.hpp"
#include "stablecoin/stats.hpp"

namespace fs = std::filesystem;
namespace sc = stablecoin;
using nlohmann::json;

#ifndef STABLECOIN_DEFAULT_CONFIG_DIR
#define STABLECOIN_DEFAULT_CONFIG_DIR "configs"
#endif

namespace {

struct Options {
    std::string config;
    std::vector<std::string> configs;
    std::optional<double> theta;
    std::optional<int> grid;
    std::optional<int> n;
    std::optional<std::uint64_t> seed;
    std::optional<int> lag;
    std::optional<double> alpha;
    std::optional<int> steps;
    std::optional<int> shock_step;
    std::optional<double> shock_fraction;
    std::string out_dir = ".";
    std::string prices;
    std::string v;
    bool check = false;
};

fs::path config_dir() {
    if (const char* env = std::getenv("STABLECOIN_CONFIG_DIR")) return env;
    if (fs::is_directory("configs")) return "configs";
    return STABLECOIN_DEFAULT_CONFIG_DIR;
}

sc::io::ScenarioConfig load(const std::string& name, const Options& opt) {
    auto cfg = sc::io::load_config(sc::io::resolve_config(name, config_dir()));
    if (opt.grid) cfg.grid_points = *opt.grid;
    if (opt.n) cfg.dynamics.n = *opt.n;
    if (opt.seed) cfg.dynamics.seed = *opt.seed;
    if (opt.lag) cfg.analysis.lag = *opt.lag;
    if (opt.alpha) cfg.analysis.alpha = *opt.alpha;
    if (opt.steps) cfg.simulate.steps = *opt.steps;
    if (opt.shock_step) cfg.simulate.shock_step = *opt.shock_step;
    if (opt.shock_fraction) cfg.simulate.shock_fraction = *opt.shock_fraction;
    return cfg;
}

std::ofstream open_out(const Options& opt, const std::string& file) {
    fs::create_directories(opt.out_dir);
    const fs::path path = fs::path(opt.out_dir) / file;
    std::ofstream out(path, std::ios::binary);
    if (!out) throw sc::InvalidArgument("cannot write " + path.string());
    out.precision(17);
    return out;
}

void write_json(const Options& opt, const std::string& file, const json& doc) {
    auto out = open_out(opt, file);
    out << doc.dump(2) << '\n';
}

std::string config_stem(const std::string& name) { return fs::path(name).stem().string(); }

// --- classify ---------------------------------------------------------------

int cmd_classify(const Options& opt) {
    const auto cfg = load(opt.config, opt);
    const auto econ = cfg.build_economy();
    const auto grid = cfg.theta_grid();
    const auto report = sc::zone_diagram(cfg.spec, econ, grid);
    {
        auto out = open_out(opt, "zones.csv");
        sc::io::write_zone_csv(out, report);
    }
    write_json(opt, "zones.json", sc::io::zone_report_json(report));
    if (opt.theta) {
        const sc::FundamentalState state(*opt.theta, econ.interval);
        std::cout << sc::to_string(sc::classify(cfg.spec, econ, state)) << '\n';
    } else {
        std::map<sc::Zone, int> counts;
        for (const auto& [theta, zone] : report.grid) ++counts[zone];
        for (const auto& [zone, k] : counts) std::cout << sc::to_string(zone) << ' ' << k << '\n';
    }
    return 0;
}

// --- sweep --------------------------------------------------------------------

int cmd_sweep(const Options& opt) {
    std::vector<std::string> names = opt.configs;
    if (names.empty()) {
        for (const auto& entry : fs::directory_iterator(config_dir())) {
            if (entry.path().extension() == ".cfg") names.push_back(entry.path().string());
        }
        std::sort(names.begin(), names.end());
    }
    auto summary = open_out(opt, "sweep.csv");
    summary << "config,design,theta_bar,theta_under,theta_circ,theta_star,UniquePeg,"
               "SelfFulfilling,DepegOnly\n";
    json all = json::array();
    for (const auto& name : names) {
        const auto cfg = load(name, opt);
        const auto econ = cfg.build_economy();
        const auto report = sc::zone_diagram(cfg.spec, econ, cfg.theta_grid());
        const std::string stem = config_stem(name);
        {
            auto out = open_out(opt, "zones_" + stem + ".csv");
            sc::io::write_zone_csv(out, report);
        }
        std::map<sc::Zone, int> counts;
        for (const auto& [theta, zone] : report.grid) ++counts[zone];
        const auto cell = [](const std::optional<double>& x) {
            return x ? sc::io::format_number(*x) : std::string();
        };
        summary << stem << ',' << sc::to_string(report.design) << ',' << cell(report.theta_bar)
                << ',' << cell(report.theta_under) << ',' << cell(report.theta_circ) << ','
                << cell(report.theta_star) << ',' << counts[sc::Zone::UniquePeg] << ','
                << counts[sc::Zone::SelfFulfilling] << ',' << counts[sc::Zone::DepegOnly] << '\n';
        auto doc = sc::io::zone_report_json(report);
        doc["config"] = stem;
        all.push_back(doc);
        std::cout << stem << ' ' << sc::to_string(report.design) << '\n';
    }
    write_json(opt, "sweep.json", all);
    return 0;
}

// --- dynamics -----------------------------------------------------------------

int cmd_dynamics(const Options& opt) {
    const auto cfg = load(opt.config, opt);
    const auto econ = cfg.build_economy();
    const sc::DynamicsOptions dyn{cfg.dynamics.max_iter, cfg.dynamics.seed};
    const sc::Thresholds thresholds = sc::compute_thresholds(cfg.spec, econ);

    std::vector<double> thetas;
    if (opt.theta) {
        thetas.push_back(*opt.theta);
    } else {
        thetas = cfg.theta_grid();
    }
    const int n = cfg.dynamics.n;
    const bool exhaustive = n <= 24;

    int agree = 0;
    json points = json::array();
    for (double theta : thetas) {
        const sc::FundamentalState state(theta, econ.interval);
        const sc::Zone analytic = sc::classify(cfg.spec, thresholds, theta);
        sc::DynamicsResult result;
        if (exhaustive) {
            result = sc::estimate_zone(cfg.spec, econ, state, n, dyn);
        } else {
            result = sc::run_dynamics(
                cfg.spec, econ, state,
                sc::AgentPopulation::uniform(cfg.spec, econ, state, n, sc::Action::Hold),
                std::nullopt, dyn);
        }
        json entry = sc::io::dynamics_json(result);
        entry["theta"] = theta;
        entry["classify"] = std::string(sc::to_string(analytic));
        if (result.zone_estimate) {
            const bool same = *result.zone_estimate == analytic;
            agree += same ? 1 : 0;
            entry["agree"] = same;
        }
        points.push_back(entry);
    }
    json doc = {{"design", std::string(sc::to_string(cfg.spec.design))},
                {"agents", n},
                {"seed", cfg.dynamics.seed ? json(*cfg.dynamics.seed) : json(nullptr)},
                {"points", points}};
    if (exhaustive) doc["agreement"] = {{"matched", agree}, {"total", thetas.size()}};
    write_json(opt, "dynamics.json", doc);

    if (exhaustive) {
        std::cout << "agreement " << agree << '/' << thetas.size() << '\n';
        if (opt.check && agree != static_cast<int>(thetas.size())) return 1;
    } else if (opt.check) {
        throw sc::InvalidArgument("--check needs N <= 24 for exhaustive enumeration");
    }
    return 0;
}

// --- simulate -----------------------------------------------------------------

int cmd_simulate(const Options& opt) {
    const auto cfg = load(opt.config, opt);
    const auto econ = cfg.build_economy();
    double theta = 0.0;
    if (opt.theta) {
        theta = *opt.theta;
    } else if (cfg.simulate.theta) {
        theta = *cfg.simulate.theta;
    } else {
        theta = sc::solve_theta_under(cfg.spec, econ) + 0.05;
    }
    const std::vector<double> thetas(static_cast<std::size_t>(cfg.simulate.steps), theta);
    const sc::SimulationOptions sim{opt.n.value_or(cfg.simulate.agents), cfg.dynamics.max_iter,
                                    cfg.dynamics.seed};
    const auto path = sc::simulate_run(cfg.spec, econ, thetas,
                                       {cfg.simulate.shock_step, cfg.simulate.shock_fraction}, sim);
    auto out = open_out(opt, "path.csv");
    sc::io::write_path_csv(out, path);
    double worst = 1.0;
    for (const auto& p : path) worst = std::min(worst, p.price);
    std::cout << "steps " << path.size() << " final_price "
              << sc::io::format_number(path.empty() ? 1.0 : path.back().price) << " min_price "
              << sc::io::format_number(worst) << '\n';
    return 0;
}

// --- analyze ------------------------------------------------------------------

struct Coin {
    std::string type;
    sc::stats::Target target = sc::stats::Target::point();
    std::optional<fs::path> price_file;
    std::optional<fs::path> v_file;
};

std::string strip_suffix(std::string stem, const std::string& suffix) {
    if (stem.size() > suffix.size() &&
        stem.compare(stem.size() - suffix.size(), suffix.size(), suffix) == 0) {
        stem.resize(stem.size() - suffix.size());
    }
    return stem;
}

std::string header_of(const fs::path& file) {
    std::ifstream in(file);
    std::string line;
    std::getline(in, line);
    std::string out;
    for (char c : line) {
        if (c == ' ' || c == '"' || c == '\r') continue;
        out.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
    }
    return "," + out + ",";
}

std::vector<fs::path> csv_files(const std::string& dir) {
    std::vector<fs::path> out;
    if (!fs::is_directory(dir)) throw sc::InvalidArgument("not a directory: " + dir);
    for (const auto& e : fs::directory_iterator(dir)) {
        if (e.is_regular_file() && e.path().extension() == ".csv" &&
            e.path().filename() != "coins.csv") {
            out.push_back(e.path());
        }
    }
    std::sort(out.begin(), out.end());
    return out;
}

void read_manifest(const fs::path& file, std::map<std::string, Coin>& coins) {
    std::ifstream in(file);
    std::string line;
    std::getline(in, line);
    int line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        std::vector<std::string> cells;
        std::stringstream ss(line);
        for (std::string cell; std::getline(ss, cell, ',');) cells.push_back(cell);
        while (cells.size() < 4) cells.emplace_back();
        Coin& coin = coins[cells[0]];
        coin.type = cells[1];
        if (!cells[2].empty() && !cells[3].empty()) {
            try {
                coin.target = sc::stats::Target::band(sc::io::parse_number(cells[2]),
                                                      sc::io::parse_number(cells[3]));
            } catch (const sc::InvalidArgument& e) {
                throw sc::ParseError(file.string(), line_no, "band", e.what());
            }
        }
    }
}

int cmd_analyze(const Options& opt) {
    int lag = 1;
    double alpha = 0.1;
    if (!opt.config.empty()) {
        const auto cfg = load(opt.config, opt);
        lag = cfg.analysis.lag;
        alpha = cfg.analysis.alpha;
    }
    if (opt.lag) lag = *opt.lag;
    if (opt.alpha) alpha = *opt.alpha;
    if (lag < 1) throw sc::InvalidArgument("--lag must be >= 1");

    const std::string v_dir = opt.v.empty() ? opt.prices : opt.v;
    std::map<std::string, Coin> coins;
    for (const std::string& dir : {opt.prices, v_dir}) {
        if (fs::is_regular_file(fs::path(dir) / "coins.csv")) {
            read_manifest(fs::path(dir) / "coins.csv", coins);
        }
    }
    for (const auto& file : csv_files(opt.prices)) {
        if (header_of(file).find(",price,") != std::string::npos) {
            coins[strip_suffix(file.stem().string(), "_price")].price_file = file;
        }
    }
    for (const auto& file : csv_files(v_dir)) {
        if (header_of(file).find(",v,") != std::string::npos) {
            coins[strip_suffix(file.stem().string(), "_v")].v_file = file;
        }
    }

    // Deviation table and pairwise tests.
    std::vector<std::string> names;
    std::vector<sc::stats::PriceSeries> series;
    std::vector<double> dev, down;
    for (const auto& [name, coin] : coins) {
        if (!coin.price_file) continue;
        auto s = sc::io::load_price_series(*coin.price_file, coin.target);
        dev.push_back(sc::stats::price_deviation(s));
        down.push_back(sc::stats::downward_deviation(s));
        names.push_back(name);
        series.push_back(std::move(s));
    }
    if (names.empty()) throw sc::EmptySeries("no price files found in " + opt.prices);
    const auto rank = sc::stats::rank_ascending(dev);
    const auto down_rank = sc::stats::rank_ascending(down);
    {
        auto out = open_out(opt, "analysis_dev.csv");
        out << "name,deviation,downward_deviation,rank,downward_rank\n";
        for (std::size_t i = 0; i < names.size(); ++i) {
            out << names[i] << ',' << sc::io::format_number(dev[i]) << ','
                << sc::io::format_number(down[i]) << ',' << rank[i] << ',' << down_rank[i] << '\n';
        }
    }
    {
        auto out = open_out(opt, "analysis_ttest.csv");
        out << "metric,a,b,t,p,significant\n";
        for (const bool downward : {false, true}) {
            std::vector<std::pair<std::string, std::vector<double>>> samples;
            for (std::size_t i = 0; i < names.size(); ++i) {
                samples.emplace_back(names[i], downward
                                                   ? sc::stats::downward_squared_deviations(series[i])
                                                   : sc::stats::squared_deviations(series[i]));
            }
            for (std::size_t i = 0; i < samples.size(); ++i) {
                for (std::size_t j = i + 1; j < samples.size(); ++j) {
                    out << (downward ? "downward_deviation" : "deviation") << ','
                        << samples[i].first << ',' << samples[j].first << ',';
                    try {
                        const auto t = sc::stats::ttest_two_sample(samples[i].second,
                                                                   samples[j].second);
                        out << sc::io::format_number(t.t) << ',' << sc::io::format_number(t.p)
                            << ',' << (t.p <= alpha ? 1 : 0) << '\n';
                    } catch (const sc::DegenerateVariance&) {
                        out << "nan,nan,0\n";
                    }
                }
            }
        }
    }

    // Correlation and causality per coin with a v series; aggregate figure data.
    auto corr = open_out(opt, "analysis_corr.csv");
    corr << "name,rho,rho_p,F,F_p,lag,n_used\n";
    auto fig = open_out(opt, "analysis_fig5.csv");
    fig << "name,downward_v_deviation,downward_price_deviation\n";
    std::vector<double> fig_v, fig_p;
    json skipped = json::array();
    for (std::size_t i = 0; i < names.size(); ++i) {
        const Coin& coin = coins[names[i]];
        std::optional<double> v_down;
        if (coin.v_file) {
            const auto v = sc::io::load_v_series(*coin.v_file);
            sc::stats::PriceSeries as_price{v.observations, sc::stats::Target::point()};
            v_down = as_price.observations.empty() ? 0.0 : sc::stats::downward_deviation(as_price);
            try {
                const auto r = sc::stats::analyze_pair(series[i], v, lag);
                corr << names[i] << ',' << sc::io::format_number(r.pearson_rho) << ','
                     << sc::io::format_number(r.pearson_p) << ','
                     << sc::io::format_number(r.granger_F) << ','
                     << sc::io::format_number(r.granger_p) << ',' << r.lag << ',' << r.n_used
                     << '\n';
            } catch (const sc::Error& e) {
                skipped.push_back({{"name", names[i]}, {"error", e.code()}, {"message", e.what()}});
            }
        } else if (coin.type == "fiat" || coin.type == "Fiat") {
            v_down = 0.0;
        }
        if (v_down) {
            fig << names[i] << ',' << sc::io::format_number(*v_down) << ','
                << sc::io::format_number(down[i]) << '\n';
            fig_v.push_back(*v_down);
            fig_p.push_back(down[i]);
        }
    }

    json summary = {{"coins", names.size()}, {"lag", lag}, {"alpha", alpha}, {"skipped", skipped}};
    try {
        const auto agg = sc::stats::pearson(fig_v, fig_p);
        summary["downward_correlation"] = {{"rho", agg.rho}, {"p", agg.p}, {"n", agg.n}};
    } catch (const sc::Error& e) {
        summary["downward_correlation"] = {{"error", e.code()}, {"message", e.what()}};
    }
    write_json(opt, "analysis_summary.json", summary);
    std::cout << summary.dump() << '\n';
    return 0;
}

void emit_error(const std::string& code, const std::string& message, json extra = json::object()) {
    json doc = {{"error", code}, {"message", message}};
    doc.update(extra);
    std::cerr << doc.dump() << '\n';
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Stablecoin peg laboratory"};
    app.require_subcommand(1);
    Options opt;

    const auto add_common = [&](CLI::App* cmd) {
        cmd->add_option("--out-dir", opt.out_dir, "Directory for output files")
            ->capture_default_str();
    };

    auto* classify = app.add_subcommand("classify", "Zone diagram and single-theta classification");
    classify->add_option("--config", opt.config, "Config path or name under configs/")->required();
    classify->add_option("--theta", opt.theta, "Classify one fundamental state");
    classify->add_option("--grid", opt.grid, "Grid points");
    add_common(classify);

    auto* sweep = app.add_subcommand("sweep", "Zone diagrams for several configs");
    sweep->add_option("--config", opt.configs, "Configs (default: every configs/*.cfg)");
    sweep->add_option("--grid", opt.grid, "Grid points");
    add_common(sweep);

    auto* dynamics = app.add_subcommand("dynamics", "Agent oracle against the classifier");
    dynamics->add_option("--config", opt.config, "Config path or name")->required();
    dynamics->add_option("--theta", opt.theta, "Run at one theta only");
    dynamics->add_option("--grid", opt.grid, "Grid points");
    dynamics->add_option("--n", opt.n, "Number of agents");
    dynamics->add_option("--seed", opt.seed, "Shuffle update order with this seed");
    dynamics->add_flag("--check", opt.check, "Exit 1 unless oracle and classifier agree");
    add_common(dynamics);

    auto* simulate = app.add_subcommand("simulate", "Price path after a redemption shock");
    simulate->add_option("--config", opt.config, "Config path or name")->required();
    simulate->add_option("--theta", opt.theta, "Constant theta for the run");
    simulate->add_option("--n", opt.n, "Number of agents");
    simulate->add_option("--seed", opt.seed, "Shuffle update order with this seed");
    simulate->add_option("--steps", opt.steps, "Number of steps");
    simulate->add_option("--shock-step", opt.shock_step, "Step of the forced redemption");
    simulate->add_option("--shock-fraction", opt.shock_fraction, "Share of supply redeemed");
    add_common(simulate);

    auto* analyze = app.add_subcommand("analyze", "Deviation, correlation and causality tables");
    analyze->add_option("--prices", opt.prices, "Directory of date,price CSV files")->required();
    analyze->add_option("--v", opt.v, "Directory of date,v CSV files (default: --prices)");
    analyze->add_option("--config", opt.config, "Config supplying analysis.* defaults");
    analyze->add_option("--lag", opt.lag, "Granger lag");
    analyze->add_option("--alpha", opt.alpha, "Significance level for pairwise tests");
    add_common(analyze);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        emit_error("UsageError", e.what());
        return 2;
    }

    try {
        if (*classify) return cmd_classify(opt);
        if (*sweep) return cmd_sweep(opt);
        if (*dynamics) return cmd_dynamics(opt);
        if (*simulate) return cmd_simulate(opt);
        if (*analyze) return cmd_analyze(opt);
    } catch (const sc::ValidationError& e) {
        emit_error(e.code(), e.what(), {{"problems", e.problems()}});
        return 2;
    } catch (const sc::ParseError& e) {
        emit_error(e.code(), e.what(),
                   {{"file", e.file()}, {"line", e.line()}, {"field", e.field()}});
        return 2;
    } catch (const sc::NoRoot& e) {
        emit_error(e.code(), e.what(),
                   {{"side", e.side() == sc::NoRoot::Side::Low ? "low" : "high"}});
        return 2;
    } catch (const sc::Error& e) {
        emit_error(e.code(), e.what());
        return 2;
    } catch (const std::exception& e) {
        emit_error("InternalError", e.what());
        return 3;
    }
    return 0;
}
