#include "tzopt/cli.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <ostream>
#include <sstream>
#include <vector>

#include <CLI11.hpp>

#include "tzopt/montecarlo.hpp"
#include "tzopt/oracle.hpp"
#include "tzopt/quadrature.hpp"
#include "tzopt/signals.hpp"

namespace tzopt::cli {

namespace {

constexpr double kDefaultLambda = 0.1;
constexpr double kDefaultSigma = 0.5;
constexpr double kDefaultM0 = 1.0;
constexpr double kDefaultHorizon = 1.0;
constexpr double kDefaultX0 = 1.0;
constexpr std::uint64_t kDefaultSteps = 4096;
constexpr std::uint64_t kDefaultPaths = 100000;
constexpr std::uint64_t kDefaultSeed = 1;

// Pass thresholds of the verify command.
constexpr double kMaxTrajectoryError = 1e-3;
constexpr double kMaxInitialRateError = 1e-4;
constexpr double kMinConvergenceOrder = 0.9;
constexpr double kMaxTerminalResidual = 1e-3;

std::string_view trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string_view::npos) {
        return {};
    }
    const auto last = s.find_last_not_of(" \t\r");
    return s.substr(first, last - first + 1);
}

double parse_decimal(const std::string& key, std::string_view text) {
    double value = 0.0;
    const char* end = text.data() + text.size();
    const auto [ptr, ec] = std::from_chars(text.data(), end, value);
    if (ec != std::errc{} || ptr != end || !std::isfinite(value)) {
        throw ConfigError(key, "config key '" + key + "': expected a finite decimal, got '" +
                                   std::string(text) + "'");
    }
    return value;
}

std::uint64_t parse_count(const std::string& key, std::string_view text) {
    std::uint64_t value = 0;
    const char* end = text.data() + text.size();
    const auto [ptr, ec] = std::from_chars(text.data(), end, value);
    if (ec != std::errc{} || ptr != end) {
        throw ConfigError(key, "config key '" + key + "': expected a nonnegative integer, got '" +
                                   std::string(text) + "'");
    }
    return value;
}

using Setter = std::function<void(RunConfig&, const std::string&, std::string_view)>;

Setter decimal(std::optional<double> RunConfig::*field) {
    return [field](RunConfig& c, const std::string& key, std::string_view v) {
        c.*field = parse_decimal(key, v);
    };
}

Setter count(std::optional<std::uint64_t> RunConfig::*field) {
    return [field](RunConfig& c, const std::string& key, std::string_view v) {
        c.*field = parse_count(key, v);
    };
}

Setter text(std::optional<std::string> RunConfig::*field) {
    return [field](RunConfig& c, const std::string&, std::string_view v) { c.*field = std::string(v); };
}

const std::map<std::string, Setter, std::less<>>& setters() {
    static const std::map<std::string, Setter, std::less<>> table = {
        {"model", text(&RunConfig::model)},
        {"m0", decimal(&RunConfig::m0)},
        {"sigma", decimal(&RunConfig::sigma)},
        {"p_bar", decimal(&RunConfig::p_bar)},
        {"lambda", decimal(&RunConfig::lambda)},
        {"gamma", decimal(&RunConfig::gamma)},
        {"big_gamma", decimal(&RunConfig::big_gamma)},
        {"T", decimal(&RunConfig::horizon)},
        {"x0", decimal(&RunConfig::x0)},
        {"drift", decimal(&RunConfig::drift)},
        {"n_steps", count(&RunConfig::n_steps)},
        {"n_paths", count(&RunConfig::n_paths)},
        {"seed", count(&RunConfig::seed)},
        {"workers", count(&RunConfig::workers)},
        {"tau_min", decimal(&RunConfig::tau_min)},
        {"tau_max", decimal(&RunConfig::tau_max)},
        {"tau_count", count(&RunConfig::tau_count)},
        {"money_min", decimal(&RunConfig::money_min)},
        {"money_max", decimal(&RunConfig::money_max)},
        {"money_count", count(&RunConfig::money_count)},
        {"bs_m", decimal(&RunConfig::bs_m)},
        {"output", text(&RunConfig::output)},
    };
    return table;
}

template <class T>
T require(const std::optional<T>& field, const char* key) {
    if (!field) {
        throw ConfigError(key, std::string("missing required config key '") + key + "'");
    }
    return *field;
}

std::string model_name(const RunConfig& config) {
    return config.model.value_or("bachelier-capped");
}

/// Rethrows library validation errors as ConfigError naming `key`.
template <class F>
auto checked(const char* key, F&& f) {
    try {
        return f();
    } catch (const std::invalid_argument& e) {
        throw ConfigError(key, std::string("config key '") + key + "': " + e.what());
    }
}

std::vector<double> linspace(const char* key, double lo, double hi, std::uint64_t n) {
    if (n == 0) {
        throw ConfigError(key, std::string("config key '") + key + "' must be >= 1");
    }
    if (n > 1 && !(hi > lo)) {
        throw ConfigError(key, std::string("config key '") + key + "': grid maximum must exceed its minimum");
    }
    std::vector<double> out(n);
    for (std::uint64_t i = 0; i < n; ++i) {
        out[i] = n == 1 ? lo : lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(n - 1);
    }
    if (n > 1) {
        out.back() = hi;
    }
    return out;
}

unsigned workers_from(const RunConfig& config) {
    return static_cast<unsigned>(config.workers.value_or(0));
}

std::size_t steps_from(const RunConfig& config) {
    const auto n = config.n_steps.value_or(kDefaultSteps);
    if (n < 1) {
        throw ConfigError("n_steps", "config key 'n_steps' must be >= 1");
    }
    return static_cast<std::size_t>(n);
}

MonteCarloSetup setup_from(const RunConfig& config) {
    MonteCarloSetup setup;
    setup.model = model_from(config);
    setup.costs = costs_from(config);
    setup.n_steps = steps_from(config);
    setup.n_paths = static_cast<std::size_t>(config.n_paths.value_or(kDefaultPaths));
    if (setup.n_paths < 2) {
        throw ConfigError("n_paths", "config key 'n_paths' must be >= 2");
    }
    setup.seed = config.seed.value_or(kDefaultSeed);
    setup.workers = workers_from(config);
    return setup;
}

void write_row(std::ostream& out, std::initializer_list<std::string> cells) {
    bool first = true;
    for (const auto& cell : cells) {
        if (!first) {
            out << ',';
        }
        out << cell;
        first = false;
    }
    out << '\n';
}

} // namespace

RunConfig parse_config(std::string_view text) {
    RunConfig config;
    std::vector<std::string> seen;
    std::size_t line_no = 0;
    while (!text.empty()) {
        const auto eol = text.find('\n');
        std::string_view line = text.substr(0, eol);
        text = eol == std::string_view::npos ? std::string_view{} : text.substr(eol + 1);
        ++line_no;
        if (const auto hash = line.find('#'); hash != std::string_view::npos) {
            line = line.substr(0, hash);
        }
        line = trim(line);
        if (line.empty()) {
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string_view::npos) {
            throw ConfigError("", "config line " + std::to_string(line_no) + ": expected key=value");
        }
        const std::string key(trim(line.substr(0, eq)));
        const auto value = trim(line.substr(eq + 1));
        const auto it = setters().find(key);
        if (it == setters().end()) {
            throw ConfigError(key, "unknown config key '" + key + "'");
        }
        if (std::find(seen.begin(), seen.end(), key) != seen.end()) {
            throw ConfigError(key, "config key '" + key + "' given twice");
        }
        if (value.empty()) {
            throw ConfigError(key, "config key '" + key + "' has no value");
        }
        it->second(config, key, value);
        seen.push_back(key);
    }
    return config;
}

RunConfig load_config(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw ConfigError("config", "cannot read config file '" + path + "'");
    }
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return parse_config(buffer.str());
}

CostParams costs_from(const RunConfig& config) {
    CostParams costs;
    costs.lambda = config.lambda.value_or(kDefaultLambda);
    costs.gamma = require(config.gamma, "gamma");
    costs.big_gamma = require(config.big_gamma, "big_gamma");
    costs.horizon = config.horizon.value_or(kDefaultHorizon);
    costs.x0 = config.x0.value_or(kDefaultX0);
    const std::pair<const char*, double> positive[] = {
        {"lambda", costs.lambda}, {"gamma", costs.gamma}, {"big_gamma", costs.big_gamma}, {"T", costs.horizon}};
    for (const auto& [key, value] : positive) {
        if (!(value > 0.0)) {
            throw ConfigError(key, std::string("config key '") + key + "' must be > 0");
        }
    }
    return costs;
}

MarketModel model_from(const RunConfig& config) {
    const auto name = model_name(config);
    const double m0 = config.m0.value_or(kDefaultM0);
    const double sigma = config.sigma.value_or(kDefaultSigma);
    const double p_bar = config.p_bar.value_or(m0);
    const double horizon = config.horizon.value_or(kDefaultHorizon);

    MarketModel model;
    if (name == "bachelier-capped") {
        model = CappedBachelier{m0, sigma, p_bar};
    } else if (name == "bs-capped") {
        model = CappedBlackScholes{m0, sigma, p_bar};
    } else if (name == "martingale") {
        model = Martingale{m0, sigma};
    } else if (name == "drift") {
        const double rate = config.drift.value_or(0.0);
        model = DeterministicDrift{SampledCurve{{0.0, horizon}, {rate, rate}}, m0};
    } else {
        throw ConfigError("model", "config key 'model': unknown model '" + name +
                                       "' (expected bachelier-capped, bs-capped, martingale or drift)");
    }
    if (config.drift && name != "drift") {
        throw ConfigError("drift", "config key 'drift' applies only to model = drift");
    }
    checked("sigma", [&] {
        validate(model);
        return 0;
    });
    return model;
}

std::string format_number(double value) {
    std::array<char, 64> buf{};
    const auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), value,
                                         std::chars_format::general, 17);
    return std::string(buf.data(), ec == std::errc{} ? ptr : buf.data());
}

int cmd_surface(const RunConfig& config, std::ostream& out) {
    const auto model = model_from(config);
    if (!is_capped(model)) {
        throw ConfigError("model", "surface needs a capped model (bachelier-capped or bs-capped)");
    }
    const auto costs = costs_from(config);
    std::optional<double> bs_m;
    if (std::holds_alternative<CappedBlackScholes>(model)) {
        bs_m = require(config.bs_m, "bs_m");
    } else if (config.bs_m) {
        throw ConfigError("bs_m", "config key 'bs_m' applies only to model = bs-capped");
    }
    const double tau_min = config.tau_min.value_or(costs.horizon / 50.0);
    const double tau_max = config.tau_max.value_or(costs.horizon);
    if (!(tau_min > 0.0)) {
        throw ConfigError("tau_min", "config key 'tau_min' must be > 0");
    }
    if (tau_max > costs.horizon) {
        throw ConfigError("tau_max", "config key 'tau_max' must not exceed T");
    }
    const auto tau = linspace("tau_count", tau_min, tau_max, config.tau_count.value_or(50));
    const double money_min = config.money_min.value_or(0.0);
    if (money_min < 0.0) {
        throw ConfigError("money_min", "config key 'money_min' must be >= 0");
    }
    const auto money =
        linspace("money_count", money_min, config.money_max.value_or(1.0), config.money_count.value_or(51));

    const GKernel kernel(costs);
    const auto surface = checked("bs_m", [&] {
        return rate_surface(kernel, costs, model, tau, money, costs.x0, bs_m, workers_from(config));
    });
    out << "tau,moneyness,rate,rate_ac,rate_extra,relative_increase\n";
    for (std::size_t i = 0; i < tau.size(); ++i) {
        for (std::size_t j = 0; j < money.size(); ++j) {
            const auto k = surface.index(i, j);
            write_row(out, {format_number(tau[i]), format_number(money[j]), format_number(surface.rate[k]),
                            format_number(surface.rate_ac[k]), format_number(surface.rate_extra[k]),
                            format_number(surface.relative_increase[k])});
        }
    }
    return kExitOk;
}

int cmd_simulate(const RunConfig& config, std::ostream& out) {
    const auto setup = setup_from(config);
    const GKernel kernel(setup.costs);
    SignalFn signal;
    if (!std::holds_alternative<Martingale>(setup.model)) {
        signal = tabulated_signal(kernel, setup.costs, setup.model, setup.workers);
    }
    const Policy policies[] = {optimal_policy(kernel, setup.n_steps),
                               almgren_chriss_policy(kernel, setup.n_steps)};
    const auto totals = simulate_totals(setup, policies, signal);
    const char* names[] = {"optimal", "almgren-chriss"};
    out << "policy,mean,std_error,n_paths,seed\n";
    for (std::size_t k = 0; k < 2; ++k) {
        const auto est = summarize(totals[k], setup.seed);
        write_row(out, {names[k], format_number(est.mean), format_number(est.std_error),
                        std::to_string(est.n_paths), std::to_string(est.seed)});
    }
    return kExitOk;
}

int cmd_verify(const RunConfig& config, std::ostream& out) {
    const auto model = model_from(config);
    const auto costs = costs_from(config);
    SampledCurve drift_rate{{0.0, costs.horizon}, {0.0, 0.0}};
    if (const auto* d = std::get_if<DeterministicDrift>(&model)) {
        drift_rate = d->drift;
    } else if (!std::holds_alternative<Martingale>(model)) {
        throw ConfigError("model", "verify needs model = drift or model = martingale");
    }
    const auto finest = steps_from(config);
    if (finest < 200) {
        throw ConfigError("n_steps", "verify needs n_steps >= 200 (it also runs n_steps/10 and n_steps/100)");
    }
    const std::size_t resolutions[] = {finest / 100, finest / 10, finest};
    const auto report = compare_with_closed_form(costs, drift_rate, resolutions);
    const auto& last = report.checks.back();
    const double residual_scale = std::max(1.0, costs.big_gamma / costs.lambda * std::abs(costs.x0));
    const double residual = std::abs(report.extrapolated_terminal_residual) / residual_scale;

    struct Check {
        const char* name;
        double value;
        const char* relation;
        double threshold;
        bool pass;
    };
    const Check checks[] = {
        {"trajectory_error", last.trajectory_error, "<=", kMaxTrajectoryError,
         last.trajectory_error <= kMaxTrajectoryError},
        {"initial_rate_error", last.initial_rate_error, "<=", kMaxInitialRateError,
         last.initial_rate_error <= kMaxInitialRateError},
        {"convergence_order", report.trajectory_order, ">=", kMinConvergenceOrder,
         report.trajectory_order >= kMinConvergenceOrder},
        {"terminal_residual", residual, "<=", kMaxTerminalResidual, residual <= kMaxTerminalResidual},
    };

    out << "resolution n_steps trajectory_error initial_rate_error terminal_residual\n";
    for (const auto& c : report.checks) {
        out << "resolution " << c.n_steps << ' ' << format_number(c.trajectory_error) << ' '
            << format_number(c.initial_rate_error) << ' ' << format_number(c.terminal_residual) << '\n';
    }
    bool all = true;
    for (const auto& c : checks) {
        out << (c.pass ? "PASS " : "FAIL ") << c.name << ' ' << format_number(c.value) << ' ' << c.relation
            << ' ' << format_number(c.threshold) << '\n';
        all = all && c.pass;
    }
    out << (all ? "verify: PASS\n" : "verify: FAIL\n");
    return all ? kExitOk : kExitCheckFailed;
}

int cmd_value(const RunConfig& config, std::ostream& out) {
    const auto setup = setup_from(config);
    const bool martingale = std::holds_alternative<Martingale>(setup.model);
    if (!martingale && !is_capped(setup.model)) {
        throw ConfigError("model", "value needs a capped model or model = martingale");
    }
    const auto& costs = setup.costs;
    const GKernel kernel(costs);
    const double p0 = initial_price(setup.model);
    const double x0 = costs.x0;
    const double v2 = -urgency(kernel, 0.0);

    double v1 = 0.0;
    MCEstimate v0{0.0, 0.0, setup.n_paths, setup.seed};
    SignalFn signal;
    if (!martingale) {
        v1 = v1_target_zone(kernel, costs, setup.model, TargetZoneState{0.0, p0, p0});
        signal = tabulated_signal(kernel, costs, setup.model, setup.workers);
        v0 = estimate_v0(setup, signal);
    }
    const double value = p0 * x0 + costs.lambda * (v0.mean + 2.0 * v1 * x0 + v2 * x0 * x0);
    const auto mc = estimate_value(setup, optimal_policy(kernel, setup.n_steps), signal);

    out << "p0,x0,v2_0,v1_0,v0_0,v0_se,value,mc_value,mc_se\n";
    write_row(out, {format_number(p0), format_number(x0), format_number(v2), format_number(v1),
                    format_number(v0.mean), format_number(v0.std_error), format_number(value),
                    format_number(mc.mean), format_number(mc.std_error)});
    return kExitOk;
}

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Optimal execution schedules under capped (target-zone) prices"};
    app.require_subcommand(1);

    std::string config_path;
    std::optional<std::string> output;
    std::optional<std::uint64_t> seed;
    std::optional<std::uint64_t> paths;
    std::optional<std::uint64_t> steps;

    const std::pair<const char*, const char*> commands[] = {
        {"surface", "optimal-rate surface over (time to go, moneyness) as CSV"},
        {"simulate", "Monte Carlo value of the optimal and Almgren-Chriss policies as CSV"},
        {"verify", "discrete oracle against the closed-form schedule; text report"},
        {"value", "value formula next to a Monte Carlo estimate as CSV"},
    };
    for (const auto& [name, description] : commands) {
        auto* sub = app.add_subcommand(name, description);
        sub->add_option("--config", config_path, "key=value run configuration")->required();
        sub->add_option("--output", output, "output file (default: config 'output', else stdout)");
        sub->add_option("--seed", seed, "overrides the config seed");
        sub->add_option("--paths", paths, "overrides n_paths");
        sub->add_option("--steps", steps, "overrides n_steps");
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        out << app.help();
        return kExitOk;
    } catch (const CLI::CallForAllHelp& e) {
        out << app.help("", CLI::AppFormatMode::All);
        return kExitOk;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << '\n';
        return kExitConfigError;
    }
    const std::string command = app.get_subcommands().front()->get_name();

    try {
        auto config = load_config(config_path);
        if (seed) {
            config.seed = seed;
        }
        if (paths) {
            config.n_paths = paths;
        }
        if (steps) {
            config.n_steps = steps;
        }
        if (output) {
            config.output = output;
        }

        std::ostringstream buffer;
        int status = kExitOk;
        if (command == "surface") {
            status = cmd_surface(config, buffer);
        } else if (command == "simulate") {
            status = cmd_simulate(config, buffer);
        } else if (command == "verify") {
            status = cmd_verify(config, buffer);
        } else {
            status = cmd_value(config, buffer);
        }

        if (config.output) {
            std::ofstream file(*config.output, std::ios::binary | std::ios::trunc);
            if (!file || !(file << buffer.str()) || !file.flush()) {
                err << "error: cannot write output file '" << *config.output << "'\n";
                return kExitCheckFailed;
            }
            if (command == "verify") {
                out << buffer.str();
            }
        } else {
            out << buffer.str();
        }
        if (status != kExitOk) {
            err << command << ": numeric check failed\n";
        }
        return status;
    } catch (const ConfigError& e) {
        err << "config error: " << e.what() << '\n';
        return kExitConfigError;
    } catch (const QuadratureError& e) {
        err << "quadrature failure: " << e.what() << '\n';
        return kExitCheckFailed;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kExitCheckFailed;
    }
}

} // namespace tzopt::cli
