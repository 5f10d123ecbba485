#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

#include "tzopt/market_model.hpp"
#include "tzopt/schedule.hpp"

namespace tzopt::cli {

enum ExitStatus : int { kExitOk = 0, kExitCheckFailed = 1, kExitConfigError = 2 };

/// Invalid or incomplete run configuration; `key()` names the offending entry.
class ConfigError : public std::runtime_error {
public:
    ConfigError(std::string key, const std::string& message)
        : std::runtime_error(message), key_(std::move(key)) {}
    [[nodiscard]] const std::string& key() const { return key_; }

private:
    std::string key_;
};

/// Flat key=value run description. Absent optional fields fall back to the
/// defaults documented in the README; gamma and big_gamma have none.
struct RunConfig {
    std::optional<std::string> model;
    std::optional<double> m0;
    std::optional<double> sigma;
    std::optional<double> p_bar;
    std::optional<double> lambda;
    std::optional<double> gamma;
    std::optional<double> big_gamma;
    std::optional<double> horizon;
    std::optional<double> x0;
    std::optional<double> drift;
    std::optional<std::uint64_t> n_steps;
    std::optional<std::uint64_t> n_paths;
    std::optional<std::uint64_t> seed;
    std::optional<std::uint64_t> workers;
    std::optional<double> tau_min;
    std::optional<double> tau_max;
    std::optional<std::uint64_t> tau_count;
    std::optional<double> money_min;
    std::optional<double> money_max;
    std::optional<std::uint64_t> money_count;
    std::optional<double> bs_m;
    std::optional<std::string> output;
};

/// Parses `key = value` lines; `#` starts a comment. Rejects unknown or
/// repeated keys and numbers that are not finite decimals.
RunConfig parse_config(std::string_view text);
RunConfig load_config(const std::string& path);

CostParams costs_from(const RunConfig& config);
MarketModel model_from(const RunConfig& config);

/// Shortest round-trip-safe rendering with 17 significant digits, independent
/// of the locale.
std::string format_number(double value);

int cmd_surface(const RunConfig& config, std::ostream& out);
int cmd_simulate(const RunConfig& config, std::ostream& out);
int cmd_verify(const RunConfig& config, std::ostream& out);
int cmd_value(const RunConfig& config, std::ostream& out);

/// Full command line: `tzopt <surface|simulate|verify|value> --config PATH
/// [--output PATH] [--seed N] [--paths N] [--steps N]`. Returns the exit status.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

} // namespace tzopt::cli
