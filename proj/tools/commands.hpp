#pragma once

#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

namespace fbm::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 2;
inline constexpr int kExitNumerical = 3;
inline constexpr int kExitIo = 4;

struct UsageError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

struct IoError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct RunConfig {
    std::string command;
    int rows = 4;
    int cols = 4;
    std::string family = "weibull";
    double shape = 5.0;
    double scale = 2.0;
    std::string rule = "absorbing";
    std::string structure = "column-paths";
    std::uint64_t replicas = 100000;
    std::uint64_t seed = 1;
    int chain = 1;
    double tail_lo = 1e-5;
    double tail_hi = 1e-3;
    double ref_percentile = 0.001;
    std::vector<double> percentiles;
    double a = 0.9;
    double s_star = 1.0;
    std::string out = "out";
    unsigned workers = 0; // 0: available parallelism
    std::string samples;  // samples file for gibbs percentiles
    std::string input;    // censored data file for analyze

    // density
    std::string kind;
    int m = 2;
    int k = 1;
    int l = 0; // 0: unset
    int n = 3;
    double x = 0.5;
    double y = 1.0;
    double from = 0.0;
    double to = 1.0;
    double step = 0.1;
    std::string pattern;

    unsigned resolved_workers() const;
};

/// Parses argv (including an optional --config key=value file) and runs the
/// command. Returns the process exit code; errors are printed to stderr.
int run(int argc, const char *const *argv);

/// Raises UsageError for an invalid configuration of the given command.
void validate(const RunConfig &config);

void cmd_simulate(const RunConfig &config);
void cmd_gibbs(const RunConfig &config);
void cmd_analyze(const RunConfig &config);
void cmd_cycles(const RunConfig &config);
void cmd_density(const RunConfig &config);

/// Shortest round-trip decimal text of a double.
std::string format_double(double v);

} // namespace fbm::cli
