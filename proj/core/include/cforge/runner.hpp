#pragma once

#include <iosfwd>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace cforge {

// Version string embedded in every report; kept in lockstep with the
// CMake project version.
inline constexpr const char* tool_version = "0.1.0";

// Report schema identifier written into every JSON report.
inline constexpr const char* report_schema = "coarse-forge-report/1";

// Exit statuses of run(): 0 every checked assertion passed, 1 at least
// one assertion failed (the reports carry the witnesses), 2 the
// configuration was unusable or an enumeration budget was exceeded.
inline constexpr int exit_pass = 0;
inline constexpr int exit_assertion_failed = 1;
inline constexpr int exit_config_error = 2;

class ConfigError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

// Flat key=value settings for one experiment run.  Keys:
//
//   group       group spec, e.g. "lattice:2", "free:2", "bs12"
//   qm          quasimorphism spec, e.g. "floordiv:q=2", "brooks:w=ab"
//   codomain    group spec for the quasimorphism image (hom rules only)
//   spec        approximate-group spec, e.g. "bs12-pattern", "whole"
//   F           comma-separated element words for the approximation set
//   instance    bundled instance name, e.g. "floordiv-z2"
//   window      window radius (the "radius" key is an accepted alias)
//   scales      comma-separated positive scale list, e.g. "2,4,8"
//   r           single scale for containment / cover commands
//   max_colors  color-count cap for cover searches
//   D           diameter budget for cover searches
//   counting    "overlapping" (default) or "disjoint" word counting,
//               applied to brooks specs that do not fix it themselves
//   out         output file (single commands) or directory ("all")
//   workers     worker threads for the defect pair scan, default 1;
//               never changes output bytes
//   budget      cap applied to both element and pair enumeration budgets
//   seed        seed for greedy cover orderings, default 0
//
// Values stay strings until a command needs them; typed accessors parse
// and validate on demand and throw ConfigError with the key name.
struct ExperimentConfig {
    std::map<std::string, std::string> entries;

    bool has(const std::string& key) const;
    const std::string& raw(const std::string& key) const;  // throws if missing

    std::string get_string(const std::string& key) const;
    long long get_int(const std::string& key) const;
    long long get_int_or(const std::string& key, long long fallback) const;
    std::vector<int> get_int_list(const std::string& key) const;
};

// Reads an optional config file of key=value lines (blank lines and
// #-comments skipped), then applies the overrides in order; later values
// win, so command-line flags override the file.  "radius" is normalized
// to "window" on insertion.
ExperimentConfig load_config(const std::optional<std::string>& config_path,
                             const std::vector<std::pair<std::string, std::string>>& overrides);

// Runs one command against the config and writes its report files.
// Commands: ball, defect, approx-check, lipschitz, containment, kernel,
// color, hurewicz, all.  "all" writes one report per stage into the
// output directory, running defect, lipschitz, containment, kernel, and
// hurewicz in that order.  Identical config and seed produce
// byte-identical report files.  Progress lines go to `out`, diagnostics
// for nonzero exits to `err`.
int run(const ExperimentConfig& config, const std::string& command, std::ostream& out,
        std::ostream& err);

// Same, writing to std::cout / std::cerr.
int run(const ExperimentConfig& config, const std::string& command);

}  // namespace cforge
