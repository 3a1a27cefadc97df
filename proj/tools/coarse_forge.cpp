// Command-line front end: parses flags into the flat experiment config
// and dispatches to the runner.  Flags override config-file entries.

#include <iostream>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <CLI11.hpp>

#include <cforge/runner.hpp>

namespace {

struct FlagSink {
    std::optional<std::string> config_path;
    std::vector<std::pair<std::string, std::string>> overrides;
};

// Registers one string-valued flag that lands in the override list under
// `key` when the user passes it.
void add_key(CLI::App* cmd, FlagSink& sink, const std::string& names, const std::string& key,
             const std::string& help) {
    cmd->add_option_function<std::string>(
        names, [&sink, key](const std::string& value) { sink.overrides.emplace_back(key, value); },
        help);
}

void add_common(CLI::App* cmd, FlagSink& sink) {
    cmd->add_option("--config", sink.config_path, "key=value config file; flags override it");
    add_key(cmd, sink, "--out", "out", "output file (or directory for 'all')");
    add_key(cmd, sink, "--workers", "workers", "worker threads for the defect pair scan");
    add_key(cmd, sink, "--budget", "budget", "cap for element and pair enumeration budgets");
    add_key(cmd, sink, "--seed", "seed", "seed for greedy cover orderings");
}

void add_window(CLI::App* cmd, FlagSink& sink) {
    add_key(cmd, sink, "--window,--radius", "window", "window radius");
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"coarse-forge: windowed checks for quasimorphisms on approximate groups"};
    app.set_version_flag("--version", std::string("coarse-forge ") + cforge::tool_version);
    app.require_subcommand(1);

    FlagSink sink;

    CLI::App* ball = app.add_subcommand("ball", "enumerate a word-metric ball to CSV");
    add_key(ball, sink, "--group", "group", "group spec, e.g. lattice:2, free:2, bs12");
    add_window(ball, sink);
    add_common(ball, sink);

    CLI::App* defect = app.add_subcommand("defect", "observed defect set of a quasimorphism");
    add_key(defect, sink, "--group", "group", "domain group spec");
    add_key(defect, sink, "--qm", "qm", "quasimorphism spec, e.g. floordiv:q=2, brooks:w=ab");
    add_key(defect, sink, "--codomain", "codomain", "codomain group spec (hom rules)");
    add_key(defect, sink, "--counting", "counting", "word counting: overlapping|disjoint");
    add_window(defect, sink);
    add_common(defect, sink);

    CLI::App* approx = app.add_subcommand("approx-check", "windowed approximate-group axioms");
    add_key(approx, sink, "--spec", "spec", "approximate-group spec, e.g. bs12-pattern");
    add_key(approx, sink, "--group", "group", "ambient group spec (needed for 'whole')");
    add_key(approx, sink, "--F", "F", "comma-separated approximation set");
    add_window(approx, sink);
    add_common(approx, sink);

    CLI::App* lipschitz = app.add_subcommand("lipschitz", "displacement scan and symmetry gap");
    add_key(lipschitz, sink, "--instance", "instance", "bundled instance name");
    add_key(lipschitz, sink, "--scales", "scales", "comma-separated displacement scales");
    add_window(lipschitz, sink);
    add_common(lipschitz, sink);

    CLI::App* containment = app.add_subcommand("containment",
                                               "fiber containment and neighborhood absorption");
    add_key(containment, sink, "--instance", "instance", "bundled instance name");
    add_key(containment, sink, "--r", "r", "containment scale");
    add_window(containment, sink);
    add_common(containment, sink);

    CLI::App* kernel = app.add_subcommand("kernel", "windowed kernel of an instance");
    add_key(kernel, sink, "--instance", "instance", "bundled instance name");
    add_window(kernel, sink);
    add_common(kernel, sink);

    CLI::App* color = app.add_subcommand("color", "greedy bounded-diameter cover coloring");
    add_key(color, sink, "--group", "group", "group spec");
    add_key(color, sink, "--r", "r", "separation scale");
    add_key(color, sink, "--max-colors", "max_colors", "color-count cap");
    add_key(color, sink, "--D", "D", "cluster diameter budget");
    add_window(color, sink);
    add_common(color, sink);

    CLI::App* hurewicz = app.add_subcommand("hurewicz", "per-scale cover-count comparison");
    add_key(hurewicz, sink, "--instance", "instance", "bundled instance name");
    add_key(hurewicz, sink, "--scales", "scales", "comma-separated scales");
    add_window(hurewicz, sink);
    add_common(hurewicz, sink);

    CLI::App* all = app.add_subcommand("all", "defect, lipschitz, containment, kernel, hurewicz");
    add_key(all, sink, "--instance", "instance", "bundled instance name");
    add_key(all, sink, "--scales", "scales", "comma-separated scales");
    add_key(all, sink, "--r", "r", "containment scale (default: smallest of --scales)");
    add_window(all, sink);
    add_common(all, sink);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int rc = app.exit(e);
        return rc == 0 ? 0 : cforge::exit_config_error;
    }

    try {
        cforge::ExperimentConfig config = cforge::load_config(sink.config_path, sink.overrides);
        return cforge::run(config, app.get_subcommands().front()->get_name());
    } catch (const std::exception& ex) {
        std::cerr << "config error: " << ex.what() << "\n";
        return cforge::exit_config_error;
    }
}
