// kinreg: solve, verify, sweep and report kinetic Fokker-Planck experiments.
//
// Exit status: 0 success, 1 a pass-cap was violated, 2 hard error (bad config, I/O, failed task).

#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "kinreg/experiment.hpp"

namespace fs = std::filesystem;
using namespace kinreg;

namespace {

constexpr int kExitCap = 1;
constexpr int kExitError = 2;

struct Options {
    std::string config;
    std::string out;
    int threads = 1;
    std::vector<std::string> tasks;
    std::string snapshot;
};

/// Flags win over KINREG_* variables, which win over defaults.
void apply_env(Options& o) {
    if (const char* s = std::getenv("KINREG_CONFIG"); s && o.config.empty()) o.config = s;
    if (const char* s = std::getenv("KINREG_OUT"); s && o.out.empty()) o.out = s;
    if (const char* s = std::getenv("KINREG_THREADS"); s && o.threads <= 0) o.threads = std::atoi(s);
    if (o.threads <= 0) o.threads = 1;
}

ExperimentConfig require_config(const Options& o) {
    if (o.config.empty()) throw ConfigError("no config given (--config or KINREG_CONFIG)");
    return load_config(o.config);
}

fs::path out_dir(const Options& o, const ExperimentConfig& cfg) { return o.out.empty() ? cfg.output : fs::path(o.out); }

void print_errors(const std::vector<std::string>& errors) {
    for (const auto& e : errors) std::cerr << "task error: " << e << "\n";
}

int cmd_solve(const Options& o) {
    const ExperimentConfig cfg = require_config(o);
    const SolveOutput s = run_solve(cfg, out_dir(o, cfg));
    std::cout << "snapshot " << s.snapshot.string() << "\nmetadata " << s.metadata.string() << "\n"
              << "mass drift " << s.diagnostics.max_mass_drift << ", energy increases "
              << s.diagnostics.energy_increases << "\n";
    return 0;
}

int cmd_verify(const Options& o) {
    const ExperimentConfig cfg = require_config(o);
    std::optional<fs::path> snap;
    if (!o.snapshot.empty()) snap = o.snapshot;
    const VerifyOutput v = run_verify(cfg, out_dir(o, cfg), o.tasks, snap);
    std::size_t failed = 0;
    for (const auto& r : v.results.reports) {
        if (!r.pass) {
            ++failed;
            std::cerr << "cap violated: " << r.estimate_id << " ratio " << r.ratio << "\n";
        }
    }
    print_errors(v.results.errors);
    std::cout << v.results.reports.size() << " reports, " << failed << " cap violations, "
              << v.results.errors.size() << " task errors, " << v.files.size() << " files\n";
    if (!v.results.errors.empty()) return kExitError;
    return failed > 0 ? kExitCap : 0;
}

int cmd_sweep(const Options& o) {
    const ExperimentConfig cfg = require_config(o);
    const SweepOutput s = run_sweep(cfg, out_dir(o, cfg), o.threads, o.tasks);
    std::size_t errors = 0;
    for (const auto& m : s.members) errors += m.results.errors.size() + (m.error.empty() ? 0 : 1);
    std::cout << s.members.size() << " members, " << errors << " recorded member errors, "
              << (s.all_pass ? "all caps hold" : "cap violations") << "\n";
    return s.all_pass ? 0 : kExitCap;
}

int cmd_report(const Options& o) {
    if (o.out.empty()) throw ConfigError("no CSV directory given (--out or KINREG_OUT)");
    const ReportOutput r = run_report(o.out);
    std::cout << r.summary;
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Numerical laboratory for kinetic Fokker-Planck regularity estimates"};
    app.require_subcommand(1);
    Options o;
    o.threads = 0;

    auto add_common = [&](CLI::App* sub, bool with_config) {
        if (with_config) sub->add_option("--config", o.config, "experiment config (YAML)");
        sub->add_option("--out", o.out, "output directory");
    };
    CLI::App* solve = app.add_subcommand("solve", "solve member 0 and write a snapshot");
    add_common(solve, true);
    CLI::App* verify = app.add_subcommand("verify", "run verification tasks on one solution");
    add_common(verify, true);
    verify->add_option("--task", o.tasks, "task name (repeatable); default all configured");
    verify->add_option("--snapshot", o.snapshot, "verify this KFP1 snapshot instead of solving");
    CLI::App* sweep_cmd = app.add_subcommand("sweep", "run every seed and grid of the config");
    add_common(sweep_cmd, true);
    sweep_cmd->add_option("--threads", o.threads, "worker threads")->check(CLI::PositiveNumber);
    sweep_cmd->add_option("--task", o.tasks, "task name (repeatable); default all configured");
    CLI::App* report = app.add_subcommand("report", "plot and summarize the CSVs in --out");
    add_common(report, false);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kExitError;
    }
    apply_env(o);

    try {
        if (*solve) return cmd_solve(o);
        if (*verify) return cmd_verify(o);
        if (*sweep_cmd) return cmd_sweep(o);
        return cmd_report(o);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitError;
    }
}
