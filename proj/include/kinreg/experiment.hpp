#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "kinreg/calibration.hpp"
#include "kinreg/coefficients.hpp"
#include "kinreg/solver.hpp"
#include "kinreg/verification.hpp"

namespace kinreg {

/// Config validation failure; the message starts with "<source>:<line>:<column>:" when the
/// offending node is known.
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

enum class InitialKind { Gaussian, MultiBump, OracleDelta, RandomSmooth, Front };

struct InitialConfig {
    InitialKind kind = InitialKind::Gaussian;
    /// Gaussian and OracleDelta. OracleDelta ignores the covariance and uses `width` on both axes.
    Gaussian2 gaussian{2.0, 0.0, 0.02, 0.0, 0.1, 1.0};
    double width = 0.05;
    /// MultiBump count, RandomSmooth modes per axis.
    int count = 4;
    double amplitude = 1.0;
    /// Front: the front sits at v = mean_v + modulation sin(2 pi x / lx + phase), phase from the member seed.
    double modulation = 0.0;
    /// Base seed; ensemble member s uses hash_keys(seed, {s}).
    std::uint64_t seed = 0;
};

struct CoefficientConfig {
    /// Member k of an ensemble uses kinds[k % kinds.size()].
    std::vector<CoefficientKind> kinds{CoefficientKind::Constant};
    double lambda = 1.0;
    double Lambda = 1.0;
    std::vector<std::uint64_t> seeds{0};
    CoefficientParams params;
};

/// One verification task. Only the keys relevant to `name` are read.
struct TaskConfig {
    std::string name;
    /// NaN entries default to (lx/2, 0, t_end).
    double x0 = kNaN, v0 = kNaN, t0 = kNaN;
    double R0 = 1.0;
    double R1 = 0.5;
    double q = kNaN;
    double eps = 0.1;
    double q_low = 1.5;
    double theta0 = 0.5;
    double kappa = 3.0;
    int n_max = 12;
    double c_bar = 1.0;
    double alpha_hat = kNaN;
    double c0_hat = kNaN;
    double delta1 = kNaN;
    double delta2 = kNaN;
    std::size_t min_qualifying = 10;
    std::vector<double> scales{0.5, 0.625, 0.75, 0.875, 1.0};
    /// Negative selects oracle_noise_floor of the grid.
    double noise_floor = 0.0;
    /// Apply f -> f_+ before the estimate (sub-solution estimates).
    std::optional<bool> positive_part;
    /// Source line of the task entry, for error messages.
    int line = 0;

    [[nodiscard]] Point center(const GridSpec& g) const;
};

struct ExperimentConfig {
    GridSpec grid{64, 64, 128, 4.0, 2.0, 0.0, 1.5};
    /// Refinement ladder of (nx, nv, nt); empty means just `grid`.
    std::vector<GridSpec> ladder;
    CoefficientConfig coefficients;
    InitialConfig initial;
    SchemeParams scheme;
    std::vector<TaskConfig> tasks;
    Caps caps = kFrozenCaps;
    std::filesystem::path output = "out";
    /// File name used in error messages.
    std::string source = "<config>";

    /// The grids a sweep visits: the ladder or {grid}.
    [[nodiscard]] std::vector<GridSpec> grids() const;
    /// Key-value dump of every effective setting, in a fixed order.
    [[nodiscard]] std::string canonical() const;
    /// FNV-1a 64 of canonical(), as 16 hex digits.
    [[nodiscard]] std::string hash() const;
};

ExperimentConfig parse_config(const std::string& text, const std::string& source = "<config>");
ExperimentConfig load_config(const std::filesystem::path& path);

/// Throws ConfigError when a task cylinder leaves the grid domain or a setting is out of range.
void validate_config(const ExperimentConfig& cfg);

/// Task families known to run_verify.
const std::vector<std::string>& task_families();

std::vector<double> make_initial(const InitialConfig& init, const GridSpec& grid, std::uint64_t member_seed);
CoefficientField make_coefficients(const CoefficientConfig& c, std::size_t member_index);

struct SolveDiagnostics {
    double max_mass_drift = 0.0;
    std::size_t energy_increases = 0;
    double min_value = 0.0;
    double max_value = 0.0;
    double initial_min = 0.0;
    double initial_max = 0.0;
    EllipticityReport ellipticity;
};

SolveDiagnostics diagnose(const GridField& f, std::span<const double> initial, const GridSpec& grid,
                          const CoefficientField& field);

struct SolveOutput {
    GridField field;
    SolveDiagnostics diagnostics;
    std::filesystem::path snapshot;
    std::filesystem::path metadata;
};

/// Solves member 0 (first seed, first grid) and writes snapshot.kfp and metadata.json into `out`.
SolveOutput run_solve(const ExperimentConfig& cfg, const std::filesystem::path& out);

/// Everything one member's tasks produced.
struct TaskResults {
    std::vector<EstimateReport> reports;
    std::vector<MoserTrace> moser;
    std::vector<HolderEstimate> holder;
    std::vector<GehringScan> gehring;
    std::vector<DoublingLog> doubling;
    std::vector<DeGiorgiMember> degiorgi;
    /// "task: message" for tasks that threw.
    std::vector<std::string> errors;
};

/// Runs `tasks` (all configured tasks when empty) on one solution. Unknown names throw ConfigError.
TaskResults run_tasks(const ExperimentConfig& cfg, const GridField& f, std::uint64_t seed,
                      const std::vector<std::string>& tasks = {});

struct VerifyOutput {
    TaskResults results;
    std::vector<std::filesystem::path> files;
    bool all_pass = true;
};

/// Verifies a snapshot (or solves member 0 when none is given) and writes one CSV per family.
VerifyOutput run_verify(const ExperimentConfig& cfg, const std::filesystem::path& out,
                        const std::vector<std::string>& tasks = {},
                        const std::optional<std::filesystem::path>& snapshot = std::nullopt);

struct MemberResult {
    std::uint64_t seed = 0;
    std::size_t member_index = 0;
    std::size_t grid_index = 0;
    GridSpec grid;
    SolveDiagnostics diagnostics;
    TaskResults results;
    /// Non-empty when the solve itself failed.
    std::string error;
};

struct AggregateRow {
    std::string statistic;
    std::string estimate_id;
    GridSpec grid;
    double value = 0.0;
    std::size_t count = 0;
};

struct SweepOutput {
    std::vector<MemberResult> members;
    std::vector<AggregateRow> aggregate;
    std::vector<DeGiorgiParams> degiorgi;
    std::vector<std::filesystem::path> files;
    bool all_pass = true;
};

/// Members are (grid, seed) pairs in ladder-major, seed-minor order.
SweepOutput sweep(const ExperimentConfig& cfg, int threads = 1, const std::vector<std::string>& tasks = {});
/// sweep() plus member CSVs under out/members and merged CSVs in out.
SweepOutput run_sweep(const ExperimentConfig& cfg, const std::filesystem::path& out, int threads = 1,
                      const std::vector<std::string>& tasks = {});

/// Aggregate statistics of a finished sweep.
std::vector<AggregateRow> aggregate(const ExperimentConfig& cfg, const std::vector<MemberResult>& members,
                                    const std::vector<DeGiorgiParams>& degiorgi);

/// Writes CSV files for one family set into `dir` and returns their paths.
std::vector<std::filesystem::path> write_results(const std::filesystem::path& dir,
                                                 const std::vector<MemberResult>& members);
void write_aggregate_csv(std::ostream& os, const std::vector<AggregateRow>& rows);

struct ReportOutput {
    std::vector<std::filesystem::path> files;
    std::string summary;
};

/// Reads the CSVs in `dir`, writes SVG plots and summary.txt there.
ReportOutput run_report(const std::filesystem::path& dir);

}  // namespace kinreg
