#include "kinreg/experiment.hpp"

#include <yaml-cpp/yaml.h>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <numbers>
#include <set>
#include <sstream>
#include <thread>

#include "json.hpp"
#include "kinreg/functionals.hpp"
#include "kinreg/numeric.hpp"

namespace kinreg {

namespace fs = std::filesystem;

namespace {

// ---------------------------------------------------------------------------------------------
// YAML helpers

struct Parser {
    std::string source;

    [[noreturn]] void fail(const YAML::Node& node, const std::string& msg) const {
        const YAML::Mark m = node.Mark();
        if (m.is_null()) throw ConfigError(source + ": " + msg);
        throw ConfigError(source + ":" + std::to_string(m.line + 1) + ":" + std::to_string(m.column + 1) + ": " + msg);
    }

    void require_map(const YAML::Node& node, const std::string& what) const {
        if (!node.IsMap()) fail(node, what + " must be a mapping");
    }

    void check_keys(const YAML::Node& node, const std::set<std::string>& allowed, const std::string& what) const {
        require_map(node, what);
        for (const auto& kv : node) {
            const std::string key = kv.first.as<std::string>();
            if (!allowed.count(key)) fail(kv.first, "unknown key '" + key + "' in " + what);
        }
    }

    template <class T>
    T scalar(const YAML::Node& node, const std::string& key) const {
        if (!node.IsScalar()) fail(node, "'" + key + "' must be a scalar");
        try {
            return node.as<T>();
        } catch (const YAML::BadConversion&) {
            fail(node, "'" + key + "' has the wrong type");
        }
    }

    template <class T>
    void read(const YAML::Node& parent, const std::string& key, T& out) const {
        const YAML::Node n = parent[key];
        if (n) out = scalar<T>(n, key);
    }

    void read_positive(const YAML::Node& parent, const std::string& key, double& out) const {
        const YAML::Node n = parent[key];
        if (!n) return;
        out = scalar<double>(n, key);
        if (!(out > 0.0)) fail(n, "'" + key + "' must be positive");
    }

    void read_count(const YAML::Node& parent, const std::string& key, int& out) const {
        const YAML::Node n = parent[key];
        if (!n) return;
        out = scalar<int>(n, key);
        if (out < 1) fail(n, "'" + key + "' must be at least 1");
    }
};

const std::map<std::string, CoefficientKind>& coefficient_names() {
    static const std::map<std::string, CoefficientKind> m{{"constant", CoefficientKind::Constant},
                                                          {"checkerboard", CoefficientKind::Checkerboard},
                                                          {"random-laminate", CoefficientKind::RandomLaminate},
                                                          {"oscillatory", CoefficientKind::Oscillatory}};
    return m;
}

const std::map<std::string, InitialKind>& initial_names() {
    static const std::map<std::string, InitialKind> m{{"gaussian", InitialKind::Gaussian},
                                                      {"multi-bump", InitialKind::MultiBump},
                                                      {"oracle-delta", InitialKind::OracleDelta},
                                                      {"random-smooth", InitialKind::RandomSmooth},
                                                      {"front", InitialKind::Front}};
    return m;
}

const std::map<std::string, TransportMethod>& transport_names() {
    static const std::map<std::string, TransportMethod> m{{"sl-linear", TransportMethod::SemiLagrangianLinear},
                                                          {"sl-cubic", TransportMethod::SemiLagrangianCubic},
                                                          {"upwind", TransportMethod::UpwindConservative}};
    return m;
}

template <class E>
std::string name_of(const std::map<std::string, E>& m, E value) {
    for (const auto& [k, v] : m)
        if (v == value) return k;
    return "?";
}

template <class E>
E lookup(const Parser& p, const YAML::Node& node, const std::map<std::string, E>& m, const std::string& what) {
    const std::string s = p.scalar<std::string>(node, what);
    const auto it = m.find(s);
    if (it == m.end()) {
        std::string options;
        for (const auto& [k, v] : m) options += (options.empty() ? "" : ", ") + k;
        p.fail(node, "unknown " + what + " '" + s + "' (expected one of: " + options + ")");
    }
    return it->second;
}

void parse_grid_triplet(const Parser& p, const YAML::Node& node, GridSpec& g) {
    if (!node.IsSequence() || node.size() != 3) p.fail(node, "ladder entries must be [nx, nv, nt]");
    g.nx = p.scalar<int>(node[0], "nx");
    g.nv = p.scalar<int>(node[1], "nv");
    g.nt = p.scalar<int>(node[2], "nt");
    if (g.nx < 1 || g.nv < 3 || g.nt < 1) p.fail(node, "ladder counts must be positive (nv >= 3)");
}

TaskConfig parse_task(const Parser& p, const YAML::Node& node) {
    p.check_keys(node,
                 {"name", "center", "R0", "R1", "q", "eps", "q_low", "theta0", "kappa", "n_max", "c_bar",
                  "alpha_hat", "c0_hat", "delta1", "delta2", "min_qualifying", "scales", "noise_floor",
                  "positive_part"},
                 "task");
    TaskConfig t;
    t.line = static_cast<int>(node.Mark().line + 1);
    if (!node["name"]) p.fail(node, "task needs a 'name'");
    t.name = p.scalar<std::string>(node["name"], "name");
    const auto& fams = task_families();
    if (std::find(fams.begin(), fams.end(), t.name) == fams.end()) p.fail(node["name"], "unknown task '" + t.name + "'");
    if (const YAML::Node c = node["center"]) {
        if (!c.IsSequence() || c.size() != 3) p.fail(c, "center must be [x, v, t]");
        t.x0 = p.scalar<double>(c[0], "center");
        t.v0 = p.scalar<double>(c[1], "center");
        t.t0 = p.scalar<double>(c[2], "center");
    }
    p.read_positive(node, "R0", t.R0);
    p.read_positive(node, "R1", t.R1);
    p.read_positive(node, "q", t.q);
    p.read_positive(node, "eps", t.eps);
    p.read_positive(node, "q_low", t.q_low);
    p.read_positive(node, "theta0", t.theta0);
    p.read_positive(node, "kappa", t.kappa);
    p.read_count(node, "n_max", t.n_max);
    p.read_positive(node, "c_bar", t.c_bar);
    p.read_positive(node, "alpha_hat", t.alpha_hat);
    p.read_positive(node, "c0_hat", t.c0_hat);
    p.read_positive(node, "delta1", t.delta1);
    p.read_positive(node, "delta2", t.delta2);
    if (node["min_qualifying"]) t.min_qualifying = p.scalar<std::size_t>(node["min_qualifying"], "min_qualifying");
    if (const YAML::Node s = node["scales"]) {
        if (!s.IsSequence()) p.fail(s, "scales must be a list");
        t.scales.clear();
        for (const auto& e : s) t.scales.push_back(p.scalar<double>(e, "scales"));
    }
    p.read(node, "noise_floor", t.noise_floor);
    if (node["positive_part"]) t.positive_part = p.scalar<bool>(node["positive_part"], "positive_part");
    return t;
}

ExperimentConfig parse_root(const Parser& p, const YAML::Node& root) {
    ExperimentConfig cfg;
    cfg.source = p.source;
    if (!root || root.IsNull()) return cfg;
    p.check_keys(root, {"grid", "ladder", "coefficients", "initial", "scheme", "tasks", "caps", "output"}, "config");

    if (const YAML::Node g = root["grid"]) {
        p.check_keys(g, {"nx", "nv", "nt", "lx", "v_max", "t_start", "t_end"}, "grid");
        p.read_count(g, "nx", cfg.grid.nx);
        p.read_count(g, "nv", cfg.grid.nv);
        p.read_count(g, "nt", cfg.grid.nt);
        p.read_positive(g, "lx", cfg.grid.lx);
        p.read_positive(g, "v_max", cfg.grid.v_max);
        p.read(g, "t_start", cfg.grid.t_start);
        p.read(g, "t_end", cfg.grid.t_end);
        if (!(cfg.grid.t_end > cfg.grid.t_start)) p.fail(g, "t_end must exceed t_start");
        if (cfg.grid.nv < 3) p.fail(g, "nv must be at least 3");
    }
    if (const YAML::Node l = root["ladder"]) {
        if (!l.IsSequence()) p.fail(l, "ladder must be a list of [nx, nv, nt]");
        for (const auto& e : l) {
            GridSpec g = cfg.grid;
            parse_grid_triplet(p, e, g);
            cfg.ladder.push_back(g);
        }
    }
    if (const YAML::Node c = root["coefficients"]) {
        p.check_keys(c, {"kind", "lambda", "Lambda", "seed", "seeds", "value", "cell", "hx", "hv", "ht", "kx", "kv", "kt"},
                     "coefficients");
        if (const YAML::Node k = c["kind"]) {
            cfg.coefficients.kinds.clear();
            if (k.IsSequence()) {
                if (k.size() == 0) p.fail(k, "kind list is empty");
                for (const auto& e : k) cfg.coefficients.kinds.push_back(lookup(p, e, coefficient_names(), "coefficient kind"));
            } else {
                cfg.coefficients.kinds.push_back(lookup(p, k, coefficient_names(), "coefficient kind"));
            }
        }
        p.read_positive(c, "lambda", cfg.coefficients.lambda);
        p.read_positive(c, "Lambda", cfg.coefficients.Lambda);
        if (cfg.coefficients.Lambda < cfg.coefficients.lambda) p.fail(c, "Lambda must be >= lambda");
        if (c["seed"] && c["seeds"]) p.fail(c, "give either 'seed' or 'seeds', not both");
        if (const YAML::Node s = c["seed"]) cfg.coefficients.seeds = {p.scalar<std::uint64_t>(s, "seed")};
        if (const YAML::Node s = c["seeds"]) {
            cfg.coefficients.seeds.clear();
            if (s.IsSequence()) {
                for (const auto& e : s) cfg.coefficients.seeds.push_back(p.scalar<std::uint64_t>(e, "seeds"));
            } else if (s.IsMap()) {
                p.check_keys(s, {"first", "count"}, "seeds");
                if (!s["first"] || !s["count"]) p.fail(s, "seeds needs 'first' and 'count'");
                const auto first = p.scalar<std::uint64_t>(s["first"], "first");
                const auto count = p.scalar<std::uint64_t>(s["count"], "count");
                for (std::uint64_t k = 0; k < count; ++k) cfg.coefficients.seeds.push_back(first + k);
            } else {
                p.fail(s, "seeds must be a list or {first, count}");
            }
            if (cfg.coefficients.seeds.empty()) p.fail(s, "seed list is empty");
        }
        CoefficientParams& cp = cfg.coefficients.params;
        p.read(c, "value", cp.value);
        p.read_positive(c, "cell", cp.cell);
        p.read(c, "hx", cp.hx);
        p.read(c, "hv", cp.hv);
        p.read(c, "ht", cp.ht);
        p.read(c, "kx", cp.kx);
        p.read(c, "kv", cp.kv);
        p.read(c, "kt", cp.kt);
    }
    if (const YAML::Node i = root["initial"]) {
        p.check_keys(i, {"kind", "seed", "mean_x", "mean_v", "cov_xx", "cov_xv", "cov_vv", "mass", "width", "count",
                         "amplitude", "modulation"},
                     "initial");
        if (const YAML::Node k = i["kind"]) cfg.initial.kind = lookup(p, k, initial_names(), "initial condition");
        p.read(i, "seed", cfg.initial.seed);
        Gaussian2& g = cfg.initial.gaussian;
        p.read(i, "mean_x", g.mean_x);
        p.read(i, "mean_v", g.mean_v);
        p.read_positive(i, "cov_xx", g.cov_xx);
        p.read(i, "cov_xv", g.cov_xv);
        p.read_positive(i, "cov_vv", g.cov_vv);
        p.read(i, "mass", g.mass);
        if (g.cov_xv * g.cov_xv >= g.cov_xx * g.cov_vv) p.fail(i, "covariance must be positive definite");
        p.read_positive(i, "width", cfg.initial.width);
        p.read_count(i, "count", cfg.initial.count);
        p.read(i, "amplitude", cfg.initial.amplitude);
        p.read(i, "modulation", cfg.initial.modulation);
    }
    if (const YAML::Node s = root["scheme"]) {
        p.check_keys(s, {"transport", "theta", "face_average", "cfl_safety"}, "scheme");
        if (const YAML::Node t = s["transport"]) cfg.scheme.transport = lookup(p, t, transport_names(), "transport");
        p.read(s, "theta", cfg.scheme.diffusion_theta);
        if (!(cfg.scheme.diffusion_theta >= 0.5 && cfg.scheme.diffusion_theta <= 1.0))
            p.fail(s["theta"] ? s["theta"] : s, "theta must lie in [0.5, 1]");
        if (const YAML::Node f = s["face_average"]) {
            const std::string v = p.scalar<std::string>(f, "face_average");
            if (v == "harmonic")
                cfg.scheme.face_average = FaceAverage::Harmonic;
            else if (v == "arithmetic")
                cfg.scheme.face_average = FaceAverage::Arithmetic;
            else
                p.fail(f, "face_average must be 'harmonic' or 'arithmetic'");
        }
        p.read_positive(s, "cfl_safety", cfg.scheme.cfl_safety);
    }
    if (const YAML::Node t = root["tasks"]) {
        if (!t.IsSequence()) p.fail(t, "tasks must be a list");
        for (const auto& e : t) cfg.tasks.push_back(parse_task(p, e));
    }
    if (const YAML::Node c = root["caps"]) {
        p.check_keys(c, {"energy_grad", "energy_lqv", "energy_linf", "averaging_l2", "averaging_lq", "mixed_gain",
                         "integrability_gain", "sup_bound", "grad_l2eps", "caccio_mean", "poincare"},
                     "caps");
        Caps& k = cfg.caps;
        p.read_positive(c, "energy_grad", k.energy_grad);
        p.read_positive(c, "energy_lqv", k.energy_lqv);
        p.read_positive(c, "energy_linf", k.energy_linf);
        p.read_positive(c, "averaging_l2", k.averaging_l2);
        p.read_positive(c, "averaging_lq", k.averaging_lq);
        p.read_positive(c, "mixed_gain", k.mixed_gain);
        p.read_positive(c, "integrability_gain", k.integrability_gain);
        p.read_positive(c, "sup_bound", k.sup_bound);
        p.read_positive(c, "grad_l2eps", k.grad_l2eps);
        p.read_positive(c, "caccio_mean", k.caccio_mean);
        p.read_positive(c, "poincare", k.poincare);
    }
    if (const YAML::Node o = root["output"]) cfg.output = p.scalar<std::string>(o, "output");
    for (auto& g : cfg.ladder) {
        g.lx = cfg.grid.lx;
        g.v_max = cfg.grid.v_max;
        g.t_start = cfg.grid.t_start;
        g.t_end = cfg.grid.t_end;
    }
    return cfg;
}

// ---------------------------------------------------------------------------------------------
// Task helpers

double default_q(const std::string& name) {
    if (name == "energy") return 6.0;
    if (name == "averaging") return 1.5;
    if (name == "integrability") return 4.0;
    return kNaN;
}

bool default_positive_part(const std::string& name) {
    return name == "integrability" || name == "sup_bound" || name == "moser";
}

// Largest set a task touches, as (x half-width, v radius, duration).
Extents task_reach(const TaskConfig& t) {
    const auto straight = [](double r) { return Extents{r * r * r, r, r * r}; };
    if (t.name == "weighted_mean") {
        const double r = 3.0 * t.R1;
        // Each (v, t) row of QQ_3R is an x-interval of half-width 27 R^3.
        return {27.0 * t.R1 * t.R1 * t.R1, r, r * r};
    }
    if (t.name == "holder") {
        double r = 0.0;
        for (double s : t.scales) r = std::max(r, s);
        return straight(r);
    }
    if (t.name == "doubling" || t.name == "degiorgi") return {2.0, 2.0, 2.0};
    return straight(t.R0);
}

void check_task_geometry(const ExperimentConfig& cfg, const TaskConfig& t, const GridSpec& g) {
    const auto fail = [&](const std::string& msg) {
        throw ConfigError(cfg.source + ":" + std::to_string(t.line) + ": task '" + t.name + "': " + msg);
    };
    const Point z = t.center(g);
    const Extents e = task_reach(t);
    // Keep two cells between cylinders and the zero-flux velocity walls.
    const double margin = 2.0 * g.dv();
    if (std::abs(z.v[0]) + e.v_radius > g.v_max - margin) fail("cylinder exceeds the velocity domain");
    if (z.t > g.t_end || z.t - e.duration < g.t_start) fail("cylinder exceeds the time interval");
    if (2.0 * e.x_radius > g.lx) fail("cylinder is longer than the x period");
    if (t.name != "weighted_mean" && t.name != "holder" && t.name != "doubling" && t.name != "degiorgi" &&
        !(t.R1 < t.R0))
        fail("R1 must be smaller than R0");
    if (t.name == "averaging" && !(1.2599210498948732 * t.R1 < t.R0))
        fail("averaging needs 2^{1/3} R1 < R0 so the sheared cylinder nests");
}

GridField positive(const GridField& f) { return apply_convex_change(f, convex::positive_part); }

std::string family_of(const std::string& estimate_id) {
    if (estimate_id.rfind("energy", 0) == 0) return "energy";
    if (estimate_id.rfind("averaging", 0) == 0) return "averaging";
    if (estimate_id == "integrability_gain") return "integrability";
    if (estimate_id == "caccio_mean" || estimate_id == "poincare") return "weighted_mean";
    return estimate_id;
}

void run_one_task(const ExperimentConfig& cfg, const TaskConfig& t, const GridField& f, std::uint64_t seed,
                  TaskResults& out) {
    const GridSpec& g = f.grid;
    const Point z = t.center(g);
    const bool pp = t.positive_part.value_or(default_positive_part(t.name));
    const double q = std::isnan(t.q) ? default_q(t.name) : t.q;
    const CylinderSpec outer(z, t.R0), inner(z, t.R1);
    auto push = [&](EstimateReport r) {
        r.seed = seed;
        out.reports.push_back(std::move(r));
    };
    auto input = [&]() { return pp ? positive(f) : f; };

    if (t.name == "energy") {
        for (auto& r : verify_energy(input(), inner, outer, q, cfg.caps)) push(r);
    } else if (t.name == "averaging") {
        for (auto& r : verify_averaging_gain(f, inner, outer, q, cfg.caps)) push(r);
    } else if (t.name == "mixed_gain") {
        push(verify_mixed_gain(input(), inner, outer, cfg.caps));
    } else if (t.name == "integrability") {
        push(verify_integrability_gain(input(), inner, outer, q, cfg.caps));
    } else if (t.name == "sup_bound") {
        push(verify_sup_bound(input(), outer, inner, cfg.caps));
    } else if (t.name == "grad_l2eps") {
        GradL2EpsResult r = verify_grad_l2eps(f, inner, outer, t.eps, t.q_low, t.theta0, cfg.caps);
        push(r.report);
        out.gehring.push_back(std::move(r.scan));
    } else if (t.name == "weighted_mean") {
        for (auto& r : verify_weighted_mean(f, z, t.R1, cfg.caps)) push(r);
    } else if (t.name == "moser") {
        out.moser.push_back(moser_iterate(positive(f), outer, t.R1, t.kappa, t.n_max, t.c_bar));
    } else if (t.name == "holder") {
        const double floor = t.noise_floor < 0.0 ? oracle_noise_floor(g) : t.noise_floor;
        out.holder.push_back(estimate_holder(f, z, t.scales, floor));
    } else if (t.name == "doubling") {
        if (std::isnan(t.alpha_hat)) throw std::invalid_argument("doubling needs alpha_hat");
        const double c0 = std::isnan(t.c0_hat) ? kFrozenC0Hat : t.c0_hat;
        if (std::isnan(c0)) throw std::invalid_argument("doubling needs c0_hat (no frozen value)");
        const GridField n = normalize_on(f, degiorgi_box(z, 2.0));
        out.doubling.push_back(doubling_iteration(n, z, t.alpha_hat, c0));
    } else if (t.name == "degiorgi") {
        out.degiorgi.push_back(measure_degiorgi(f, z));
    } else {
        throw ConfigError("unknown task '" + t.name + "'");
    }
}

std::vector<TaskConfig> select_tasks(const ExperimentConfig& cfg, const std::vector<std::string>& names) {
    if (names.empty()) return cfg.tasks;
    const auto& fams = task_families();
    std::vector<TaskConfig> out;
    for (const auto& n : names) {
        if (std::find(fams.begin(), fams.end(), n) == fams.end()) throw ConfigError("unknown task '" + n + "'");
        bool found = false;
        for (const auto& t : cfg.tasks)
            if (t.name == n) {
                out.push_back(t);
                found = true;
            }
        if (!found) {
            TaskConfig t;
            t.name = n;
            out.push_back(t);
        }
    }
    return out;
}

std::string grid_key(const GridSpec& g) {
    return std::to_string(g.nx) + "x" + std::to_string(g.nv) + "x" + std::to_string(g.nt);
}

void write_text(const fs::path& path, const std::string& text) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw std::runtime_error("cannot write " + path.string());
    os << text;
}

std::string fnv1a_hex(const std::string& s) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

nlohmann::ordered_json diagnostics_json(const SolveDiagnostics& d) {
    nlohmann::ordered_json j;
    j["max_mass_drift"] = d.max_mass_drift;
    j["energy_increases"] = d.energy_increases;
    j["min_value"] = d.min_value;
    j["max_value"] = d.max_value;
    j["initial_min"] = d.initial_min;
    j["initial_max"] = d.initial_max;
    j["ellipticity"] = {{"min_eig", d.ellipticity.min_eig},
                        {"max_eig", d.ellipticity.max_eig},
                        {"samples", d.ellipticity.samples},
                        {"pass", d.ellipticity.pass}};
    return j;
}

MemberResult run_member(const ExperimentConfig& cfg, std::size_t grid_index, std::size_t member_index,
                        const std::vector<TaskConfig>& tasks) {
    MemberResult m;
    m.grid_index = grid_index;
    m.member_index = member_index;
    m.grid = cfg.grids()[grid_index];
    m.seed = cfg.coefficients.seeds[member_index];
    try {
        const CoefficientField field = make_coefficients(cfg.coefficients, member_index);
        const std::vector<double> init = make_initial(cfg.initial, m.grid, m.seed);
        const GridField f = solve(init, field, m.grid, cfg.scheme);
        m.diagnostics = diagnose(f, init, m.grid, field);
        for (const auto& t : tasks) {
            try {
                run_one_task(cfg, t, f, m.seed, m.results);
            } catch (const std::exception& e) {
                m.results.errors.push_back(t.name + ": " + e.what());
            }
        }
    } catch (const std::exception& e) {
        m.error = e.what();
    }
    return m;
}

bool reports_pass(const std::vector<EstimateReport>& reports) {
    return std::all_of(reports.begin(), reports.end(), [](const EstimateReport& r) { return r.pass; });
}

}  // namespace

// -------------------------------------------------------------------------------------------------

Point TaskConfig::center(const GridSpec& g) const {
    return Point(std::isnan(x0) ? 0.5 * g.lx : x0, std::isnan(v0) ? 0.0 : v0, std::isnan(t0) ? g.t_end : t0);
}

std::vector<GridSpec> ExperimentConfig::grids() const { return ladder.empty() ? std::vector<GridSpec>{grid} : ladder; }

std::string ExperimentConfig::canonical() const {
    std::ostringstream os;
    auto kv = [&](const std::string& k, const std::string& v) { os << k << '=' << v << '\n'; };
    auto d = [&](const std::string& k, double v) { kv(k, format_double(v)); };
    for (const auto& g : grids()) {
        kv("grid", grid_key(g));
        d("grid.lx", g.lx);
        d("grid.v_max", g.v_max);
        d("grid.t_start", g.t_start);
        d("grid.t_end", g.t_end);
    }
    for (auto k : coefficients.kinds) kv("coefficients.kind", name_of(coefficient_names(), k));
    d("coefficients.lambda", coefficients.lambda);
    d("coefficients.Lambda", coefficients.Lambda);
    for (auto s : coefficients.seeds) kv("coefficients.seed", std::to_string(s));
    const CoefficientParams& cp = coefficients.params;
    for (auto [k, v] : {std::pair{"value", cp.value}, {"cell", cp.cell}, {"hx", cp.hx}, {"hv", cp.hv}, {"ht", cp.ht},
                        {"kx", cp.kx}, {"kv", cp.kv}, {"kt", cp.kt}})
        d(std::string("coefficients.") + k, v);
    kv("initial.kind", name_of(initial_names(), initial.kind));
    kv("initial.seed", std::to_string(initial.seed));
    const Gaussian2& g = initial.gaussian;
    for (auto [k, v] : {std::pair{"mean_x", g.mean_x}, {"mean_v", g.mean_v}, {"cov_xx", g.cov_xx}, {"cov_xv", g.cov_xv},
                        {"cov_vv", g.cov_vv}, {"mass", g.mass}, {"width", initial.width},
                        {"amplitude", initial.amplitude},
                        {"modulation", initial.modulation}})
        d(std::string("initial.") + k, v);
    kv("initial.count", std::to_string(initial.count));
    kv("scheme.transport", name_of(transport_names(), scheme.transport));
    d("scheme.theta", scheme.diffusion_theta);
    kv("scheme.face_average", scheme.face_average == FaceAverage::Harmonic ? "harmonic" : "arithmetic");
    d("scheme.cfl_safety", scheme.cfl_safety);
    for (std::size_t k = 0; k < tasks.size(); ++k) {
        const TaskConfig& t = tasks[k];
        const std::string p = "task" + std::to_string(k) + ".";
        kv(p + "name", t.name);
        for (auto [n, v] : {std::pair{"x0", t.x0}, {"v0", t.v0}, {"t0", t.t0}, {"R0", t.R0}, {"R1", t.R1}, {"q", t.q},
                            {"eps", t.eps}, {"q_low", t.q_low}, {"theta0", t.theta0}, {"kappa", t.kappa},
                            {"c_bar", t.c_bar}, {"alpha_hat", t.alpha_hat}, {"c0_hat", t.c0_hat},
                            {"delta1", t.delta1}, {"delta2", t.delta2}, {"noise_floor", t.noise_floor}})
            d(p + n, v);
        kv(p + "n_max", std::to_string(t.n_max));
        kv(p + "min_qualifying", std::to_string(t.min_qualifying));
        for (double s : t.scales) d(p + "scale", s);
        kv(p + "positive_part", t.positive_part ? (*t.positive_part ? "true" : "false") : "default");
    }
    for (auto [n, v] : {std::pair{"energy_grad", caps.energy_grad}, {"energy_lqv", caps.energy_lqv},
                        {"energy_linf", caps.energy_linf}, {"averaging_l2", caps.averaging_l2},
                        {"averaging_lq", caps.averaging_lq}, {"mixed_gain", caps.mixed_gain},
                        {"integrability_gain", caps.integrability_gain}, {"sup_bound", caps.sup_bound},
                        {"grad_l2eps", caps.grad_l2eps}, {"caccio_mean", caps.caccio_mean},
                        {"poincare", caps.poincare}})
        d(std::string("caps.") + n, v);
    return os.str();
}

std::string ExperimentConfig::hash() const { return fnv1a_hex(canonical()); }

ExperimentConfig parse_config(const std::string& text, const std::string& source) {
    Parser p{source};
    YAML::Node root;
    try {
        root = YAML::Load(text);
    } catch (const YAML::ParserException& e) {
        throw ConfigError(source + ":" + std::to_string(e.mark.line + 1) + ":" + std::to_string(e.mark.column + 1) +
                          ": " + e.msg);
    }
    ExperimentConfig cfg = parse_root(p, root);
    validate_config(cfg);
    return cfg;
}

ExperimentConfig load_config(const fs::path& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw ConfigError(path.string() + ": cannot open config");
    std::ostringstream ss;
    ss << is.rdbuf();
    ExperimentConfig cfg = parse_config(ss.str(), path.string());
    return cfg;
}

void validate_config(const ExperimentConfig& cfg) {
    try {
        for (const auto& g : cfg.grids()) g.validate();
        cfg.scheme.validate();
    } catch (const std::invalid_argument& e) {
        throw ConfigError(cfg.source + ": " + e.what());
    }
    if (cfg.coefficients.seeds.empty()) throw ConfigError(cfg.source + ": no coefficient seeds");
    if (cfg.coefficients.kinds.empty()) throw ConfigError(cfg.source + ": no coefficient kinds");
    if (!(cfg.coefficients.lambda > 0.0 && cfg.coefficients.Lambda >= cfg.coefficients.lambda))
        throw ConfigError(cfg.source + ": need 0 < lambda <= Lambda");
    for (const auto& t : cfg.tasks)
        for (const auto& g : cfg.grids()) check_task_geometry(cfg, t, g);
}

const std::vector<std::string>& task_families() {
    static const std::vector<std::string> f{"energy",        "averaging", "mixed_gain", "integrability",
                                            "sup_bound",     "grad_l2eps", "weighted_mean", "moser",
                                            "holder",        "doubling",  "degiorgi"};
    return f;
}

std::vector<double> make_initial(const InitialConfig& init, const GridSpec& grid, std::uint64_t member_seed) {
    const std::int64_t key = static_cast<std::int64_t>(member_seed);
    const std::uint64_t seed = hash_keys(init.seed, std::span<const std::int64_t>(&key, 1));
    const double lx = grid.lx, V = grid.v_max;
    const double pi = std::numbers::pi;
    switch (init.kind) {
        case InitialKind::Gaussian:
            return sample_slice(grid, [&](double x, double v) { return periodic_density(init.gaussian, x, v, lx); });
        case InitialKind::OracleDelta: {
            Gaussian2 g = init.gaussian;
            g.cov_xx = init.width * init.width;
            g.cov_vv = init.width * init.width;
            g.cov_xv = 0.0;
            return sample_slice(grid, [&](double x, double v) { return periodic_density(g, x, v, lx); });
        }
        case InitialKind::MultiBump: {
            struct B {
                double xc, vc, wx, wv, a;
            };
            UniformStream u(seed);
            std::vector<B> bumps;
            for (int k = 0; k < init.count; ++k) {
                B b;
                b.xc = u.next(0.0, lx);
                b.vc = u.next(-0.5 * V, 0.5 * V);
                b.wx = u.next(0.1, 0.3) * lx;
                b.wv = u.next(0.2, 0.5) * V;
                b.a = init.amplitude * u.next(0.5, 1.0);
                bumps.push_back(b);
            }
            return sample_slice(grid, [&](double x, double v) {
                double s = 0.0;
                for (const auto& b : bumps) {
                    double dx = std::fmod(x - b.xc, lx);
                    if (dx >= 0.5 * lx) dx -= lx;
                    if (dx < -0.5 * lx) dx += lx;
                    s += b.a * bump(dx / b.wx) * bump((v - b.vc) / b.wv);
                }
                return s;
            });
        }
        case InitialKind::RandomSmooth: {
            const int m = init.count;
            UniformStream u(seed);
            std::vector<double> amp, phase;
            for (int k = 0; k <= m; ++k)
                for (int j = 0; j <= m; ++j) {
                    amp.push_back(u.next(-1.0, 1.0) / ((1.0 + k + j) * (1.0 + k + j)));
                    phase.push_back(u.next(0.0, 2.0 * pi));
                }
            return sample_slice(grid, [&](double x, double v) {
                double s = 0.0;
                for (int k = 0; k <= m; ++k)
                    for (int j = 0; j <= m; ++j) {
                        const std::size_t idx = static_cast<std::size_t>(k * (m + 1) + j);
                        // cos(j pi (v + V) / 2V) has zero slope at the velocity walls.
                        s += amp[idx] * std::cos(2.0 * pi * k * x / lx + phase[idx]) *
                             std::cos(j * pi * (v + V) / (2.0 * V));
                    }
                return init.amplitude * s;
            });
        }
        case InitialKind::Front: {
            const double phase = UniformStream(seed).next(0.0, 2.0 * pi);
            return sample_slice(grid, [&](double x, double v) {
                const double vc = init.gaussian.mean_v + init.modulation * std::sin(2.0 * pi * x / lx + phase);
                return init.amplitude * std::tanh((v - vc) / init.width);
            });
        }
    }
    throw std::logic_error("unhandled initial kind");
}

CoefficientField make_coefficients(const CoefficientConfig& c, std::size_t member_index) {
    if (member_index >= c.seeds.size()) throw std::out_of_range("member index beyond the seed list");
    const CoefficientKind kind = c.kinds[member_index % c.kinds.size()];
    return CoefficientField::generate(kind, c.lambda, c.Lambda, c.seeds[member_index], c.params);
}

SolveDiagnostics diagnose(const GridField& f, std::span<const double> initial, const GridSpec& grid,
                          const CoefficientField& field) {
    SolveDiagnostics d;
    const double m0 = slice_mass(initial, grid);
    double abs0 = 0.0;
    for (double x : initial) abs0 += std::abs(x);
    abs0 *= grid.dx() * grid.dv();
    const double scale = abs0 > 0.0 ? abs0 : 1.0;
    double e_prev = slice_energy(initial, grid);
    const double e0 = e_prev;
    for (int n = 0; n < grid.nt; ++n) {
        d.max_mass_drift = std::max(d.max_mass_drift, std::abs(slice_mass(f.slice(n), grid) - m0) / scale);
        const double e = slice_energy(f.slice(n), grid);
        if (e > e_prev + 1e-12 * e0) ++d.energy_increases;
        e_prev = e;
    }
    const auto [lo, hi] = std::minmax_element(f.values.begin(), f.values.end());
    d.min_value = *lo;
    d.max_value = *hi;
    const auto [ilo, ihi] = std::minmax_element(initial.begin(), initial.end());
    d.initial_min = *ilo;
    d.initial_max = *ihi;
    d.ellipticity = validate_ellipticity(field, grid);
    return d;
}

SolveOutput run_solve(const ExperimentConfig& cfg, const fs::path& out) {
    validate_config(cfg);
    fs::create_directories(out);
    const GridSpec grid = cfg.grids().front();
    const CoefficientField field = make_coefficients(cfg.coefficients, 0);
    const std::vector<double> init = make_initial(cfg.initial, grid, cfg.coefficients.seeds.front());
    SolveOutput r;
    r.field = solve(init, field, grid, cfg.scheme);
    r.diagnostics = diagnose(r.field, init, grid, field);
    r.snapshot = out / "snapshot.kfp";
    r.metadata = out / "metadata.json";
    write_snapshot(r.field, r.snapshot);

    nlohmann::ordered_json j;
    j["format"] = "KFP1";
    j["snapshot"] = r.snapshot.filename().string();
    j["config_hash"] = cfg.hash();
    j["grid"] = {{"nx", grid.nx}, {"nv", grid.nv},       {"nt", grid.nt},          {"lx", grid.lx},
                 {"v_max", grid.v_max}, {"t_start", grid.t_start}, {"t_end", grid.t_end}};
    j["seed"] = cfg.coefficients.seeds.front();
    j["coefficient_kind"] = name_of(coefficient_names(), cfg.coefficients.kinds.front());
    j["initial_kind"] = name_of(initial_names(), cfg.initial.kind);
    j["diagnostics"] = diagnostics_json(r.diagnostics);
    write_text(r.metadata, j.dump(2) + "\n");
    return r;
}

TaskResults run_tasks(const ExperimentConfig& cfg, const GridField& f, std::uint64_t seed,
                      const std::vector<std::string>& tasks) {
    const std::vector<TaskConfig> selected = select_tasks(cfg, tasks);
    for (const auto& t : selected) check_task_geometry(cfg, t, f.grid);
    TaskResults out;
    for (const auto& t : selected) {
        try {
            run_one_task(cfg, t, f, seed, out);
        } catch (const ConfigError&) {
            throw;
        } catch (const std::exception& e) {
            out.errors.push_back(t.name + ": " + e.what());
        }
    }
    return out;
}

VerifyOutput run_verify(const ExperimentConfig& cfg, const fs::path& out, const std::vector<std::string>& tasks,
                        const std::optional<fs::path>& snapshot) {
    validate_config(cfg);
    const std::vector<TaskConfig> selected = select_tasks(cfg, tasks);
    if (selected.empty()) throw ConfigError(cfg.source + ": no tasks configured or requested");
    GridField f;
    if (snapshot) {
        f = read_snapshot(*snapshot);
    } else {
        const GridSpec grid = cfg.grids().front();
        const std::vector<double> init = make_initial(cfg.initial, grid, cfg.coefficients.seeds.front());
        f = solve(init, make_coefficients(cfg.coefficients, 0), grid, cfg.scheme);
    }
    std::vector<std::string> names;
    for (const auto& t : selected) names.push_back(t.name);
    names.erase(std::unique(names.begin(), names.end()), names.end());

    VerifyOutput v;
    v.results = run_tasks(cfg, f, cfg.coefficients.seeds.front(), names);
    MemberResult m;
    m.seed = cfg.coefficients.seeds.front();
    m.grid = f.grid;
    m.results = v.results;
    fs::create_directories(out);
    v.files = write_results(out, {m});
    v.all_pass = reports_pass(v.results.reports) && v.results.errors.empty();
    return v;
}

SweepOutput sweep(const ExperimentConfig& cfg, int threads, const std::vector<std::string>& tasks) {
    validate_config(cfg);
    const std::size_t n_grids = cfg.grids().size(), n_seeds = cfg.coefficients.seeds.size();
    if (n_grids < 2 && n_seeds < 2) throw ConfigError(cfg.source + ": a sweep needs at least 2 seeds or 2 grids");
    const std::vector<TaskConfig> selected = select_tasks(cfg, tasks);

    SweepOutput s;
    const std::size_t total = n_grids * n_seeds;
    s.members.resize(total);
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t k = next++; k < total; k = next++)
            s.members[k] = run_member(cfg, k / n_seeds, k % n_seeds, selected);
    };
    const int n_threads = std::max(1, std::min<int>(threads, static_cast<int>(total)));
    if (n_threads == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (int k = 0; k < n_threads; ++k) pool.emplace_back(worker);
        for (auto& t : pool) t.join();
    }

    const TaskConfig* dg = nullptr;
    for (const auto& t : selected)
        if (t.name == "degiorgi") dg = &t;
    if (dg) {
        for (std::size_t gi = 0; gi < n_grids; ++gi) {
            std::vector<DeGiorgiMember> measured;
            for (const auto& m : s.members)
                if (m.grid_index == gi)
                    for (const auto& d : m.results.degiorgi) measured.push_back(d);
            if (measured.empty()) {
                DeGiorgiParams empty;
                empty.status = "no members";
                s.degiorgi.push_back(empty);
                continue;
            }
            const double c0 = std::isnan(dg->c0_hat) ? kFrozenC0Hat : dg->c0_hat;
            s.degiorgi.push_back(combine_degiorgi(measured, 1, dg->delta1, dg->delta2, c0, dg->min_qualifying));
        }
    }
    s.aggregate = aggregate(cfg, s.members, s.degiorgi);
    for (const auto& m : s.members) s.all_pass = s.all_pass && reports_pass(m.results.reports);
    return s;
}

SweepOutput run_sweep(const ExperimentConfig& cfg, const fs::path& out, int threads,
                      const std::vector<std::string>& tasks) {
    SweepOutput s = sweep(cfg, threads, tasks);
    fs::create_directories(out);
    for (const auto& m : s.members) {
        const fs::path dir = out / "members" / ("seed_" + std::to_string(m.seed) + "_grid_" + grid_key(m.grid));
        fs::create_directories(dir);
        write_results(dir, {m});
    }
    s.files = write_results(out, s.members);

    std::ostringstream agg;
    write_aggregate_csv(agg, s.aggregate);
    write_text(out / "aggregate.csv", agg.str());
    s.files.push_back(out / "aggregate.csv");

    if (!s.degiorgi.empty()) {
        std::ostringstream os;
        os << "nt,nx,nv,delta1,delta2,c0_hat,alpha_hat,ensemble_size,qualifying,valid,status\n";
        const auto grids = cfg.grids();
        for (std::size_t k = 0; k < s.degiorgi.size(); ++k) {
            const DeGiorgiParams& p = s.degiorgi[k];
            const GridSpec& g = grids[std::min(k, grids.size() - 1)];
            os << g.nt << ',' << g.nx << ',' << g.nv << ',' << format_double(p.delta1) << ','
               << format_double(p.delta2) << ',' << format_double(p.c0_hat) << ',' << format_double(p.alpha_hat) << ','
               << p.ensemble_size << ',' << p.qualifying << ',' << (p.valid ? 1 : 0) << ',' << p.status << '\n';
        }
        write_text(out / "degiorgi_summary.csv", os.str());
        s.files.push_back(out / "degiorgi_summary.csv");
    }

    nlohmann::ordered_json j;
    j["config_hash"] = cfg.hash();
    j["members"] = s.members.size();
    j["all_pass"] = s.all_pass;
    nlohmann::ordered_json diag = nlohmann::ordered_json::array();
    for (const auto& m : s.members) {
        nlohmann::ordered_json e;
        e["seed"] = m.seed;
        e["grid"] = grid_key(m.grid);
        e["error"] = m.error;
        e["diagnostics"] = diagnostics_json(m.diagnostics);
        diag.push_back(e);
    }
    j["diagnostics"] = diag;
    write_text(out / "sweep.json", j.dump(2) + "\n");
    return s;
}

std::vector<AggregateRow> aggregate(const ExperimentConfig& cfg, const std::vector<MemberResult>& members,
                                    const std::vector<DeGiorgiParams>& degiorgi) {
    std::vector<AggregateRow> rows;
    const auto grids = cfg.grids();
    std::set<std::string> ids;
    for (const auto& m : members)
        for (const auto& r : m.results.reports) ids.insert(r.estimate_id);

    std::map<std::string, std::vector<double>> max_by_grid;
    for (std::size_t gi = 0; gi < grids.size(); ++gi) {
        for (const auto& id : ids) {
            double mx = -kInf;
            std::size_t count = 0, nonfinite = 0, failed = 0;
            for (const auto& m : members) {
                if (m.grid_index != gi) continue;
                for (const auto& r : m.results.reports) {
                    if (r.estimate_id != id) continue;
                    ++count;
                    if (!std::isfinite(r.ratio)) ++nonfinite;
                    else mx = std::max(mx, r.ratio);
                    if (!r.pass) ++failed;
                }
            }
            if (count == 0) continue;
            rows.push_back({"max_ratio", id, grids[gi], mx, count});
            rows.push_back({"nonfinite", id, grids[gi], static_cast<double>(nonfinite), count});
            rows.push_back({"cap_violations", id, grids[gi], static_cast<double>(failed), count});
            max_by_grid[id].push_back(mx);
        }
        double amin = kInf, lmin = kInf;
        std::size_t hcount = 0, errors = 0, solve_errors = 0;
        for (const auto& m : members) {
            if (m.grid_index != gi) continue;
            errors += m.results.errors.size();
            if (!m.error.empty()) ++solve_errors;
            for (const auto& h : m.results.holder) {
                ++hcount;
                amin = std::min(amin, h.alpha_hat);
                if (!std::isnan(h.lambda_hat)) lmin = std::min(lmin, h.lambda_hat);
            }
        }
        if (hcount > 0) {
            rows.push_back({"min_alpha_hat", "holder", grids[gi], amin, hcount});
            // lambda_hat is NaN when the scales hold no dyadic pair.
            rows.push_back({"min_lambda_hat", "holder", grids[gi], lmin == kInf ? kNaN : lmin, hcount});
        }
        rows.push_back({"task_errors", "", grids[gi], static_cast<double>(errors), errors});
        rows.push_back({"solve_errors", "", grids[gi], static_cast<double>(solve_errors), solve_errors});
        if (gi < degiorgi.size())
            rows.push_back({"degiorgi_alpha_hat", "degiorgi", grids[gi], degiorgi[gi].alpha_hat, degiorgi[gi].qualifying});
    }
    if (grids.size() >= 2) {
        for (const auto& [id, maxes] : max_by_grid) {
            if (maxes.size() < 2) continue;
            const double a = maxes[maxes.size() - 2], b = maxes.back();
            const double change = a == b ? 0.0 : 100.0 * std::abs(b - a) / std::abs(a);
            rows.push_back({"refinement_change_pct", id, grids.back(), change, 2});
        }
    }
    return rows;
}

void write_aggregate_csv(std::ostream& os, const std::vector<AggregateRow>& rows) {
    os << "statistic,estimate_id,nt,nx,nv,value,count\n";
    for (const auto& r : rows)
        os << r.statistic << ',' << r.estimate_id << ',' << r.grid.nt << ',' << r.grid.nx << ',' << r.grid.nv << ','
           << format_double(r.value) << ',' << r.count << '\n';
}

std::vector<fs::path> write_results(const fs::path& dir, const std::vector<MemberResult>& members) {
    std::map<std::string, std::ostringstream> families;
    std::ostringstream moser, holder, gehring, doubling, doubling_summary, degiorgi, errors;
    bool has_moser = false, has_holder = false, has_gehring = false, has_doubling = false, has_degiorgi = false,
         has_errors = false;
    for (const auto& m : members) {
        const GridSpec& g = m.grid;
        const std::string grid_cols = std::to_string(g.nt) + "," + std::to_string(g.nx) + "," + std::to_string(g.nv);
        for (const auto& r : m.results.reports) {
            auto& os = families[family_of(r.estimate_id)];
            const bool header = os.tellp() == 0;
            write_reports_csv(os, std::span<const EstimateReport>(&r, 1), header);
        }
        for (const auto& t : m.results.moser) {
            write_moser_csv(moser, t, m.seed, !has_moser);
            has_moser = true;
        }
        for (const auto& h : m.results.holder) {
            if (!has_holder) holder << "seed,nt,nx,nv,scale,oscillation,noise_floor,alpha_hat,lambda_hat,degenerate\n";
            has_holder = true;
            for (std::size_t k = 0; k < h.scales.size(); ++k)
                holder << m.seed << ',' << grid_cols << ',' << format_double(h.scales[k]) << ','
                       << format_double(h.oscillations[k]) << ',' << format_double(h.noise_floor) << ','
                       << format_double(h.alpha_hat) << ',' << format_double(h.lambda_hat) << ','
                       << (h.degenerate ? 1 : 0) << '\n';
        }
        for (const auto& s : m.results.gehring) {
            if (!has_gehring)
                gehring << "seed,nt,nx,nv,x,v,t,R,mean_gq_small,mean_g_big_pow,mean_gq_big,theta,b_ref,fraction_below\n";
            has_gehring = true;
            for (const auto& e : s.samples)
                gehring << m.seed << ',' << grid_cols << ',' << format_double(e.center.x[0]) << ','
                        << format_double(e.center.v[0]) << ',' << format_double(e.center.t) << ','
                        << format_double(e.radius) << ',' << format_double(e.mean_gq_small) << ','
                        << format_double(e.mean_g_big_pow) << ',' << format_double(e.mean_gq_big) << ','
                        << format_double(e.theta) << ',' << format_double(s.b_ref) << ','
                        << format_double(s.fraction_below) << '\n';
        }
        for (const auto& d : m.results.doubling) {
            write_doubling_csv(doubling, d, m.seed, !has_doubling);
            if (!has_doubling)
                doubling_summary << "seed,nt,nx,nv,k0,k_delta2,sup_half,bound,bound_holds,conclusive,"
                                    "monotonicity_exceptions,status\n";
            has_doubling = true;
            doubling_summary << m.seed << ',' << grid_cols << ',' << d.k0 << ',' << d.k_delta2 << ','
                             << format_double(d.sup_half) << ',' << format_double(d.bound) << ','
                             << (d.bound_holds ? 1 : 0) << ',' << (d.conclusive ? 1 : 0) << ','
                             << d.monotonicity_exceptions << ',' << d.status << '\n';
        }
        for (const auto& d : m.results.degiorgi) {
            if (!has_degiorgi) degiorgi << "seed,nt,nx,nv,upper,lower,band,sup_ratio\n";
            has_degiorgi = true;
            degiorgi << m.seed << ',' << grid_cols << ',' << format_double(d.upper) << ',' << format_double(d.lower)
                     << ',' << format_double(d.band) << ',' << format_double(d.sup_ratio) << '\n';
        }
        auto err = [&](const std::string& msg) {
            if (!has_errors) errors << "seed,nt,nx,nv,message\n";
            has_errors = true;
            std::string clean = msg;
            std::replace(clean.begin(), clean.end(), ',', ';');
            std::replace(clean.begin(), clean.end(), '\n', ' ');
            errors << m.seed << ',' << grid_cols << ',' << clean << '\n';
        };
        if (!m.error.empty()) err("solve: " + m.error);
        for (const auto& e : m.results.errors) err(e);
    }

    std::vector<fs::path> files;
    auto emit = [&](const std::string& name, const std::string& text) {
        write_text(dir / name, text);
        files.push_back(dir / name);
    };
    for (const auto& [name, os] : families) emit(name + ".csv", os.str());
    if (has_moser) emit("moser.csv", moser.str());
    if (has_holder) emit("holder.csv", holder.str());
    if (has_gehring) emit("gehring.csv", gehring.str());
    if (has_doubling) {
        emit("doubling.csv", doubling.str());
        emit("doubling_summary.csv", doubling_summary.str());
    }
    if (has_degiorgi) emit("degiorgi.csv", degiorgi.str());
    if (has_errors) emit("errors.csv", errors.str());
    return files;
}

}  // namespace kinreg
