#include "hybridmg/experiment.hpp"

#include "hybridmg/error.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <set>
#include <sstream>

namespace hybridmg {

namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

std::string lower(std::string s) {
    std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
    return s;
}

std::vector<std::string> split_list(const std::string& value) {
    std::vector<std::string> out;
    std::stringstream ss(value);
    std::string item;
    while (std::getline(ss, item, ',')) {
        item = trim(item);
        if (!item.empty()) out.push_back(item);
    }
    return out;
}

int to_int(const std::string& key, const std::string& text) {
    std::size_t used = 0;
    int v = 0;
    try {
        v = std::stoi(text, &used);
    } catch (const std::exception&) {
        throw ConfigError("key '" + key + "': expected an integer, got '" + text + "'");
    }
    if (used != text.size()) throw ConfigError("key '" + key + "': expected an integer, got '" + text + "'");
    return v;
}

double to_double(const std::string& key, const std::string& text) {
    std::size_t used = 0;
    double v = 0.0;
    try {
        v = std::stod(text, &used);
    } catch (const std::exception&) {
        throw ConfigError("key '" + key + "': expected a number, got '" + text + "'");
    }
    if (used != text.size()) throw ConfigError("key '" + key + "': expected a number, got '" + text + "'");
    return v;
}

// Manufactured solution q = x y exp(x^2 y^3).
double q_exact(const Eigen::Vector2d& p) {
    const double x = p.x(), y = p.y();
    return x * y * std::exp(x * x * y * y * y);
}

Eigen::Vector2d q_gradient(const Eigen::Vector2d& p) {
    const double x = p.x(), y = p.y();
    const double e = std::exp(x * x * y * y * y);
    return {y * e * (1.0 + 2.0 * x * x * y * y * y), x * e * (1.0 + 3.0 * x * x * y * y * y)};
}

double q_laplacian(const Eigen::Vector2d& p) {
    const double x = p.x(), y = p.y();
    const double x2y3 = x * x * y * y * y;
    const double e = std::exp(x2y3);
    return 2.0 * x * std::pow(y, 4) * e * (3.0 + 2.0 * x2y3) + 3.0 * x * x * x * y * y * e * (4.0 + 3.0 * x2y3);
}

constexpr double pi = std::numbers::pi;

double kappa_smooth(const Eigen::Vector2d& p) { return 1.0 + 0.5 * std::sin(2 * pi * p.x()) * std::cos(3 * pi * p.y()); }

Eigen::Vector2d kappa_smooth_gradient(const Eigen::Vector2d& p) {
    return {pi * std::cos(2 * pi * p.x()) * std::cos(3 * pi * p.y()),
            -1.5 * pi * std::sin(2 * pi * p.x()) * std::sin(3 * pi * p.y())};
}

double kappa_multinumerics(const Eigen::Vector2d& p) {
    return 1.0 + 0.5 * std::sin(4 * pi * p.x()) * std::cos(3 * pi * p.y());
}

// Rings of roughly equilateral triangles, `rings` rings in the unit disk.
Mesh disk_for_rings(int rings) {
    std::vector<int> counts;
    for (int r = 1; r <= rings; ++r) counts.push_back(6 * r);
    return build_disk_mesh(counts);
}

std::vector<Eigen::Vector2d> default_seeds(Example e) {
    if (e == Example::Example3) return {{0.5, 0.5}, {-0.5, 0.5}, {-0.5, -0.5}, {0.5, -0.5}};
    return {{0.25, 0.25}, {0.75, 0.25}, {0.25, 0.75}, {0.75, 0.75}};
}

// Diagonal stripes of width 1/4 in x + y; even stripes use RT.
bool multinumerics_rt(const Eigen::Vector2d& c) { return static_cast<int>(std::floor(4.0 * (c.x() + c.y()))) % 2 == 0; }

const std::set<std::string> known_keys = {
    "problem.example", "problem.mesh",          "problem.cells",        "problem.seeds",
    "method.scheme",   "method.tau",            "method.tau_scale",     "method.hmin",
    "method.orders",   "multigrid.levels",      "multigrid.smoother",   "multigrid.schedule",
    "multigrid.steps", "multigrid.local_correction", "multigrid.post_local_correction",
    "multigrid.omega", "solver.modes",          "solver.tol",           "solver.maxit",
};

} // namespace

// ---------------------------------------------------------------------------
// Config file

ConfigFile ConfigFile::parse(std::istream& in) {
    ConfigFile cfg;
    std::string raw, section;
    int lineno = 0;
    while (std::getline(in, raw)) {
        ++lineno;
        if (auto hash = raw.find('#'); hash != std::string::npos) raw.erase(hash);
        const std::string line = trim(raw);
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']' || line.size() < 3) throw ParseError(lineno, "malformed section header '" + line + "'");
            section = lower(trim(line.substr(1, line.size() - 2)));
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos) throw ParseError(lineno, "expected 'key = value', got '" + line + "'");
        const std::string key = lower(trim(line.substr(0, eq)));
        if (key.empty()) throw ParseError(lineno, "empty key");
        const std::string full = section.empty() ? key : section + "." + key;
        if (cfg.values_.count(full)) throw ParseError(lineno, "duplicate key '" + full + "'");
        cfg.values_[full] = trim(line.substr(eq + 1));
    }
    return cfg;
}

ConfigFile ConfigFile::load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open config '" + path + "'");
    ConfigFile cfg = parse(in);
    const auto slash = path.find_last_of('/');
    cfg.base_dir = slash == std::string::npos ? "." : path.substr(0, slash);
    return cfg;
}

std::string ConfigFile::get(const std::string& key, const std::string& fallback) const {
    auto it = values_.find(key);
    return it == values_.end() ? fallback : it->second;
}

int ConfigFile::get_int(const std::string& key, int fallback) const {
    return has(key) ? to_int(key, get(key, "")) : fallback;
}

double ConfigFile::get_double(const std::string& key, double fallback) const {
    return has(key) ? to_double(key, get(key, "")) : fallback;
}

bool ConfigFile::get_bool(const std::string& key, bool fallback) const {
    if (!has(key)) return fallback;
    const std::string v = lower(get(key, ""));
    if (v == "true" || v == "on" || v == "yes" || v == "1") return true;
    if (v == "false" || v == "off" || v == "no" || v == "0") return false;
    throw ConfigError("key '" + key + "': expected a boolean, got '" + v + "'");
}

std::vector<std::string> ConfigFile::get_list(const std::string& key) const { return split_list(get(key, "")); }

std::vector<int> ConfigFile::get_int_list(const std::string& key, std::vector<int> fallback) const {
    if (!has(key)) return fallback;
    std::vector<int> out;
    for (const auto& item : get_list(key)) {
        // a..b ranges
        if (auto dots = item.find(".."); dots != std::string::npos) {
            const int a = to_int(key, trim(item.substr(0, dots)));
            const int b = to_int(key, trim(item.substr(dots + 2)));
            if (b < a) throw ConfigError("key '" + key + "': empty range '" + item + "'");
            for (int i = a; i <= b; ++i) out.push_back(i);
        } else {
            out.push_back(to_int(key, item));
        }
    }
    return out;
}

std::vector<std::string> ConfigFile::keys() const {
    std::vector<std::string> out;
    for (const auto& kv : values_) out.push_back(kv.first);
    return out;
}

// ---------------------------------------------------------------------------
// Names

std::string example_name(Example e) {
    switch (e) {
    case Example::Example1: return "example1";
    case Example::Example2: return "example2";
    case Example::Example3: return "example3";
    case Example::Example4: return "example4";
    case Example::Example6: return "example6";
    case Example::Linear: return "linear";
    }
    return "?";
}

Example parse_example(const std::string& name) {
    const std::string n = lower(name);
    for (Example e : {Example::Example1, Example::Example2, Example::Example3, Example::Example4, Example::Example6,
                      Example::Linear})
        if (n == example_name(e)) return e;
    throw ConfigError("key 'problem.example': unknown example '" + name + "'");
}

std::string mode_name(SolveMode m) {
    switch (m) {
    case SolveMode::MG: return "mg";
    case SolveMode::GmresMG: return "gmres+mg";
    case SolveMode::Gmres: return "gmres";
    }
    return "?";
}

SolveMode parse_mode(const std::string& name) {
    const std::string n = lower(name);
    if (n == "mg") return SolveMode::MG;
    if (n == "gmres+mg" || n == "gmres_mg") return SolveMode::GmresMG;
    if (n == "gmres") return SolveMode::Gmres;
    throw ConfigError("key 'solver.modes': unknown mode '" + name + "'");
}

// ---------------------------------------------------------------------------
// Experiment config

ExperimentConfig experiment_config(const ConfigFile& file) {
    for (const auto& key : file.keys())
        if (!known_keys.count(key)) throw ConfigError("unknown key '" + key + "'");

    auto wrap = [](const std::string& key, auto&& fn) {
        try {
            return fn();
        } catch (const ConfigError& e) {
            const std::string what = e.what();
            if (what.find("key '") != std::string::npos) throw;
            throw ConfigError("key '" + key + "': " + what);
        }
    };

    ExperimentConfig cfg;
    cfg.example = parse_example(file.get("problem.example", "example1"));
    cfg.scheme = wrap("method.scheme", [&] { return parse_scheme(file.get("method.scheme", "hdg")); });

    const bool ipdg = cfg.scheme == Scheme::NIPG || cfg.scheme == Scheme::IIPG || cfg.scheme == Scheme::SIPG;
    const bool variable_kappa = cfg.example == Example::Example3 || cfg.example == Example::Example4;
    TauRule default_rule = ipdg ? TauRule::Ipdg : TauRule::InvHmin;
    if (variable_kappa) default_rule = ipdg ? TauRule::KappaIpdg : TauRule::KappaInvHmin;
    cfg.tau.rule = file.has("method.tau")
                       ? wrap("method.tau", [&] { return parse_tau_rule(file.get("method.tau", "")); })
                       : default_rule;
    const double default_scale = (cfg.example == Example::Example3 && cfg.scheme == Scheme::SIPG) ? 1.5 : 1.0;
    cfg.tau.scale = file.get_double("method.tau_scale", default_scale);
    if (!(cfg.tau.scale > 0.0)) throw ConfigError("key 'method.tau_scale': must be positive");

    const std::string hmin = lower(file.get("method.hmin", "diameter"));
    if (hmin == "diameter") cfg.hmin = HminRule::Diameter;
    else if (hmin == "shortest_side") cfg.hmin = HminRule::ShortestSide;
    else throw ConfigError("key 'method.hmin': unknown rule '" + hmin + "'");

    cfg.orders = file.get_int_list("method.orders", cfg.orders);
    for (int p : cfg.orders)
        if (p < 1) throw ConfigError("key 'method.orders': orders must be >= 1");
    if (cfg.scheme == Scheme::RT || cfg.example == Example::Example6)
        for (int p : cfg.orders)
            if (p != 1) throw ConfigError("key 'method.orders': RT elements support order 1 only");

    cfg.levels = file.get_int_list("multigrid.levels", cfg.levels);
    for (int l : cfg.levels)
        if (l < 2) throw ConfigError("key 'multigrid.levels': levels must be >= 2");

    cfg.mg.smoother.kind =
        wrap("multigrid.smoother", [&] { return parse_smoother(file.get("multigrid.smoother", "block_jacobi")); });
    cfg.mg.smoother.omega = file.get_double("multigrid.omega", cfg.mg.smoother.omega);
    const std::string sched = lower(file.get("multigrid.schedule", "doubling"));
    if (sched == "doubling") cfg.mg.schedule = Schedule::Doubling;
    else if (sched == "constant2" || sched == "constant-2") cfg.mg.schedule = Schedule::Constant2;
    else throw ConfigError("key 'multigrid.schedule': unknown schedule '" + sched + "'");
    cfg.mg.base_steps = file.get_int("multigrid.steps", cfg.mg.base_steps);
    if (cfg.mg.base_steps < 1) throw ConfigError("key 'multigrid.steps': must be >= 1");
    cfg.mg.pre_local_correction = file.get_bool("multigrid.local_correction", cfg.mg.pre_local_correction);
    cfg.mg.post_local_correction = file.get_bool("multigrid.post_local_correction", cfg.mg.post_local_correction);

    if (file.has("solver.modes")) {
        cfg.modes.clear();
        for (const auto& m : file.get_list("solver.modes")) cfg.modes.push_back(parse_mode(m));
    }
    cfg.tol = file.get_double("solver.tol", cfg.tol);
    if (!(cfg.tol > 0.0)) throw ConfigError("key 'solver.tol': must be positive");
    cfg.maxit = file.get_int("solver.maxit", cfg.maxit);
    if (cfg.maxit < 1) throw ConfigError("key 'solver.maxit': must be >= 1");

    if (file.has("problem.mesh")) {
        std::string path = file.get("problem.mesh", "");
        if (!path.empty() && path.front() != '/') path = file.base_dir + "/" + path;
        if (!std::ifstream(path)) throw ConfigError("key 'problem.mesh': cannot open '" + path + "'");
        cfg.mesh_path = path;
    }
    cfg.box_cells = file.get_int("problem.cells", cfg.box_cells);
    if (cfg.box_cells < 8 || cfg.box_cells % 8 != 0)
        throw ConfigError("key 'problem.cells': must be a positive multiple of 8");
    for (const auto& item : file.get_list("problem.seeds")) {
        std::istringstream ss(item);
        double x = 0, y = 0;
        std::string rest;
        if (!(ss >> x >> y) || (ss >> rest)) throw ConfigError("key 'problem.seeds': expected 'x y', got '" + item + "'");
        cfg.seeds.emplace_back(x, y);
    }
    return cfg;
}

ExperimentConfig load_experiment_config(const std::string& path) { return experiment_config(ConfigFile::load(path)); }

// ---------------------------------------------------------------------------
// Instances

double snapped_split(int n) { return std::round(0.56 * n) / n; }

ExampleInstance make_instance(const ExperimentConfig& cfg, int order, int levels, bool with_hierarchy) {
    ExampleInstance inst;
    inst.method.scheme = cfg.scheme;
    inst.method.order = order;
    inst.method.tau = cfg.tau;
    inst.method.hmin = cfg.hmin;
    const int n = 1 << levels;
    bool structured = true;

    switch (cfg.example) {
    case Example::Example1:
        inst.mesh = std::make_shared<Mesh>(build_structured_quad_mesh(n));
        inst.problem = scalar_problem([](const Eigen::Vector2d&) { return 1.0; },
                                      [](const Eigen::Vector2d& p) { return -q_laplacian(p); }, q_exact, q_exact);
        break;
    case Example::Linear: {
        auto q = [](const Eigen::Vector2d& p) { return 1.0 + p.x() - 2.0 * p.y(); };
        inst.mesh = std::make_shared<Mesh>(build_structured_quad_mesh(n));
        inst.problem = scalar_problem([](const Eigen::Vector2d&) { return 1.0; },
                                      [](const Eigen::Vector2d&) { return 0.0; }, q, q);
        break;
    }
    case Example::Example2:
        inst.mesh = std::make_shared<Mesh>(cfg.mesh_path.empty() ? build_box_with_holes(cfg.box_cells)
                                                                 : import_tri_mesh(cfg.mesh_path));
        inst.problem = scalar_problem([](const Eigen::Vector2d&) { return 1.0; },
                                      [](const Eigen::Vector2d&) { return 1.0; },
                                      [](const Eigen::Vector2d&) { return 0.0; });
        structured = false;
        break;
    case Example::Example3:
        inst.mesh = std::make_shared<Mesh>(disk_for_rings(1 << (levels - 1)));
        inst.problem = scalar_problem(
            kappa_smooth,
            [](const Eigen::Vector2d& p) {
                return -(kappa_smooth(p) * q_laplacian(p) + kappa_smooth_gradient(p).dot(q_gradient(p)));
            },
            q_exact, q_exact);
        structured = false;
        break;
    case Example::Example4: {
        const double s = snapped_split(n);
        inst.split = s;
        inst.mesh = std::make_shared<Mesh>(build_structured_quad_mesh(n));
        inst.problem = scalar_problem(
            [s](const Eigen::Vector2d& p) {
                const bool low = p.x() < s && p.y() < s;
                const bool high = p.x() > s && p.y() > s;
                return low || high ? 1e6 : 1.0;
            },
            [](const Eigen::Vector2d&) { return 1.0; }, [](const Eigen::Vector2d&) { return 0.0; });
        break;
    }
    case Example::Example6: {
        auto mesh = std::make_shared<Mesh>(build_structured_tri_mesh(n));
        inst.method.element_schemes.resize(mesh->num_elements());
        for (int e = 0; e < mesh->num_elements(); ++e)
            inst.method.element_schemes[e] = multinumerics_rt(mesh->centroid(e)) ? Scheme::RT : Scheme::NIPG;
        inst.method.tau_by_scheme[Scheme::NIPG] = Stabilization{TauRule::Ipdg, 1.0};
        inst.mesh = mesh;
        inst.problem = scalar_problem(kappa_multinumerics, [](const Eigen::Vector2d&) { return 1.0; },
                                      [](const Eigen::Vector2d&) { return 0.0; });
        break;
    }
    }

    if (with_hierarchy) {
        if (structured) {
            inst.hierarchy = build_structured_hierarchy(*inst.mesh, levels);
        } else {
            const auto seeds = cfg.seeds.empty() ? default_seeds(cfg.example) : cfg.seeds;
            inst.hierarchy = build_seeded_hierarchy(*inst.mesh, levels, seeds);
        }
    }
    return inst;
}

// ---------------------------------------------------------------------------
// Sweeps

std::vector<ResultRow> run_experiment(const ExperimentConfig& cfg) {
    using clock = std::chrono::steady_clock;
    std::vector<ResultRow> rows;
    for (int p : cfg.orders)
        for (int L : cfg.levels) {
            const ExampleInstance inst = make_instance(cfg, p, L);
            const TraceSystem sys = assemble_trace(inst.mesh, inst.problem, inst.method);
            for (SolveMode mode : cfg.modes) {
                const auto t0 = clock::now();
                SolveResult res;
                if (mode == SolveMode::Gmres) {
                    res = gmres_solve(sys, nullptr, cfg.tol, cfg.maxit);
                } else {
                    const MGHierarchy mg(sys, inst.hierarchy, cfg.mg);
                    res = mode == SolveMode::MG ? mg_solve(sys, mg, cfg.tol, cfg.maxit)
                                                : gmres_solve(sys, &mg, cfg.tol, cfg.maxit);
                }
                ResultRow row;
                row.order = p;
                row.levels = L;
                row.mode = mode;
                row.iterations = res.iterations;
                row.status = res.status;
                row.residual = res.residual;
                row.seconds = std::chrono::duration<double>(clock::now() - t0).count();
                row.split = inst.split;
                rows.push_back(row);
            }
        }
    return rows;
}

void write_result_csv(std::ostream& out, const std::vector<ResultRow>& rows, bool deterministic) {
    out << "p,levels,mode,iters,status,residual,seconds\n";
    char buf[64];
    for (const auto& r : rows) {
        out << r.order << ',' << r.levels << ',' << mode_name(r.mode) << ',' << r.iterations << ','
            << status_name(r.status) << ',';
        std::snprintf(buf, sizeof buf, "%.6e", r.residual);
        out << buf << ',';
        std::snprintf(buf, sizeof buf, "%.4f", deterministic ? 0.0 : r.seconds);
        out << buf << '\n';
    }
}

void write_result_table(std::ostream& out, const std::vector<ResultRow>& rows) {
    std::vector<SolveMode> modes;
    std::vector<int> orders, levels;
    for (const auto& r : rows) {
        if (std::find(modes.begin(), modes.end(), r.mode) == modes.end()) modes.push_back(r.mode);
        if (std::find(orders.begin(), orders.end(), r.order) == orders.end()) orders.push_back(r.order);
        if (std::find(levels.begin(), levels.end(), r.levels) == levels.end()) levels.push_back(r.levels);
    }
    for (SolveMode m : modes) {
        out << mode_name(m) << "\n  p\\levels";
        for (int L : levels) out << '\t' << L;
        out << '\n';
        for (int p : orders) {
            out << "  " << p;
            for (int L : levels) {
                out << '\t';
                for (const auto& r : rows)
                    if (r.mode == m && r.order == p && r.levels == L) {
                        if (r.status == SolveStatus::Converged) out << r.iterations;
                        else out << '*';
                    }
            }
            out << '\n';
        }
    }
    for (int L : levels)
        for (const auto& r : rows)
            if (r.levels == L && std::isfinite(r.split)) {
                out << "levels " << L << ": interface snapped to " << r.split << '\n';
                break;
            }
}

std::vector<ConvergenceRow> run_convergence(const ExperimentConfig& cfg) {
    const bool exact = cfg.example == Example::Example1 || cfg.example == Example::Example3 ||
                       cfg.example == Example::Linear;
    if (!exact) throw ConfigError("key 'problem.example': " + example_name(cfg.example) + " has no exact solution");
    std::vector<ConvergenceRow> rows;
    for (int p : cfg.orders) {
        double prev = std::numeric_limits<double>::quiet_NaN();
        for (int L : cfg.levels) {
            const ExampleInstance inst = make_instance(cfg, p, L, false);
            const TraceSystem sys = assemble_trace(inst.mesh, inst.problem, inst.method);
            const Eigen::VectorXd lambda = solve_direct(sys);
            ConvergenceRow row;
            row.order = p;
            row.cells = 1 << L;
            row.h = cfg.example == Example::Example3 ? 2.0 / row.cells : 1.0 / row.cells;
            row.error = l2_error(sys, recover_volume(sys, lambda), inst.problem.exact);
            if (std::isfinite(prev) && row.error > 0.0) row.rate = std::log2(prev / row.error);
            prev = row.error;
            rows.push_back(row);
        }
    }
    return rows;
}

void write_convergence_csv(std::ostream& out, const std::vector<ConvergenceRow>& rows) {
    out << "p,cells,h,error,rate\n";
    char buf[128];
    for (const auto& r : rows) {
        std::snprintf(buf, sizeof buf, "%d,%d,%.6e,%.6e,", r.order, r.cells, r.h, r.error);
        out << buf;
        if (std::isfinite(r.rate)) {
            std::snprintf(buf, sizeof buf, "%.4f", r.rate);
            out << buf;
        }
        out << '\n';
    }
}

void write_hierarchy_csv(std::ostream& out, const ExperimentConfig& cfg) {
    out << "levels,level,element,macro\n";
    const int p = cfg.orders.empty() ? 1 : cfg.orders.front();
    for (int L : cfg.levels) {
        const ExampleInstance inst = make_instance(cfg, p, L);
        for (int k = 1; k <= inst.hierarchy.num_levels(); ++k) {
            const auto& lev = inst.hierarchy.level(k);
            for (int e = 0; e < static_cast<int>(lev.macro_of_element.size()); ++e)
                out << L << ',' << k << ',' << e << ',' << lev.macro_of_element[e] << '\n';
        }
    }
}

} // namespace hybridmg
