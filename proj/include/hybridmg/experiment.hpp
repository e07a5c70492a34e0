#pragma once

#include "hybridmg/multigrid.hpp"

#include <iosfwd>
#include <limits>
#include <map>
#include <memory>
#include <string>
#include <vector>

namespace hybridmg {

/// `[section]` headers followed by `key = value` lines. Keys are stored as
/// "section.key"; `#` starts a comment.
class ConfigFile {
public:
    static ConfigFile parse(std::istream& in);
    static ConfigFile load(const std::string& path);

    bool has(const std::string& key) const { return values_.count(key) > 0; }
    std::string get(const std::string& key, const std::string& fallback) const;
    int get_int(const std::string& key, int fallback) const;
    double get_double(const std::string& key, double fallback) const;
    bool get_bool(const std::string& key, bool fallback) const;
    std::vector<std::string> get_list(const std::string& key) const;
    std::vector<int> get_int_list(const std::string& key, std::vector<int> fallback) const;

    std::vector<std::string> keys() const;
    std::string base_dir;

private:
    std::map<std::string, std::string> values_;
};

enum class Example { Example1, Example2, Example3, Example4, Example6, Linear };

std::string example_name(Example e);
Example parse_example(const std::string& name);

enum class SolveMode { MG, GmresMG, Gmres };

std::string mode_name(SolveMode m);
SolveMode parse_mode(const std::string& name);

struct ExperimentConfig {
    Example example = Example::Example1;
    Scheme scheme = Scheme::HDG;
    Stabilization tau;
    HminRule hmin = HminRule::Diameter;
    std::vector<int> orders{1};
    std::vector<int> levels{2, 3};

    MGOptions mg;
    std::vector<SolveMode> modes{SolveMode::MG, SolveMode::GmresMG};
    double tol = 1e-9;
    int maxit = 200;

    std::string mesh_path;             // example2: triangle mesh file, generated box with holes when empty
    int box_cells = 32;                // example2 generated mesh resolution
    std::vector<Eigen::Vector2d> seeds; // example2/example3 level-1 seeds
};

/// Unknown keys and malformed values raise ConfigError naming the key.
ExperimentConfig experiment_config(const ConfigFile& file);
ExperimentConfig load_experiment_config(const std::string& path);

struct ExampleInstance {
    std::shared_ptr<const Mesh> mesh;
    ProblemSpec problem;
    MethodConfig method;
    AgglomerationHierarchy hierarchy;
    double split = std::numeric_limits<double>::quiet_NaN(); // example4 interface after snapping
};

/// Mesh, problem and method of one sweep cell. The hierarchy is built only when requested.
ExampleInstance make_instance(const ExperimentConfig& cfg, int order, int levels, bool with_hierarchy = true);

/// Checkerboard interface coordinate 0.56 snapped to the nearest line of an n x n grid.
double snapped_split(int n);

struct ResultRow {
    int order = 0;
    int levels = 0;
    SolveMode mode = SolveMode::MG;
    int iterations = 0;
    SolveStatus status = SolveStatus::MaxIter;
    double residual = 0.0;
    double seconds = 0.0;
    double split = std::numeric_limits<double>::quiet_NaN();
};

/// Rows ordered by order, levels, then the configured mode order.
std::vector<ResultRow> run_experiment(const ExperimentConfig& cfg);

/// `seconds` is written as 0 when `deterministic` is set.
void write_result_csv(std::ostream& out, const std::vector<ResultRow>& rows, bool deterministic);

/// Iteration grid per mode; "*" marks cells that did not converge.
void write_result_table(std::ostream& out, const std::vector<ResultRow>& rows);

struct ConvergenceRow {
    int order = 0;
    int cells = 0; // 2^levels: grid cells per side, or twice the ring count on the disk
    double h = 0.0;
    double error = 0.0;
    double rate = std::numeric_limits<double>::quiet_NaN(); // log2(e_2h / e_h), NaN on the coarsest mesh
};

/// L2 error of the volume unknown q on successively refined meshes given by `cfg.levels`.
std::vector<ConvergenceRow> run_convergence(const ExperimentConfig& cfg);
void write_convergence_csv(std::ostream& out, const std::vector<ConvergenceRow>& rows);

/// CSV `levels,level,element,macro` for every configured hierarchy depth.
void write_hierarchy_csv(std::ostream& out, const ExperimentConfig& cfg);

} // namespace hybridmg
