#pragma once

#include "relucone/common.hpp"
#include "relucone/export.hpp"
#include "relucone/network.hpp"

#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace relucone {

enum class TaskKind { Preimage, Nesting, ContractionFlow, ManifoldTrace, Cells };

std::string task_name(TaskKind task);
/// Accepts the canonical names plus the CLI short forms "flow" and "trace".
TaskKind task_from_name(const std::string& name);

struct ScenarioLayerSpec {
    std::vector<double> taps;
    double bias = 0.0;
};

struct ScenarioConfig {
    std::string name = "custom";
    int dimension = 0;
    std::vector<ScenarioLayerSpec> layers;
    TaskKind task = TaskKind::Preimage;
    Vec target = Vec::Zero(0);         // preimage / contraction-flow tasks
    Vec manifold_base = Vec::Zero(0);  // manifold-trace task (raw, orthonormalized on use)
    Mat manifold_directions = Mat::Zero(0, 0);
    double offset = 0.0;  // companion manifold shift along the normal; 0 = single trace
    double box_radius = 2.0;
    double grid_resolution = 0.25;  // cells task
    int mc_samples = 4000;          // coverage estimate of the flow task
    int samples_per_piece = 20;
    std::uint64_t seed = 0;
    std::size_t piece_budget = 100000;
    double residual_tolerance = 1e-6;
    Tolerances tols;  // resolution order: built-in defaults < env vars < config file
};

/// Built-in tolerance defaults overridden by the environment variables
/// RELUCONE_EPS_RANK, RELUCONE_EPS_SOLVE and RELUCONE_MEMBERSHIP_TOL.
Tolerances tolerances_from_env();

/// Parse and validate a JSON scenario config (schema 1). Throws ConfigError.
ScenarioConfig parse_scenario_text(const std::string& json_text);
ScenarioConfig load_scenario_file(const std::string& path);

std::vector<std::string> bundled_scenario_names();
ScenarioConfig bundled_scenario(const std::string& name);

/// Circulant network assembled from the config's kernel taps and biases.
Network build_network(const ScenarioConfig& config);

struct ScenarioResult {
    GeometryExport geometry;
    std::string report;
    std::map<std::string, double> metrics;
    double max_forward_residual = 0.0;
    bool ok = true;
};

/// Execute the configured task deterministically and return the geometry
/// export plus a textual summary with the task's key metrics.
ScenarioResult run_scenario(const ScenarioConfig& config);

}  // namespace relucone
