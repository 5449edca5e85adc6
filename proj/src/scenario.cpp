#include "relucone/scenario.hpp"

#include "relucone/circulant.hpp"
#include "relucone/manifold.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <limits>
#include <random>
#include <set>
#include <sstream>

namespace relucone {
namespace {

using nlohmann::json;

std::string num(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.6g", v);
    return buf;
}

std::uint64_t mix_seed(std::uint64_t base, std::uint64_t salt) {
    std::uint64_t z = base + 0x9e3779b97f4a7c15ULL * (salt + 1);
    z ^= z >> 30;
    z *= 0xbf58476d1ce4e5b9ULL;
    z ^= z >> 27;
    return z;
}

double env_override(const char* name, double fallback) {
    const char* raw = std::getenv(name);
    if (raw == nullptr || *raw == '\0') return fallback;
    char* end = nullptr;
    const double v = std::strtod(raw, &end);
    if (end == raw || *end != '\0' || !std::isfinite(v) || v <= 0.0)
        throw ConfigError(std::string("environment variable ") + name +
                          " must be a positive number, got '" + raw + "'");
    return v;
}

Vec parse_vec(const json& arr, int expect_dim, const std::string& what) {
    if (!arr.is_array()) throw ConfigError(what + " must be an array of numbers");
    Vec v(static_cast<Eigen::Index>(arr.size()));
    for (size_t i = 0; i < arr.size(); ++i) {
        if (!arr[i].is_number()) throw ConfigError(what + " must contain only numbers");
        v[static_cast<Eigen::Index>(i)] = arr[i].get<double>();
    }
    if (expect_dim >= 0 && v.size() != expect_dim)
        throw ConfigError(what + " must have exactly " + std::to_string(expect_dim) + " entries");
    if (!v.allFinite()) throw ConfigError(what + " must be finite");
    return v;
}

/// Distance from y to the affine subspace M.
double manifold_distance(const AffineSubspace& M, const Vec& y) {
    Vec r = y - M.base;
    if (M.directions.cols() > 0) r -= M.directions * (M.directions.transpose() * r);
    return r.norm();
}

struct LayerDiag {
    bool circulant = false;
    bool cone_ok = false;
    ConeDescriptor cone;
    double shift_error = 0.0;
    int nested = -1;  // 1 yes, 0 no, -1 not checked
    int nesting_violations = 0;
    int contraction_violations = -1;  // -1 not checked
};

LayerDiag diagnose_layer(const LayerMap& layer, const ScenarioConfig& cfg, int index) {
    LayerDiag diag;
    diag.circulant = is_circulant(layer);
    if (diag.circulant) {
        try {
            diag.cone = cone_of(layer, cfg.tols);
            diag.cone_ok = true;
        } catch (const ApexAtInfinity&) {
            diag.cone_ok = false;
        }
        diag.shift_error = check_shift_equivariance(layer, 100, mix_seed(cfg.seed, 900 + index));
    }
    const int d = layer.dim();
    if (d <= 12) {
        NestingReport rep = check_nesting(layer, 64, mix_seed(cfg.seed, 300 + index));
        diag.nested = rep.fully_nested ? 1 : 0;
        diag.nesting_violations = static_cast<int>(rep.violated_subsets.size());
    }
    if (d <= 8) {
        ContractionOptions copts;
        copts.box_radius = cfg.box_radius;
        ContractionReport rep = check_contraction(layer, mix_seed(cfg.seed, 500 + index), copts);
        diag.contraction_violations = static_cast<int>(rep.violations.size());
    }
    return diag;
}

void report_layer(std::ostringstream& out, int index, const LayerDiag& diag) {
    out << "layer " << index << ": circulant=" << (diag.circulant ? "true" : "false");
    if (diag.circulant) {
        if (diag.cone_ok) {
            out << " row_sum=" << num(diag.cone.row_sum) << " apex=" << num(diag.cone.apex[0])
                << " half_angle=" << num(diag.cone.half_angle)
                << " twist=" << num(diag.cone.twist);
        } else {
            out << " row_sum=0 apex=infinite";
        }
        out << " shift_error=" << num(diag.shift_error);
    }
    if (diag.nested >= 0)
        out << " nested=" << (diag.nested == 1 ? "true" : "false")
            << " nesting_violations=" << diag.nesting_violations;
    else
        out << " nested=skipped";
    if (diag.contraction_violations >= 0)
        out << " contraction_violations=" << diag.contraction_violations;
    else
        out << " contraction=skipped";
    out << "\n";
}

void add_plane_elements(GeometryExport& geo, const Network& net, const Tolerances& tols) {
    for (size_t l = 0; l < net.layers.size(); ++l) {
        for (int i = 0; i < net.dim(); ++i) {
            auto elem = plane_element(net.layers[l].hyperplane(i), static_cast<int>(l),
                                      geo.box_radius, tols);
            if (!elem) continue;
            elem->piece = i;
            geo.elements.push_back(std::move(*elem));
        }
    }
}

void add_piece_elements(GeometryExport& geo, const std::vector<AffinePiece>& pieces,
                        ElementRole role, int group, const Tolerances& tols) {
    for (const AffinePiece& piece : pieces) {
        for (ExportElement& elem : piece_elements(piece, role, geo.box_radius, tols)) {
            elem.group = group;
            geo.elements.push_back(std::move(elem));
        }
    }
}

void add_stage_elements(GeometryExport& geo, const std::vector<std::vector<AffinePiece>>& stages,
                        ElementRole role, int group, const Tolerances& tols) {
    for (const auto& stage : stages) add_piece_elements(geo, stage, role, group, tols);
}

/// Largest forward-map deviation from the target across sampled piece points.
double sampled_target_residual(const Network& net, const std::vector<AffinePiece>& pieces,
                               const Vec& target, const ScenarioConfig& cfg) {
    double worst = 0.0;
    for (const AffinePiece& piece : pieces) {
        const std::uint64_t seed = mix_seed(cfg.seed, 7000 + static_cast<std::uint64_t>(piece.id));
        for (const Vec& x :
             sample_piece(piece, cfg.samples_per_piece, seed, cfg.box_radius, cfg.tols.membership))
            worst = std::max(worst, (net_forward(net, x) - target).lpNorm<Eigen::Infinity>());
    }
    return worst;
}

void finish(ScenarioResult& result, std::ostringstream& out) {
    for (const auto& [key, value] : result.metrics) out << "metric " << key << " = " << num(value)
                                                        << "\n";
    out << "status: " << (result.ok ? "ok" : "failed") << "\n";
    result.report = out.str();
}

ScenarioResult run_preimage_like(const ScenarioConfig& cfg, const Network& net, bool with_flow) {
    ScenarioResult result;
    result.geometry.dimension = cfg.dimension;
    result.geometry.box_radius = cfg.box_radius;

    std::ostringstream out;
    out << "scenario: " << cfg.name << "\n";
    out << "task: " << task_name(cfg.task) << "\n";
    out << "dimension: " << cfg.dimension << "\nlayers: " << net.depth() << "\n";
    int nested_layers = 0;
    for (size_t l = 0; l < net.layers.size(); ++l) {
        LayerDiag diag = diagnose_layer(net.layers[l], cfg, static_cast<int>(l));
        if (diag.nested == 1) ++nested_layers;
        report_layer(out, static_cast<int>(l), diag);
    }
    result.metrics["nested_layers"] = nested_layers;
    result.metrics["layer_count"] = static_cast<double>(net.depth());

    PullbackOptions popts;
    popts.piece_budget = cfg.piece_budget;
    LayeredPreimage pre = net_preimage(net, cfg.target, popts, cfg.tols);
    for (size_t s = 0; s < pre.stages.size(); ++s) {
        out << "stage " << s << " pieces: " << pre.stages[s].size() << "\n";
        result.metrics["stage" + std::to_string(s) + "_pieces"] =
            static_cast<double>(pre.stages[s].size());
    }

    add_plane_elements(result.geometry, net, cfg.tols);
    add_stage_elements(result.geometry, pre.stages, ElementRole::Preimage, 0, cfg.tols);

    if (with_flow) {
        // Flow polylines: forward trajectories from sampled preimage points.
        for (const AffinePiece& piece : pre.input_pieces()) {
            const std::uint64_t seed =
                mix_seed(cfg.seed, 4000 + static_cast<std::uint64_t>(piece.id));
            for (const Vec& x : sample_piece(piece, 3, seed, cfg.box_radius, cfg.tols.membership)) {
                std::vector<Vec> acts = net_activations(net, x);
                for (size_t l = 0; l + 1 < acts.size(); ++l) {
                    if ((acts[l + 1] - acts[l]).norm() < 1e-9) continue;
                    ExportElement hop;
                    hop.kind = ElementKind::Segment;
                    hop.role = ElementRole::FlowLine;
                    hop.layer = static_cast<int>(l);
                    hop.piece = piece.id;
                    hop.vertices = {acts[l], acts[l + 1]};
                    result.geometry.elements.push_back(std::move(hop));
                }
            }
        }

        // Monte-Carlo coverage of the scene box: which fraction reaches the
        // target, and is every such draw inside some recovered piece?
        std::mt19937_64 rng(mix_seed(cfg.seed, 12345));
        std::uniform_real_distribution<double> unif(0.0, cfg.box_radius);
        int hits = 0, gaps = 0;
        for (int n = 0; n < cfg.mc_samples; ++n) {
            Vec x(cfg.dimension);
            for (int i = 0; i < cfg.dimension; ++i) x[i] = unif(rng);
            if ((net_forward(net, x) - cfg.target).lpNorm<Eigen::Infinity>() > 1e-6) continue;
            ++hits;
            bool covered = false;
            for (const AffinePiece& piece : pre.input_pieces()) {
                if (piece_contains(piece, x, 1e-6)) {
                    covered = true;
                    break;
                }
            }
            if (!covered) ++gaps;
        }
        const double fraction = static_cast<double>(hits) / std::max(1, cfg.mc_samples);
        out << "target coverage fraction of the scene box: " << num(fraction) << " ("
            << cfg.mc_samples << " samples)\n";
        result.metrics["coverage_fraction"] = fraction;
        result.metrics["coverage_gaps"] = gaps;
    }

    result.max_forward_residual = sampled_target_residual(net, pre.input_pieces(), cfg.target, cfg);
    result.metrics["max_residual"] = result.max_forward_residual;
    out << "max forward residual over sampled preimage points: "
        << num(result.max_forward_residual) << " (tolerance " << num(cfg.residual_tolerance)
        << ")\n";

    result.ok = result.max_forward_residual <= cfg.residual_tolerance;
    if (with_flow) result.ok = result.ok && result.metrics["coverage_gaps"] == 0.0;
    finish(result, out);
    return result;
}

ScenarioResult run_cells(const ScenarioConfig& cfg, const Network& net) {
    ScenarioResult result;
    result.geometry.dimension = cfg.dimension;
    result.geometry.box_radius = cfg.box_radius;

    std::ostringstream out;
    out << "scenario: " << cfg.name << "\n";
    out << "task: " << task_name(cfg.task) << "\n";
    out << "dimension: " << cfg.dimension << "\nlayers: " << net.depth() << "\n";

    int total_cells = 0;
    int total_contraction = 0;
    bool bound_ok = true;
    const double bound = std::pow(2.0, cfg.dimension);
    for (size_t l = 0; l < net.layers.size(); ++l) {
        const LayerMap& layer = net.layers[l];
        LayerDiag diag = diagnose_layer(layer, cfg, static_cast<int>(l));
        report_layer(out, static_cast<int>(l), diag);
        if (diag.contraction_violations > 0) total_contraction += diag.contraction_violations;

        std::set<SignPattern> cells =
            enumerate_cells(layer, cfg.box_radius, cfg.grid_resolution, cfg.tols.signature);
        out << "layer " << l << " cells: " << cells.size() << " (bound " << num(bound) << ")\n";
        total_cells += static_cast<int>(cells.size());
        if (static_cast<double>(cells.size()) > bound) bound_ok = false;

        // Cell-to-subspace table: which coordinate subspace the rectifier
        // sends each cell into.
        int cell_idx = 0;
        for (const SignPattern& pattern : cells) {
            int zeros = 0;
            std::string zero_set;
            for (size_t i = 0; i < pattern.size(); ++i) {
                if (pattern[i] != Sign::Plus) {
                    ++zeros;
                    if (!zero_set.empty()) zero_set += ",";
                    zero_set += std::to_string(i);
                }
            }
            out << "  cell " << pattern_string(pattern) << " -> image subspace dim "
                << (cfg.dimension - zeros) << " (zero set {" << zero_set << "})\n";
            ++cell_idx;
        }

        // Witness points for the export (small d only).
        if (cfg.dimension <= 8) {
            std::map<SignPattern, Vec> witness;
            const int steps = static_cast<int>(std::floor(cfg.box_radius / cfg.grid_resolution)) + 1;
            std::vector<int> idx(static_cast<size_t>(cfg.dimension), 0);
            while (true) {
                Vec x(cfg.dimension);
                for (int i = 0; i < cfg.dimension; ++i)
                    x[i] = std::min(idx[static_cast<size_t>(i)] * cfg.grid_resolution,
                                    cfg.box_radius);
                witness.emplace(collapse_zeros(cell_signature(layer, x, cfg.tols.signature)), x);
                int carry = 0;
                while (carry < cfg.dimension && ++idx[static_cast<size_t>(carry)] >= steps)
                    idx[static_cast<size_t>(carry++)] = 0;
                if (carry == cfg.dimension) break;
            }
            int w_idx = 0;
            for (const auto& [pattern, x] : witness) {
                ExportElement elem;
                elem.kind = ElementKind::Point;
                elem.role = ElementRole::Preimage;
                elem.layer = static_cast<int>(l);
                elem.piece = w_idx++;
                elem.vertices.push_back(x);
                result.geometry.elements.push_back(std::move(elem));
            }
        }
    }
    add_plane_elements(result.geometry, net, cfg.tols);

    result.metrics["cells"] = total_cells;
    result.metrics["cell_bound"] = bound * static_cast<double>(net.depth());
    result.metrics["contraction_violations_total"] = total_contraction;
    result.ok = bound_ok;
    finish(result, out);
    return result;
}

ScenarioResult run_nesting(const ScenarioConfig& cfg, const Network& net) {
    ScenarioResult result;
    result.geometry.dimension = cfg.dimension;
    result.geometry.box_radius = cfg.box_radius;

    std::ostringstream out;
    out << "scenario: " << cfg.name << "\n";
    out << "task: " << task_name(cfg.task) << "\n";
    out << "dimension: " << cfg.dimension << "\nlayers: " << net.depth() << "\n";
    int nested_layers = 0;
    for (size_t l = 0; l < net.layers.size(); ++l) {
        LayerDiag diag = diagnose_layer(net.layers[l], cfg, static_cast<int>(l));
        if (diag.nested == 1) ++nested_layers;
        report_layer(out, static_cast<int>(l), diag);
    }
    add_plane_elements(result.geometry, net, cfg.tols);
    result.metrics["nested_layers"] = nested_layers;
    result.metrics["layer_count"] = static_cast<double>(net.depth());
    result.ok = true;
    finish(result, out);
    return result;
}

ScenarioResult run_trace(const ScenarioConfig& cfg, const Network& net) {
    ScenarioResult result;
    result.geometry.dimension = cfg.dimension;
    result.geometry.box_radius = cfg.box_radius;

    std::ostringstream out;
    out << "scenario: " << cfg.name << "\n";
    out << "task: " << task_name(cfg.task) << "\n";
    out << "dimension: " << cfg.dimension << "\nlayers: " << net.depth() << "\n";

    AffineSubspace M =
        AffineSubspace::from_spanning(cfg.manifold_base, cfg.manifold_directions, cfg.tols);
    std::vector<AffineSubspace> targets{M};
    if (cfg.offset > 0.0) {
        Mat proj = Mat::Identity(cfg.dimension, cfg.dimension) -
                   M.directions * M.directions.transpose();
        Mat normals = orthonormalize_columns(proj, cfg.tols.eps_rank);
        if (normals.cols() == 0)
            throw ConfigError("manifold offset requires a manifold of dimension below the space");
        Vec n = normals.col(0);
        for (Eigen::Index i = 0; i < n.size(); ++i) {
            if (std::abs(n[i]) > 1e-12) {
                if (n[i] < 0) n = -n;
                break;
            }
        }
        targets.emplace_back(M.base + cfg.offset * n, M.directions);
    }

    PullbackOptions popts;
    popts.piece_budget = cfg.piece_budget;

    double worst_residual = 0.0;
    int continuity_failures = 0;
    std::vector<std::vector<Vec>> group_points(targets.size());
    for (size_t g = 0; g < targets.size(); ++g) {
        TraceResult trace = trace_manifold_detailed(net, targets[g], popts, cfg.tols);
        for (size_t s = 0; s < trace.stages.size(); ++s) {
            out << "group " << g << " stage " << s << " pieces: " << trace.stages[s].size()
                << "\n";
        }
        result.metrics[g == 0 ? "manifold_pieces" : "manifold_pieces_shifted"] =
            static_cast<double>(trace.manifold.pieces.size());
        if (g == 0)
            result.metrics["adjacency_count"] =
                static_cast<double>(trace.manifold.adjacency.size());

        // The traced pieces plus the target manifold itself.  The input-space
        // decomposition is the headline geometry; intermediate stages are kept
        // under the generic preimage role, and the seed stage is skipped because
        // the target subspace is drawn separately below.
        add_piece_elements(result.geometry, trace.stages.front(), ElementRole::ManifoldPiece,
                           static_cast<int>(g), cfg.tols);
        for (std::size_t stage = 1; stage + 1 < trace.stages.size(); ++stage)
            add_piece_elements(result.geometry, trace.stages[stage], ElementRole::Preimage,
                               static_cast<int>(g), cfg.tols);
        AffinePiece m_piece = make_subspace_piece(targets[g]);
        m_piece.layer = static_cast<int>(net.depth());
        for (ExportElement& elem :
             piece_elements(m_piece, ElementRole::Plane, cfg.box_radius, cfg.tols)) {
            elem.group = static_cast<int>(g);
            result.geometry.elements.push_back(std::move(elem));
        }

        // Pushforward residual of sampled piece points against the target.
        for (const AffinePiece& piece : trace.manifold.pieces) {
            const std::uint64_t seed =
                mix_seed(cfg.seed, 7000 + 131 * g + static_cast<std::uint64_t>(piece.id));
            for (const Vec& x : sample_piece(piece, cfg.samples_per_piece, seed, cfg.box_radius,
                                             cfg.tols.membership)) {
                worst_residual =
                    std::max(worst_residual, manifold_distance(targets[g], net_forward(net, x)));
                group_points[g].push_back(x);
            }
        }

        // Continuity: shared-boundary samples must belong to both neighbors.
        for (const PieceAdjacency& adj : trace.manifold.adjacency) {
            const std::uint64_t seed = mix_seed(cfg.seed, 9000 + 157 * g +
                                                              static_cast<std::uint64_t>(adj.a) *
                                                                  31 +
                                                              static_cast<std::uint64_t>(adj.b));
            for (const Vec& x :
                 sample_piece(adj.shared, 20, seed, cfg.box_radius, cfg.tols.membership)) {
                const AffinePiece& pa = trace.manifold.pieces[static_cast<size_t>(adj.a)];
                const AffinePiece& pb = trace.manifold.pieces[static_cast<size_t>(adj.b)];
                if (!piece_contains(pa, x, 1e-9) || !piece_contains(pb, x, 1e-9))
                    ++continuity_failures;
            }
        }
    }

    result.max_forward_residual = worst_residual;
    result.metrics["max_residual"] = worst_residual;
    result.metrics["continuity_failures"] = continuity_failures;
    out << "max pushforward distance to target manifold: " << num(worst_residual)
        << " (tolerance " << num(cfg.residual_tolerance) << ")\n";
    out << "continuity failures: " << continuity_failures << "\n";

    result.ok =
        worst_residual <= cfg.residual_tolerance && continuity_failures == 0;
    if (targets.size() == 2) {
        double min_dist = std::numeric_limits<double>::infinity();
        for (const Vec& p : group_points[0])
            for (const Vec& q : group_points[1]) min_dist = std::min(min_dist, (p - q).norm());
        result.metrics["min_pair_distance"] = min_dist;
        out << "minimum sampled distance between the two traced sets: " << num(min_dist) << "\n";
        result.ok = result.ok && min_dist > 1e-3;
    }
    finish(result, out);
    return result;
}

}  // namespace

std::string task_name(TaskKind task) {
    switch (task) {
        case TaskKind::Preimage: return "preimage";
        case TaskKind::Nesting: return "nesting";
        case TaskKind::ContractionFlow: return "contraction-flow";
        case TaskKind::ManifoldTrace: return "manifold-trace";
        case TaskKind::Cells: return "cells";
    }
    throw InvalidInput("task_name: unknown task");
}

TaskKind task_from_name(const std::string& name) {
    if (name == "preimage") return TaskKind::Preimage;
    if (name == "nesting") return TaskKind::Nesting;
    if (name == "contraction-flow" || name == "flow") return TaskKind::ContractionFlow;
    if (name == "manifold-trace" || name == "trace") return TaskKind::ManifoldTrace;
    if (name == "cells") return TaskKind::Cells;
    throw ConfigError("unknown task '" + name + "'");
}

Tolerances tolerances_from_env() {
    Tolerances tols;
    tols.eps_rank = env_override("RELUCONE_EPS_RANK", tols.eps_rank);
    tols.eps_solve = env_override("RELUCONE_EPS_SOLVE", tols.eps_solve);
    tols.membership = env_override("RELUCONE_MEMBERSHIP_TOL", tols.membership);
    return tols;
}

ScenarioConfig parse_scenario_text(const std::string& json_text) {
    json root;
    try {
        root = json::parse(json_text);
    } catch (const json::exception& ex) {
        throw ConfigError(std::string("scenario config: malformed JSON: ") + ex.what());
    }
    try {
        if (!root.is_object()) throw ConfigError("scenario config: top level must be an object");
        static const std::set<std::string> known{
            "schema",        "name",       "dimension",        "layers",
            "task",          "target",     "manifold",         "offset",
            "box_radius",    "grid_resolution", "mc_samples",  "samples_per_piece",
            "seed",          "piece_budget",    "residual_tolerance", "tolerances"};
        for (const auto& [key, value] : root.items()) {
            (void)value;
            if (known.find(key) == known.end())
                throw ConfigError("scenario config: unknown key '" + key + "'");
        }
        if (!root.contains("schema") || !root["schema"].is_number_integer() ||
            root["schema"].get<int>() != 1)
            throw ConfigError("scenario config: missing or unsupported schema (expected 1)");

        ScenarioConfig cfg;
        cfg.tols = tolerances_from_env();
        if (root.contains("name")) cfg.name = root["name"].get<std::string>();

        cfg.dimension = root.at("dimension").get<int>();
        if (cfg.dimension < kMinDim || cfg.dimension > kMaxDim)
            throw ConfigError("scenario config: dimension must lie in [" +
                              std::to_string(kMinDim) + ", " + std::to_string(kMaxDim) + "]");

        if (!root.contains("layers") || !root["layers"].is_array() || root["layers"].empty())
            throw ConfigError("scenario config: 'layers' must be a nonempty array");
        for (const json& jl : root["layers"]) {
            if (!jl.is_object() || !jl.contains("taps") || !jl.contains("bias"))
                throw ConfigError("scenario config: each layer needs 'taps' and 'bias'");
            ScenarioLayerSpec spec;
            Vec taps = parse_vec(jl["taps"], -1, "layer taps");
            if (taps.size() < 1 || taps.size() > cfg.dimension)
                throw ConfigError("scenario config: layer taps must have 1.." +
                                  std::to_string(cfg.dimension) + " entries");
            spec.taps.assign(taps.data(), taps.data() + taps.size());
            spec.bias = jl["bias"].get<double>();
            if (!std::isfinite(spec.bias))
                throw ConfigError("scenario config: layer bias must be finite");
            cfg.layers.push_back(std::move(spec));
        }

        cfg.task = task_from_name(root.at("task").get<std::string>());

        if (root.contains("target")) {
            cfg.target = parse_vec(root["target"], cfg.dimension, "target");
            if (cfg.target.minCoeff() < 0.0)
                throw ConfigError(
                    "scenario config: 'target' entries must be nonnegative (rectified "
                    "outputs cannot go below zero)");
        }
        if (root.contains("manifold")) {
            const json& jm = root["manifold"];
            if (!jm.is_object() || !jm.contains("base") || !jm.contains("directions"))
                throw ConfigError("scenario config: 'manifold' needs 'base' and 'directions'");
            cfg.manifold_base = parse_vec(jm["base"], cfg.dimension, "manifold base");
            const json& jd = jm["directions"];
            if (!jd.is_array() || jd.empty() || jd.size() > static_cast<size_t>(cfg.dimension))
                throw ConfigError("scenario config: manifold directions must be 1.." +
                                  std::to_string(cfg.dimension) + " vectors");
            cfg.manifold_directions.resize(cfg.dimension, static_cast<Eigen::Index>(jd.size()));
            for (size_t c = 0; c < jd.size(); ++c)
                cfg.manifold_directions.col(static_cast<Eigen::Index>(c)) =
                    parse_vec(jd[c], cfg.dimension, "manifold direction");
        }

        auto positive = [&](const char* key, double fallback) {
            if (!root.contains(key)) return fallback;
            const double v = root[key].get<double>();
            if (!std::isfinite(v) || v <= 0.0)
                throw ConfigError(std::string("scenario config: '") + key + "' must be positive");
            return v;
        };
        if (root.contains("offset")) {
            cfg.offset = root["offset"].get<double>();
            if (!std::isfinite(cfg.offset) || cfg.offset < 0.0)
                throw ConfigError("scenario config: 'offset' must be nonnegative");
        }
        cfg.box_radius = positive("box_radius", cfg.box_radius);
        cfg.grid_resolution = positive("grid_resolution", cfg.grid_resolution);
        cfg.mc_samples = static_cast<int>(positive("mc_samples", cfg.mc_samples));
        cfg.samples_per_piece =
            static_cast<int>(positive("samples_per_piece", cfg.samples_per_piece));
        cfg.residual_tolerance = positive("residual_tolerance", cfg.residual_tolerance);
        if (root.contains("seed")) cfg.seed = root["seed"].get<std::uint64_t>();
        if (root.contains("piece_budget"))
            cfg.piece_budget = static_cast<std::size_t>(
                positive("piece_budget", static_cast<double>(cfg.piece_budget)));

        if (root.contains("tolerances")) {
            const json& jt = root["tolerances"];
            if (!jt.is_object()) throw ConfigError("scenario config: 'tolerances' must be an object");
            static const std::set<std::string> known_tols{"eps_rank", "eps_solve", "membership"};
            for (const auto& [key, value] : jt.items()) {
                (void)value;
                if (known_tols.find(key) == known_tols.end())
                    throw ConfigError("scenario config: unknown tolerance key '" + key + "'");
            }
            auto tol_field = [&](const char* key, double fallback) {
                if (!jt.contains(key)) return fallback;
                const double v = jt[key].get<double>();
                if (!std::isfinite(v) || v <= 0.0)
                    throw ConfigError(std::string("scenario config: tolerance '") + key +
                                      "' must be positive");
                return v;
            };
            cfg.tols.eps_rank = tol_field("eps_rank", cfg.tols.eps_rank);
            cfg.tols.eps_solve = tol_field("eps_solve", cfg.tols.eps_solve);
            cfg.tols.membership = tol_field("membership", cfg.tols.membership);
        }

        if ((cfg.task == TaskKind::Preimage || cfg.task == TaskKind::ContractionFlow) &&
            cfg.target.size() == 0)
            throw ConfigError("scenario config: task '" + task_name(cfg.task) +
                              "' needs a 'target' vector");
        if (cfg.task == TaskKind::ManifoldTrace && cfg.manifold_base.size() == 0)
            throw ConfigError("scenario config: task 'manifold-trace' needs a 'manifold' block");
        return cfg;
    } catch (const json::exception& ex) {
        throw ConfigError(std::string("scenario config: ") + ex.what());
    }
}

ScenarioConfig load_scenario_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot open scenario config '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_scenario_text(buf.str());
}

namespace {

const char* kFig2 = R"json({
  "schema": 1,
  "name": "fig2-bias-only",
  "dimension": 2,
  "layers": [
    {"taps": [1, 0], "bias": -0.5},
    {"taps": [1, 0], "bias": -0.4},
    {"taps": [1, 0], "bias": -0.3}
  ],
  "task": "contraction-flow",
  "target": [0, 0],
  "box_radius": 1.5,
  "mc_samples": 4000,
  "seed": 7
})json";

const char* kFig3 = R"json({
  "schema": 1,
  "name": "fig3-identity",
  "dimension": 3,
  "layers": [{"taps": [1, 0, 0], "bias": -0.5}],
  "task": "cells",
  "box_radius": 2.0,
  "grid_resolution": 0.25,
  "seed": 3
})json";

const char* kFig4 = R"json({
  "schema": 1,
  "name": "fig4-triangle",
  "dimension": 3,
  "layers": [
    {"taps": [0.9, 0.05, 0.05], "bias": -0.1},
    {"taps": [0.9, 0.05, 0.05], "bias": -0.1},
    {"taps": [0.9, 0.05, 0.05], "bias": -0.1}
  ],
  "task": "manifold-trace",
  "manifold": {
    "base": [0.25, 0.25, 0.25],
    "directions": [[1, -1, 0], [1, 1, -2]]
  },
  "box_radius": 2.0,
  "samples_per_piece": 20,
  "seed": 11
})json";

const char* kFig4Sep = R"json({
  "schema": 1,
  "name": "fig4-separability",
  "dimension": 3,
  "layers": [
    {"taps": [0.9, 0.05, 0.05], "bias": -0.1},
    {"taps": [0.9, 0.05, 0.05], "bias": -0.1},
    {"taps": [0.9, 0.05, 0.05], "bias": -0.1}
  ],
  "task": "manifold-trace",
  "manifold": {
    "base": [0.25, 0.25, 0.25],
    "directions": [[1, -1, 0], [1, 1, -2]]
  },
  "offset": 0.2,
  "box_radius": 2.0,
  "samples_per_piece": 20,
  "seed": 11
})json";

}  // namespace

std::vector<std::string> bundled_scenario_names() {
    return {"fig2-bias-only", "fig3-identity", "fig4-triangle", "fig4-separability"};
}

ScenarioConfig bundled_scenario(const std::string& name) {
    if (name == "fig2-bias-only") return parse_scenario_text(kFig2);
    if (name == "fig3-identity") return parse_scenario_text(kFig3);
    if (name == "fig4-triangle") return parse_scenario_text(kFig4);
    if (name == "fig4-separability") return parse_scenario_text(kFig4Sep);
    throw ConfigError("unknown bundled scenario '" + name + "'");
}

Network build_network(const ScenarioConfig& config) {
    std::vector<LayerMap> layers;
    layers.reserve(config.layers.size());
    for (const ScenarioLayerSpec& spec : config.layers)
        layers.push_back(circulant_layer(Kernel{spec.taps, spec.bias}, config.dimension));
    return Network(std::move(layers));
}

ScenarioResult run_scenario(const ScenarioConfig& config) {
    Network net = build_network(config);
    switch (config.task) {
        case TaskKind::Preimage: return run_preimage_like(config, net, /*with_flow=*/false);
        case TaskKind::ContractionFlow: return run_preimage_like(config, net, /*with_flow=*/true);
        case TaskKind::Cells: return run_cells(config, net);
        case TaskKind::Nesting: return run_nesting(config, net);
        case TaskKind::ManifoldTrace: return run_trace(config, net);
    }
    throw InvalidInput("run_scenario: unknown task");
}

}  // namespace relucone
