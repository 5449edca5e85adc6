#include "relucone/export.hpp"
#include "relucone/scenario.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>

namespace {

struct CommonOpts {
    std::string config;
    std::string scenario;
    std::string out_dir = ".";
    std::string format = "json";
    std::string projection = "xy";
    std::uint64_t seed = 0;
    bool seed_given = false;
};

void attach_common(CLI::App* cmd, CommonOpts& opts) {
    cmd->add_option("--config", opts.config, "Path to a JSON scenario config");
    cmd->add_option("--scenario", opts.scenario, "Name of a bundled scenario (see `list`)");
    cmd->add_option("--seed", opts.seed, "Override the scenario seed")
        ->each([&opts](const std::string&) { opts.seed_given = true; });
    cmd->add_option("--out-dir", opts.out_dir, "Directory for exports and the report");
    cmd->add_option("--format", opts.format, "Geometry export format")
        ->check(CLI::IsMember({"json", "obj", "svg"}));
    cmd->add_option("--projection", opts.projection, "SVG projection")
        ->check(CLI::IsMember({"xy", "xz", "yz", "iso"}));
}

void write_file(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw relucone::Error("cannot open '" + path + "' for writing");
    out << text;
}

}  // namespace

int main(int argc, char** argv) {
    using namespace relucone;

    CLI::App app{"Exact preimages, polyhedral cones and manifold traces of rectifying layers"};
    app.require_subcommand(1);

    CommonOpts opts;
    TaskKind task = TaskKind::Preimage;
    bool do_list = false;

    auto add_task = [&](const char* name, const char* desc, TaskKind kind) {
        CLI::App* cmd = app.add_subcommand(name, desc);
        attach_common(cmd, opts);
        cmd->callback([&task, kind]() { task = kind; });
        return cmd;
    };
    add_task("preimage", "Recover the exact preimage of a target output", TaskKind::Preimage);
    add_task("nesting", "Cone diagnostics and nesting verdicts per layer", TaskKind::Nesting);
    add_task("flow", "Stage-by-stage preimages and contraction flow lines",
             TaskKind::ContractionFlow);
    add_task("trace", "Trace an affine output manifold back to the input space",
             TaskKind::ManifoldTrace);
    add_task("cells", "Enumerate arrangement cells and their image subspaces", TaskKind::Cells);
    app.add_subcommand("list", "List bundled scenarios")->callback([&do_list]() {
        do_list = true;
    });

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    if (do_list) {
        for (const std::string& name : bundled_scenario_names()) std::cout << name << "\n";
        return 0;
    }

    try {
        ScenarioConfig cfg;
        if (!opts.config.empty() && !opts.scenario.empty())
            throw ConfigError("pass either --config or --scenario, not both");
        if (!opts.config.empty())
            cfg = load_scenario_file(opts.config);
        else if (!opts.scenario.empty())
            cfg = bundled_scenario(opts.scenario);
        else
            throw ConfigError("a scenario is required: --config <file> or --scenario <name>");

        cfg.task = task;
        if (opts.seed_given) cfg.seed = opts.seed;
        if ((cfg.task == TaskKind::Preimage || cfg.task == TaskKind::ContractionFlow) &&
            cfg.target.size() == 0)
            throw ConfigError("task '" + task_name(cfg.task) + "' needs a 'target' in the config");
        if (cfg.task == TaskKind::ManifoldTrace && cfg.manifold_base.size() == 0)
            throw ConfigError("task 'manifold-trace' needs a 'manifold' block in the config");

        ScenarioResult result = run_scenario(cfg);

        std::filesystem::create_directories(opts.out_dir);
        const std::string base = opts.out_dir + "/" + cfg.name;
        if (opts.format == "json") {
            export_json(result.geometry, base + ".json");
        } else if (opts.format == "obj") {
            export_obj(result.geometry, base + ".obj");
        } else {
            export_svg(result.geometry, base + ".svg", opts.projection);
        }
        write_file(base + "-report.txt", result.report);
        std::cout << result.report;

        if (!result.ok) {
            std::cerr << "scenario assertions failed (see report above)\n";
            return 3;
        }
        return 0;
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    }
}
