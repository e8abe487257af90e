// streamforge: deterministic emulation of distributed stream-processing
// pipelines. Runs GraphML-described experiments, parameter sweeps, and
// manages the bundled example scenarios.

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "streamforge/scenarios.hpp"
#include "streamforge/simulation.hpp"
#include "streamforge/sweep.hpp"

namespace fs = std::filesystem;
using namespace streamforge;

namespace {

fs::path resolve_spec(const std::string& spec_arg, const fs::path& out_dir) {
    if (scenarios::known(spec_arg)) {
        return scenarios::install(spec_arg, out_dir / ("scenario_" + spec_arg));
    }
    fs::path p(spec_arg);
    if (fs::is_directory(p)) return p / "experiment.graphml";
    return p;
}

void print_summary(const Summary& s) {
    for (const auto& [topic, t] : s.topics) {
        std::printf(
            "topic %-22s produced=%-6lld delivered=%-6lld lost=%-4lld dup=%-4lld "
            "in_flight=%-4lld latency ms mean/p50/p99 = %.2f/%.2f/%.2f\n",
            topic.c_str(), static_cast<long long>(t.produced),
            static_cast<long long>(t.delivered_unique), static_cast<long long>(t.lost),
            static_cast<long long>(t.duplicates), static_cast<long long>(t.in_flight),
            t.latency_mean_us / 1000.0, t.latency_p50_us / 1000.0, t.latency_p99_us / 1000.0);
    }
    for (const auto& [sink, v] : s.sinks) {
        std::printf("sink  %-22s samples=%-6lld e2e ms mean/p50/p99 = %.2f/%.2f/%.2f\n",
                    sink.c_str(), static_cast<long long>(v.samples), v.e2e_mean_us / 1000.0,
                    v.e2e_p50_us / 1000.0, v.e2e_p99_us / 1000.0);
    }
    if (s.offset_violations > 0) {
        std::printf("WARNING: %lld consumer offset monotonicity violations\n",
                    static_cast<long long>(s.offset_violations));
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"streamforge: deterministic stream-processing pipeline emulator"};
    app.require_subcommand(0, 1);

    std::string spec_arg;
    std::string out_arg = "./out";
    std::int64_t seed_override = -1;
    double duration_override = -1;
    std::string sweep_arg;
    std::int64_t port_sample_ms = 500;

    app.add_option("--spec", spec_arg,
                   "experiment GraphML file, scenario directory, or bundled scenario name");
    app.add_option("--out", out_arg, "output directory for exports")
        ->envname("STREAMFORGE_OUT");
    app.add_option("--seed", seed_override, "override the graph-level seed");
    app.add_option("--duration", duration_override, "override the run duration in seconds");
    app.add_option("--sweep", sweep_arg,
                   "run once per value: <attr>=<v1,v2,...> e.g. link:b1-sw1.lat=10,50,100,150");
    app.add_option("--port-sample-ms", port_sample_ms, "port counter sampling interval")
        ->check(CLI::PositiveNumber);

    auto* scenario_cmd = app.add_subcommand("scenario", "manage bundled example scenarios");
    auto* list_cmd = scenario_cmd->add_subcommand("list", "list bundled scenarios");
    auto* install_cmd =
        scenario_cmd->add_subcommand("install", "write a bundled scenario into a directory");
    std::string install_name, install_dir;
    install_cmd->add_option("name", install_name, "scenario name")->required();
    install_cmd->add_option("dir", install_dir, "destination directory")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (*list_cmd) {
            for (const auto& [name, desc] : scenarios::list()) {
                std::printf("%-12s %s\n", name.c_str(), desc.c_str());
            }
            return 0;
        }
        if (*install_cmd) {
            fs::path graphml = scenarios::install(install_name, install_dir);
            std::printf("installed %s -> %s\n", install_name.c_str(), graphml.string().c_str());
            return 0;
        }
        if (spec_arg.empty()) {
            std::cerr << "error: --spec is required (or use the scenario subcommand)\n";
            return 2;
        }

        fs::path out_dir(out_arg);
        fs::create_directories(out_dir);
        fs::path graphml = resolve_spec(spec_arg, out_dir);
        ExperimentSpec spec = load_experiment(graphml);
        if (seed_override >= 0) spec.seed = static_cast<std::uint64_t>(seed_override);
        if (duration_override > 0) spec.duration_us = us_from_seconds(duration_override);

        SimOptions opt;
        opt.port_sample_us = port_sample_ms * kUsPerMs;

        if (!sweep_arg.empty()) {
            auto eq = sweep_arg.find('=');
            if (eq == std::string::npos) {
                std::cerr << "error: --sweep expects <attr>=<v1,v2,...>\n";
                return 2;
            }
            std::string attr = sweep_arg.substr(0, eq);
            std::vector<std::string> values = split_list(sweep_arg.substr(eq + 1));
            std::vector<SweepResult> results = run_sweep(spec, attr, values, out_dir);
            for (const auto& r : results) {
                std::printf("== %s = %s -> %s\n", attr.c_str(), r.value.c_str(),
                            r.out_dir.string().c_str());
                print_summary(r.summary);
            }
            std::printf("combined summary: %s\n",
                        (out_dir / "sweep_summary.csv").string().c_str());
            return 0;
        }

        Simulation sim(std::move(spec), opt);
        sim.run();
        sim.export_all(out_dir);
        print_summary(sim.summarize());
        std::printf("exports written to %s\n", out_dir.string().c_str());
        return 0;
    } catch (const Error& e) {
        std::cerr << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
