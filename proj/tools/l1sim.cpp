// l1sim: batch front end for the L1 augmentation simulator.
//
//   l1sim run <scenario.json | --preset NAME> [--out DIR] [--law LAW] [--csv] [--plots]
//   l1sim presets
//   l1sim show-preset NAME
//
// Exit codes: 0 success, 2 invalid scenario or configuration, 3 divergence,
// 4 I/O failure, 1 anything else.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "l1ac/l1ac.hpp"

namespace fs = std::filesystem;

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitDivergence = 3;
constexpr int kExitIo = 4;

struct RunOptions {
    std::string scenario_file;
    std::string preset;
    std::string out_dir = ".";
    std::string law;
    bool csv = false;
    bool plots = false;
};

int do_run(const RunOptions& opt) {
    if (opt.scenario_file.empty() == opt.preset.empty()) {
        std::cerr << "l1sim run: give exactly one of a scenario file or --preset\n";
        return kExitConfig;
    }
    l1ac::Scenario scenario = opt.preset.empty() ? l1ac::load_scenario(opt.scenario_file)
                                                 : l1ac::make_preset(opt.preset);
    if (!opt.law.empty()) {
        const auto law = l1ac::parse_law(opt.law);
        if (!law) {
            throw l1ac::ConfigError("--law", "must be original, modified, matched-only or off");
        }
        scenario.laws = {*law};
        scenario.controller.law = *law;
        l1ac::validate_scenario(scenario);
    }

    const l1ac::ScenarioResult result = l1ac::run_scenario(scenario);

    // All files are written here, after every run has finished.
    const std::string report = l1ac::format_report(result);
    std::cout << report;
    if (!opt.csv && !opt.plots) {
        return 0;
    }
    const fs::path out(opt.out_dir);
    std::error_code ec;
    fs::create_directories(out, ec);
    if (ec) {
        throw l1ac::Error("cannot create output directory " + out.string() + ": " + ec.message());
    }
    {
        std::ofstream rep(out / (scenario.name + "_report.txt"));
        rep << report;
    }
    std::vector<l1ac::SimTrace> traces;
    for (const auto& run : result.runs) {
        traces.push_back(run.trace);
    }
    if (opt.csv) {
        for (const auto& tr : traces) {
            const fs::path p = out / (scenario.name + "_" + tr.label + ".csv");
            l1ac::emit_csv(tr, p);
            std::cout << "wrote " << p.string() << "\n";
        }
    }
    if (opt.plots) {
        const std::vector<l1ac::PlotGroup> groups{l1ac::PlotGroup::output,
                                                  l1ac::PlotGroup::adaptive};
        for (const auto& p : l1ac::emit_plots(traces, out, scenario.name, groups)) {
            std::cout << "wrote " << p.string() << "\n";
        }
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"L1 adaptive augmentation simulator (piecewise-constant update law)"};
    app.require_subcommand(1);

    RunOptions opt;
    auto* run = app.add_subcommand("run", "Run a scenario file or a built-in preset");
    run->add_option("scenario", opt.scenario_file, "Scenario file (JSON)");
    run->add_option("--preset", opt.preset, "Built-in preset name (see 'l1sim presets')");
    run->add_option("--out", opt.out_dir, "Output directory for CSV, plots and report");
    run->add_option("--law", opt.law, "Override the control law")
        ->check(CLI::IsMember({"original", "modified", "matched-only", "off"}));
    run->add_flag("--csv", opt.csv, "Write one CSV trace per run");
    run->add_flag("--plots", opt.plots, "Write SVG charts");

    auto* presets = app.add_subcommand("presets", "List built-in presets");

    std::string show_name;
    auto* show = app.add_subcommand("show-preset", "Print a preset as a scenario file");
    show->add_option("name", show_name, "Preset name")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (*presets) {
            for (const auto& name : l1ac::preset_names()) std::cout << name << "\n";
            return 0;
        }
        if (*show) {
            std::cout << l1ac::scenario_to_json(l1ac::make_preset(show_name)).dump(2) << "\n";
            return 0;
        }
        return do_run(opt);
    } catch (const l1ac::ConfigError& e) {
        std::cerr << "l1sim: invalid configuration: " << e.what() << "\n";
        return kExitConfig;
    } catch (const l1ac::DivergenceError& e) {
        std::cerr << "l1sim: " << e.what() << "\n";
        return kExitDivergence;
    } catch (const l1ac::NumericError& e) {
        std::cerr << "l1sim: numerical error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const std::filesystem::filesystem_error& e) {
        std::cerr << "l1sim: " << e.what() << "\n";
        return kExitIo;
    } catch (const std::exception& e) {
        std::cerr << "l1sim: " << e.what() << "\n";
        return 1;
    }
}
