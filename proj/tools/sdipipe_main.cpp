#include <cstdlib>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "sdipipe/error.hpp"
#include "sdipipe/pipeline.hpp"

using sdipipe::pipeline::PipelineConfig;

int main(int argc, char** argv) {
    CLI::App app{"sdipipe: device-location mobility metrics, social distancing index, and phase detection"};
    app.require_subcommand(1);

    std::string config_path;
    int threads = -1;
    app.add_option("-c,--config", config_path,
                   "pipeline config JSON (or set SDIPIPE_CONFIG)");
    app.add_option("--threads", threads, "max worker threads (0 = hardware)");

    struct Stage {
        const char* name;
        const char* help;
        void (*fn)(const PipelineConfig&);
    };
    const Stage stages[] = {
        {"synth", "generate a synthetic scenario (sightings, cases, ground truth)",
         sdipipe::pipeline::stage_synth},
        {"ingest", "parse and clean raw sightings", sdipipe::pipeline::stage_ingest},
        {"trips", "segment cleaned sightings into trips", sdipipe::pipeline::stage_trips},
        {"activities", "cluster stays, infer home/work zones", sdipipe::pipeline::stage_activities},
        {"weights", "county device weights and state trip-rate factors",
         sdipipe::pipeline::stage_weights},
        {"metrics", "daily population-weighted mobility metrics", sdipipe::pipeline::stage_metrics},
        {"sdi", "social distancing index and smoothing", sdipipe::pipeline::stage_sdi},
        {"phases", "ROC oscillator, inertia/fatigue detection, t-test",
         sdipipe::pipeline::stage_phases},
        {"cases", "COVID case ingestion and SDI join", sdipipe::pipeline::stage_cases},
        {"report", "render SVG report charts", sdipipe::pipeline::stage_report},
        {"all", "run every stage in order", sdipipe::pipeline::run_all},
    };
    for (const auto& s : stages) app.add_subcommand(s.name, s.help);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) ? 1 : 0;
    }

    if (config_path.empty()) {
        const char* env = std::getenv("SDIPIPE_CONFIG");
        if (env) config_path = env;
    }
    if (config_path.empty()) {
        std::cerr << "error: no config given (use --config or SDIPIPE_CONFIG)\n";
        return 1;
    }

    std::string chosen = app.get_subcommands().front()->get_name();
    try {
        PipelineConfig cfg = PipelineConfig::load(config_path);
        if (threads >= 0) cfg.threads = threads;
        for (const auto& s : stages) {
            if (chosen == s.name) {
                s.fn(cfg);
                return 0;
            }
        }
        std::cerr << "error: unknown stage " << chosen << "\n";
        return 1;
    } catch (const sdipipe::Error& e) {
        std::cerr << "error (" << chosen << "): " << e.what() << "\n";
        return int(e.kind());
    } catch (const std::exception& e) {
        std::cerr << "internal error (" << chosen << "): " << e.what() << "\n";
        return 3;
    }
}
