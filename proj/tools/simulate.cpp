#include <cstdint>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "nrv2x/config.hpp"
#include "nrv2x/engine.hpp"

int main(int argc, char** argv) {
    CLI::App app{"NR sidelink mode-2 system-level simulator"};

    std::string config_path;
    std::string out_dir = ".";
    std::uint64_t seed = 0;
    double duration = -1.0;
    bool seed_set = false;
    bool duration_set = false;

    app.add_option("--config", config_path, "Scenario configuration file (JSON)")
        ->required()
        ->check(CLI::ExistingFile);
    app.add_option("--out", out_dir, "Output directory for trace.csv, summary.json, "
                                     "cbr_timeseries.csv")
        ->required();
    app.add_option("--seed", seed, "Master seed override")->each([&](const std::string&) {
        seed_set = true;
    });
    app.add_option("--duration", duration, "Simulated seconds override")
        ->each([&](const std::string&) { duration_set = true; });

    CLI11_PARSE(app, argc, argv);

    try {
        nrv2x::SimConfig cfg = nrv2x::load_config(config_path);
        if (seed_set) cfg.seed = seed;
        if (duration_set) cfg.duration_s = duration;
        cfg.validate();
        return nrv2x::run_and_emit(cfg, out_dir);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
}
