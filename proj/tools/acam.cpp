// acam: design-space exploration CLI for analog CAM cells.
//
// Subcommands write CSV artifacts plus a JSON run manifest into the output
// directory. Identical config and seed produce byte-identical outputs.

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "acam/runner.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitNumerical = 3;
constexpr int kExitDrUnreachable = 4;

acam::json load_config_json(const std::string& path) {
    if (path.empty()) return acam::config_to_json(acam::ExperimentConfig{});
    std::ifstream in(path);
    if (!in) throw acam::ConfigError("cannot read config file: " + path);
    std::stringstream buf;
    buf << in.rdbuf();
    try {
        return acam::json::parse(buf.str());
    } catch (const acam::json::parse_error& e) {
        throw acam::ConfigError(std::string("config parse error: ") + e.what());
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"analog CAM design-space exploration toolkit"};
    app.require_subcommand(1);

    std::string config_path;
    std::string out_dir;
    std::vector<std::string> overrides;
    app.add_option("-c,--config", config_path, "JSON config file");
    app.add_option("-o,--out", out_dir, "output directory");
    app.add_option("--set", overrides,
                   "dotted-path override, e.g. --set supply.vdd=0.8");

    const std::vector<std::string> subs = {"vtc",     "lut",     "intervals",
                                           "row",     "dr",      "fom",
                                           "mc",      "corners", "latency",
                                           "energy",  "summary"};
    // global options may appear after the subcommand name
    for (const auto& name : subs) app.add_subcommand(name)->fallthrough();

    CLI11_PARSE(app, argc, argv);
    const std::string subcommand = app.get_subcommands().front()->get_name();

    try {
        acam::json j = load_config_json(config_path);
        for (const auto& o : overrides) acam::apply_override(j, o);
        const acam::ExperimentConfig cfg = acam::config_from_json(j);

        std::string dir = out_dir;
        if (dir.empty()) {
            const char* env = std::getenv("ACAM_OUT_DIR");
            dir = env ? env : cfg.out_dir;
        }

        acam::Runner runner(cfg, dir);
        const auto files = runner.run(subcommand);
        for (const auto& f : files) std::cout << dir << "/" << f << "\n";
        return kExitOk;
    } catch (const acam::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const acam::DrUnreachable& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitDrUnreachable;
    } catch (const std::exception& e) {
        std::cerr << "numerical error: " << e.what() << "\n";
        return kExitNumerical;
    }
}
